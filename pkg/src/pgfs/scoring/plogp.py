"""Penalized clogP: logP minus synthetic-accessibility minus ring penalty."""

from __future__ import annotations

from ..chem.molecule import Molecule
from .crippen import crippen_logp
from .sa import FragmentTable, sa_score


def ring_penalty(mol: Molecule) -> float:
    largest = max((len(r) for r in mol.rings), default=0)
    return float(max(0, largest - 6))


def penalized_clogp(mol: Molecule, table: FragmentTable) -> float:
    return crippen_logp(mol) - sa_score(mol, table) - ring_penalty(mol)
