"""Shared construction pipeline: raw atoms/bonds -> validated Molecule.

Both the SMILES parser and template application funnel through
``finalize_molecule``: structural validation, ring perception, aromaticity
perception from kekule orders, then valence validation. Implicit hydrogens
must already be resolved by the caller.
"""

from __future__ import annotations

from .aromaticity import perceive_aromaticity
from .molecule import (
    Atom,
    Bond,
    Molecule,
    ValenceError,
    permitted_valences,
    validate_structure,
    validate_valences,
)
from .rings import sssr

__all__ = ["finalize_molecule", "fill_implicit_h"]


def fill_implicit_h(element: int, charge: int, explicit_valence: int) -> int:
    """Hydrogens needed to reach the smallest permitted valence >= the
    explicit valence. Raises ValenceError when the explicit valence already
    exceeds every permitted value."""
    for v in permitted_valences(element, charge):
        if v >= explicit_valence:
            return v - explicit_valence
    raise ValenceError(
        f"explicit valence {explicit_valence} exceeds permitted values for "
        f"element {element} charge {charge:+d}"
    )


def finalize_molecule(
    atoms: list[Atom],
    bonds: list[Bond],
    stereo_stripped: bool = False,
) -> Molecule:
    """Validate, perceive rings and aromaticity, and freeze a Molecule.

    Mutates the passed atoms/bonds (ring flags, aromatic flags) before
    wrapping them; callers hand over ownership.
    """
    validate_structure(atoms, bonds)

    nbrs: list[list[tuple[int, int]]] = [[] for _ in atoms]
    for bidx, bond in enumerate(bonds):
        nbrs[bond.a].append((bond.b, bidx))
        nbrs[bond.b].append((bond.a, bidx))

    rings = sssr(len(atoms), bonds, nbrs)

    ring_bond_ids: set[int] = set()
    bond_lookup = {bond.key(): bidx for bidx, bond in enumerate(bonds)}
    ring_atom_ids: set[int] = set()
    for ring in rings:
        ring_atom_ids.update(ring)
        for i in range(len(ring)):
            a, b = ring[i], ring[(i + 1) % len(ring)]
            ring_bond_ids.add(bond_lookup[(a, b) if a < b else (b, a)])
    for idx, atom in enumerate(atoms):
        atom.in_ring = idx in ring_atom_ids

    perceive_aromaticity(atoms, bonds, rings, nbrs)

    mol = Molecule(atoms, bonds, rings, frozenset(ring_bond_ids), stereo_stripped)
    validate_valences(mol)
    return mol
