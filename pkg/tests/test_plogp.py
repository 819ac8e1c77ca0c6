"""Penalized clogP: logP - SA score - large-ring penalty."""
from __future__ import annotations

import pytest

from pgfs.chem import parse_smiles
from pgfs.scoring import crippen_logp, penalized_clogp, ring_penalty, sa_score


def test_assembly(sa_table):
    mol = parse_smiles("CC(=O)Oc1ccccc1C(=O)O")
    expected = crippen_logp(mol) - sa_score(mol, sa_table) - ring_penalty(mol)
    assert penalized_clogp(mol, sa_table) == pytest.approx(expected, rel=1e-15)


def test_reference_values(sa_table):
    assert penalized_clogp(
        parse_smiles("CC(=O)Oc1ccccc1C(=O)O"), sa_table
    ) == pytest.approx(-5.7360295008855715, rel=1e-12)
    assert penalized_clogp(
        parse_smiles("CC(=O)Nc1ccc(O)cc1"), sa_table
    ) == pytest.approx(-8.606834527456538, rel=1e-12)


@pytest.mark.parametrize(
    "smiles,expected",
    [
        ("C", 0.0),  # no ring
        ("C1CCCCC1", 0.0),  # six-ring is free
        ("C1CCCCCC1", 1.0),  # seven-ring pays 1
        ("C1CCCCCCC1", 2.0),  # eight-ring pays 2
        ("C1CCCCC1C1CCCCCC1", 1.0),  # largest ring (the 7-ring) decides
    ],
)
def test_ring_penalty(smiles, expected):
    assert ring_penalty(parse_smiles(smiles)) == expected


def test_long_alkane_beats_decorated_ring(sa_table):
    # plogp famously rewards greasy chains; the engine must reproduce the
    # ordering logP-up, SA-down, rings-penalized
    chain = penalized_clogp(parse_smiles("C" * 20), sa_table)
    ringy = penalized_clogp(parse_smiles("OC1CCCCCCC1O"), sa_table)
    assert chain > ringy
