"""Synthetic-accessibility score and its fragment table."""
from __future__ import annotations

import pytest

from pgfs.chem import parse_smiles
from pgfs.scoring import FragmentTable, build_sa_table, sa_score


def test_bundled_table_anchors(sa_table):
    assert sa_table.anchor_low == pytest.approx(-2.8012702266917087, rel=1e-15)
    assert sa_table.anchor_high == pytest.approx(-0.7664151845187088, rel=1e-15)
    assert sa_table.min_contribution == pytest.approx(-0.8501831481854399, rel=1e-15)
    assert len(sa_table.contributions) > 1000


def test_text_round_trip(sa_table):
    back = FragmentTable.from_text(sa_table.to_text())
    assert back == sa_table
    # and the text form is a fixed point
    assert back.to_text() == sa_table.to_text()


def test_from_text_rejects_bad_header(sa_table):
    body = sa_table.to_text().splitlines()[1:]
    with pytest.raises(ValueError):
        FragmentTable.from_text("\n".join(body))


def test_from_text_rejects_missing_scalars(sa_table):
    lines = [
        line
        for line in sa_table.to_text().splitlines()
        if not line.startswith("anchor_low")
    ]
    with pytest.raises(ValueError):
        FragmentTable.from_text("\n".join(lines) + "\n")


def test_score_bounded(sa_table):
    for smiles in ("C", "CCO", "c1ccccc1", "CC(=O)Oc1ccccc1C(=O)O"):
        value = sa_score(parse_smiles(smiles), sa_table)
        assert 1.0 <= value <= 10.0


def test_reference_values(sa_table):
    assert sa_score(parse_smiles("CC(=O)Oc1ccccc1C(=O)O"), sa_table) == pytest.approx(
        7.6834295008855715, rel=1e-12
    )
    assert sa_score(parse_smiles("CC(=O)Nc1ccc(O)cc1"), sa_table) == pytest.approx(
        9.957434527456538, rel=1e-12
    )


def test_corpus_fragments_score_easier_than_unseen(blocks, sa_table):
    # a molecule built from corpus-frequent environments should sit below
    # an exotic fused cage whose fragments all fall back to the rare floor
    common = sa_score(parse_smiles("CCO"), sa_table)
    exotic = sa_score(parse_smiles("C1CC2CCC1CC2"), sa_table)
    assert common < exotic


def test_macrocycle_penalty_monotone(sa_table):
    # growing the largest ring beyond 8 must never lower the score
    sizes = [8, 10, 12, 16]
    scores = [
        sa_score(parse_smiles("C1" + "C" * (n - 1) + "1"), sa_table)
        for n in sizes
    ]
    for small, big in zip(scores, scores[1:]):
        assert big >= small


def test_build_requires_minimum_corpus():
    mols = [parse_smiles("CCO")] * 5
    with pytest.raises(ValueError):
        build_sa_table(mols, min_corpus=100)


def test_build_from_corpus_matches_bundled(blocks, sa_table):
    rebuilt = build_sa_table([rec.mol for rec in blocks])
    assert rebuilt == sa_table


def test_empty_table_rejected():
    with pytest.raises(ValueError):
        FragmentTable(
            contributions={},
            min_contribution=0.0,
            anchor_low=0.0,
            anchor_high=1.0,
        )
