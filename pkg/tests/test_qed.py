"""Quantitative drug-likeness score.

Frozen reference values were produced by evaluating the weighted-geometric-
mean formula by hand over the eight property desirabilities (asymmetric
double sigmoids with the published parameter rows) for molecules whose
property values are themselves checked in test_features/test_crippen.
"""
from __future__ import annotations

import math

import pytest

from pgfs.chem import parse_smiles
from pgfs.scoring import (
    DataFileError,
    ads,
    alert_count,
    default_alerts,
    default_params,
    load_qed_params,
    qed,
    qed_properties,
)
from pgfs.config import data_root


@pytest.mark.parametrize(
    "smiles,expected",
    [
        ("CC(=O)Oc1ccccc1C(=O)O", 0.7715474205482539),  # aspirin
        ("CC(=O)Nc1ccc(O)cc1", 0.6360784720330075),  # paracetamol
        ("c1ccccc1", 0.44262837185308773),
        ("C", 0.359784937846184),
        ("CCO", 0.4068079656173921),
        ("Oc1ccccc1", 0.5147295447208348),
        ("c1ccncc1", 0.45314796543691366),
    ],
)
def test_reference_values(smiles, expected):
    assert qed(parse_smiles(smiles)) == pytest.approx(expected, rel=1e-12)


def test_score_bounded():
    for smiles in ("C", "CC(=O)Oc1ccccc1C(=O)O", "[NH4+]", "O.O.C"):
        value = qed(parse_smiles(smiles))
        assert 0.0 < value < 1.0


def test_aspirin_property_breakdown():
    props = qed_properties(parse_smiles("CC(=O)Oc1ccccc1C(=O)O"))
    assert props["MW"] == pytest.approx(180.159, abs=1e-3)
    assert props["ALOGP"] == pytest.approx(1.9474, abs=1e-4)
    assert props["HBA"] == 4.0
    assert props["HBD"] == 1.0
    assert props["PSA"] == pytest.approx(63.60, abs=1e-9)
    assert props["ROTB"] == 3.0
    assert props["AROM"] == 1.0
    assert props["ALERTS"] == 0.0


def test_qed_matches_manual_geometric_mean():
    params = default_params()
    mol = parse_smiles("CC(=O)Nc1ccc(O)cc1")
    props = qed_properties(mol)
    num = den = 0.0
    for prop, x in props.items():
        p = params.ads[prop]
        w = params.weights[prop]
        num += w * math.log(ads(x, p) / p.dmax)
        den += w
    assert qed(mol) == pytest.approx(math.exp(num / den), rel=1e-15)


def test_ads_peak_is_dmax_scaled():
    # the desirability peaks near c and never exceeds dmax by construction
    params = default_params()
    p = params.ads["MW"]
    peak = ads(p.c, p)
    assert 0 < peak <= p.dmax * (1 + 1e-9)
    assert ads(p.c + 1000.0, p) < peak
    assert ads(p.c - 1000.0, p) < peak


def test_alert_counting():
    # nitro group is a classic structural alert
    assert alert_count(parse_smiles("[O-][N+](=O)c1ccccc1")) >= 1
    assert alert_count(parse_smiles("CCO")) == 0
    assert len(default_alerts()) > 10


def test_alerts_lower_the_score():
    # same structure scored with and without the alert catalogue; fresh
    # molecule objects because the alert count is cached per molecule
    flagged = qed(parse_smiles("[O-][N+](=O)c1ccccc1"))
    unflagged = qed(parse_smiles("[O-][N+](=O)c1ccccc1"), alerts=[])
    assert flagged < unflagged


def test_load_params_from_bundled_file():
    params = load_qed_params(str(data_root() / "qed_params.tsv"))
    mol = parse_smiles("CC(=O)Oc1ccccc1C(=O)O")
    assert qed(mol, params) == qed(mol)


def test_corrupted_params_rejected(tmp_path):
    source = (data_root() / "qed_params.tsv").read_text()
    bad = tmp_path / "qed_params.tsv"
    bad.write_text(source.replace("MW", "WM", 1))
    with pytest.raises(DataFileError):
        load_qed_params(str(bad))
