"""Quantitative estimate of drug-likeness.

QED is the weighted geometric mean of eight desirability values, each a
double-sigmoid (ADS) transform of one property: molecular weight, Crippen
logP, H-bond acceptors, H-bond donors, polar surface area, rotatable
bonds, aromatic rings, and structural-alert count. ADS parameters and
weights ship in ``data/qed_params.tsv``; the alert patterns in
``data/alerts.txt``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

from ..chem.molecule import Molecule
from ..chem.smarts import PatternGraph, has_match, parse_smarts
from ..features import descriptor_vector
from .crippen import DataFileError, verify_checksum_header

QED_PROPERTIES = ("MW", "ALOGP", "HBA", "HBD", "PSA", "ROTB", "AROM", "ALERTS")


@dataclass(frozen=True)
class ADSParams:
    a: float
    b: float
    c: float
    d: float
    e: float
    f: float
    dmax: float


@dataclass(frozen=True)
class QEDParams:
    ads: dict[str, ADSParams]
    weights: dict[str, float]

    def __post_init__(self):
        for prop in QED_PROPERTIES:
            if prop not in self.ads or prop not in self.weights:
                raise DataFileError(f"missing QED parameters for {prop}")
            if self.ads[prop].dmax <= 0:
                raise DataFileError(f"dmax must be positive for {prop}")
            if self.weights[prop] <= 0:
                raise DataFileError(f"weight must be positive for {prop}")


def _parse_params(text: str, path_hint: str) -> QEDParams:
    ads = {}
    weights = {}
    for line in verify_checksum_header(text, path_hint):
        parts = line.split("\t")
        if len(parts) != 9:
            raise DataFileError(f"{path_hint}: bad row {line!r}")
        prop = parts[0]
        vals = [float(x) for x in parts[1:]]
        ads[prop] = ADSParams(*vals[:7])
        weights[prop] = vals[7]
    return QEDParams(ads, weights)


def load_qed_params(path: str) -> QEDParams:
    with open(path, "r", encoding="utf-8") as fh:
        return _parse_params(fh.read(), path)


_DEFAULT_PARAMS: QEDParams | None = None
_DEFAULT_ALERTS: list[PatternGraph] | None = None


def default_params() -> QEDParams:
    global _DEFAULT_PARAMS
    if _DEFAULT_PARAMS is None:
        text = (
            resources.files("pgfs.data").joinpath("qed_params.tsv").read_text("utf-8")
        )
        _DEFAULT_PARAMS = _parse_params(text, "qed_params.tsv")
    return _DEFAULT_PARAMS


def load_alerts(text: str, path_hint: str = "alerts") -> list[PatternGraph]:
    patterns = []
    for line in verify_checksum_header(text, path_hint):
        name, _, pattern = line.partition("\t")
        if not pattern:
            raise DataFileError(f"{path_hint}: bad row {line!r}")
        patterns.append(parse_smarts(pattern))
    return patterns


def default_alerts() -> list[PatternGraph]:
    global _DEFAULT_ALERTS
    if _DEFAULT_ALERTS is None:
        text = (
            resources.files("pgfs.data").joinpath("alerts.txt").read_text("utf-8")
        )
        _DEFAULT_ALERTS = load_alerts(text, "alerts.txt")
    return _DEFAULT_ALERTS


def alert_count(mol: Molecule, alerts: list[PatternGraph] | None = None) -> int:
    """Number of alert patterns with at least one match."""
    if alerts is None:
        alerts = default_alerts()
    cached = mol.cache_get("alerts")
    if cached is None:
        cached = sum(1 for p in alerts if has_match(p, mol))
        mol.cache_set("alerts", cached)
    return cached


def _logistic(z: float) -> float:
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


def ads(x: float, p: ADSParams) -> float:
    """Asymmetric double sigmoid."""
    rise = _logistic((x - p.c + p.d / 2.0) / p.e)
    fall = 1.0 - _logistic((x - p.c - p.d / 2.0) / p.f)
    return p.a + p.b * rise * fall


def qed_properties(
    mol: Molecule, alerts: list[PatternGraph] | None = None
) -> dict[str, float]:
    v = descriptor_vector(mol)
    return {
        "MW": v[0],
        "ALOGP": v[8],
        "HBA": v[5],
        "HBD": v[4],
        "PSA": v[10],
        "ROTB": v[6],
        "AROM": v[3],
        "ALERTS": float(alert_count(mol, alerts)),
    }


def qed(
    mol: Molecule,
    params: QEDParams | None = None,
    alerts: list[PatternGraph] | None = None,
) -> float:
    """Weighted geometric mean of normalized desirabilities, in (0, 1)."""
    if params is None:
        params = default_params()
    props = qed_properties(mol, alerts)
    num = 0.0
    den = 0.0
    for prop in QED_PROPERTIES:
        p = params.ads[prop]
        w = params.weights[prop]
        desirability = ads(props[prop], p) / p.dmax
        num += w * math.log(desirability)
        den += w
    return math.exp(num / den)
