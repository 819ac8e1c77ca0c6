"""Scorer selection: one string picks the reward function.

Specs: ``qed`` (drug-likeness, bounded (0,1)), ``plogp`` (penalized Crippen
logP, unbounded), or ``external:<command>`` (line-protocol subprocess).  Each
scorer carries the floor reward used when every candidate reaction in a step
fails — 0 suits bounded scores, a large negative value suits penalized logP.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..chem import Molecule, write_smiles
from .external import ExternalScorer
from .plogp import penalized_clogp
from ._qed import default_alerts, default_params, qed
from .sa import FragmentTable

__all__ = ["Scorer", "make_scorer"]


@dataclass
class Scorer:
    """A named batch scorer with its failure-floor reward."""

    name: str
    floor: float
    fn: Callable[[Sequence[Molecule]], np.ndarray]
    close: Callable[[], None] = lambda: None

    def __call__(self, mols: Sequence[Molecule]) -> np.ndarray:
        out = np.asarray(self.fn(mols), dtype=np.float64)
        if not np.all(np.isfinite(out)):
            raise ValueError(f"scorer {self.name} produced non-finite values")
        return out


def make_scorer(
    spec: str,
    *,
    sa_table: FragmentTable | None = None,
    floor: float | None = None,
) -> Scorer:
    """Build the scorer named by ``spec``.

    ``floor`` overrides the per-scorer default floor reward.  ``plogp``
    requires the corpus-derived fragment table.
    """
    if spec == "qed":
        params = default_params()
        alerts = default_alerts()

        def qed_batch(mols: Sequence[Molecule]) -> np.ndarray:
            return np.array([qed(m, params, alerts) for m in mols])

        return Scorer("qed", 0.0 if floor is None else floor, qed_batch)

    if spec == "plogp":
        if sa_table is None:
            raise ValueError("plogp scorer needs a corpus-derived SA table")

        def plogp_batch(mols: Sequence[Molecule]) -> np.ndarray:
            return np.array([penalized_clogp(m, sa_table) for m in mols])

        return Scorer("plogp", -15.0 if floor is None else floor, plogp_batch)

    if spec.startswith("external:"):
        command = spec.partition(":")[2].strip()
        if not command:
            raise ValueError("external scorer spec has an empty command")
        effective_floor = 0.0 if floor is None else floor
        client = ExternalScorer(command, floor=effective_floor)

        def external_batch(mols: Sequence[Molecule]) -> np.ndarray:
            return np.array(client.score([write_smiles(m) for m in mols]))

        return Scorer("external", effective_floor, external_batch, client.close)

    raise ValueError(
        f"unknown scorer spec {spec!r}: expected qed, plogp, or external:<command>"
    )
