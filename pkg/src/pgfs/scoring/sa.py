"""Corpus-derived synthetic-accessibility score in [1, 10].

The fragment table stores a centered log-frequency for every circular
environment (radius 0..2) seen in a reference corpus: common fragments get
positive contributions, rare ones negative. A molecule's fragment penalty
is the negated mean contribution of its own environments (environments
absent from the table count as the table minimum). A complexity penalty

    (n^1.005 - n) + log2(1 + ring_count) + macrocycle_term

with n = heavy atoms and macrocycle_term = 0 when the largest ring has at
most 8 atoms, else 1 + 0.25*(largest_ring - 9), is added, and the raw sum
is mapped affinely so the corpus's 5th percentile lands on 1 and the 95th
on 10, clipping to [1, 10].
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from ..chem.molecule import Molecule
from ..fingerprint import morgan_identifiers


@dataclass(frozen=True)
class FragmentTable:
    contributions: dict[int, float]
    min_contribution: float
    anchor_low: float  # raw score mapped to 1
    anchor_high: float  # raw score mapped to 10

    def __post_init__(self):
        if not self.contributions:
            raise ValueError("fragment table is empty")
        for v in self.contributions.values():
            if not math.isfinite(v):
                raise ValueError("non-finite fragment contribution")

    def to_text(self) -> str:
        """Deterministic text form with exact float round-trip."""
        lines = [
            "# sa-fragment-table v1",
            f"anchor_low\t{self.anchor_low!r}",
            f"anchor_high\t{self.anchor_high!r}",
            f"min_contribution\t{self.min_contribution!r}",
        ]
        for key in sorted(self.contributions):
            lines.append(f"{key}\t{self.contributions[key]!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "FragmentTable":
        lines = text.splitlines()
        if not lines or lines[0].strip() != "# sa-fragment-table v1":
            raise ValueError("not a fragment-table file (bad header)")
        scalars: dict[str, float] = {}
        contributions: dict[int, float] = {}
        for line in lines[1:]:
            line = line.strip()
            if not line:
                continue
            key, value = line.split("\t")
            if key in ("anchor_low", "anchor_high", "min_contribution"):
                scalars[key] = float(value)
            else:
                contributions[int(key)] = float(value)
        missing = {"anchor_low", "anchor_high", "min_contribution"} - set(scalars)
        if missing:
            raise ValueError(f"fragment-table file missing {sorted(missing)}")
        return cls(
            contributions=contributions,
            min_contribution=scalars["min_contribution"],
            anchor_low=scalars["anchor_low"],
            anchor_high=scalars["anchor_high"],
        )


def _complexity_penalty(mol: Molecule) -> float:
    n = len(mol.atoms)
    size_term = n**1.005 - n
    ring_term = math.log2(1 + len(mol.rings))
    largest = max((len(r) for r in mol.rings), default=0)
    macro_term = 0.0 if largest <= 8 else 1.0 + 0.25 * (largest - 9)
    return size_term + ring_term + macro_term


def _fragment_penalty(mol: Molecule, table: FragmentTable) -> float:
    ids = morgan_identifiers(mol)
    total = sum(
        table.contributions.get(h, table.min_contribution) for h in ids
    )
    return -total / len(ids)


def _raw_score(mol: Molecule, table: FragmentTable) -> float:
    return _fragment_penalty(mol, table) + _complexity_penalty(mol)


def build_sa_table(corpus: list[Molecule], min_corpus: int = 100) -> FragmentTable:
    """Fit the fragment table and percentile anchors on a corpus."""
    if len(corpus) < min_corpus:
        raise ValueError(
            f"synthetic-accessibility table needs >= {min_corpus} molecules, "
            f"got {len(corpus)}"
        )
    counts: Counter[int] = Counter()
    for mol in corpus:
        counts.update(morgan_identifiers(mol))
    log_counts = {h: math.log(c) for h, c in counts.items()}
    center = sum(log_counts.values()) / len(log_counts)
    contributions = {h: v - center for h, v in log_counts.items()}
    min_contribution = min(contributions.values())

    provisional = FragmentTable(contributions, min_contribution, 0.0, 1.0)
    raws = np.array([_raw_score(m, provisional) for m in corpus])
    low = float(np.percentile(raws, 5))
    high = float(np.percentile(raws, 95))
    if high <= low:
        high = low + 1.0  # degenerate corpus; keep the map well-defined
    return FragmentTable(contributions, min_contribution, low, high)


def sa_score(mol: Molecule, table: FragmentTable) -> float:
    raw = _raw_score(mol, table)
    scaled = 1.0 + 9.0 * (raw - table.anchor_low) / (
        table.anchor_high - table.anchor_low
    )
    return float(min(10.0, max(1.0, scaled)))
