"""Molecular descriptors and action-space normalization.

The 16-dimensional descriptor vector is the continuous action space: the
policy emits a point in the normalized descriptor cube and the environment
resolves it to the nearest real reactant.  Ordering is part of the public
contract (NormStats files record it by name).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chem.molecule import BondOrder, Molecule, atomic_mass
from .fingerprint import (
    FP_BITS,
    FP_RADIUS,
    morgan_fingerprint,
    morgan_identifiers,
)
from .scoring.crippen import crippen_logp, crippen_mr
from .scoring._tpsa import tpsa

__all__ = [
    "DESCRIPTOR_NAMES",
    "FP_BITS",
    "FP_RADIUS",
    "NormStats",
    "balaban_j",
    "bertz_complexity",
    "descriptor_vector",
    "fit_normalizer",
    "morgan_fingerprint",
    "morgan_identifiers",
    "normalize",
]

DESCRIPTOR_NAMES = (
    "mol_weight",
    "heavy_atoms",
    "ring_count",
    "aromatic_rings",
    "hbd",
    "hba",
    "rotatable_bonds",
    "fraction_csp3",
    "crippen_logp",
    "crippen_mr",
    "tpsa",
    "balaban_j",
    "bertz_complexity",
    "largest_ring",
    "heteroatom_fraction",
    "net_charge",
)

N_DESCRIPTORS = len(DESCRIPTOR_NAMES)


def _is_amide_nitrogen(mol: Molecule, idx: int) -> bool:
    """N single-bonded to a carbon that carries a double bond to O."""
    for nbr, bidx in mol.neighbors[idx]:
        if mol.atoms[nbr].element != 6:
            continue
        if mol.bonds[bidx].effective_order != BondOrder.SINGLE:
            continue
        for nbr2, bidx2 in mol.neighbors[nbr]:
            if (
                mol.atoms[nbr2].element == 8
                and mol.bonds[bidx2].effective_order == BondOrder.DOUBLE
            ):
                return True
    return False


def _is_pyrrole_type_nitrogen(mol: Molecule, idx: int) -> bool:
    """Aromatic N donating its lone pair into the ring (bears H or three
    connections), as in pyrrole or N-methylimidazole's substituted N."""
    atom = mol.atoms[idx]
    return atom.aromatic and (atom.implicit_h > 0 or len(mol.neighbors[idx]) == 3)


def _aromatic_ring_count(mol: Molecule) -> int:
    count = 0
    for ring in mol.rings:
        if all(mol.atoms[i].aromatic for i in ring):
            count += 1
    return count


def _rotatable_bonds(mol: Molecule) -> int:
    count = 0
    for bidx, bond in enumerate(mol.bonds):
        if bond.effective_order != BondOrder.SINGLE or bidx in mol.ring_bonds:
            continue
        if len(mol.neighbors[bond.a]) < 2 or len(mol.neighbors[bond.b]) < 2:
            continue
        # amide C-N exclusion, both orientations
        skip = False
        for c, nn in ((bond.a, bond.b), (bond.b, bond.a)):
            if mol.atoms[c].element == 6 and mol.atoms[nn].element == 7:
                for nbr2, bidx2 in mol.neighbors[c]:
                    if (
                        mol.atoms[nbr2].element == 8
                        and mol.bonds[bidx2].effective_order == BondOrder.DOUBLE
                    ):
                        skip = True
        if not skip:
            count += 1
    return count


def _fraction_csp3(mol: Molecule) -> float:
    carbons = 0
    sp3 = 0
    for idx, atom in enumerate(mol.atoms):
        if atom.element != 6:
            continue
        carbons += 1
        if atom.aromatic:
            continue
        if all(
            mol.bonds[bidx].effective_order == BondOrder.SINGLE
            for _, bidx in mol.neighbors[idx]
        ):
            sp3 += 1
    return sp3 / carbons if carbons else 0.0


def balaban_j(mol: Molecule) -> float:
    """Balaban's J index, summed over connected components.

    J = q/(mu+1) * sum over edges (s_i * s_j)^(-1/2) with q = edge count,
    mu = cyclomatic number, s_i = distance sum of atom i, all within the
    component.
    """
    dist = mol.distance_matrix()
    total = 0.0
    for comp in mol.components():
        if len(comp) < 2:
            continue
        comp_set = set(comp)
        edges = [
            b for b in mol.bonds if b.a in comp_set and b.b in comp_set
        ]
        q = len(edges)
        if q == 0:
            continue
        mu = q - len(comp) + 1
        comp_list = list(comp)
        s = {i: int(dist[i, comp_list].sum()) for i in comp}
        acc = 0.0
        for b in edges:
            acc += 1.0 / np.sqrt(s[b.a] * s[b.b])
        total += q / (mu + 1.0) * acc
    return total


def bertz_complexity(mol: Molecule) -> float:
    """Bond-type multiset entropy surrogate.

    With N bonds partitioned into groups of size n_k by the key
    (sorted endpoint elements, effective bond order), the value is
    N*log2(N) - sum_k n_k*log2(n_k); 0 for molecules with no bonds.
    """
    if not mol.bonds:
        return 0.0
    groups: dict[tuple, int] = {}
    for bond in mol.bonds:
        ea = mol.atoms[bond.a].element
        eb = mol.atoms[bond.b].element
        key = (min(ea, eb), max(ea, eb), int(bond.effective_order))
        groups[key] = groups.get(key, 0) + 1
    n = float(len(mol.bonds))
    value = n * np.log2(n)
    for n_k in groups.values():
        value -= n_k * np.log2(n_k)
    return float(value)


def descriptor_vector(mol: Molecule) -> np.ndarray:
    """Raw (unnormalized) descriptor vector in registry order."""
    cached = mol.cache_get("descr")
    if cached is not None:
        return cached
    heavy = len(mol.atoms)
    mw = sum(
        atomic_mass(a.element) + a.implicit_h * atomic_mass(1) for a in mol.atoms
    )
    hbd = sum(
        1 for a in mol.atoms if a.element in (7, 8) and a.implicit_h >= 1
    )
    hba = 0
    for idx, a in enumerate(mol.atoms):
        if a.element not in (7, 8):
            continue
        if a.element == 7 and (
            _is_pyrrole_type_nitrogen(mol, idx) or _is_amide_nitrogen(mol, idx)
        ):
            continue
        hba += 1
    hetero = sum(1 for a in mol.atoms if a.element != 6)
    vec = np.array(
        [
            mw,
            float(heavy),
            float(len(mol.rings)),
            float(_aromatic_ring_count(mol)),
            float(hbd),
            float(hba),
            float(_rotatable_bonds(mol)),
            _fraction_csp3(mol),
            crippen_logp(mol),
            crippen_mr(mol),
            tpsa(mol),
            balaban_j(mol),
            bertz_complexity(mol),
            float(max((len(r) for r in mol.rings), default=0)),
            hetero / heavy if heavy else 0.0,
            float(sum(a.charge for a in mol.atoms)),
        ],
        dtype=np.float64,
    )
    vec.setflags(write=False)
    mol.cache_set("descr", vec)
    return vec


@dataclass(frozen=True)
class NormStats:
    """Per-descriptor min/max over a reference corpus."""

    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        if self.mins.shape != self.maxs.shape:
            raise ValueError("min/max shape mismatch")
        if np.any(self.maxs < self.mins):
            raise ValueError("max < min in normalization stats")

    @property
    def degenerate(self) -> np.ndarray:
        return self.maxs == self.mins

    def to_text(self) -> str:
        lines = ["# descriptor\tmin\tmax"]
        for name, lo, hi in zip(DESCRIPTOR_NAMES, self.mins, self.maxs):
            # plain-float repr round-trips exactly; numpy scalar repr does not
            lines.append(f"{name}\t{float(lo)!r}\t{float(hi)!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "NormStats":
        mins, maxs = [], []
        names = []
        for line in text.splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            name, lo, hi = line.split("\t")
            names.append(name)
            mins.append(float(lo))
            maxs.append(float(hi))
        if tuple(names) != DESCRIPTOR_NAMES:
            raise ValueError("descriptor registry mismatch in stats file")
        return cls(np.array(mins), np.array(maxs))


def fit_normalizer(corpus: list[Molecule]) -> NormStats:
    if not corpus:
        raise ValueError("cannot fit normalizer on an empty corpus")
    mat = np.stack([descriptor_vector(m) for m in corpus])
    return NormStats(mins=mat.min(axis=0), maxs=mat.max(axis=0))


def normalize(vec: np.ndarray, stats: NormStats) -> np.ndarray:
    """Min-max map to [-1, 1]; out-of-range clipped; degenerate dims -> 0."""
    span = stats.maxs - stats.mins
    safe = np.where(stats.degenerate, 1.0, span)
    out = 2.0 * (vec - stats.mins) / safe - 1.0
    out = np.where(stats.degenerate, 0.0, out)
    return np.clip(out, -1.0, 1.0)
