"""Canonical atom ranking by iterative neighborhood refinement.

Atoms start from a rich local invariant (element, charge, H count, degree,
ring membership, aromaticity, incident bond orders, distance sum) and are
repeatedly re-ranked by their neighbors' ranks until the partition stops
splitting. Remaining ties are broken by individualizing one atom of the
smallest tied class and refining again; members of a refinement class are
almost always graph automorphs for molecule-like graphs, so the choice does
not affect the canonical string (enforced empirically by the permutation
tests).
"""

from __future__ import annotations

from .molecule import Molecule

__all__ = ["canonical_ranks", "canonical_order"]


def _initial_keys(mol: Molecule) -> list[tuple]:
    dist = mol.distance_matrix()
    keys = []
    for idx, atom in enumerate(mol.atoms):
        row = dist[idx]
        distsum = int(row[row >= 0].sum())
        orders = tuple(sorted(int(mol.bonds[b].effective_order) for _, b in mol.neighbors[idx]))
        keys.append(
            (
                atom.element,
                atom.charge,
                atom.implicit_h,
                int(atom.aromatic),
                len(mol.neighbors[idx]),
                int(atom.in_ring),
                orders,
                distsum,
            )
        )
    return keys


def _dense_ranks(keys: list) -> list[int]:
    order = sorted(range(len(keys)), key=lambda i: keys[i])
    ranks = [0] * len(keys)
    rank = 0
    for pos, idx in enumerate(order):
        if pos > 0 and keys[idx] != keys[order[pos - 1]]:
            rank += 1
        ranks[idx] = rank
    return ranks


def _refine(mol: Molecule, ranks: list[int]) -> list[int]:
    n = len(ranks)
    n_classes = len(set(ranks))
    while True:
        keys = []
        for idx in range(n):
            nbr_sig = tuple(
                sorted(
                    (int(mol.bonds[b].effective_order), ranks[nbr])
                    for nbr, b in mol.neighbors[idx]
                )
            )
            keys.append((ranks[idx], nbr_sig))
        new_ranks = _dense_ranks(keys)
        new_n = len(set(new_ranks))
        if new_n == n_classes:
            return new_ranks
        ranks = new_ranks
        n_classes = new_n


def canonical_ranks(mol: Molecule) -> list[int]:
    """Permutation-invariant dense ranks, one distinct rank per atom."""
    cached = mol.cache_get("canon_ranks")
    if cached is not None:
        return cached

    n = len(mol.atoms)
    ranks = _refine(mol, _dense_ranks(_initial_keys(mol)))

    while len(set(ranks)) < n:
        by_rank: dict[int, list[int]] = {}
        for idx, r in enumerate(ranks):
            by_rank.setdefault(r, []).append(idx)
        tied = [(len(v), r, v) for r, v in by_rank.items() if len(v) > 1]
        tied.sort()
        _, _, members = tied[0]
        chosen = members[0]
        keys = [(ranks[i], 0 if i == chosen else 1) for i in range(n)]
        ranks = _refine(mol, _dense_ranks(keys))

    mol.cache_set("canon_ranks", ranks)
    return ranks


def canonical_order(mol: Molecule) -> list[int]:
    """Atom indices sorted by canonical rank (old index at each new slot)."""
    ranks = canonical_ranks(mol)
    return sorted(range(len(ranks)), key=lambda i: ranks[i])
