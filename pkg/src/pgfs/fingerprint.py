"""Morgan (circular/ECFP-style) fingerprints.

States are 1024-bit Morgan fingerprints of radius 2: every atom-centred
environment up to the radius is hashed to a bit, with duplicate environments
(identical bond sets) collapsed first.  Kept free of scoring imports so the
fragment-frequency scorer can reuse the raw identifiers.
"""

from __future__ import annotations

import numpy as np

from .chem.molecule import BondOrder, Molecule

FP_BITS = 1024
FP_RADIUS = 2

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    """Fixed 64-bit mixing hash; constants are part of the data contract."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def _hash_ints(values: tuple[int, ...]) -> int:
    h = 0x243F6A8885A308D3  # pi fractional bits; arbitrary fixed seed
    for v in values:
        h = _splitmix64(h ^ (v & _MASK64))
    return h


def morgan_identifiers(mol: Molecule, radius: int = FP_RADIUS) -> list[int]:
    """All (atom, radius 0..radius) circular-environment identifiers, with
    multiplicity and without deduplication — the raw material for both the
    fingerprint and corpus fragment statistics."""
    n = len(mol.atoms)
    invariants = []
    for idx, atom in enumerate(mol.atoms):
        invariants.append(
            _hash_ints(
                (
                    atom.element,
                    atom.charge,
                    len(mol.neighbors[idx]),
                    atom.implicit_h,
                    int(atom.in_ring),
                    int(atom.aromatic),
                )
            )
        )
    out = list(invariants)
    current = invariants
    for r in range(1, radius + 1):
        nxt = []
        for idx in range(n):
            pairs = sorted(
                (int(mol.bonds[bidx].effective_order), current[nbr])
                for nbr, bidx in mol.neighbors[idx]
            )
            flat: list[int] = [r, current[idx]]
            for order, inv in pairs:
                flat.extend((order, inv))
            nxt.append(_hash_ints(tuple(flat)))
        out.extend(nxt)
        current = nxt
    return out


def morgan_fingerprint(
    mol: Molecule, radius: int = FP_RADIUS, nbits: int = FP_BITS
) -> np.ndarray:
    """ECFP-style circular fingerprint as a uint8 0/1 vector.

    Environments are deduplicated the usual way: an environment at radius
    r >= 1 is dropped when its bond set did not grow from radius r-1 or
    when an identical bond set was already emitted by another atom
    (processing radii ascending, atoms in index order).
    """
    cache_key = ("morgan", radius, nbits)
    cached = mol.cache_get(cache_key)
    if cached is not None:
        return cached

    n = len(mol.atoms)
    fp = np.zeros(nbits, dtype=np.uint8)
    if n == 0:
        return fp

    identifiers = morgan_identifiers(mol, radius)
    dist = mol.distance_matrix()

    def env_bonds(atom_idx: int, r: int) -> frozenset[int]:
        if r == 0:
            return frozenset()
        return frozenset(
            bidx
            for bidx, bond in enumerate(mol.bonds)
            if dist[atom_idx, bond.a] <= r
            and dist[atom_idx, bond.b] <= r
            and min(dist[atom_idx, bond.a], dist[atom_idx, bond.b]) <= r - 1
        )

    seen_envs: set[frozenset[int]] = set()
    prev_bonds = [frozenset()] * n
    for idx in range(n):
        fp[identifiers[idx] % nbits] = 1
    for r in range(1, radius + 1):
        for idx in range(n):
            bonds = env_bonds(idx, r)
            if bonds == prev_bonds[idx] or bonds in seen_envs:
                prev_bonds[idx] = bonds
                continue
            seen_envs.add(bonds)
            prev_bonds[idx] = bonds
            fp[identifiers[r * n + idx] % nbits] = 1

    fp.setflags(write=False)
    mol.cache_set(cache_key, fp)
    return fp
