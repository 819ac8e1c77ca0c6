"""Molecular graph types: atoms, bonds, immutable molecules.

The graph model is deliberately small: a fixed element set, integer kekule bond
orders plus an aromaticity flag, implicit hydrogens stored as per-atom counts
(explicit H atoms are folded in by the parser), and ring/aromaticity caches
computed once at construction. Everything downstream (matching, fingerprints,
descriptors) reads from this module and never mutates a Molecule.
"""

from __future__ import annotations

from enum import IntEnum
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "BondOrder",
    "Atom",
    "Bond",
    "Molecule",
    "MoleculeError",
    "ValenceError",
    "ELEMENT_SYMBOLS",
    "SYMBOL_TO_NUMBER",
    "ATOMIC_MASSES",
    "ORGANIC_SUBSET",
    "AROMATIC_CAPABLE",
    "permitted_valences",
]


class MoleculeError(ValueError):
    """Structural problem while building a molecule."""


class ValenceError(MoleculeError):
    """An atom's total valence is not permitted for its element/charge."""


class BondOrder(IntEnum):
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4


# Supported element set. Hydrogen is accepted by the parser but folded into
# implicit counts, so H never appears as a graph atom in a finished Molecule.
ELEMENT_SYMBOLS = {
    1: "H",
    5: "B",
    6: "C",
    7: "N",
    8: "O",
    9: "F",
    14: "Si",
    15: "P",
    16: "S",
    17: "Cl",
    35: "Br",
    53: "I",
}
SYMBOL_TO_NUMBER = {sym: num for num, sym in ELEMENT_SYMBOLS.items()}

# Standard atomic weights (conventional values).
ATOMIC_MASSES = {
    1: 1.008,
    5: 10.811,
    6: 12.011,
    7: 14.007,
    8: 15.999,
    9: 18.998,
    14: 28.086,
    15: 30.974,
    16: 32.066,
    17: 35.453,
    35: 79.904,
    53: 126.904,
}

# Elements writable without brackets in SMILES.
ORGANIC_SUBSET = {5, 6, 7, 8, 9, 15, 16, 17, 35, 53}

# Elements that may carry an aromatic flag.
AROMATIC_CAPABLE = {5, 6, 7, 8, 15, 16}

_BASE_VALENCES: dict[int, tuple[int, ...]] = {
    1: (1,),
    5: (3,),
    6: (4,),
    7: (3,),
    8: (2,),
    9: (1,),
    14: (4,),
    15: (3, 5),
    16: (2, 4, 6),
    17: (1,),
    35: (1,),
    53: (1,),
}

# Charge shifts the permitted-valence set only for N, O and S (+1 adds a bond,
# -1 removes one). Other elements keep their neutral table, which deliberately
# rejects exotica like carbocations.
_CHARGE_ADJUSTED = {7, 8, 16}


def atomic_mass(element: int) -> float:
    mass = ATOMIC_MASSES.get(element)
    if mass is None:
        raise MoleculeError(f"unsupported element number {element}")
    return mass


def permitted_valences(element: int, charge: int = 0) -> tuple[int, ...]:
    base = _BASE_VALENCES.get(element)
    if base is None:
        raise MoleculeError(f"unsupported element number {element}")
    if charge and element in _CHARGE_ADJUSTED:
        adjusted = tuple(v + charge for v in base if v + charge >= 0)
        if not adjusted:
            raise ValenceError(
                f"element {ELEMENT_SYMBOLS[element]} with charge {charge:+d} "
                "has no permitted valence"
            )
        return adjusted
    return base


class Atom:
    """One heavy atom: element, formal charge, aromatic flag, implicit H count.

    ``in_ring`` is derived (set during Molecule construction from the ring
    perception pass) and is part of the atom's identity for matching and
    invariants.
    """

    __slots__ = ("element", "charge", "aromatic", "implicit_h", "in_ring")

    def __init__(
        self,
        element: int,
        charge: int = 0,
        aromatic: bool = False,
        implicit_h: int = 0,
        in_ring: bool = False,
    ):
        self.element = element
        self.charge = charge
        self.aromatic = aromatic
        self.implicit_h = implicit_h
        self.in_ring = in_ring

    @property
    def symbol(self) -> str:
        return ELEMENT_SYMBOLS[self.element]

    def copy(self) -> "Atom":
        return Atom(self.element, self.charge, self.aromatic, self.implicit_h, self.in_ring)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        bits = [self.symbol]
        if self.charge:
            bits.append(f"{self.charge:+d}")
        if self.aromatic:
            bits.append("arom")
        bits.append(f"H{self.implicit_h}")
        return f"Atom({','.join(bits)})"


class Bond:
    """Undirected bond. ``order`` is the kekule order (1/2/3); ``aromatic``
    marks membership in a perceived aromatic ring. The effective order used by
    matching and fingerprints is AROMATIC whenever the flag is set."""

    __slots__ = ("a", "b", "order", "aromatic")

    def __init__(self, a: int, b: int, order: int = 1, aromatic: bool = False):
        self.a = a
        self.b = b
        self.order = order
        self.aromatic = aromatic

    @property
    def effective_order(self) -> BondOrder:
        return BondOrder.AROMATIC if self.aromatic else BondOrder(self.order)

    def other(self, idx: int) -> int:
        return self.b if idx == self.a else self.a

    def key(self) -> tuple[int, int]:
        return (self.a, self.b) if self.a < self.b else (self.b, self.a)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        mark = ":" if self.aromatic else {1: "-", 2: "=", 3: "#"}[self.order]
        return f"Bond({self.a}{mark}{self.b})"


class Molecule:
    """Immutable molecular graph with ring and aromaticity caches.

    Use :func:`pgfs.chem.build.finalize_molecule` (or the SMILES parser) to
    construct one; the raw constructor trusts its inputs.
    """

    __slots__ = (
        "atoms",
        "bonds",
        "neighbors",
        "rings",
        "ring_bonds",
        "stereo_stripped",
        "_cache",
    )

    def __init__(
        self,
        atoms: Sequence[Atom],
        bonds: Sequence[Bond],
        rings: Sequence[tuple[int, ...]],
        ring_bonds: frozenset[int],
        stereo_stripped: bool = False,
    ):
        self.atoms = tuple(atoms)
        self.bonds = tuple(bonds)
        nbrs: list[list[tuple[int, int]]] = [[] for _ in self.atoms]
        for bidx, bond in enumerate(self.bonds):
            nbrs[bond.a].append((bond.b, bidx))
            nbrs[bond.b].append((bond.a, bidx))
        self.neighbors = tuple(tuple(n) for n in nbrs)
        self.rings = tuple(tuple(r) for r in rings)
        self.ring_bonds = ring_bonds
        self.stereo_stripped = stereo_stripped
        self._cache: dict = {}

    # -- structural queries -------------------------------------------------

    def __len__(self) -> int:
        return len(self.atoms)

    def degree(self, idx: int) -> int:
        return len(self.neighbors[idx])

    def bond_between(self, a: int, b: int) -> Bond | None:
        for nbr, bidx in self.neighbors[a]:
            if nbr == b:
                return self.bonds[bidx]
        return None

    def explicit_valence(self, idx: int) -> int:
        """Sum of kekule bond orders at an atom (aromatic bonds contribute
        their kekule order, so the sum is a proper valence)."""
        return sum(self.bonds[bidx].order for _, bidx in self.neighbors[idx])

    def total_h(self, idx: int) -> int:
        return self.atoms[idx].implicit_h

    def components(self) -> list[tuple[int, ...]]:
        seen = [False] * len(self.atoms)
        comps: list[tuple[int, ...]] = []
        for start in range(len(self.atoms)):
            if seen[start]:
                continue
            stack = [start]
            seen[start] = True
            comp = []
            while stack:
                cur = stack.pop()
                comp.append(cur)
                for nbr, _ in self.neighbors[cur]:
                    if not seen[nbr]:
                        seen[nbr] = True
                        stack.append(nbr)
            comps.append(tuple(sorted(comp)))
        return comps

    # -- cached arrays for hot paths ----------------------------------------

    @property
    def arrays(self) -> dict[str, np.ndarray]:
        """Parallel numpy views of atom fields for fast predicate checks."""
        arr = self._cache.get("arrays")
        if arr is None:
            n = len(self.atoms)
            arr = {
                "element": np.fromiter((a.element for a in self.atoms), dtype=np.int16, count=n),
                "charge": np.fromiter((a.charge for a in self.atoms), dtype=np.int8, count=n),
                "aromatic": np.fromiter((a.aromatic for a in self.atoms), dtype=bool, count=n),
                "implicit_h": np.fromiter((a.implicit_h for a in self.atoms), dtype=np.int8, count=n),
                "in_ring": np.fromiter((a.in_ring for a in self.atoms), dtype=bool, count=n),
                "degree": np.fromiter((len(nb) for nb in self.neighbors), dtype=np.int8, count=n),
            }
            self._cache["arrays"] = arr
        return arr

    def distance_matrix(self) -> np.ndarray:
        """All-pairs topological distances (BFS per atom). Unreachable pairs
        get -1. Cached."""
        dm = self._cache.get("distmat")
        if dm is None:
            n = len(self.atoms)
            dm = np.full((n, n), -1, dtype=np.int32)
            for src in range(n):
                dm[src, src] = 0
                frontier = [src]
                dist = 0
                while frontier:
                    dist += 1
                    nxt = []
                    for cur in frontier:
                        for nbr, _ in self.neighbors[cur]:
                            if dm[src, nbr] < 0:
                                dm[src, nbr] = dist
                                nxt.append(nbr)
                    frontier = nxt
            self._cache["distmat"] = dm
        return dm

    def rings_containing(self, idx: int) -> int:
        counts = self._cache.get("ring_counts")
        if counts is None:
            counts = [0] * len(self.atoms)
            for ring in self.rings:
                for a in ring:
                    counts[a] += 1
            self._cache["ring_counts"] = counts
        return counts[idx]

    # -- canonical form (filled in lazily by chem.smiles to avoid a cycle) --

    def cache_get(self, key: str):
        return self._cache.get(key)

    def cache_set(self, key: str, value) -> None:
        self._cache[key] = value

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Molecule({len(self.atoms)} atoms, {len(self.bonds)} bonds)"


def validate_structure(atoms: Sequence[Atom], bonds: Sequence[Bond]) -> None:
    """Cheap structural sanity checks shared by every construction path."""
    n = len(atoms)
    seen_pairs: set[tuple[int, int]] = set()
    for bond in bonds:
        if not (0 <= bond.a < n and 0 <= bond.b < n):
            raise MoleculeError(f"bond endpoint out of range: {bond.a},{bond.b}")
        if bond.a == bond.b:
            raise MoleculeError(f"self-loop bond on atom {bond.a}")
        key = bond.key()
        if key in seen_pairs:
            raise MoleculeError(f"duplicate bond between atoms {key[0]} and {key[1]}")
        seen_pairs.add(key)
        if bond.order not in (1, 2, 3):
            raise MoleculeError(f"bad kekule order {bond.order}")
    for idx, atom in enumerate(atoms):
        if atom.element not in _BASE_VALENCES:
            raise MoleculeError(f"unsupported element at atom {idx}")
        if atom.aromatic and atom.element not in AROMATIC_CAPABLE:
            raise MoleculeError(
                f"element {ELEMENT_SYMBOLS[atom.element]} cannot be aromatic (atom {idx})"
            )
        if atom.implicit_h < 0:
            raise MoleculeError(f"negative implicit H at atom {idx}")


def validate_valences(mol: Molecule) -> None:
    """Every atom's explicit valence + implicit H must hit a permitted value."""
    for idx, atom in enumerate(mol.atoms):
        total = mol.explicit_valence(idx) + atom.implicit_h
        allowed = permitted_valences(atom.element, atom.charge)
        if total not in allowed:
            raise ValenceError(
                f"atom {idx} ({atom.symbol}{atom.charge:+d}) has valence {total}, "
                f"permitted {allowed}"
            )
