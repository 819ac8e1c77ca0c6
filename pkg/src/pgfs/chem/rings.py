"""Ring perception: smallest set of smallest rings.

Horton-style enumeration: for every (vertex v, edge xy) pair, the cycle formed
by shortest paths v..x and v..y plus the edge is a candidate when the paths
only share v. Candidates are sorted by (length, sorted atom tuple) and added
greedily while linearly independent over GF(2) in edge space, until the cycle
space dimension |E| - |V| + components is reached. Deterministic by
construction: ties resolve on the sorted atom tuple.
"""

from __future__ import annotations

from typing import Sequence

__all__ = ["sssr"]


def _shortest_paths(n: int, neighbors, src: int) -> tuple[list[int], list[list[int]]]:
    """BFS returning distances and one lexicographically-smallest parent path
    tree (parents chosen in ascending neighbor order)."""
    dist = [-1] * n
    parent = [-1] * n
    dist[src] = 0
    frontier = [src]
    while frontier:
        nxt = []
        for cur in frontier:
            for nbr, _ in neighbors[cur]:
                if dist[nbr] < 0:
                    dist[nbr] = dist[cur] + 1
                    parent[nbr] = cur
                    nxt.append(nbr)
        frontier = sorted(nxt)
    paths: list[list[int]] = [[] for _ in range(n)]
    for v in range(n):
        if dist[v] < 0:
            continue
        path = []
        cur = v
        while cur != -1:
            path.append(cur)
            cur = parent[cur]
        paths[v] = path[::-1]  # src .. v
    return dist, paths


def _fundamental_cycles(n_atoms: int, bonds: Sequence, neighbors) -> list[list[int]]:
    """Cycles induced by non-tree edges over a BFS spanning forest."""
    parent = [-2] * n_atoms  # -2 unvisited, -1 root
    depth = [0] * n_atoms
    tree_edges: set[tuple[int, int]] = set()
    for start in range(n_atoms):
        if parent[start] != -2:
            continue
        parent[start] = -1
        frontier = [start]
        while frontier:
            nxt = []
            for cur in frontier:
                for nbr, _ in sorted(neighbors[cur]):
                    if parent[nbr] == -2:
                        parent[nbr] = cur
                        depth[nbr] = depth[cur] + 1
                        tree_edges.add((min(cur, nbr), max(cur, nbr)))
                        nxt.append(nbr)
            frontier = sorted(nxt)
    cycles = []
    for bond in bonds:
        key = (min(bond.a, bond.b), max(bond.a, bond.b))
        if key in tree_edges:
            continue
        # walk both endpoints up to their lowest common ancestor
        x, y = bond.a, bond.b
        px, py = [x], [y]
        while depth[x] > depth[y]:
            x = parent[x]
            px.append(x)
        while depth[y] > depth[x]:
            y = parent[y]
            py.append(y)
        while x != y:
            x = parent[x]
            y = parent[y]
            px.append(x)
            py.append(y)
        cycles.append(px + py[-2::-1])
    cycles.sort(key=len)
    return cycles


def sssr(n_atoms: int, bonds: Sequence, neighbors) -> list[tuple[int, ...]]:
    """Return the SSSR as a list of atom-index tuples (each ring in traversal
    order, rotated so the smallest atom comes first)."""
    n_bonds = len(bonds)
    if n_bonds == 0 or n_atoms == 0:
        return []

    # cycle space dimension
    seen = [False] * n_atoms
    components = 0
    for start in range(n_atoms):
        if seen[start]:
            continue
        components += 1
        stack = [start]
        seen[start] = True
        while stack:
            cur = stack.pop()
            for nbr, _ in neighbors[cur]:
                if not seen[nbr]:
                    seen[nbr] = True
                    stack.append(nbr)
    dim = n_bonds - n_atoms + components
    if dim <= 0:
        return []

    bond_index = {}
    for bidx, bond in enumerate(bonds):
        bond_index[bond.key()] = bidx

    def edge_vector(atom_cycle: list[int]) -> int | None:
        """Bitmask of bond indices along the closed atom walk, or None if an
        edge is missing (degenerate candidate)."""
        vec = 0
        for i in range(len(atom_cycle)):
            a, b = atom_cycle[i], atom_cycle[(i + 1) % len(atom_cycle)]
            key = (a, b) if a < b else (b, a)
            bidx = bond_index.get(key)
            if bidx is None:
                return None
            bit = 1 << bidx
            if vec & bit:
                return None  # repeated edge: not a simple cycle
            vec |= bit
        return vec

    candidates: dict[int, list[int]] = {}
    for v in range(n_atoms):
        dist, paths = _shortest_paths(n_atoms, neighbors, v)
        for bond in bonds:
            x, y = bond.a, bond.b
            if dist[x] < 0 or dist[y] < 0:
                continue
            px, py = paths[x], paths[y]
            # paths must share only v
            if len(px) > 1 and len(py) > 1 and px[1] == py[1]:
                continue
            if set(px[1:]) & set(py[1:]):
                continue
            cycle = px + py[:0:-1]  # v..x, then y..(after v) reversed
            if len(cycle) < 3:
                continue
            vec = edge_vector(cycle)
            if vec is None:
                continue
            if vec not in candidates:
                candidates[vec] = cycle

    def ring_sort_key(item: tuple[int, list[int]]):
        vec, cycle = item
        return (len(cycle), tuple(sorted(cycle)))

    basis: list[int] = []  # xor-basis, kept sorted descending

    def try_add(vec: int) -> bool:
        reduced = vec
        for row in basis:
            reduced = min(reduced, reduced ^ row)
        if reduced:
            basis.append(reduced)
            basis.sort(reverse=True)
            return True
        return False

    chosen: list[list[int]] = []
    for vec, cycle in sorted(candidates.items(), key=ring_sort_key):
        if try_add(vec):
            chosen.append(cycle)
            if len(chosen) == dim:
                break

    if len(chosen) < dim:
        # Pathological symmetric graph where single shortest-path trees missed
        # a basis cycle: complete with fundamental cycles of a spanning tree
        # (guaranteed to span the cycle space; sizes may be non-minimal).
        for cycle in _fundamental_cycles(n_atoms, bonds, neighbors):
            vec = edge_vector(cycle)
            if vec is not None and try_add(vec):
                chosen.append(cycle)
                if len(chosen) == dim:
                    break

    out = []
    for cycle in chosen:
        kmin = cycle.index(min(cycle))
        rotated = cycle[kmin:] + cycle[:kmin]
        # fix orientation: pick the direction whose second atom is smaller
        if rotated[1] > rotated[-1]:
            rotated = [rotated[0]] + rotated[1:][::-1]
        out.append(tuple(rotated))
    out.sort(key=lambda r: (len(r), r))
    return out
