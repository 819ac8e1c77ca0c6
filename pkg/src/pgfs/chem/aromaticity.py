"""Kekulization and aromaticity perception.

Two directions:

* ``kekulize`` takes parser-level atoms whose bonds may still carry the
  "aromatic" placeholder order and assigns concrete single/double orders via
  perfect matching (every aromatic atom that needs exactly one double bond must
  get one). Failure means the aromatic input has no alternating assignment.

* ``perceive_aromaticity`` works on a finished kekule graph and flags
  atoms/bonds of rings that are fully sp2-capable and satisfy the Hueckel
  4n+2 pi-electron count. Electron contributions follow a fixed per-element
  table (with charge and exocyclic-double-bond cases). Idempotent: flags are
  recomputed from kekule orders only.
"""

from __future__ import annotations

from .molecule import AROMATIC_CAPABLE, Atom, Bond, MoleculeError

__all__ = ["KekulizationError", "kekulize", "perceive_aromaticity", "aromatic_target_valence"]


class KekulizationError(MoleculeError):
    """No alternating single/double assignment exists for an aromatic system."""


def aromatic_target_valence(element: int, charge: int) -> int:
    """Valence an aromatic atom is kekulized toward (smallest sensible)."""
    if element == 6:
        return 4 - abs(charge)
    if element == 7 or element == 15:
        return 3 + charge
    if element == 8 or element == 16:
        return 2 + charge
    if element == 5:
        return 3 - charge
    raise KekulizationError(f"element {element} cannot be aromatic")


def kekulize(
    atoms: list[Atom],
    bonds: list[Bond],
    aromatic_bond_flags: list[bool],
    hcounts: list[int | None],
    atom_order: list[int] | None = None,
) -> None:
    """Assign kekule orders (1/2) to bonds flagged aromatic, in place.

    ``hcounts[i]`` is the explicit H count from a bracket atom or None when the
    parser will infer it later. ``atom_order`` fixes the matching iteration
    order (canonical writers pass ranks; the parser passes None for input
    order). Raises KekulizationError when no perfect matching exists.
    """
    n = len(atoms)
    arom_adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    incident: list[list[int]] = [[] for _ in range(n)]
    for bidx, bond in enumerate(bonds):
        incident[bond.a].append(bidx)
        incident[bond.b].append(bidx)
        if aromatic_bond_flags[bidx]:
            arom_adj[bond.a].append((bond.b, bidx))
            arom_adj[bond.b].append((bond.a, bidx))

    needs = [False] * n
    for idx in range(n):
        atom = atoms[idx]
        if not atom.aromatic:
            if arom_adj[idx]:
                raise KekulizationError(
                    f"aromatic bond touches non-aromatic atom {idx}"
                )
            continue
        if atom.element not in AROMATIC_CAPABLE:
            raise KekulizationError(f"element of atom {idx} cannot be aromatic")
        sigma = sum(
            1 if aromatic_bond_flags[bidx] else bonds[bidx].order
            for bidx in incident[idx]
        )
        h = hcounts[idx] or 0
        target = aromatic_target_valence(atom.element, atom.charge)
        needs[idx] = sigma + h <= target - 1

    order = atom_order if atom_order is not None else list(range(n))
    pending = [idx for idx in order if needs[idx]]
    matched: dict[int, int] = {}  # atom -> bond index of its double bond

    def backtrack(pos: int) -> bool:
        while pos < len(pending) and pending[pos] in matched:
            pos += 1
        if pos == len(pending):
            return True
        cur = pending[pos]
        for nbr, bidx in sorted(arom_adj[cur], key=lambda t: t[0]):
            if nbr in matched or not needs[nbr]:
                continue
            matched[cur] = bidx
            matched[nbr] = bidx
            if backtrack(pos + 1):
                return True
            del matched[cur]
            del matched[nbr]
        return False

    if not backtrack(0):
        raise KekulizationError("aromatic ring system admits no kekule assignment")

    double_bonds = set(matched.values())
    for bidx, flag in enumerate(aromatic_bond_flags):
        if flag:
            bonds[bidx].order = 2 if bidx in double_bonds else 1


# -- perception -------------------------------------------------------------

def _pi_contribution(
    atom: Atom,
    in_system_double: bool,
    exo_double: bool,
    degree: int,
) -> int | None:
    """Pi electrons the atom donates, or None if not sp2-capable.

    A double bond whose partner is itself a ring atom (this ring or a fused
    one) counts as part of the conjugated system and contributes one electron;
    this keeps the count independent of which kekule assignment the matcher
    happened to pick in fused systems. A double bond to a non-ring atom
    (carbonyl-like) contributes none.
    """
    el, chg = atom.element, atom.charge
    if in_system_double:
        return 1
    if exo_double:
        # carbonyl-like: sp2 but contributes no pi electrons to this ring
        return 0
    # no double bond at all: lone-pair donors and vacant orbitals
    if el == 6:
        if chg == -1:
            return 2
        if chg == 1:
            return 0
        return None  # sp3 carbon
    if el in (7, 15):
        if chg == 0 and (atom.implicit_h >= 1 or degree == 3):
            return 2
        if chg == -1:
            return 2
        if chg == 1 and degree == 3 and atom.implicit_h == 0:
            return None  # N+ without double bond and 3 sigma bonds: not planar donor
        return None
    if el == 8:
        return 2 if chg == 0 else None
    if el == 16:
        if chg == 0 and degree == 2:
            return 2
        return None
    if el == 5:
        if chg == 0:
            return 0  # vacant p orbital
        return None
    return None


def perceive_aromaticity(atoms: list[Atom], bonds: list[Bond], rings, neighbors) -> None:
    """Recompute aromatic flags from kekule orders, in place.

    A ring in the SSSR is aromatic when every member is sp2-capable (at most
    one double bond, no triple bonds, <= 3 connections + H) and the summed pi
    electrons satisfy 4n+2. Flags are reset first, so the pass is idempotent.
    """
    for atom in atoms:
        atom.aromatic = False
    for bond in bonds:
        bond.aromatic = False

    bond_lookup: dict[tuple[int, int], int] = {}
    for bidx, bond in enumerate(bonds):
        bond_lookup[bond.key()] = bidx

    ring_atoms_global: set[int] = set()
    for ring in rings:
        ring_atoms_global.update(ring)

    aromatic_atoms: set[int] = set()
    aromatic_bonds: set[int] = set()
    for ring in rings:
        pi_total = 0
        ok = True
        for idx in ring:
            atom = atoms[idx]
            degree = len(neighbors[idx])
            if degree + atom.implicit_h > 3:
                ok = False
                break
            doubles_in = 0
            doubles_exo = 0
            has_triple = False
            for nbr, bidx in neighbors[idx]:
                order = bonds[bidx].order
                if order == 3:
                    has_triple = True
                elif order == 2:
                    if nbr in ring_atoms_global:
                        doubles_in += 1
                    else:
                        doubles_exo += 1
            if has_triple or doubles_in + doubles_exo > 1:
                ok = False
                break
            contrib = _pi_contribution(atom, doubles_in == 1, doubles_exo == 1, degree)
            if contrib is None:
                ok = False
                break
            pi_total += contrib
        if not ok:
            continue
        # in-ring double bonds must pair up inside the ring for a consistent
        # pi system: each contributes 1, so the sum over a proper alternating
        # ring is even before lone pairs; Hueckel test on the total
        if pi_total < 2 or pi_total % 4 != 2:
            continue
        for idx in ring:
            aromatic_atoms.add(idx)
        for i in range(len(ring)):
            a, b = ring[i], ring[(i + 1) % len(ring)]
            key = (a, b) if a < b else (b, a)
            aromatic_bonds.add(bond_lookup[key])

    for idx in aromatic_atoms:
        atoms[idx].aromatic = True
    for bidx in aromatic_bonds:
        bonds[bidx].aromatic = True
