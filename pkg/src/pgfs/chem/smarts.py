"""Substructure pattern engine.

Supports a deliberately small pattern language, sufficient for reaction
templates and atom typing:

- atoms: element symbols (uppercase = aliphatic, lowercase = aromatic),
  ``*`` (any atom), and bracket atoms combining primitives with ``;``:
  element, charge (``+``/``-``/``+2``), ``D<n>`` (explicit degree),
  ``H<n>`` (total hydrogen count), ``R`` (ring membership), ``!`` negation
  of a single primitive, and ``:<n>`` atom maps.
- bonds: ``-`` ``=`` ``#`` ``:`` ``~``; an omitted bond matches single or
  aromatic.
- branches and ring closures as in SMILES; ``.`` separates components
  (only where a caller allows disconnected patterns).

Matches are deduplicated by their image (atom set plus bond set), so a
symmetric pattern counts each site once, and are returned in sorted order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .molecule import BondOrder, ELEMENT_SYMBOLS, Molecule


class PatternError(ValueError):
    """Raised for malformed pattern strings."""


_AROMATIC_PATTERN_ELEMENTS = {
    "b": 5,
    "c": 6,
    "n": 7,
    "o": 8,
    "p": 15,
    "s": 16,
}
_SYMBOL_TO_Z = {sym: z for z, sym in ELEMENT_SYMBOLS.items()}
_TWO_LETTER = {"Cl", "Br", "Si"}


@dataclass
class PatternAtom:
    """One atom of a pattern: a conjunction of (possibly negated) tests."""

    tests: list[tuple] = field(default_factory=list)
    map_num: int = 0

    def matches(self, mol: Molecule, idx: int) -> bool:
        atom = mol.atoms[idx]
        for test in self.tests:
            kind = test[0]
            negated = test[1]
            if kind == "any":
                ok = True
            elif kind == "element":
                z, arom = test[2], test[3]
                ok = atom.element == z and (arom is None or atom.aromatic == arom)
            elif kind == "charge":
                ok = atom.charge == test[2]
            elif kind == "degree":
                ok = len(mol.neighbors[idx]) == test[2]
            elif kind == "hcount":
                ok = atom.implicit_h == test[2]
            elif kind == "ring":
                ok = atom.in_ring
            elif kind == "arom":
                ok = atom.aromatic == test[2]
            else:  # pragma: no cover - parser emits only the kinds above
                raise PatternError(f"unknown test kind {kind!r}")
            if ok == negated:
                return False
        return True

    def element_spec(self) -> tuple[int, bool | None] | None:
        """(element, aromatic?) if the pattern pins the element, else None."""
        for test in self.tests:
            if test[0] == "element" and not test[1]:
                return test[2], test[3]
        return None

    def charge_spec(self) -> int | None:
        for test in self.tests:
            if test[0] == "charge" and not test[1]:
                return test[2]
        return None

    def hcount_spec(self) -> int | None:
        for test in self.tests:
            if test[0] == "hcount" and not test[1]:
                return test[2]
        return None


@dataclass
class PatternBond:
    a: int
    b: int
    symbol: str | None  # None = unspecified (single or aromatic)

    def matches(self, mol: Molecule, bond_idx: int) -> bool:
        eff = mol.bonds[bond_idx].effective_order
        sym = self.symbol
        if sym is None:
            return eff in (BondOrder.SINGLE, BondOrder.AROMATIC)
        if sym == "-":
            return eff == BondOrder.SINGLE
        if sym == "=":
            return eff == BondOrder.DOUBLE
        if sym == "#":
            return eff == BondOrder.TRIPLE
        if sym == ":":
            return eff == BondOrder.AROMATIC
        if sym == "~":
            return True
        raise PatternError(f"unknown bond symbol {sym!r}")  # pragma: no cover


@dataclass
class PatternGraph:
    atoms: list[PatternAtom]
    bonds: list[PatternBond]
    neighbors: list[list[tuple[int, int]]]  # (other_atom, bond_index)
    components: list[list[int]]

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    def bond_between(self, a: int, b: int) -> int | None:
        for nbr, bidx in self.neighbors[a]:
            if nbr == b:
                return bidx
        return None


def _parse_bracket_atom(text: str, pos: int) -> tuple[PatternAtom, int]:
    """Parse from just after '[' to the matching ']'."""
    tests: list[tuple] = []
    map_num = 0
    i = pos
    n = len(text)
    saw_primitive = False
    while i < n and text[i] != "]":
        ch = text[i]
        if ch == ";":
            i += 1
            continue
        negated = False
        if ch == "!":
            negated = True
            i += 1
            if i >= n:
                raise PatternError("dangling '!' in pattern")
            ch = text[i]
        if ch == "*":
            tests.append(("any", negated))
            i += 1
        elif ch == "a":
            tests.append(("arom", negated, True))
            i += 1
        elif ch == "A":
            tests.append(("arom", negated, False))
            i += 1
        elif ch == "R":
            tests.append(("ring", negated))
            i += 1
        elif ch == "D":
            i += 1
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j == i:
                raise PatternError("'D' requires a digit")
            tests.append(("degree", negated, int(text[i:j])))
            i = j
        elif ch == "H":
            i += 1
            j = i
            while j < n and text[j].isdigit():
                j += 1
            count = int(text[i:j]) if j > i else 1
            tests.append(("hcount", negated, count))
            i = j
        elif ch in "+-":
            sign = 1 if ch == "+" else -1
            i += 1
            mag = 1
            if i < n and text[i].isdigit():
                j = i
                while j < n and text[j].isdigit():
                    j += 1
                mag = int(text[i:j])
                i = j
            else:
                while i < n and text[i] == ch:
                    mag += 1
                    i += 1
            tests.append(("charge", negated, sign * mag))
        elif ch == ":":
            if negated:
                raise PatternError("cannot negate an atom map")
            i += 1
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j == i:
                raise PatternError("':' requires a map number")
            map_num = int(text[i:j])
            i = j
        elif ch.isalpha():
            if ch.isupper():
                sym = ch
                if i + 1 < n and text[i : i + 2] in _TWO_LETTER:
                    sym = text[i : i + 2]
                if sym not in _SYMBOL_TO_Z:
                    raise PatternError(f"unsupported element {sym!r}")
                tests.append(("element", negated, _SYMBOL_TO_Z[sym], False))
                i += len(sym)
            else:
                if ch not in _AROMATIC_PATTERN_ELEMENTS:
                    raise PatternError(f"unsupported aromatic element {ch!r}")
                tests.append(("element", negated, _AROMATIC_PATTERN_ELEMENTS[ch], True))
                i += 1
        else:
            raise PatternError(f"unexpected {ch!r} in bracket atom")
        if ch != ":":
            saw_primitive = True
    if i >= n:
        raise PatternError("unterminated bracket atom")
    if not saw_primitive:
        raise PatternError("empty bracket atom")
    return PatternAtom(tests, map_num), i + 1


def parse_smarts(text: str, allow_disconnected: bool = False) -> PatternGraph:
    """Parse a pattern string into a PatternGraph."""
    if not text:
        raise PatternError("empty pattern")
    atoms: list[PatternAtom] = []
    bond_specs: list[tuple[int, int, str | None]] = []
    prev: int | None = None
    pending: str | None = None
    stack: list[int | None] = []
    ring_open: dict[int, tuple[int, str | None]] = {}
    component_breaks: set[int] = set()
    i = 0
    n = len(text)

    def add_atom(pa: PatternAtom) -> None:
        nonlocal prev, pending
        atoms.append(pa)
        idx = len(atoms) - 1
        if prev is not None:
            bond_specs.append((prev, idx, pending))
        elif pending is not None:
            raise PatternError("bond symbol with no preceding atom")
        pending = None
        prev = idx

    while i < n:
        ch = text[i]
        if ch in "-=#:~":
            if pending is not None:
                raise PatternError("two bond symbols in a row")
            pending = ch
            i += 1
        elif ch == "(":
            if prev is None:
                raise PatternError("branch with no preceding atom")
            stack.append(prev)
            i += 1
        elif ch == ")":
            if not stack:
                raise PatternError("unmatched ')'")
            if pending is not None:
                raise PatternError("dangling bond before ')'")
            prev = stack.pop()
            i += 1
        elif ch == ".":
            if not allow_disconnected:
                raise PatternError("disconnected pattern not allowed here")
            if stack or pending is not None:
                raise PatternError("misplaced '.'")
            if prev is not None:
                component_breaks.add(len(atoms))
            prev = None
            i += 1
        elif ch.isdigit() or ch == "%":
            if prev is None:
                raise PatternError("ring closure with no preceding atom")
            if ch == "%":
                if i + 2 >= n or not text[i + 1 : i + 3].isdigit():
                    raise PatternError("'%' requires two digits")
                num = int(text[i + 1 : i + 3])
                i += 3
            else:
                num = int(ch)
                i += 1
            if num in ring_open:
                other, sym = ring_open.pop(num)
                if sym is not None and pending is not None and sym != pending:
                    raise PatternError(f"conflicting bond symbols on closure {num}")
                bond_specs.append((other, prev, sym if sym is not None else pending))
            else:
                ring_open[num] = (prev, pending)
            pending = None
        elif ch == "[":
            pa, i = _parse_bracket_atom(text, i + 1)
            add_atom(pa)
        elif ch == "*":
            add_atom(PatternAtom([("any", False)]))
            i += 1
        elif ch == "a":
            add_atom(PatternAtom([("arom", False, True)]))
            i += 1
        elif ch == "A":
            add_atom(PatternAtom([("arom", False, False)]))
            i += 1
        elif ch.isalpha():
            if ch.isupper():
                sym = ch
                if i + 1 < n and text[i : i + 2] in _TWO_LETTER:
                    sym = text[i : i + 2]
                if sym not in _SYMBOL_TO_Z:
                    raise PatternError(f"unsupported element {sym!r}")
                add_atom(PatternAtom([("element", False, _SYMBOL_TO_Z[sym], False)]))
                i += len(sym)
            else:
                if ch not in _AROMATIC_PATTERN_ELEMENTS:
                    raise PatternError(f"unsupported aromatic element {ch!r}")
                add_atom(
                    PatternAtom(
                        [("element", False, _AROMATIC_PATTERN_ELEMENTS[ch], True)]
                    )
                )
                i += 1
        else:
            raise PatternError(f"unexpected {ch!r} in pattern")

    if stack:
        raise PatternError("unmatched '('")
    if pending is not None:
        raise PatternError("dangling bond at end of pattern")
    if ring_open:
        raise PatternError(f"unclosed ring closures: {sorted(ring_open)}")
    if not atoms:
        raise PatternError("pattern has no atoms")

    neighbors: list[list[tuple[int, int]]] = [[] for _ in atoms]
    bonds = []
    seen_pairs = set()
    for a, b, sym in bond_specs:
        if a == b or (min(a, b), max(a, b)) in seen_pairs:
            raise PatternError("duplicate or self bond in pattern")
        seen_pairs.add((min(a, b), max(a, b)))
        bonds.append(PatternBond(a, b, sym))
        bidx = len(bonds) - 1
        neighbors[a].append((b, bidx))
        neighbors[b].append((a, bidx))

    # connected components, in first-atom order
    comp_of = [-1] * len(atoms)
    components: list[list[int]] = []
    for s in range(len(atoms)):
        if comp_of[s] != -1:
            continue
        comp = [s]
        comp_of[s] = len(components)
        queue = [s]
        while queue:
            cur = queue.pop()
            for nbr, _ in neighbors[cur]:
                if comp_of[nbr] == -1:
                    comp_of[nbr] = len(components)
                    comp.append(nbr)
                    queue.append(nbr)
        components.append(sorted(comp))

    if not allow_disconnected and len(components) > 1:
        raise PatternError("pattern must be connected")

    maps = [a.map_num for a in atoms if a.map_num]
    if len(maps) != len(set(maps)):
        raise PatternError("duplicate atom map numbers")

    return PatternGraph(atoms, bonds, neighbors, components)


def _match_order(pattern: PatternGraph) -> list[tuple[int, list[tuple[int, int]]]]:
    """Placement order: BFS per component; each entry pairs the pattern atom
    with the pattern bonds connecting it to already-placed atoms."""
    order: list[tuple[int, list[tuple[int, int]]]] = []
    placed: set[int] = set()
    for comp in pattern.components:
        root = comp[0]
        queue = [root]
        placed.add(root)
        order.append((root, []))
        qi = 0
        while qi < len(queue):
            cur = queue[qi]
            qi += 1
            for nbr, _ in pattern.neighbors[cur]:
                if nbr not in placed:
                    placed.add(nbr)
                    back = [
                        (other, bidx)
                        for other, bidx in pattern.neighbors[nbr]
                        if other in placed and other != nbr
                    ]
                    order.append((nbr, back))
                    queue.append(nbr)
    return order


def find_matches(
    pattern: PatternGraph,
    mol: Molecule,
    anchor: tuple[int, int] | None = None,
    limit: int | None = None,
) -> list[tuple[int, ...]]:
    """All distinct embeddings of the pattern into the molecule.

    Returns tuples of molecule atom indices aligned with pattern atom order.
    ``anchor=(pattern_atom, mol_atom)`` pins one correspondence. Embeddings
    with identical atom and bond images are reported once; results are
    sorted lexicographically.
    """
    order = _match_order(pattern)
    n_pat = pattern.n_atoms
    assignment = [-1] * n_pat
    used = [False] * len(mol.atoms)
    results: list[tuple[int, ...]] = []
    seen_images: set[tuple] = set()

    def candidates(pa_idx: int, back: list[tuple[int, int]]) -> list[int]:
        if anchor is not None and pa_idx == anchor[0]:
            return [anchor[1]]
        if back:
            first_other, _ = back[0]
            return sorted(m for m, _ in mol.neighbors[assignment[first_other]])
        return list(range(len(mol.atoms)))

    def extend(depth: int) -> bool:
        if depth == len(order):
            image_atoms = tuple(sorted(assignment))
            image_bonds = []
            for pb in pattern.bonds:
                x, y = assignment[pb.a], assignment[pb.b]
                image_bonds.append((min(x, y), max(x, y)))
            key = (image_atoms, tuple(sorted(image_bonds)))
            if key not in seen_images:
                seen_images.add(key)
                results.append(tuple(assignment))
                if limit is not None and len(results) >= limit:
                    return True
            return False
        pa_idx, back = order[depth]
        pa = pattern.atoms[pa_idx]
        for cand in candidates(pa_idx, back):
            if used[cand] or not pa.matches(mol, cand):
                continue
            ok = True
            for other, pbidx in back:
                mbidx = _mol_bond_between(mol, cand, assignment[other])
                if mbidx is None or not pattern.bonds[pbidx].matches(mol, mbidx):
                    ok = False
                    break
            if not ok:
                continue
            assignment[pa_idx] = cand
            used[cand] = True
            stop = extend(depth + 1)
            used[cand] = False
            assignment[pa_idx] = -1
            if stop:
                return True
        return False

    extend(0)
    results.sort()
    return results


def _mol_bond_between(mol: Molecule, a: int, b: int) -> int | None:
    for nbr, bidx in mol.neighbors[a]:
        if nbr == b:
            return bidx
    return None


def match_atom(pattern: PatternGraph, mol: Molecule, atom_idx: int) -> bool:
    """True if the pattern matches with its first atom placed on atom_idx."""
    return bool(find_matches(pattern, mol, anchor=(0, atom_idx), limit=1))


def has_match(pattern: PatternGraph, mol: Molecule) -> bool:
    return bool(find_matches(pattern, mol, limit=1))


def has_unique_match(pattern: PatternGraph, mol: Molecule) -> bool:
    return len(find_matches(pattern, mol, limit=2)) == 1
