"""SMILES reading and canonical writing.

The accepted dialect covers the element set B, C, N, O, F, Si, P, S, Cl, Br,
I (plus H, folded into implicit counts): branches, ring closures (digits and
%nn), formal charges, aromatic lowercase form, explicit bond orders - = # :,
bracket H counts, and '.'-separated components. Stereo markers (/ \\ @ @@) are
parsed and dropped with a flag on the molecule; isotopes and other extensions
raise unsupported-feature errors.

Writing is canonical: atoms are emitted in canonical-rank order (see
``chem.canon``), aromatic systems in lowercase form, hydrogens left implicit
whenever a reader would infer the same count, components sorted.
"""

from __future__ import annotations

import logging

from .aromaticity import KekulizationError, aromatic_target_valence, kekulize
from .build import fill_implicit_h, finalize_molecule
from .canon import canonical_ranks
from .molecule import (
    AROMATIC_CAPABLE,
    Atom,
    Bond,
    Molecule,
    MoleculeError,
    ORGANIC_SUBSET,
    SYMBOL_TO_NUMBER,
    ValenceError,
)

__all__ = ["SmilesError", "parse_smiles", "write_smiles"]

LOGGER = logging.getLogger(__name__)

_AROMATIC_SYMBOLS = {"b": 5, "c": 6, "n": 7, "o": 8, "p": 15, "s": 16}
_ORGANIC_TOKENS = ("Cl", "Br", "B", "C", "N", "O", "P", "S", "F", "I")
_BOND_TOKENS = {"-": 1, "=": 2, "#": 3, ":": 4}  # 4 = aromatic placeholder


class SmilesError(MoleculeError):
    """Parse failure with a position and a coarse kind tag."""

    def __init__(self, kind: str, message: str, pos: int | None = None):
        self.kind = kind  # syntax | valence | kekulize | unsupported
        self.pos = pos
        where = f" at position {pos}" if pos is not None else ""
        super().__init__(f"{kind} error{where}: {message}")


class _RawAtom:
    __slots__ = ("element", "aromatic", "charge", "hcount", "bracket", "folded_h")

    def __init__(self, element, aromatic, charge, hcount, bracket):
        self.element = element
        self.aromatic = aromatic
        self.charge = charge
        self.hcount = hcount  # None: infer (non-bracket atoms only)
        self.bracket = bracket
        self.folded_h = 0


def _parse_bracket(text: str, start: int) -> tuple[_RawAtom, bool, int]:
    """Parse a [...] atom starting at the '['. Returns (atom, stereo_seen,
    index after the closing bracket)."""
    i = start + 1
    n = len(text)
    if i < n and text[i].isdigit():
        raise SmilesError("unsupported", "isotope annotations are not supported", i)

    element = None
    aromatic = False
    if i < n:
        two = text[i : i + 2]
        if two in ("Cl", "Br", "Si"):
            element = SYMBOL_TO_NUMBER[two]
            i += 2
        elif text[i] in _AROMATIC_SYMBOLS:
            element = _AROMATIC_SYMBOLS[text[i]]
            aromatic = True
            i += 1
        elif text[i] == "H":
            # a leading H names a hydrogen atom
            element = 1
            i += 1
        elif text[i] in SYMBOL_TO_NUMBER:
            element = SYMBOL_TO_NUMBER[text[i]]
            i += 1
    if element is None:
        raise SmilesError("syntax", f"unknown element in brackets: {text[start:start+4]!r}", start)

    stereo = False
    while i < n and text[i] == "@":
        stereo = True
        i += 1

    hcount = 0
    if i < n and text[i] == "H":
        if element == 1:
            raise SmilesError("unsupported", "H atom with H count", i)
        i += 1
        digits = ""
        while i < n and text[i].isdigit():
            digits += text[i]
            i += 1
        hcount = int(digits) if digits else 1

    charge = 0
    if i < n and text[i] in "+-":
        sign = 1 if text[i] == "+" else -1
        symbol = text[i]
        i += 1
        digits = ""
        while i < n and text[i].isdigit():
            digits += text[i]
            i += 1
        if digits:
            charge = sign * int(digits)
        else:
            charge = sign
            while i < n and text[i] == symbol:
                charge += sign
                i += 1

    if i < n and text[i] == ":":
        # atom class: parse and ignore
        i += 1
        if i == n or not text[i].isdigit():
            raise SmilesError("syntax", "atom class expects digits", i)
        while i < n and text[i].isdigit():
            i += 1

    if i >= n or text[i] != "]":
        raise SmilesError("syntax", "unterminated bracket atom", start)
    return _RawAtom(element, aromatic, charge, hcount, bracket=True), stereo, i + 1


def parse_smiles(text: str) -> Molecule:
    """Parse a SMILES string into a validated Molecule."""
    text = text.strip()
    if not text:
        raise SmilesError("syntax", "empty SMILES")

    atoms: list[_RawAtom] = []
    bond_specs: list[tuple[int, int, int | None]] = []  # a, b, token order/None
    stereo_stripped = False

    prev: int | None = None
    pending: int | None = None
    pending_pos = 0
    stack: list[int | None] = []
    ring_open: dict[int, tuple[int, int | None, int]] = {}

    def add_bond(a: int, b: int, order: int | None, pos: int) -> None:
        if a == b:
            raise SmilesError("syntax", "ring closure bonds an atom to itself", pos)
        bond_specs.append((a, b, order))

    i = 0
    n = len(text)
    while i < n:
        ch = text[i]

        if ch == "(":
            if prev is None:
                raise SmilesError("syntax", "branch with no preceding atom", i)
            if pending is not None:
                raise SmilesError("syntax", "bond before branch open", i)
            stack.append(prev)
            i += 1
            continue
        if ch == ")":
            if not stack:
                raise SmilesError("syntax", "unmatched ')'", i)
            if pending is not None:
                raise SmilesError("syntax", "dangling bond before ')'", i)
            prev = stack.pop()
            i += 1
            continue
        if ch == ".":
            if pending is not None:
                raise SmilesError("syntax", "bond before '.'", i)
            prev = None
            i += 1
            continue
        if ch in _BOND_TOKENS:
            if pending is not None:
                raise SmilesError("syntax", "two bond symbols in a row", i)
            pending = _BOND_TOKENS[ch]
            pending_pos = i
            i += 1
            continue
        if ch in "/\\":
            stereo_stripped = True
            if pending is not None:
                raise SmilesError("syntax", "two bond symbols in a row", i)
            pending = 1
            pending_pos = i
            i += 1
            continue
        if ch.isdigit() or ch == "%":
            if prev is None:
                raise SmilesError("syntax", "ring closure with no preceding atom", i)
            if ch == "%":
                if i + 2 >= n or not (text[i + 1].isdigit() and text[i + 2].isdigit()):
                    raise SmilesError("syntax", "'%' expects two digits", i)
                num = int(text[i + 1 : i + 3])
                i += 3
            else:
                num = int(ch)
                i += 1
            if num in ring_open:
                a, open_order, open_pos = ring_open.pop(num)
                order = None
                if open_order is not None and pending is not None:
                    if open_order != pending:
                        raise SmilesError("syntax", f"conflicting ring-closure bonds for {num}", i)
                    order = pending
                else:
                    order = open_order if open_order is not None else pending
                add_bond(a, prev, order, i)
            else:
                ring_open[num] = (prev, pending, i)
            pending = None
            continue

        # atom
        atom: _RawAtom | None = None
        if ch == "[":
            atom, stereo, i = _parse_bracket(text, i)
            stereo_stripped = stereo_stripped or stereo
        elif ch in _AROMATIC_SYMBOLS:
            atom = _RawAtom(_AROMATIC_SYMBOLS[ch], True, 0, None, bracket=False)
            i += 1
        else:
            matched = None
            for tok in _ORGANIC_TOKENS:
                if text.startswith(tok, i):
                    matched = tok
                    break
            if matched is None:
                raise SmilesError("syntax", f"unexpected character {ch!r}", i)
            atom = _RawAtom(SYMBOL_TO_NUMBER[matched], False, 0, None, bracket=False)
            i += len(matched)

        idx = len(atoms)
        atoms.append(atom)
        if prev is not None:
            add_bond(prev, idx, pending, pending_pos if pending is not None else i)
        elif pending is not None:
            raise SmilesError("syntax", "bond with no preceding atom", pending_pos)
        pending = None
        prev = idx

    if pending is not None:
        raise SmilesError("syntax", "dangling bond at end of input", pending_pos)
    if ring_open:
        num, (_, _, pos) = next(iter(ring_open.items()))
        raise SmilesError("syntax", f"unclosed ring closure {num}", pos)
    if stack:
        raise SmilesError("syntax", "unclosed '('")
    if not atoms:
        raise SmilesError("syntax", "no atoms")

    return _assemble(atoms, bond_specs, stereo_stripped)


def _assemble(
    raw_atoms: list[_RawAtom],
    bond_specs: list[tuple[int, int, int | None]],
    stereo_stripped: bool,
) -> Molecule:
    """Fold explicit hydrogens, resolve bond defaults, kekulize, fill implicit
    hydrogens, and run the shared finalize pipeline."""
    # fold [H] atoms into their heavy neighbor
    incident: dict[int, list[tuple[int, int, int | None]]] = {}
    for a, b, order in bond_specs:
        incident.setdefault(a, []).append((a, b, order))
        incident.setdefault(b, []).append((a, b, order))

    fold: dict[int, int] = {}  # h atom index -> heavy partner
    for idx, atom in enumerate(raw_atoms):
        if atom.element != 1:
            continue
        edges = incident.get(idx, [])
        partner = None
        if (
            atom.charge == 0
            and (atom.hcount or 0) == 0
            and len(edges) == 1
            and edges[0][2] in (None, 1)
        ):
            a, b, _ = edges[0]
            other = b if a == idx else a
            if raw_atoms[other].element != 1:
                partner = other
        if partner is None:
            raise SmilesError(
                "unsupported", "hydrogen atom not foldable into a heavy neighbor"
            )
        fold[idx] = partner

    for h_idx, heavy in fold.items():
        raw_atoms[heavy].folded_h += 1

    remap: dict[int, int] = {}
    kept_atoms: list[_RawAtom] = []
    for idx, atom in enumerate(raw_atoms):
        if idx in fold:
            continue
        remap[idx] = len(kept_atoms)
        kept_atoms.append(atom)
    if not kept_atoms:
        raise SmilesError("unsupported", "molecule has no heavy atoms")

    atoms = [
        Atom(r.element, r.charge, r.aromatic, 0, False)
        for r in kept_atoms
    ]
    bonds: list[Bond] = []
    arom_flags: list[bool] = []
    for a, b, order in bond_specs:
        if a in fold or b in fold:
            continue
        na, nb = remap[a], remap[b]
        if order is None:
            is_arom = kept_atoms[na].aromatic and kept_atoms[nb].aromatic
            bonds.append(Bond(na, nb, 1))
            arom_flags.append(is_arom)
        elif order == 4:
            bonds.append(Bond(na, nb, 1))
            arom_flags.append(True)
        else:
            bonds.append(Bond(na, nb, order))
            arom_flags.append(False)

    hcounts: list[int | None] = []
    for r in kept_atoms:
        if r.bracket:
            hcounts.append((r.hcount or 0) + r.folded_h)
        elif r.folded_h:
            hcounts.append(r.folded_h)  # participates in kekule accounting
        else:
            hcounts.append(None)

    try:
        kekulize(atoms, bonds, arom_flags, hcounts)
    except KekulizationError as exc:
        raise SmilesError("kekulize", str(exc)) from exc

    # implicit hydrogen resolution
    ev = [0] * len(atoms)
    for bond in bonds:
        ev[bond.a] += bond.order
        ev[bond.b] += bond.order
    for idx, r in enumerate(kept_atoms):
        if r.bracket:
            atoms[idx].implicit_h = (r.hcount or 0) + r.folded_h
        else:
            try:
                fill = fill_implicit_h(r.element, r.charge, ev[idx] + r.folded_h)
            except ValenceError as exc:
                raise SmilesError("valence", str(exc)) from exc
            atoms[idx].implicit_h = fill + r.folded_h

    try:
        mol = finalize_molecule(atoms, bonds, stereo_stripped)
    except ValenceError as exc:
        raise SmilesError("valence", str(exc)) from exc
    except MoleculeError as exc:
        raise SmilesError("syntax", str(exc)) from exc

    # every atom written in aromatic (lowercase) form must come out aromatic
    # under perception, otherwise the input claimed an unsound ring
    for idx, r in enumerate(kept_atoms):
        if r.aromatic and not mol.atoms[idx].aromatic:
            raise SmilesError(
                "kekulize",
                f"atom {idx} was written aromatic but is not part of an "
                "aromatic ring",
            )
    if stereo_stripped:
        LOGGER.warning("stereochemistry annotations were parsed and dropped")
    return mol


# -- writing ------------------------------------------------------------------

_CHARGE_STR = lambda c: "" if c == 0 else ("+" if c == 1 else "-" if c == -1 else f"{c:+d}")


def _default_h(mol: Molecule, idx: int) -> int:
    """H count a reader would infer for this atom written without brackets."""
    atom = mol.atoms[idx]
    if atom.aromatic:
        sigma = 0
        for _, bidx in mol.neighbors[idx]:
            bond = mol.bonds[bidx]
            sigma += 1 if bond.aromatic else bond.order
        target = aromatic_target_valence(atom.element, 0)
        needs = 1 if sigma <= target - 1 else 0
        try:
            return fill_implicit_h(atom.element, 0, sigma + needs)
        except ValenceError:
            return -1
    ev = mol.explicit_valence(idx)
    try:
        return fill_implicit_h(atom.element, 0, ev)
    except ValenceError:
        return -1


def _atom_token(mol: Molecule, idx: int) -> str:
    atom = mol.atoms[idx]
    symbol = atom.symbol.lower() if atom.aromatic else atom.symbol
    bare_ok = (
        atom.element in ORGANIC_SUBSET
        and atom.charge == 0
        and atom.implicit_h == _default_h(mol, idx)
    )
    if bare_ok:
        return symbol
    h = atom.implicit_h
    h_str = "" if h == 0 else ("H" if h == 1 else f"H{h}")
    return f"[{symbol}{h_str}{_CHARGE_STR(atom.charge)}]"


def _bond_token(mol: Molecule, bidx: int) -> str:
    bond = mol.bonds[bidx]
    a, b = mol.atoms[bond.a], mol.atoms[bond.b]
    default_aromatic = a.aromatic and b.aromatic
    if bond.aromatic:
        return "" if default_aromatic else ":"
    if bond.order == 1:
        return "-" if default_aromatic else ""
    return {2: "=", 3: "#"}[bond.order]


def write_smiles(mol: Molecule, canonical: bool = True) -> str:
    """Serialize a Molecule; canonical form is cached on the molecule."""
    if canonical:
        cached = mol.cache_get("canon_smiles")
        if cached is not None:
            return cached

    n = len(mol.atoms)
    ranks = canonical_ranks(mol) if canonical else list(range(n))

    # pass 1: DFS in rank order to split tree edges from ring-closure edges
    visited = [False] * n
    tree_children: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    ring_at: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    ring_seen: set[int] = set()
    starts: list[int] = []

    def explore(idx: int, parent: int) -> None:
        visited[idx] = True
        for nbr, bidx in sorted(mol.neighbors[idx], key=lambda t: ranks[t[0]]):
            if nbr == parent:
                continue
            if visited[nbr]:
                # back edge; seen from both endpoints, register only once
                if bidx not in ring_seen:
                    ring_seen.add(bidx)
                    ring_at[nbr].append((idx, bidx))
                    ring_at[idx].append((nbr, bidx))
            else:
                tree_children[idx].append((nbr, bidx))
                explore(nbr, idx)

    for comp in mol.components():
        start = min(comp, key=lambda i: ranks[i])
        starts.append(start)
        explore(start, -1)

    # pass 2: emission; a ring edge opens (bare digit) at the endpoint emitted
    # first and closes (bond symbol + digit) at the other
    digit_of: dict[int, int] = {}
    free_digits: list[int] = []
    next_digit = [1]

    def digit_str(d: int) -> str:
        return str(d) if d < 10 else f"%{d:02d}"

    def take_digit() -> int:
        if free_digits:
            free_digits.sort()
            return free_digits.pop(0)
        d = next_digit[0]
        next_digit[0] += 1
        if d > 99:
            raise MoleculeError("ring closure digits exhausted")
        return d

    def emit(idx: int) -> str:
        parts = [_atom_token(mol, idx)]
        for nbr, bidx in sorted(ring_at[idx], key=lambda t: ranks[t[0]]):
            if bidx in digit_of:
                d = digit_of.pop(bidx)
                free_digits.append(d)
                parts.append(_bond_token(mol, bidx) + digit_str(d))
            else:
                d = take_digit()
                digit_of[bidx] = d
                parts.append(digit_str(d))
        children = tree_children[idx]
        for pos, (nbr, bidx) in enumerate(children):
            sub = _bond_token(mol, bidx) + emit(nbr)
            parts.append(sub if pos == len(children) - 1 else f"({sub})")
        return "".join(parts)

    fragments = sorted(emit(s) for s in starts)
    out = ".".join(fragments)
    if canonical:
        mol.cache_set("canon_smiles", out)
    return out
