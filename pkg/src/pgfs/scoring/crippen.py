"""Crippen logP and molar refractivity from an atom-contribution table.

The bundled table (``data/crippen.tsv``) carries ordered rows of
``kind<TAB>class<TAB>pattern<TAB>logp<TAB>mr``. ``A`` rows type heavy atoms:
the first row whose pattern matches anchored at the atom assigns the class.
``H`` rows type implicit hydrogens the same way via the heavy atom bearing
them. The final ``A`` wildcard row catches atoms no other row types; such
fallbacks are counted and reported through ``typing_warnings``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from importlib import resources

from ..chem.molecule import Molecule
from ..chem.smarts import PatternGraph, match_atom, parse_smarts


class DataFileError(ValueError):
    """Raised when a bundled data file is malformed or corrupted."""


@dataclass(frozen=True)
class ContributionRow:
    kind: str  # "A" heavy atom, "H" implicit hydrogen
    type_name: str
    pattern: PatternGraph
    logp: float
    mr: float


def verify_checksum_header(text: str, path_hint: str) -> list[str]:
    """Validate the ``# sha256:`` header of a data file and return its body
    lines (comments and blanks stripped)."""
    declared = None
    body: list[str] = []
    for line in text.splitlines():
        if line.startswith("# sha256:"):
            declared = line.split(":", 1)[1].strip()
        elif line.startswith("#") or not line.strip():
            continue
        else:
            body.append(line)
    if declared is None:
        raise DataFileError(f"{path_hint}: missing '# sha256:' header")
    actual = hashlib.sha256("\n".join(body).encode("utf-8")).hexdigest()
    if actual != declared:
        raise DataFileError(
            f"{path_hint}: checksum mismatch (expected {declared}, got {actual})"
        )
    return body


def _load_rows(text: str, path_hint: str) -> list[ContributionRow]:
    rows = []
    for line in verify_checksum_header(text, path_hint):
        parts = line.split("\t")
        if len(parts) != 5:
            raise DataFileError(f"{path_hint}: bad row {line!r}")
        kind, name, pattern, logp, mr = parts
        if kind not in ("A", "H"):
            raise DataFileError(f"{path_hint}: unknown row kind {kind!r}")
        rows.append(
            ContributionRow(kind, name, parse_smarts(pattern), float(logp), float(mr))
        )
    return rows


class CrippenTable:
    def __init__(self, rows: list[ContributionRow]):
        self.atom_rows = [r for r in rows if r.kind == "A"]
        self.h_rows = [r for r in rows if r.kind == "H"]
        if not self.atom_rows or not self.h_rows:
            raise DataFileError("crippen table needs both A and H rows")
        self.typing_warnings = 0
        # bucket rows by the anchor's pinned element so typing an atom only
        # tries rows that can possibly match it
        self._buckets: dict[tuple[int, bool] | None, list[ContributionRow]] = {}

    def _rows_for(self, element: int, aromatic: bool) -> list[ContributionRow]:
        key = (element, aromatic)
        cached = self._buckets.get(key)
        if cached is None:
            cached = []
            for row in self.atom_rows:
                spec = row.pattern.atoms[0].element_spec()
                if spec is None or (
                    spec[0] == element and spec[1] in (None, aromatic)
                ):
                    cached.append(row)
            self._buckets[key] = cached
        return cached

    def type_atoms(self, mol: Molecule) -> list[ContributionRow]:
        """First-match-wins class per heavy atom; wildcard fallback."""
        out = []
        for idx, atom in enumerate(mol.atoms):
            hit = None
            for row in self._rows_for(atom.element, atom.aromatic):
                if match_atom(row.pattern, mol, idx):
                    hit = row
                    break
            if hit is None:
                self.typing_warnings += 1
                hit = self.atom_rows[-1]  # wildcard row
            out.append(hit)
        return out

    def type_hydrogens(self, mol: Molecule) -> list[ContributionRow | None]:
        """Hydrogen class for each heavy atom bearing implicit H, else None."""
        out: list[ContributionRow | None] = []
        for idx, atom in enumerate(mol.atoms):
            if atom.implicit_h == 0:
                out.append(None)
                continue
            hit = None
            for row in self.h_rows:
                if match_atom(row.pattern, mol, idx):
                    hit = row
                    break
            out.append(hit if hit is not None else self.h_rows[-1])
        return out

    def contributions(self, mol: Molecule) -> tuple[float, float]:
        cached = mol.cache_get("crippen")
        if cached is not None:
            return cached
        logp = 0.0
        mr = 0.0
        for row in self.type_atoms(mol):
            logp += row.logp
            mr += row.mr
        for atom, row in zip(mol.atoms, self.type_hydrogens(mol)):
            if row is not None:
                logp += atom.implicit_h * row.logp
                mr += atom.implicit_h * row.mr
        mol.cache_set("crippen", (logp, mr))
        return logp, mr


_DEFAULT_TABLE: CrippenTable | None = None


def default_table() -> CrippenTable:
    global _DEFAULT_TABLE
    if _DEFAULT_TABLE is None:
        text = (
            resources.files("pgfs.data").joinpath("crippen.tsv").read_text("utf-8")
        )
        _DEFAULT_TABLE = CrippenTable(_load_rows(text, "crippen.tsv"))
    return _DEFAULT_TABLE


def load_crippen_table(path: str) -> CrippenTable:
    with open(path, "r", encoding="utf-8") as fh:
        return CrippenTable(_load_rows(fh.read(), path))


def crippen_logp(mol: Molecule, table: CrippenTable | None = None) -> float:
    return (table or default_table()).contributions(mol)[0]


def crippen_mr(mol: Molecule, table: CrippenTable | None = None) -> float:
    return (table or default_table()).contributions(mol)[1]
