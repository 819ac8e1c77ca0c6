"""Building-block corpus ingestion.

File format: plain text, one record per line, ``SMILES[<TAB>identifier]``;
lines beginning ``#`` are ignored.  An optional ``# sha256:`` header line
(checksum over the non-comment body, as in the bundled data files) is
verified when present.

Records that fail to parse are never fatal: they are reported in a
:class:`CorpusReport` and logged to a sidecar ``<path>.rejects`` file with a
reason code, so a noisy corpus degrades to a smaller clean one.
"""
from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field

from .molecule import Molecule, MoleculeError, ValenceError
from .smiles import SmilesError, parse_smiles, write_smiles

__all__ = [
    "BlockRecord",
    "CorpusError",
    "CorpusReport",
    "load_building_blocks",
]


class CorpusError(Exception):
    """Raised for corpus-level failures (unreadable file, bad checksum)."""


@dataclass(frozen=True)
class BlockRecord:
    """One accepted building block."""

    mol: Molecule
    smiles: str  # canonical form
    identifier: str
    line_no: int


@dataclass
class CorpusReport:
    """Ingestion statistics plus the reject list (mirrored to the sidecar)."""

    path: str
    total_records: int = 0
    kept: int = 0
    stereo_stripped: int = 0
    rejects: list[tuple[int, str, str, str]] = field(default_factory=list)
    # tuples of (line_no, reason_code, raw_line, detail)

    @property
    def rejected(self) -> int:
        return len(self.rejects)

    def summary(self) -> str:
        return (
            f"{self.path}: {self.kept} kept, {self.rejected} rejected "
            f"of {self.total_records} records "
            f"({self.stereo_stripped} had stereochemistry stripped)"
        )


_STEREO_MARKS = ("@", "/", "\\")


def _verify_optional_checksum(lines: list[str], path: str) -> None:
    declared = None
    body: list[str] = []
    for line in lines:
        if line.startswith("# sha256:"):
            declared = line.split(":", 1)[1].strip()
        elif line.startswith("#") or not line.strip():
            continue
        else:
            body.append(line)
    if declared is None:
        return
    actual = hashlib.sha256("\n".join(body).encode("utf-8")).hexdigest()
    if actual != declared:
        raise CorpusError(
            f"{path}: checksum mismatch (expected {declared}, got {actual})"
        )


def load_building_blocks(
    path: str,
    rejects_path: str | None = None,
) -> tuple[list[BlockRecord], CorpusReport]:
    """Load, canonicalize, and de-duplicate a building-block file.

    Returns the accepted records (file order, first occurrence wins) and an
    ingestion report.  Rejects are written to ``rejects_path`` (default:
    ``path + ".rejects"``) as ``line<TAB>reason<TAB>raw`` rows; the sidecar
    is removed if there are no rejects, so its presence signals a problem.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise CorpusError(f"cannot read block file {path}: {exc}") from exc
    _verify_optional_checksum(lines, path)

    report = CorpusReport(path=path)
    records: list[BlockRecord] = []
    seen: dict[str, int] = {}
    for line_no, raw in enumerate(lines, start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        report.total_records += 1
        # split before stripping so a leading tab reads as an empty SMILES
        # field rather than promoting the identifier into the SMILES slot
        smiles, _, identifier = raw.partition("\t")
        smiles = smiles.strip()
        identifier = identifier.strip() or f"line{line_no}"
        if not smiles:
            report.rejects.append((line_no, "empty", raw, "no SMILES field"))
            continue
        try:
            mol = parse_smiles(smiles)
            canon = write_smiles(mol)
        except (SmilesError, MoleculeError, ValenceError) as exc:
            report.rejects.append((line_no, "parse_error", raw, str(exc)))
            continue
        if any(mark in smiles for mark in _STEREO_MARKS):
            report.stereo_stripped += 1
        if canon in seen:
            report.rejects.append(
                (line_no, "duplicate", raw, f"same molecule as line {seen[canon]}")
            )
            continue
        seen[canon] = line_no
        records.append(BlockRecord(mol, canon, identifier, line_no))
        report.kept += 1

    sidecar = rejects_path if rejects_path is not None else path + ".rejects"
    if report.rejects:
        with open(sidecar, "w", encoding="utf-8") as fh:
            fh.write("# line\treason\traw\tdetail\n")
            for line_no, reason, raw, detail in report.rejects:
                fh.write(f"{line_no}\t{reason}\t{raw}\t{detail}\n")
    elif os.path.exists(sidecar):
        os.remove(sidecar)
    return records, report
