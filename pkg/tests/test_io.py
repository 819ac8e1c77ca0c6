"""Building-block corpus ingestion: canonicalization, rejects, checksums."""
from __future__ import annotations

import hashlib

import pytest

from pgfs.chem import CorpusError, load_building_blocks


def write_corpus(tmp_path, body: str, name: str = "blocks.smi"):
    path = tmp_path / name
    path.write_text(body)
    return path


def test_basic_ingestion(tmp_path):
    path = write_corpus(
        tmp_path,
        "# a comment\n"
        "CCO\tethanol\n"
        "\n"
        "c1ccccc1\tbenzene\n"
        "CC(=O)O\n",
    )
    records, report = load_building_blocks(str(path))
    assert [r.identifier for r in records] == ["ethanol", "benzene", "line5"]
    assert report.kept == 3
    assert report.rejected == 0
    assert report.total_records == 3
    # stored SMILES are canonical
    assert records[1].smiles == "c1ccccc1"


def test_bad_records_rejected_not_fatal(tmp_path):
    path = write_corpus(
        tmp_path,
        "CCO\tok\n"
        "C1CC\tunclosed\n"
        "C(C)(C)(C)(C)C\tfive_bonds\n"
        "\tno_smiles\n"
        "CC\tok2\n",
    )
    records, report = load_building_blocks(str(path))
    assert [r.identifier for r in records] == ["ok", "ok2"]
    assert report.rejected == 3
    reasons = [reason for _, reason, _, _ in report.rejects]
    assert reasons == ["parse_error", "parse_error", "empty"]


def test_duplicates_collapse_to_first(tmp_path):
    path = write_corpus(
        tmp_path,
        "CCO\tfirst\n"
        "OCC\tsame_molecule\n"
        "C(C)O\tagain\n",
    )
    records, report = load_building_blocks(str(path))
    assert len(records) == 1
    assert records[0].identifier == "first"
    assert {reason for _, reason, _, _ in report.rejects} == {"duplicate"}


def test_rejects_sidecar_written_and_removed(tmp_path):
    path = write_corpus(tmp_path, "CCO\tok\nC1CC\tbad\n")
    sidecar = tmp_path / "blocks.smi.rejects"
    load_building_blocks(str(path))
    assert sidecar.exists()
    body = sidecar.read_text()
    assert "parse_error" in body and "C1CC" in body

    # a clean reload of a fixed file removes the stale sidecar
    path.write_text("CCO\tok\n")
    load_building_blocks(str(path))
    assert not sidecar.exists()


def test_rejects_sidecar_custom_location(tmp_path):
    path = write_corpus(tmp_path, "C1CC\tbad\n")
    custom = tmp_path / "elsewhere.rejects"
    load_building_blocks(str(path), rejects_path=str(custom))
    assert custom.exists()
    assert not (tmp_path / "blocks.smi.rejects").exists()


def test_stereo_marks_counted(tmp_path):
    path = write_corpus(tmp_path, "C[C@H](N)C(=O)O\talanine\nF/C=C/F\tdifluoro\n")
    records, report = load_building_blocks(str(path))
    assert report.stereo_stripped == 2
    assert report.kept == 2
    # canonical forms carry no stereo marks
    for rec in records:
        assert not any(m in rec.smiles for m in "@/\\")


def test_checksum_header_verified(tmp_path):
    body = "CCO\tok\nCC\tok2"
    digest = hashlib.sha256(body.encode()).hexdigest()
    good = write_corpus(tmp_path, f"# sha256: {digest}\n{body}\n", "good.smi")
    records, _ = load_building_blocks(str(good))
    assert len(records) == 2

    bad = write_corpus(tmp_path, f"# sha256: {'0' * 64}\n{body}\n", "bad.smi")
    with pytest.raises(CorpusError):
        load_building_blocks(str(bad))


def test_missing_file_raises():
    with pytest.raises(CorpusError):
        load_building_blocks("/nonexistent/blocks.smi")


def test_bundled_corpus_is_clean(blocks):
    # fixture asserts zero rejects; spot-check canonical dedup here
    smiles = [rec.smiles for rec in blocks]
    assert len(set(smiles)) == len(smiles)
    assert len(blocks) >= 300


def test_report_summary_readable(tmp_path):
    path = write_corpus(tmp_path, "CCO\tok\nC1CC\tbad\n")
    _, report = load_building_blocks(str(path))
    text = report.summary()
    assert "1 kept" in text and "1 rejected" in text
