"""Shared fixtures: the bundled corpus, template library, and block index.

Everything here is read-only and session-scoped; tests that mutate state
build their own objects.
"""
from __future__ import annotations

import pytest

from pgfs.chem import load_building_blocks, load_templates
from pgfs.config import data_root
from pgfs.env import build_index


@pytest.fixture(scope="session")
def blocks():
    records, report = load_building_blocks(str(data_root() / "building_blocks.smi"))
    assert report.rejected == 0, report.summary()
    return records


@pytest.fixture(scope="session")
def templates():
    return load_templates(str(data_root() / "templates.txt"))


@pytest.fixture(scope="session")
def index(blocks, templates):
    return build_index(blocks, templates)


@pytest.fixture(scope="session")
def sa_table():
    from pgfs.scoring import FragmentTable

    return FragmentTable.from_text((data_root() / "sa_table.txt").read_text())
