from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from repo_fixture import FixtureRepo, build_fixture_repo

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def fixture_repo(tmp_path_factory) -> FixtureRepo:
    root = tmp_path_factory.mktemp("fixture-repo")
    return build_fixture_repo(root)


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR
