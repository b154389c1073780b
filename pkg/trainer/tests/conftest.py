import json
import os
from pathlib import Path

import pytest

from corpus_utils import synthetic_rows

os.environ.setdefault("HF_HUB_OFFLINE", "1")  # skip hub probes in CI

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def hierarchy_file():
    return FIXTURES / "hierarchy.json"


@pytest.fixture(scope="session")
def leaf_order(hierarchy_file):
    return tuple(json.loads(hierarchy_file.read_text(encoding="utf-8"))["leaf_order"])


@pytest.fixture()
def dataset_file(tmp_path, leaf_order):
    path = tmp_path / "train.json"
    path.write_text(json.dumps(synthetic_rows(leaf_order, 600)), encoding="utf-8")
    return path
