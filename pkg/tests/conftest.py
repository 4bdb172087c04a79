import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from streamweave import kb as kb_mod

DATA = Path(__file__).parent.parent / "data"


@pytest.fixture(scope="session")
def agri_kb():
    return kb_mod.load_kb(DATA / "agri.kb.json")


@pytest.fixture(scope="session")
def pollution_kb():
    return kb_mod.load_kb(DATA / "pollution.kb.json")


@pytest.fixture(scope="session")
def partial_kb():
    return kb_mod.load_kb(DATA / "pollution-partial.kb.json")


@pytest.fixture(scope="session")
def combined_kb():
    return kb_mod.load_kb(DATA / "combined.kb.json")


def kind(label, value_type="real", unit="count"):
    return kb_mod.Kind(label, value_type, unit)
