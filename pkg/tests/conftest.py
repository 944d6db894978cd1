from pathlib import Path

import pytest

from quadsurf import load_pair

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def fixture_path():
    return lambda name: FIXTURES / f"{name}.txt"


@pytest.fixture
def main_pair():
    return load_pair(FIXTURES / "main_pair.txt")


@pytest.fixture
def q1_pair():
    return load_pair(FIXTURES / "q1.txt")


@pytest.fixture
def canonical_pair():
    return load_pair(FIXTURES / "canonical_31.txt")


@pytest.fixture
def exceptional_pair():
    return load_pair(FIXTURES / "exceptional_21.txt")
