from __future__ import annotations

from pathlib import Path

import pytest

from proofgrove.loader import load_file, standard_env

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN_FILES = ["basics.ml", "combinators.ml", "have_sorry.ml", "paper.ml", "simplify.ml"]


@pytest.fixture(scope="session")
def env():
    return standard_env()


@pytest.fixture(scope="session")
def golden_corpus():
    """All golden fixture files, loaded once."""
    return {name: load_file(FIXTURES / name) for name in GOLDEN_FILES}


@pytest.fixture(scope="session")
def paper_file(golden_corpus):
    return golden_corpus["paper.ml"]


def theorem_named(loaded, name):
    for th in loaded.theorems:
        if th.decl.name == name:
            return th
    raise KeyError(name)
