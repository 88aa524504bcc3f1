import os

import pytest

from medford.schema import base_mode, load_schema_file

TESTS_DIR = os.path.dirname(__file__)
CORPUS_DIR = os.path.join(TESTS_DIR, "corpus")
FIXTURES_DIR = os.path.join(TESTS_DIR, "fixtures")


def corpus_path(name: str) -> str:
    return os.path.join(CORPUS_DIR, name)


def mode_named(name: str):
    if name == "base":
        return base_mode()
    mode, diags = load_schema_file(os.path.join(FIXTURES_DIR, "schemas", f"{name}.yaml"), name)
    assert diags == [], f"fixture schema {name} must load cleanly"
    return mode


@pytest.fixture(scope="session")
def corpus_dir() -> str:
    return CORPUS_DIR
