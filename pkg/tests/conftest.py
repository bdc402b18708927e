import pytest

from hybridgrp.build import fixtures


@pytest.fixture(scope="session")
def corpus():
    """The standard fixture groups F1..F6 (built once per test run)."""
    return fixtures()
