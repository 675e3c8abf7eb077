import os

import pytest


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory):
    """Mode-table cache shared by the slow tests (override with CUSPWAVE_TEST_CACHE)."""
    path = os.environ.get("CUSPWAVE_TEST_CACHE")
    if path:
        return path
    return str(tmp_path_factory.mktemp("modes"))
