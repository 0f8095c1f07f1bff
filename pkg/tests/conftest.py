import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gipgut.catalog import default_catalog
from gipgut.store import fresh_state


@pytest.fixture(scope="session")
def catalog():
    return default_catalog()


@pytest.fixture()
def state(catalog):
    return fresh_state(catalog)
