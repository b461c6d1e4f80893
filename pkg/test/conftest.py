import os
import pytest
from pathlib import Path

from tacticforge.data.seed import seed_theory
from tacticforge.data.theory_loading import load_theory
from tacticforge.kernel.bootstrap import new_environment
from tacticforge.settings import get_settings


FULL_ACCEPTANCE = os.environ.get("TACTICFORGE_FULL_ACCEPTANCE") == "1"


@pytest.fixture
def input_data_dir():
    """Return path to input data directory"""
    return Path(__file__).parent / "input_data"


@pytest.fixture
def output_data_dir():
    """Return path to output data directory"""
    return Path(__file__).parent / "output_data"


@pytest.fixture
def scaled():
    """Pick the reduced size for ordinary runs, the full one with TACTICFORGE_FULL_ACCEPTANCE=1"""
    return lambda small, full: full if FULL_ACCEPTANCE else small


@pytest.fixture
def settings():
    return get_settings()


@pytest.fixture
def env():
    """A fresh environment holding the boolean theory"""
    return new_environment()


@pytest.fixture(scope="session")
def seed_load():
    """The seed theory replayed once per session: (registry, loaded theory)"""
    return load_theory(seed_theory())


@pytest.fixture(scope="session")
def seed_registry(seed_load):
    """Registry of the seed theory. Tests must not register into it."""
    return seed_load[0]


@pytest.fixture(scope="session")
def seed_logs(seed_load):
    return seed_load[1].logs


@pytest.fixture
def workdir(tmp_path):
    path = tmp_path / "work"
    path.mkdir()
    return path
