import pytest
import sys
import os

# Add project root to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import config  # noqa: E402
from repeater.run_config import load_run_config  # noqa: E402


@pytest.fixture
def paper_config():
    """Run config loaded from the bundled preset."""
    return load_run_config(config.PAPER_PRESET)


@pytest.fixture
def paper_params(paper_config):
    return paper_config.protocol


@pytest.fixture
def small_chunks(mocker):
    """Force many Monte Carlo chunks so worker scheduling actually interleaves."""
    mocker.patch('config.SIM_CHUNK_TRIALS', 64)


@pytest.fixture
def clean_env(monkeypatch):
    monkeypatch.delenv(config.CONFIG_ENV_VAR, raising=False)
