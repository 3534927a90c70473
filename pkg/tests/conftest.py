"""
Shared fixtures for the test suite.
"""

from pathlib import Path

import pytest

from src.catalog import builtin_environment
from src.fivegpp import CIPHERS, Keyring
from utils.config import reset_config


PROJECT_CONFIG = Path(__file__).parent.parent / "config.yaml"


@pytest.fixture(autouse=True)
def project_config(monkeypatch):
    """Every test sees the repository config.yaml, whatever the environment says"""
    monkeypatch.delenv("PUPPETEER_CONFIG", raising=False)
    config = reset_config(PROJECT_CONFIG)
    yield config
    reset_config()


@pytest.fixture
def fig3_env():
    return builtin_environment("fig3")


@pytest.fixture
def fig4_env():
    return builtin_environment("fig4")


@pytest.fixture
def aka_env():
    return builtin_environment("aka")


@pytest.fixture
def identity_keyring():
    """All 16 key ids under the identity cipher, so encodings can be checked by hand"""
    return Keyring.derived(range(1, 17), seed=0, cipher=CIPHERS["identity"])


@pytest.fixture
def shake_keyring():
    return Keyring.derived(range(1, 17), seed=0, cipher=CIPHERS["shake"])
