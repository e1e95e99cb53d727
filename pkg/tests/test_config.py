"""Tests for the config module."""

import os
from unittest.mock import patch

import pytest

from src.core.config import AppConfig, SinkhornConfig, SnsConfig, load_config


@pytest.fixture
def mock_env_vars():
    """Set up mock environment variables for testing."""
    env_vars = {
        "MOTSOLVE_LOG_LEVEL": "warning",
        "MOTSOLVE_LOG_FILE": "logs/motsolve.log",
        "MOTSOLVE_DEBUG": "false",
    }
    with patch.dict(os.environ, env_vars):
        yield


def test_load_config(mock_env_vars):
    """Test loading configuration from environment variables."""
    config = load_config()

    assert isinstance(config, AppConfig)
    assert config.log_level == "WARNING"
    assert config.log_file == "logs/motsolve.log"
    assert config.debug is False


def test_load_config_defaults():
    """Test loading configuration with default values when env vars are missing."""
    with patch("src.core.config.load_dotenv"):
        with patch.dict(os.environ, {}, clear=True):
            config = load_config()

            assert config.log_level == "INFO"
            assert config.log_file is None
            assert config.debug is False


def test_debug_flag_values():
    """Test different values for MOTSOLVE_DEBUG."""
    test_cases = [
        ("true", True),
        ("True", True),
        ("1", True),
        ("yes", True),
        ("false", False),
        ("0", False),
        ("", False),
        ("anything_else", False),
    ]

    for value, expected in test_cases:
        with patch.dict(os.environ, {"MOTSOLVE_DEBUG": value}):
            config = load_config()
            assert config.debug is expected, f"Failed for MOTSOLVE_DEBUG={value}"


def test_debug_forces_debug_level():
    with patch.dict(os.environ, {"MOTSOLVE_DEBUG": "1", "MOTSOLVE_LOG_LEVEL": "ERROR"}):
        assert load_config().log_level == "DEBUG"


def test_blank_log_file_is_unset():
    with patch.dict(os.environ, {"MOTSOLVE_LOG_FILE": "   "}):
        assert load_config().log_file is None


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SnsConfig(rho=0.0)
    with pytest.raises(ValueError):
        SinkhornConfig(max_outer=0)
    warmup = SnsConfig(n1=7, grad_tol=1e-8).warmup()
    assert warmup.max_outer == 7
    assert warmup.grad_tol == 1e-8
