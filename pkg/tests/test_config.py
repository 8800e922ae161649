"""
Tests for configuration management.
"""

import pytest

from tdm.config import ToolConfig, setup_logging
from tdm.engine import DEFAULT_STATE_CAP


def test_default_config():
    """Test default configuration values."""
    config = ToolConfig()

    assert config.state_cap == DEFAULT_STATE_CAP == 1_000_000
    assert config.log_level == "WARNING"
    assert config.debug is False


def test_config_from_env(monkeypatch):
    """Test configuration from environment variables."""
    monkeypatch.setenv("TDM_STATE_CAP", "5000")
    monkeypatch.setenv("TDM_LOG_LEVEL", "debug")
    monkeypatch.setenv("TDM_DEBUG", "true")

    config = ToolConfig.from_env()

    assert config.state_cap == 5000
    assert config.log_level == "DEBUG"
    assert config.debug is True


def test_config_from_empty_env(monkeypatch):
    for name in ("TDM_STATE_CAP", "TDM_LOG_LEVEL", "TDM_DEBUG"):
        monkeypatch.delenv(name, raising=False)

    assert ToolConfig.from_env() == ToolConfig()


def test_debug_only_enabled_by_true(monkeypatch):
    monkeypatch.setenv("TDM_DEBUG", "1")
    assert ToolConfig.from_env().debug is False


@pytest.mark.parametrize("raw", ["lots", "1.5", ""])
def test_state_cap_must_be_integer(monkeypatch, raw):
    monkeypatch.setenv("TDM_STATE_CAP", raw)
    with pytest.raises(ValueError, match="TDM_STATE_CAP"):
        ToolConfig.from_env()


def test_config_validation():
    """Test configuration parameter validation."""
    with pytest.raises(ValueError):
        ToolConfig(state_cap=0)
    with pytest.raises(ValueError):
        ToolConfig(log_level="LOUD")


def test_logging_goes_to_stderr(capsys):
    import structlog

    setup_logging("INFO")
    structlog.get_logger("tdm.test").info("hello", answer=42)
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "hello" in captured.err
    assert "answer=42" in captured.err


def test_logging_level_filters(capsys):
    import structlog

    setup_logging("WARNING")
    structlog.get_logger("tdm.test").info("quiet")
    assert capsys.readouterr().err == ""
