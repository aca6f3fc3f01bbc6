"""
Unit tests for runtime settings and logging set-up
"""

import json
from pathlib import Path

import pytest
import structlog
from pydantic import ValidationError

from experiments import RuntimeSettings, configure_logging, get_settings


class TestGetSettings:
    """Test cases for environment-driven settings"""

    def test_defaults(self):
        """Test an empty environment gives the defaults"""
        settings = get_settings(environ={})
        assert settings == RuntimeSettings()
        assert settings.trace_budget_bytes == 256 * 1024 * 1024

    def test_parses_environment(self):
        """Test values are read and coerced from strings"""
        settings = get_settings(
            environ={
                "RWI_LOG_LEVEL": "DEBUG",
                "RWI_LOG_JSON": "true",
                "RWI_WORKERS": "-1",
                "RWI_OUTPUT_DIR": "/tmp/out",
                "RWI_TRACE_BUDGET_MB": "0.5",
                "RWI_MNIST_DIR": "",
            }
        )
        assert settings.log_level == "DEBUG"
        assert settings.json_logs is True
        assert settings.workers == -1
        assert settings.output_dir == Path("/tmp/out")
        assert settings.mnist_dir is None
        assert settings.trace_budget_bytes == 512 * 1024

    @pytest.mark.parametrize("workers", ["0", "-2", "many"])
    def test_invalid_workers(self, workers):
        """Test worker counts must be positive or -1"""
        with pytest.raises(ValidationError):
            get_settings(environ={"RWI_WORKERS": workers})

    def test_env_file(self, tmp_path, monkeypatch):
        """Test a .env file fills unset variables"""
        # setenv first so the value loaded from the file is removed afterwards
        monkeypatch.setenv("RWI_TRACE_BUDGET_MB", "1")
        monkeypatch.delenv("RWI_TRACE_BUDGET_MB")
        env_file = tmp_path / ".env"
        env_file.write_text("RWI_TRACE_BUDGET_MB=8\n")
        assert get_settings(env_file=env_file).trace_budget_mb == 8.0


class TestConfigureLogging:
    """Test cases for structured logging set-up"""

    def test_json_lines_on_stderr(self, capsys):
        """Test JSON rendering of structlog events"""
        configure_logging("INFO", json_logs=True)
        structlog.get_logger("test").info("walk_simulated", n=100)
        line = capsys.readouterr().err.strip().splitlines()[-1]
        event = json.loads(line)
        assert event["event"] == "walk_simulated"
        assert event["n"] == 100
        assert event["level"] == "info"

    def test_level_filters(self, capsys):
        """Test events below the level are dropped"""
        configure_logging("WARNING")
        structlog.get_logger("test").info("hidden_event")
        assert "hidden_event" not in capsys.readouterr().err

    def test_unknown_level(self):
        """Test an unknown level name raises"""
        with pytest.raises(ValueError):
            configure_logging("LOUD")
