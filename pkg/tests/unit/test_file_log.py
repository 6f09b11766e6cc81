"""Unit tests for car_classifier.file_log."""
from __future__ import annotations

import io
import logging
import logging.handlers
from pathlib import Path

import pytest

from car_classifier import file_log


@pytest.fixture(autouse=True)
def _clean_handlers():
    file_log.shutdown()
    yield
    file_log.shutdown()


class TestFileLogging:
    def test_disabled_returns_none(self, tmp_path: Path):
        assert file_log.init_file_logging(False, tmp_path) is None
        assert not file_log.is_enabled()

    def test_writes_to_log_file(self, tmp_path: Path):
        path = file_log.init_file_logging(True, tmp_path / "logs")
        assert path == tmp_path / "logs" / file_log.LOG_FILENAME
        assert file_log.is_enabled()
        logging.getLogger("car_classifier.mining").info("mined 12 rules")
        assert "mined 12 rules" in path.read_text(encoding="utf-8")

    def test_idempotent(self, tmp_path: Path):
        first = file_log.init_file_logging(True, tmp_path)
        second = file_log.init_file_logging(True, tmp_path / "elsewhere")
        assert first == second
        tagged = [h for h in file_log.get_logger().handlers if isinstance(h, logging.handlers.RotatingFileHandler)]
        assert len(tagged) == 1

    def test_disable_removes_handler(self, tmp_path: Path):
        file_log.init_file_logging(True, tmp_path)
        file_log.init_file_logging(False, tmp_path)
        assert not file_log.is_enabled()


class TestConsoleLogging:
    @pytest.mark.parametrize(
        "verbosity, level",
        [(0, logging.WARNING), (1, logging.INFO), (2, logging.DEBUG), (5, logging.DEBUG)],
    )
    def test_verbosity_level(self, verbosity, level):
        assert file_log.verbosity_level(verbosity) == level

    def test_stream_receives_records(self):
        stream = io.StringIO()
        file_log.init_console_logging(1, stream)
        logging.getLogger("car_classifier.cli").info("reading corpus")
        logging.getLogger("car_classifier.cli").debug("hidden")
        assert "INFO car_classifier.cli: reading corpus" in stream.getvalue()
        assert "hidden" not in stream.getvalue()

    def test_single_console_handler(self):
        file_log.init_console_logging(0, io.StringIO())
        file_log.init_console_logging(2, io.StringIO())
        handlers = [h for h in file_log.get_logger().handlers if type(h) is logging.StreamHandler]
        assert len(handlers) == 1
        assert handlers[0].level == logging.DEBUG

    def test_shutdown_clears(self):
        file_log.init_console_logging(1, io.StringIO())
        file_log.shutdown()
        assert file_log.get_logger().handlers == []
        assert file_log.get_logger().level == logging.NOTSET


class TestDiagnostics:
    def test_snapshot_content(self):
        text = file_log.build_diagnostics_snapshot(version="1.2.3", extra_modules=("no_such_module_xyz",))
        assert "car_classifier diagnostics" in text
        assert "Version        : 1.2.3" in text
        assert "no_such_module_xyz" in text
        assert "not loaded" in text

    def test_snapshot_goes_to_file(self, tmp_path: Path):
        path = file_log.init_file_logging(True, tmp_path)
        file_log.log_diagnostics_snapshot("9.9.9", label="test")
        assert "Diagnostics snapshot (test)" in path.read_text(encoding="utf-8")

    def test_snapshot_needs_file_logging(self, tmp_path: Path):
        file_log.log_diagnostics_snapshot("9.9.9")
        assert not (tmp_path / file_log.LOG_FILENAME).exists()
