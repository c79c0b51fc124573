"""
Tests for the logging configuration.
"""

import io

import pytest
from loguru import logger

from src.core.config import get_settings
from src.utils.logger import get_logger, setup_logger


@pytest.fixture
def stream():
    sink = io.StringIO()
    yield sink
    logger.remove()


def test_log_levels(stream):
    """Messages below the configured level are dropped."""
    setup_logger(sink=stream, level="warning", to_file=False)
    log = get_logger()

    log.info("Picard step")
    log.warning("Margin sweep found a non-positive margin")

    text = stream.getvalue()
    assert "Picard step" not in text
    assert "Margin sweep found a non-positive margin" in text
    assert "WARNING" in text


def test_structured_logging(stream):
    """Keyword context is rendered with the message."""
    setup_logger(sink=stream, level="DEBUG", to_file=False)
    get_logger().info("Picard iteration converged", iterations=7, grid_size=2048)

    text = stream.getvalue()
    assert "Picard iteration converged" in text
    assert "'iterations': 7" in text
    assert "'grid_size': 2048" in text


def test_exception_logging(stream):
    setup_logger(sink=stream, level="DEBUG", to_file=False)
    try:
        1.0 / 0.0
    except ZeroDivisionError:
        get_logger().exception("Root search crashed")

    text = stream.getvalue()
    assert "Root search crashed" in text
    assert "ZeroDivisionError" in text


def test_context_logging(stream):
    setup_logger(sink=stream, level="DEBUG", to_file=False)
    bound = get_logger().bind(command="solve-fan", scenario="default")

    bound.info("Running command")

    assert "'command': 'solve-fan'" in stream.getvalue()


def test_file_logging(stream, tmp_path, monkeypatch):
    """Rotated files land in LOG_DIR when file logging is on."""
    monkeypatch.setenv("LOG_DIR", str(tmp_path / "logs"))
    get_settings.cache_clear()
    try:
        setup_logger(sink=stream, level="INFO", to_file=True)
        get_logger().error("Checks failed", failures=["rh_residual_right_momentum"])
        logger.remove()
    finally:
        get_settings.cache_clear()

    names = sorted(p.name for p in (tmp_path / "logs").iterdir())
    assert any(name.startswith("wild_") for name in names)
    assert any(name.startswith("errors_") for name in names)
