"""
Deterministic writers for run outputs.

Tables go through pandas with a fixed column order and 17 significant
digits; reports are plain ``name = value`` text. Nothing written here
carries a timestamp, so identical scenarios give byte-identical files.
"""

from pathlib import Path
from typing import Mapping, Optional, Union

import pandas as pd

from src.core.models import VerificationReport
from src.utils.logger import get_logger

logger = get_logger()

FLOAT_FORMAT = "%.17g"


def format_number(value: Optional[float]) -> str:
    if value is None:
        return "none"
    return FLOAT_FORMAT % float(value)


def render_report(report: VerificationReport, extra: Optional[Mapping[str, float]] = None) -> str:
    """Text form of a report: header, one line per check, then quantities."""
    lines = [f"# {report.title}", f"status = {'PASS' if report.passed else 'FAIL'}", ""]
    lines.append("[checks]")
    for check in report.checks:
        threshold = "" if check.threshold is None else f" threshold={format_number(check.threshold)}"
        detail = f" ({check.detail})" if check.detail else ""
        lines.append(
            f"{check.name} = {'PASS' if check.passed else 'FAIL'}"
            f" value={format_number(check.value)}{threshold}{detail}"
        )
    quantities = dict(report.quantities)
    quantities.update(extra or {})
    if quantities:
        lines.extend(["", "[quantities]"])
        lines.extend(f"{name} = {format_number(value)}" for name, value in quantities.items())
    return "\n".join(lines) + "\n"


def write_report(
    report: VerificationReport,
    path: Union[str, Path],
    extra: Optional[Mapping[str, float]] = None,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_report(report, extra), encoding="utf-8")
    logger.debug("Report written", path=str(path), checks=len(report.checks), passed=report.passed)
    return path


def write_table(table: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.debug("Table written", path=str(path), rows=len(table), columns=list(table.columns))
    return path
