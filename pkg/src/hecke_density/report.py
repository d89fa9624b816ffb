"""Deterministic JSON/CSV reports."""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__

SIG_DIGITS = 12
TOOL = "hecke-density"


@dataclass
class Verdict:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class Report:
    command: str
    config: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    timestamp: Optional[str] = None

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def to_dict(self) -> dict:
        return {
            "metadata": {
                "tool": TOOL,
                "version": __version__,
                "command": self.command,
                "config": self.config,
                "timestamp": self.timestamp,
            },
            "summary": self.summary,
            "rows": self.rows,
            "verdicts": [
                {"name": v.name, "passed": v.passed, "detail": v.detail} for v in self.verdicts
            ],
        }


class ReportWriteError(OSError):
    pass


def round_float(x: float) -> Optional[float]:
    """Round to 12 significant digits; non-finite values become None.

    ``repr`` of the result is what ends up in the output, which switches to
    exponent notation below 1e-4.
    """
    if not math.isfinite(x):
        return None
    if x == 0:
        return 0.0
    return float(f"{x:.{SIG_DIGITS}g}")


def normalize(obj):
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return round_float(float(obj))
    if isinstance(obj, complex):
        return {"re": round_float(obj.real), "im": round_float(obj.imag)}
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [normalize(v) for v in obj]
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (dict, list)):
        return json.dumps(v, separators=(",", ":"))
    return str(v)


def render(report: Report, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(normalize(report.to_dict()), indent=2, ensure_ascii=False) + "\n"
    if fmt == "csv":
        rows = normalize(report.rows)
        columns: list[str] = []
        for row in rows:
            for key in row:
                if key not in columns:
                    columns.append(key)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_csv_cell(row.get(c)) for c in columns])
        return buf.getvalue()
    raise ValueError(f"unknown report format {fmt!r}")


def emit_report(report: Report, fmt: str = "json", destination=None) -> None:
    """Write ``report`` to a path, an open text stream, or stdout."""
    text = render(report, fmt)
    if destination is None:
        sys.stdout.write(text)
        return
    if hasattr(destination, "write"):
        destination.write(text)
        return
    path = Path(destination)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ReportWriteError(f"cannot write report to {path}: {exc.strerror or exc}") from exc
