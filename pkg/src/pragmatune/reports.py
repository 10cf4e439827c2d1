"""Tabular reports over run logs.

Each emitter is pure text over parsed ResultRecords: a per-evaluation
trajectory, cumulative counts of configurations at or above a pooled
top-percentile cutoff, and the step depth of each method's best find.
All tables are tab-separated with a header row.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from .session import ResultRecord, record_from_dict


def read_log(path: str | Path) -> list[ResultRecord]:
    """Parse a line-delimited JSON run log."""
    records = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            records.append(record_from_dict(json.loads(line)))
    return records


def write_log(records: list[ResultRecord], path: str | Path) -> None:
    text = "".join(json.dumps(r.to_dict()) + "\n" for r in records)
    Path(path).write_text(text)


def _fmt(value: float | None) -> str:
    return "" if value is None else format(value, ".6g")


def emit_trajectory(records: list[ResultRecord]) -> str:
    """Per-evaluation trajectory with phase boundaries marked."""
    lines = ["index\tdepth\th\tbest_so_far_h\tf\tphase"]
    previous_phase: int | None = None
    for record in records:
        if record.phase != previous_phase:
            if previous_phase is not None:
                lines.append(f"# phase {record.phase}")
            previous_phase = record.phase
        lines.append(
            "\t".join(
                [
                    str(record.iteration),
                    str(record.depth),
                    _fmt(record.h),
                    _fmt(record.best_so_far_h),
                    _fmt(record.f),
                    str(record.phase),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def top_cutoff(values: list[float], fraction: float) -> float:
    """Smallest value of the nearest-rank top ``fraction`` tail."""
    if not values:
        raise ValueError("no values to pool")
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must be in (0, 1]")
    ordered = sorted(values)
    k = max(1, math.ceil(fraction * len(ordered)))
    return ordered[len(ordered) - k]


def emit_cutoff_counts(
    logs: list[list[ResultRecord]], fraction: float = 0.05
) -> str:
    """Cumulative per-method counts of configurations at/above the cutoff.

    The cutoff pools successful speedups across all logs. Methods whose
    logs end early repeat their final count.
    """
    pooled = [r.h for log in logs for r in log if r.h is not None]
    cutoff = top_cutoff(pooled, fraction)
    methods = []
    for i, log in enumerate(logs):
        methods.append(log[0].method if log and log[0].method else f"method{i}")
    counted = []
    for log in logs:
        cumulative, series = 0, []
        for record in log:
            if record.h is not None and record.h >= cutoff:
                cumulative += 1
            series.append(cumulative)
        counted.append(series)
    lines = [f"# cutoff {_fmt(cutoff)} (top {fraction:g} of pooled h)"]
    lines.append("index\t" + "\t".join(methods))
    for index in range(max((len(s) for s in counted), default=0)):
        row = [str(index)]
        for series in counted:
            row.append(str(series[min(index, len(series) - 1)] if series else 0))
        lines.append("\t".join(row))
    return "\n".join(lines) + "\n"


def emit_best_depth(logs: list[list[ResultRecord]]) -> str:
    """Step count (depth) of each method's best configuration."""
    lines = ["method\tbest_depth\tbest_h\tkey"]
    for i, log in enumerate(logs):
        best: ResultRecord | None = None
        for record in log:
            if record.h is not None and (best is None or record.h > best.h):
                best = record
        method = log[0].method if log and log[0].method else f"method{i}"
        if best is None:
            lines.append(f"{method}\t\t\t")
        else:
            lines.append(f"{method}\t{best.depth}\t{_fmt(best.h)}\t{best.key}")
    return "\n".join(lines) + "\n"
