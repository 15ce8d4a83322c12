"""Deterministic replay of execution plans against a declared set of faulty tests."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

from .errors import DatasetError
from .tcp import ExecutionPlan, TestCase


@dataclass(frozen=True)
class FaultModel:
    faulty_ids: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "faulty_ids", frozenset(self.faulty_ids))

    def check(self, dataset: Sequence[TestCase]) -> None:
        known = {t.id for t in dataset}
        unknown = sorted(self.faulty_ids - known)
        if unknown:
            raise DatasetError(f"fault model names unknown test ids: {unknown}")


@dataclass(frozen=True)
class EvaluationReport:
    label: str
    executed: int
    total_time: float
    failures_found: int
    time_to_all_failures: float
    # (cumulative seconds, failures found so far) after each step
    discovery: tuple[tuple[float, int], ...] = field(default=(), repr=False)


def simulate(plan: ExecutionPlan, dataset: Sequence[TestCase], faults: FaultModel,
             label: str = "plan") -> EvaluationReport:
    faults.check(dataset)
    times = {t.id: t.exec_time for t in dataset}
    found: set[int] = set()
    elapsed = 0
    last_hit = 0
    curve = []
    for step in plan.steps:
        if step.test_id not in times:
            raise DatasetError(f"plan runs unknown test {step.test_id}")
        elapsed += times[step.test_id]
        if step.test_id in faults.faulty_ids and step.test_id not in found:
            found.add(step.test_id)
            last_hit = elapsed
        curve.append((elapsed, len(found)))
    if len(found) < len(faults.faulty_ids):
        last_hit = elapsed
    return EvaluationReport(label, len(plan.steps), elapsed, len(found), last_hit, tuple(curve))


METRICS = (
    ("Executed tests", "executed"),
    ("Spent time (total, s)", "total_time"),
    ("Failures found", "failures_found"),
    ("Time to all failures (s)", "time_to_all_failures"),
)


def _fmt(v) -> str:
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return f"{v:g}" if isinstance(v, float) else str(v)


def compare(reports: Sequence[EvaluationReport]) -> str:
    """Metrics as rows, one column per report, in input order."""
    if len(reports) < 2:
        raise ValueError("compare needs at least two reports")
    header = [""] + [r.label for r in reports]
    rows = [header] + [[name] + [_fmt(getattr(r, attr)) for r in reports] for name, attr in METRICS]
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = []
    for n, row in enumerate(rows):
        cells = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        lines.append(" | ".join(cells).rstrip())
        if n == 0:
            lines.append("-+-".join("-" * w for w in widths))
    return "\n".join(lines)


def report_to_dict(r: EvaluationReport) -> dict:
    return {
        "label": r.label,
        "executed": r.executed,
        "total_time": r.total_time,
        "failures_found": r.failures_found,
        "time_to_all_failures": r.time_to_all_failures,
    }


def discovery_csv(reports: Sequence[EvaluationReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label", "step", "cumulative_time", "failures_found"])
    for r in reports:
        for i, (t, k) in enumerate(r.discovery, 1):
            w.writerow([r.label, i, _fmt(t), k])
    return buf.getvalue()
