"""
Structured records for identity checks and the shared report schema.

An ExperimentReport records one left-side/right-side comparison with its
parameters and a verdict.  Experiment runners flatten reports into rows
with the fixed column set {experiment, level, seed_batch, lhs, rhs,
residual, tolerance, verdict, millis} and write them as CSV plus a JSON
summary.  Row ordering and float formatting are deterministic so a config
fixes every output byte; the millis column is zero unless timing is
explicitly enabled, because measured wall time would break that contract.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ExperimentReport",
    "ReportRow",
    "ROW_COLUMNS",
    "verdict_for",
    "relative_residual",
    "trend_ok",
    "trend_verdict",
    "rows_to_csv",
    "write_report_csv",
    "write_summary_json",
    "PASSING",
]

ROW_COLUMNS = ("experiment", "level", "seed_batch", "lhs", "rhs",
               "residual", "tolerance", "verdict", "millis")

PASSING = frozenset({"pass", "trend-pass"})


def relative_residual(lhs: float, rhs: float, floor: float = 1e-12) -> float:
    """|lhs - rhs| over the larger side's magnitude, floored away from 0/0."""
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), floor)


def verdict_for(residual: float, tolerance: float) -> str:
    return "pass" if residual <= tolerance else "fail"


def trend_ok(values, band: float = 1.25) -> bool:
    """Nonincreasing within a one-sided multiplicative band.

    True iff each ladder entry is at most `band` times the previous one,
    the agreed allowance for Monte Carlo noise on convergence ladders.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("empty ladder")
    return bool(np.all(v[1:] <= band * v[:-1]))


def trend_verdict(values, band: float = 1.25) -> str:
    return "trend-pass" if trend_ok(values, band) else "trend-fail"


@dataclass
class ExperimentReport:
    """One identity check: both sides, the residual, and how it was run."""

    experiment: str
    parameters: dict
    lhs: float
    rhs: float
    residual: float
    tolerance: float
    verdict: str
    seed_info: dict = field(default_factory=dict)
    millis: int = 0

    @property
    def passed(self) -> bool:
        return self.verdict in PASSING

    def __str__(self):
        return (f"[{self.verdict:>10s}] {self.experiment}: lhs={self.lhs:.6g} "
                f"rhs={self.rhs:.6g} residual={self.residual:.3g} "
                f"(tol {self.tolerance:.3g})")


@dataclass(frozen=True)
class ReportRow:
    experiment: str
    level: object
    seed_batch: object
    lhs: float
    rhs: float
    residual: float
    tolerance: float
    verdict: str
    millis: int = 0

    def as_tuple(self):
        return (self.experiment, self.level, self.seed_batch, self.lhs, self.rhs,
                self.residual, self.tolerance, self.verdict, self.millis)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (np.floating,)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def _sort_key(row: ReportRow):
    return (row.experiment, _fmt(row.level), _fmt(row.seed_batch))


def rows_to_csv(rows) -> str:
    """Render rows as CSV text, sorted deterministically."""
    lines = [",".join(ROW_COLUMNS)]
    for r in sorted(rows, key=_sort_key):
        lines.append(",".join(_fmt(v) for v in r.as_tuple()))
    return "\n".join(lines) + "\n"


def write_report_csv(rows, path) -> None:
    with open(path, "w") as fh:
        fh.write(rows_to_csv(rows))


def write_summary_json(rows, path, config_echo: dict | None = None,
                       total_millis: int | None = None) -> dict:
    rows = sorted(rows, key=_sort_key)
    counts: dict[str, int] = {}
    for r in rows:
        counts[r.verdict] = counts.get(r.verdict, 0) + 1
    summary = {
        "n_rows": len(rows),
        "verdicts": dict(sorted(counts.items())),
        "all_pass": all(r.verdict in PASSING for r in rows),
        "experiments": sorted({r.experiment for r in rows}),
    }
    if config_echo is not None:
        summary["config"] = config_echo
    if total_millis is not None:
        summary["total_millis"] = total_millis
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary
