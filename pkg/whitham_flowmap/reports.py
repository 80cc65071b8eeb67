"""
Report assembly for experiments.

Slope fits, verdict bookkeeping and the human-readable summary printed
after each run. The structured document itself is rendered by
serialization.save_experiment_report().
"""

import math
from typing import Any, Iterable, Optional

import numpy as np
from scipy import stats

from .errors import InsufficientDataError
from .models import Diagnostics, ExperimentReport


def fit_loglog_slope(points: Iterable[tuple[float, float]]) -> tuple[float, float]:
    """
    Least-squares slope of log y against log x.

    Returns:
        (slope, halfwidth) where halfwidth is the standard error of the slope

    Raises:
        InsufficientDataError: fewer than 3 points, x not strictly
            increasing, or a non-positive value
    """
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise InsufficientDataError(f"slope fit needs at least 3 points, got {len(pts)}")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    if np.any(x <= 0) or np.any(np.diff(x) <= 0):
        raise InsufficientDataError("slope fit needs positive, strictly increasing x")
    if np.any(~np.isfinite(y)) or np.any(y <= 0):
        raise InsufficientDataError(
            "slope fit needs positive finite values; the decay has reached the numerical floor"
        )
    fit = stats.linregress(np.log(x), np.log(y))
    halfwidth = float(fit.stderr) if np.isfinite(fit.stderr) else 0.0
    return float(fit.slope), halfwidth


def record_slope(report: ExperimentReport, name: str, points, expected: Optional[float] = None):
    """
    Fit and store a slope; a failed fit is stored with its reason.

    Returns the slope, or None when the fit was impossible.
    """
    try:
        slope, halfwidth = fit_loglog_slope(points)
    except InsufficientDataError as e:
        report.slopes[name] = {"slope": None, "halfwidth": None, "error": str(e)}
        return None
    entry: dict[str, Any] = {"slope": slope, "halfwidth": halfwidth}
    if expected is not None:
        entry["expected"] = expected
    report.slopes[name] = entry
    return slope


def add_verdict(report: ExperimentReport, name: str, passed: bool, threshold_key: str,
                measured: Any = None, detail: str = ""):
    """
    Record a named check; `threshold_key` must name an entry of report.params.
    """
    if threshold_key not in report.params:
        raise KeyError(f"verdict {name!r} references unknown threshold {threshold_key!r}")
    verdict: dict[str, Any] = {
        "passed": bool(passed),
        "threshold": threshold_key,
        "threshold_value": report.params[threshold_key],
    }
    if measured is not None:
        verdict["measured"] = measured
    if detail:
        verdict["detail"] = detail
    report.verdicts[name] = verdict


def is_strictly_decreasing(values) -> bool:
    vals = list(values)
    return len(vals) >= 2 and all(b < a for a, b in zip(vals, vals[1:]))


def diagnostics_summary(diag: Diagnostics) -> dict[str, Any]:
    """Compact per-instance figures for report rows."""
    return {
        "status": diag.status,
        "breakdown_time": diag.breakdown_time,
        "steps": diag.steps,
        "l2_drift": diag.relative_drift("l2"),
        "hamiltonian_drift": diag.relative_drift("hamiltonian"),
        "max_slope": max(diag.max_slope) if diag.max_slope else None,
        "fitted_cs": diag.fitted_cs,
    }


def report_document(report: ExperimentReport) -> dict[str, Any]:
    """The structured document: experiment_id, params, rows, slopes, verdicts."""
    return {
        "experiment_id": report.experiment_id,
        "params": report.params,
        "rows": report.rows,
        "slopes": report.slopes,
        "verdicts": report.verdicts,
    }


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        if not math.isfinite(value):
            return str(value)
        return f"{value:.6g}"
    if value is None:
        return "-"
    return str(value)


def generate_text_summary(report: ExperimentReport) -> str:
    """Human-readable summary of a report."""
    lines = []
    lines.append("=" * 70)
    lines.append(f"EXPERIMENT: {report.experiment_id}")
    lines.append("=" * 70)
    lines.append("")

    lines.append("PARAMETERS")
    lines.append("-" * 40)
    for key, value in report.params.items():
        if isinstance(value, list):
            value = ", ".join(_fmt(v) for v in value)
        lines.append(f"  {key}: {_fmt(value)}")
    lines.append("")

    lines.append("MEASUREMENTS")
    lines.append("-" * 40)
    if report.rows:
        for row in report.rows:
            lines.append("  " + ", ".join(f"{k}={_fmt(v)}" for k, v in row.items()))
    else:
        lines.append("  No measurements")
    lines.append("")

    if report.slopes:
        lines.append("FITTED SLOPES")
        lines.append("-" * 40)
        for name, fit in report.slopes.items():
            if fit.get("slope") is None:
                lines.append(f"  {name}: not fitted ({fit.get('error', '')})")
                continue
            expected = f" (expected {_fmt(fit['expected'])})" if "expected" in fit else ""
            lines.append(f"  {name}: {fit['slope']:.4f} +/- {fit['halfwidth']:.4f}{expected}")
        lines.append("")

    lines.append("VERDICTS")
    lines.append("-" * 40)
    for name, verdict in report.verdicts.items():
        mark = "PASS" if verdict["passed"] else "FAIL"
        measured = f", measured {_fmt(verdict['measured'])}" if "measured" in verdict else ""
        lines.append(
            f"  [{mark}] {name} ({verdict['threshold']}="
            f"{_fmt(verdict['threshold_value'])}{measured})"
        )
        if verdict.get("detail"):
            lines.append(f"         {verdict['detail']}")
    lines.append("")

    lines.append("=" * 70)
    if report.passed:
        lines.append("STATUS: ALL CHECKS PASSED")
    else:
        lines.append(f"STATUS: {len(report.failed_verdicts)} CHECK(S) FAILED")
    lines.append("=" * 70)
    return "\n".join(lines)
