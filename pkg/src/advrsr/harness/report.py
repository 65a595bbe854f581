"""Phase-transition summaries of a sweep's summary.csv."""

from __future__ import annotations

import csv
import math
import re
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from ..errors import NonMonotoneWarning


@dataclass
class Crossing:
    estimator: str
    line: str          # the sweep axes other than the x column
    xs: list
    rates: list
    crossing: Optional[float]
    label: str         # crossing as printed, e.g. "3.2", "< 1", "> 8"
    thresholds: dict
    monotone: bool


def _float(s: str) -> float:
    try:
        return float(s)
    except (TypeError, ValueError):
        return math.nan


def _line_label(axes: str, x_col: str) -> str:
    parts = [p for p in axes.split(";") if p and not p.startswith(x_col + "=")]
    # an snr-type axis is the x axis even when the x column is the derived snr
    parts = [p for p in parts if not p.split("=")[0] in ("snr", "snr_factor", "N_out")]
    return ";".join(parts)


def half_crossing(xs, rates, level: float = 0.5):
    """Linear interpolation of the first upward crossing of ``level``.

    Returns ``(value, label)``; ``value`` is None when the grid never
    crosses, in which case the label is "< min" or "> max" of the grid.
    """
    if not xs:
        return None, "n/a"
    if rates[0] >= level:
        return None, f"< {xs[0]:g}"
    for i in range(1, len(xs)):
        r0, r1 = rates[i - 1], rates[i]
        if r0 < level <= r1:
            x0, x1 = xs[i - 1], xs[i]
            if math.isinf(x1):
                return x0, f"> {x0:g}"
            x = x0 + (level - r0) * (x1 - x0) / (r1 - r0)
            return x, f"{x:.6g}"
    return None, f"> {xs[-1]:g}"


def phase_lines(rows, x_col: str = "snr", threshold_cols=("sggd_threshold", "info_bound", "haystack_bound")):
    groups = {}
    for row in rows:
        key = (row["estimator"], _line_label(row.get("axes", ""), x_col))
        groups.setdefault(key, []).append(row)
    out = []
    for (est, line), rs in groups.items():
        pts = sorted((_float(r[x_col]), _float(r["recovery_rate"])) for r in rs)
        xs = [p[0] for p in pts]
        rates = [p[1] for p in pts]
        monotone = all(rates[i] <= rates[i + 1] for i in range(len(rates) - 1))
        if not monotone:
            warnings.warn(f"{est} [{line or 'all'}]: recovery rate is not monotone in {x_col}",
                          NonMonotoneWarning, stacklevel=2)
        value, label = half_crossing(xs, rates)
        thr = {}
        for c in threshold_cols:
            vals = [_float(r.get(c)) for r in rs]
            vals = [v for v in vals if not math.isnan(v)]
            if vals:
                thr[c] = sum(vals) / len(vals)
        out.append(Crossing(est, line, xs, rates, value, label, thr, monotone))
    return out


def _safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.=-]+", "_", name)


def report_phase_transition(summary_csv, x_col: str = "snr", output_dir=None,
                            threshold_cols=("sggd_threshold", "info_bound", "haystack_bound")):
    """Print-ready text and per-estimator (x, recovery_rate) CSV files.

    ``x_col`` is a summary column or the name of a swept model parameter.

    Returns ``(text, crossings, paths)``.
    """
    path = Path(summary_csv)
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if rows and x_col not in rows[0]:
        # fall back to a swept model parameter recorded in the axes column
        for row in rows:
            axes = dict(p.split("=", 1) for p in row.get("axes", "").split(";") if "=" in p)
            if x_col not in axes:
                raise KeyError(f"{x_col!r} is neither a column nor a sweep axis in {path}")
            row[x_col] = axes[x_col]
    crossings = phase_lines(rows, x_col, threshold_cols)
    lines = []
    for c in crossings:
        thr = " ".join(f"{k}={v:.6g}" for k, v in c.thresholds.items())
        tag = f" [{c.line}]" if c.line else ""
        mono = "" if c.monotone else " (non-monotone)"
        lines.append(f"{c.estimator}{tag}: 0.5 crossing at {x_col} {c.label}{mono}; {thr}".rstrip("; "))
    paths = []
    out = Path(output_dir) if output_dir else path.parent
    out.mkdir(parents=True, exist_ok=True)
    for c in crossings:
        name = f"phase_{c.estimator}" + (f"_{_safe(c.line)}" if c.line else "") + ".csv"
        p = out / name
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([x_col, "recovery_rate"])
            for x, r in zip(c.xs, c.rates):
                w.writerow([f"{x:.17g}", f"{r:.17g}"])
        paths.append(p)
    return "\n".join(lines), crossings, paths
