"""Seeded Monte Carlo trials and sweeps with CSV output.

Seeds. Trial (cell c, trial t) of an experiment with base seed b uses

    seed = splitmix64(splitmix64(splitmix64(b) ^ c) ^ t)

where splitmix64 is the standard SplitMix64 finalizer applied to x + golden
gamma (mod 2^64). The dataset is drawn from ``numpy.random.default_rng(seed)``;
estimators that need randomness use ``default_rng(splitmix64(seed ^ 0x5EED))``.
Every estimator in a cell sees the same dataset.

Files written to the output directory:

* ``trials.csv``  -- one row per (cell, trial, estimator), columns TRIAL_COLUMNS
* ``summary.csv`` -- one row per (cell, estimator), columns SUMMARY_COLUMNS
* ``timing.csv``  -- wall-clock times, kept apart so the other two files are
  byte-reproducible
"""

from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from ..dataset import (
    AffineSubspace,
    LabeledDataset,
    NoiseSpec,
    add_noise,
    gen_adversarial_line,
    gen_affine_line_dataset,
    gen_general_position,
    gen_haystack,
)
from ..diagnostics import haystack_bounds, kappa_d, stability_lower_bound
from ..estimators import (
    RansacConfig,
    SggdConfig,
    affine_sggd_pipeline,
    lad_energy,
    ransac_affine,
    ransac_rsr,
    sggd,
    spca,
)
from ..grassmann import largest_angle, random_subspace
from .config import ExperimentConfig

MASK64 = (1 << 64) - 1
WORKERS_ENV = "ADVRSR_WORKERS"

TRIAL_COLUMNS = [
    "cell", "trial", "estimator", "seed", "status", "axes",
    "D", "d", "N_in", "N_out", "snr", "kappa_d", "lower_bound", "sggd_threshold",
    "theta1", "offset_error", "recovered", "iterations", "energy_final",
]
SUMMARY_COLUMNS = [
    "cell", "estimator", "axes", "D", "d", "N_in", "N_out", "snr",
    "trials", "ok", "recovered", "recovery_rate", "mean_iterations", "median_theta1",
    "sggd_threshold", "info_bound", "haystack_bound",
]


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix_seed(base_seed: int, cell_index: int, trial_index: int) -> int:
    z = splitmix64(base_seed & MASK64)
    z = splitmix64(z ^ (cell_index & MASK64))
    return splitmix64(z ^ (trial_index & MASK64))


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.17g}"
    return str(v)


@dataclass
class TrialResult:
    cell: int
    trial: int
    estimator: str
    seed: int
    status: str
    axes: str
    D: int
    d: int
    N_in: int
    N_out: int
    snr: float
    kappa_d: float
    lower_bound: float
    sggd_threshold: float
    theta1: float
    offset_error: float
    recovered: bool
    iterations: int
    energy_final: float
    wall_time_ms: float = 0.0

    def row(self) -> list:
        return [fmt(getattr(self, c)) for c in TRIAL_COLUMNS]


# ---------------------------------------------------------------- datasets


def _n_out_from(N_in: int, snr: float) -> int:
    if math.isinf(snr):
        return 0
    return int(math.floor(N_in / snr))


def make_dataset(model: str, cell: dict, rng: np.random.Generator) -> LabeledDataset:
    D, d = int(cell["D"]), int(cell["d"])
    if model == "haystack":
        N = int(cell["N"])
        if "N_out" in cell:
            n_out = int(cell["N_out"])
        else:
            snr = float(cell["snr"]) if "snr" in cell else float(cell["snr_factor"]) * haystack_bounds(D, d, "small")
            n_out = 0 if math.isinf(snr) else int(round(N / (1.0 + snr)))
        ds = gen_haystack(D, d, N - n_out, n_out, cell.get("sigma_in", 1.0),
                          cell.get("sigma_out", 1.0), rng=rng)
        eps = float(cell.get("noise_eps", 0.0))
        if eps > 0:
            ds = add_noise(ds, NoiseSpec(eps, cell.get("noise_kind", "uniform-ball")), rng=rng)
        return ds
    if model == "adversarial_line":
        N_in = int(cell["N_in"])
        L = random_subspace(D, d, rng)
        inl = gen_general_position(L, N_in, rng)
        if "N_out" in cell:
            n_out = int(cell["N_out"])
        elif "snr" in cell:
            n_out = _n_out_from(N_in, float(cell["snr"]))
        elif "snr_factor" in cell:
            bound = math.sqrt(3.0) * d * kappa_d(inl.points, L)
            n_out = _n_out_from(N_in, float(cell["snr_factor"]) * bound)
        else:
            n_out = 0
        u = rng.standard_normal(D)
        out = gen_adversarial_line(u, n_out, float(cell.get("magnitude", 1.0)))
        X = np.hstack([inl.points, out])
        mask = np.r_[np.ones(N_in, bool), np.zeros(n_out, bool)]
        return LabeledDataset(X, mask, L, {"generator": model, **cell})
    if model == "affine_line":
        N_in = int(cell["N_in"])
        if "N_out" in cell:
            n_out = int(cell["N_out"])
        elif "snr" in cell:
            n_out = _n_out_from(N_in, float(cell["snr"]))
        else:
            n_out = 0
        return gen_affine_line_dataset(D, d, N_in, n_out, cell.get("offset_scale", 1.0), rng=rng)
    raise ValueError(f"unknown model {model!r}")


def _sggd_cfg(params: dict) -> SggdConfig:
    return SggdConfig(**params)


def _ransac_cfg(params: dict) -> RansacConfig:
    return RansacConfig(**params)


@dataclass
class FitOutcome:
    linear: object            # Subspace
    affine: object            # AffineSubspace or None
    trace: object             # FitTrace or None
    iterations: int
    energy: float


ESTIMATOR_NAMES = ("spca", "sggd", "ransac", "ransac_affine", "affine_sggd")


def fit_estimator(X, d: int, estimator: str, params: Optional[dict] = None, rng=None,
                  inlier_mask=None, truth=None) -> FitOutcome:
    """Run one named estimator with config fields ``params``.

    ``truth`` only feeds the theta1 column of the trace.
    """
    params = dict(params or {})
    lin = truth.linear if isinstance(truth, AffineSubspace) else truth
    if estimator == "spca":
        if params:
            raise ValueError(f"spca takes no parameters, got {sorted(params)}")
        L = spca(X, d)
        return FitOutcome(L, None, None, 0, lad_energy(X, L))
    if estimator == "sggd":
        L, tr = sggd(X, d, spca(X, d), _sggd_cfg(params), truth=lin)
        return FitOutcome(L, None, tr, tr.iterations, tr.meta["best_energy"])
    if estimator == "ransac":
        L, tr = ransac_rsr(X, d, _ransac_cfg(params), rng=rng, truth=lin)
        return FitOutcome(L, None, tr, tr.iterations, lad_energy(X, L))
    if estimator == "ransac_affine":
        A, tr = ransac_affine(X, d, _ransac_cfg(params), rng=rng, truth=truth)
        return FitOutcome(A.linear, A, tr, tr.iterations, math.nan)
    if estimator == "affine_sggd":
        A, tr = affine_sggd_pipeline(X, d, _sggd_cfg(params), inlier_mask=inlier_mask, truth=truth)
        return FitOutcome(A.linear, A, tr, tr.iterations, tr.meta["best_energy"])
    raise ValueError(f"unknown estimator {estimator!r}; expected one of {ESTIMATOR_NAMES}")


def _snapshot(ds: LabeledDataset):
    try:
        rep = stability_lower_bound(ds)
        return rep.kappa_d, rep.lower_bound, rep.snr_required_sggd
    except Exception:
        return math.nan, math.nan, math.nan


def run_trial(
    model: str,
    cell: dict,
    estimator: str,
    params: Optional[dict] = None,
    seed: int = 0,
    recovery_tol: float = 1e-6,
    cell_index: int = 0,
    trial_index: int = 0,
    axes: str = "",
) -> TrialResult:
    """Generate one dataset from ``seed``, fit one estimator, score it.

    Failures inside the generator or estimator are reported through
    ``status`` rather than raised.
    """
    params = dict(params or {})
    rng = np.random.default_rng(seed)
    D, d = int(cell["D"]), int(cell["d"])
    base = dict(cell=cell_index, trial=trial_index, estimator=estimator, seed=seed, axes=axes, D=D, d=d)
    nan = math.nan
    try:
        ds = make_dataset(model, cell, rng)
    except Exception as exc:
        return TrialResult(**base, status=f"error:{type(exc).__name__}", N_in=0, N_out=0, snr=nan,
                           kappa_d=nan, lower_bound=nan, sggd_threshold=nan, theta1=nan,
                           offset_error=nan, recovered=False, iterations=0, energy_final=nan)
    kap, lower, thr = _snapshot(ds)
    info = dict(base, N_in=ds.n_in, N_out=ds.n_out, snr=ds.snr, kappa_d=kap, lower_bound=lower,
                sggd_threshold=thr)
    truth = ds.linear_truth
    est_rng = np.random.default_rng(splitmix64(seed ^ 0x5EED))
    X = ds.points
    t0 = time.perf_counter()
    try:
        fit = fit_estimator(X, d, estimator, params, est_rng, ds.inlier_mask, ds.truth)
        L, iters, energy = fit.linear, fit.iterations, fit.energy
        offset_err = nan
        if fit.affine is not None:
            aff_truth = ds.truth if isinstance(ds.truth, AffineSubspace) else AffineSubspace(truth, np.zeros(D))
            offset_err = float(np.linalg.norm(fit.affine.offset - aff_truth.offset))
        theta = largest_angle(L, truth)
        status = "ok"
    except Exception as exc:
        theta, iters, energy, offset_err = nan, 0, nan, nan
        status = f"error:{type(exc).__name__}"
    wall = (time.perf_counter() - t0) * 1e3
    return TrialResult(**info, status=status, theta1=theta, offset_error=offset_err,
                       recovered=bool(theta < recovery_tol), iterations=iters,
                       energy_final=energy, wall_time_ms=wall)


# ---------------------------------------------------------------- sweeps


def _axes_label(cell: dict, axes: list) -> str:
    return ";".join(f"{k}={fmt(cell[k])}" for k in axes)


def _run_task(task):
    return run_trial(*task)


def plan(cfg: ExperimentConfig) -> list:
    cells = cfg.cells()
    tasks = []
    for ci, cell in enumerate(cells):
        label = _axes_label(cell, cfg.axes)
        for t in range(cfg.trials_per_cell):
            seed = mix_seed(cfg.base_seed, ci, t)
            for name, params in cfg.estimators:
                tasks.append((cfg.model, cell, name, params, seed, cfg.recovery_tol, ci, t, label))
    return tasks


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_sweep(cfg: ExperimentConfig, workers: Optional[int] = None) -> list:
    """All TrialResults, ordered by (cell, trial, estimator order)."""
    tasks = plan(cfg)
    workers = default_workers() if workers is None else workers
    if workers <= 1:
        results = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    order = {name: i for i, (name, _) in enumerate(cfg.estimators)}
    results.sort(key=lambda r: (r.cell, r.trial, order[r.estimator]))
    return results


def trials_csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRIAL_COLUMNS)
    for r in results:
        w.writerow(r.row())
    return buf.getvalue()


def summarize(results, cfg: Optional[ExperimentConfig] = None) -> list:
    groups = {}
    for r in results:
        groups.setdefault((r.cell, r.estimator), []).append(r)
    order = {name: i for i, (name, _) in enumerate(cfg.estimators)} if cfg else {}
    rows = []
    for (cell, est), rs in sorted(groups.items(), key=lambda kv: (kv[0][0], order.get(kv[0][1], 0), kv[0][1])):
        first = rs[0]
        ok = [r for r in rs if r.status == "ok"]
        n_rec = sum(1 for r in rs if r.recovered)
        N = first.N_in + first.N_out
        d = first.d
        snrs = [r.snr for r in rs]
        thr = [r.sggd_threshold for r in rs if not math.isnan(r.sggd_threshold)]
        thetas = [r.theta1 for r in ok]
        rows.append({
            "cell": cell,
            "estimator": est,
            "axes": first.axes,
            "D": first.D,
            "d": d,
            "N_in": float(np.mean([r.N_in for r in rs])),
            "N_out": float(np.mean([r.N_out for r in rs])),
            "snr": math.inf if any(math.isinf(s) for s in snrs) else float(np.mean(snrs)),
            "trials": len(rs),
            "ok": len(ok),
            "recovered": n_rec,
            "recovery_rate": n_rec / len(rs),
            "mean_iterations": float(np.mean([r.iterations for r in ok])) if ok else math.nan,
            "median_theta1": float(np.median(thetas)) if thetas else math.nan,
            "sggd_threshold": float(np.mean(thr)) if thr else math.nan,
            "info_bound": (N + d - 1) / (N - d + 1) if N - d + 1 > 0 else math.inf,
            "haystack_bound": haystack_bounds(first.D, d, "small") if first.D > d else math.nan,
        })
    return rows


def summary_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for row in rows:
        w.writerow([fmt(row[c]) for c in SUMMARY_COLUMNS])
    return buf.getvalue()


def sweep(cfg: ExperimentConfig, workers: Optional[int] = None, output_dir=None) -> dict:
    """Run the experiment and write trials.csv, summary.csv and timing.csv.

    Returns the paths written, keyed by file kind.
    """
    out = Path(output_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = run_sweep(cfg, workers)
    paths = {"trials": out / "trials.csv", "summary": out / "summary.csv", "timing": out / "timing.csv"}
    paths["trials"].write_text(trials_csv(results))
    paths["summary"].write_text(summary_csv(summarize(results, cfg)))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["cell", "trial", "estimator", "wall_time_ms"])
    for r in results:
        w.writerow([r.cell, r.trial, r.estimator, f"{r.wall_time_ms:.3f}"])
    paths["timing"].write_text(buf.getvalue())
    return paths
