"""Statistics that control the recovery guarantees, and SNR threshold formulas.

Everything is computed on spherized data. ``gamma`` is the radius of the
Grassmannian ball around the truth; by default cos(gamma) = 1/sqrt(3), the
radius at which the landscape and initialization conditions coincide.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from . import oracles
from .dataset import LabeledDataset, spherize
from .errors import DegenerateInliers, OffSubspace
from .estimators.sggd import _gradient
from .grassmann import Subspace, random_in_ball

DEFAULT_GAMMA = math.acos(1.0 / math.sqrt(3.0))
ON_TOL = 1e-10
SUP_SAMPLES = 512


def gram_eigenvalues(X) -> np.ndarray:
    """Descending eigenvalues of X X^T (length D), via the thinner side."""
    X = np.asarray(X, dtype=float)
    D = X.shape[0]
    if X.shape[1] == 0:
        return np.zeros(D)
    s = np.linalg.svd(X, compute_uv=False)
    lam = s**2
    return np.r_[lam, np.zeros(D - lam.size)] if lam.size < D else lam


def spectral_norm(X) -> float:
    X = np.asarray(X, dtype=float)
    if X.size == 0:
        return 0.0
    return float(np.linalg.norm(X, 2))


def _on_mask(L: Subspace, X: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(X, axis=0)
    res = np.linalg.norm(X - L.basis @ (L.basis.T @ X), axis=0)
    return res <= np.sin(ON_TOL) * norms


def kappa_d(X_in, L: Subspace) -> float:
    """Spherical d-condition number lambda_1 / lambda_d of the spherized inliers."""
    X = np.asarray(X_in, dtype=float)
    on = _on_mask(L, X)
    if not np.all(on):
        i = int(np.flatnonzero(~on)[0])
        x = X[:, i]
        raise OffSubspace(i, math.asin(min(1.0, np.linalg.norm(x - L.basis @ (L.basis.T @ x)) / np.linalg.norm(x))))
    lam = gram_eigenvalues(spherize(X))
    d = L.dim
    if lam[d - 1] <= 1e-12 * lam[0]:
        raise DegenerateInliers(
            f"lambda_d/lambda_1 = {lam[d - 1] / lam[0]:.2e}: inliers do not permeate the subspace"
        )
    return float(lam[0] / lam[d - 1])


@dataclass
class StabilityReport:
    gamma: float
    lambda_d_in: float
    lambda_1_in: float
    kappa_d: float
    out_spectral: float
    lower_bound: float
    spca_condition_value: float
    snr: float
    snr_required_sggd: float
    snr_required_spca: float
    lambda_d_full: float
    pigeonhole_ok: bool

    def as_dict(self) -> dict:
        return asdict(self)


def stability_lower_bound(ds: LabeledDataset, gamma: float = DEFAULT_GAMMA) -> StabilityReport:
    """Computable lower bound on the spherized stability statistic,

        cos(gamma) lambda_d(X~in X~in^T) - sqrt(N_out) |X~out|_2,

    together with the SPCA initialization condition and the SNR levels that
    make both positive.
    """
    L = ds.linear_truth
    if L is None:
        raise ValueError("stability report needs a ground-truth subspace")
    d = L.dim
    Xin = ds.inliers
    k = kappa_d(Xin, L)
    lam = gram_eigenvalues(spherize(Xin))
    lam1, lamd = float(lam[0]), float(lam[d - 1])
    Xout = ds.outliers
    out = spectral_norm(spherize(Xout)) if Xout.shape[1] else 0.0
    n_out = ds.n_out
    lower = math.cos(gamma) * lamd - math.sqrt(n_out) * out
    spca_cond = math.sin(gamma) / math.sqrt(2.0) * lamd - out**2
    lam_full = float(gram_eigenvalues(spherize(ds.points))[d - 1])
    return StabilityReport(
        gamma=gamma,
        lambda_d_in=lamd,
        lambda_1_in=lam1,
        kappa_d=k,
        out_spectral=out,
        lower_bound=lower,
        spca_condition_value=spca_cond,
        snr=ds.snr,
        snr_required_sggd=math.sqrt(3.0) * d * k,
        snr_required_spca=math.sqrt(2.0) / math.sin(gamma) * d * k,
        lambda_d_full=lam_full,
        pigeonhole_ok=lam1 >= ds.n_in / d - 1e-9,
    )


def stability_sup_estimate(
    ds: LabeledDataset,
    gamma: float = DEFAULT_GAMMA,
    samples: int = SUP_SAMPLES,
    rng=None,
) -> float:
    """Monte Carlo estimate of the stability statistic.

    The supremum of |grad F(L; X off L*)|_2 over the ball is replaced by a
    maximum over ``samples`` random subspaces in the ball. Sampling can only
    under-estimate a supremum, so the value is an upper bound on the true
    statistic and never below :func:`stability_lower_bound`.
    """
    L = ds.linear_truth
    if L is None:
        raise ValueError("stability estimate needs a ground-truth subspace")
    if rng is None:
        rng = np.random.default_rng()
    Xs = spherize(ds.points)
    on = _on_mask(L, Xs)
    lam = gram_eigenvalues(Xs[:, on])
    first = math.cos(gamma) * float(lam[L.dim - 1])
    off = Xs[:, ~on]
    if off.shape[1] == 0:
        return first
    worst = 0.0
    for _ in range(samples):
        V = random_in_ball(L, gamma, rng)
        g = _gradient(off, V.basis, 0.0)
        worst = max(worst, spectral_norm(g))
    return first - worst


@dataclass
class ThresholdRow:
    method: str
    snr_bound: Optional[float]
    reason: str = ""


def threshold_table(
    d: int,
    kappa: Optional[float] = None,
    mu: Optional[float] = None,
    gamma: float = DEFAULT_GAMMA,
    rlg_eps: Optional[float] = None,
    ransac_c: Optional[float] = None,
) -> list:
    """Adversarial SNR bounds of the compared methods.

    Rows whose inputs are missing carry ``snr_bound=None`` and a reason.
    """
    rows = []

    def add(method, needs, fn):
        missing = [name for name, v in needs if v is None]
        if missing:
            rows.append(ThresholdRow(method, None, "missing " + ", ".join(missing)))
        else:
            rows.append(ThresholdRow(method, float(fn())))

    add("SPCA", [("kappa", kappa)], lambda: d * kappa / (math.sin(gamma) / math.sqrt(2.0)))
    add("OP", [("mu", mu)], lambda: 121.0 * mu * d / 9.0)
    add("TORP", [("mu", mu)], lambda: 128.0 * mu**2 * d - 1.0)
    add("RR", [], lambda: 2.0)
    add("RLG", [("eps", rlg_eps)], lambda: (1.0 - rlg_eps) / rlg_eps)
    add("SGGD", [("kappa", kappa)], lambda: math.sqrt(3.0) * d * kappa)
    add("RANSAC", [("c", ransac_c)], lambda: ransac_c * d)
    return rows


def haystack_bounds(D: int, d: int, regime: str = "small") -> float:
    """SNR above which SGGD recovers the Haystack subspace, per sample regime."""
    if regime == "small":
        return max(8.0 * math.sqrt(2.0) * d / math.sqrt(D), 2.0 * d / D)
    if regime == "medium":
        return max(5.0 * math.sqrt(2.0) * d / math.sqrt(D * (D - d)), 2.0 * d / D)
    if regime == "large":
        return 0.0
    raise ValueError(f"unknown regime {regime!r}; expected small, medium or large")


@dataclass
class LinearConvergenceRecord:
    lhs: float
    rhs: float
    max_count: int
    exact: bool
    holds: bool
    snr_required: float


def max_count_in_ball(X, L: Subspace, gamma: float) -> int:
    """Largest |X cap L'| over L' in B(L, gamma) other than L itself.

    A span W of at most d points can be completed to such an L' exactly
    when every direction of W is within gamma of L, so spans are filtered by
    arcsin |Q_L B_W|_2 < gamma.
    """
    X = np.asarray(X, dtype=float)
    if X.shape[1] > oracles.L0_MAX_N:
        raise oracles.TooLarge(X.shape[1], oracles.L0_MAX_N)
    dirs = oracles._merge_directions(X)
    best = dirs.n_zero
    d = L.dim
    for _, k, B, count in oracles._enumerate_spans(dirs, d):
        sin_max = spectral_norm(B - L.basis @ (L.basis.T @ B))
        if math.asin(min(1.0, sin_max)) >= gamma:
            continue
        if k == d and sin_max < 1e-9:
            continue
        best = max(best, count)
    return best


def linear_convergence_bound(ds: LabeledDataset, gamma: float = DEFAULT_GAMMA) -> LinearConvergenceRecord:
    """Sufficient condition for linear convergence of the piecewise schedule:
    stability lower bound > 8 max |X cap L| over the punctured ball.

    The maximum is enumerated exactly for N <= 25; above that the
    general-position value N_out + d - 1 is used and ``exact`` is False.
    """
    rep = stability_lower_bound(ds, gamma)
    L = ds.linear_truth
    d = L.dim
    if ds.N <= oracles.L0_MAX_N:
        mc, exact = max_count_in_ball(ds.points, L, gamma), True
    else:
        mc, exact = ds.n_out + d - 1, False
    rhs = 8.0 * mc
    if ds.n_out == 0:
        snr_req = math.inf
    else:
        snr_req = (7.0 + 8.0 * (d - 1) / ds.n_out) * d * rep.kappa_d / math.cos(gamma)
    return LinearConvergenceRecord(rep.lower_bound, rhs, mc, exact, rep.lower_bound > rhs, snr_req)
