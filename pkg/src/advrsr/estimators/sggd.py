"""Spherical PCA and spherized geodesic gradient descent on the LAD energy.

The energy of a subspace S for data X is

    F(S) = sum_i |Q_S x_i| / |x_i|,

the sum of the sines of the angles between the points and S. It only sees
directions, so every function here first maps the data to the unit sphere.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..dataset import spherize
from ..errors import EigenGapWarning, NonFiniteEnergy
from ..grassmann import (
    Subspace,
    TangentDirection,
    _fix_signs,
    geodesic_step,
    largest_angle,
)
from .trace import FitTrace, TraceRecord

EIGEN_GAP_TOL = 1e-12


@dataclass(frozen=True)
class SggdConfig:
    """Iteration controls for :func:`sggd`.

    ``schedule`` is ``"sqrt"`` (step s0/sqrt(k)) or ``"piecewise"`` (step held
    at s0 and multiplied by ``shrink_factor`` after ``patience`` iterations
    without a new lowest energy, or after ``max_hold`` iterations at the same
    level, whichever comes first). The hold cap stops the iterate from
    circling the minimizer at a fixed radius while the energy creeps down.
    """

    max_iter: int = 1000
    schedule: str = "piecewise"
    s0: float = 0.1
    shrink_factor: float = 0.5
    patience: int = 10
    max_hold: int = 20
    converge_tol: float = 1e-10
    subgradient_eps: float = 1e-12

    def __post_init__(self):
        if self.schedule not in ("sqrt", "piecewise"):
            raise ValueError(f"unknown schedule {self.schedule!r}")
        if not self.s0 > 0:
            raise ValueError("s0 must be positive")
        if not 0 < self.shrink_factor < 1:
            raise ValueError("shrink_factor must lie in (0, 1)")
        if self.patience < 1:
            raise ValueError("patience must be at least 1")
        if self.max_hold < 1:
            raise ValueError("max_hold must be at least 1")
        if self.subgradient_eps < 0:
            raise ValueError("subgradient_eps must be nonnegative")
        if self.max_iter < 0:
            raise ValueError("max_iter must be nonnegative")


@dataclass
class SpcaResult:
    subspace: Subspace
    eigenvalues: np.ndarray
    eigengap: float
    gap_warning: bool


def spherized_covariance_eigs(Xs: np.ndarray):
    """Eigenpairs of (1/(N-1)) sum x x^T for unit columns, descending."""
    D, N = Xs.shape
    U, s, _ = np.linalg.svd(Xs, full_matrices=False)
    lam = s**2 / max(N - 1, 1)
    if lam.size < D:
        lam = np.r_[lam, np.zeros(D - lam.size)]
    return U, lam


def spca(X, d: int, full_output: bool = False):
    """Top-d eigenspace of the spherized sample covariance."""
    Xs = spherize(X)
    D, N = Xs.shape
    if not 1 <= d <= D:
        raise ValueError(f"need 1 <= d <= D, got d={d}")
    if N < d:
        raise ValueError(f"need at least d={d} points, got {N}")
    U, lam = spherized_covariance_eigs(Xs)
    gap = float(lam[d - 1] - lam[d]) if d < D else math.inf
    flagged = gap <= EIGEN_GAP_TOL
    if flagged:
        warnings.warn(
            f"eigen-gap {gap:.3e} at d={d}: the SPCA subspace is not well determined",
            EigenGapWarning,
            stacklevel=2,
        )
    S = Subspace(_fix_signs(U[:, :d]))
    if full_output:
        return SpcaResult(S, lam, gap, flagged)
    return S


def _energy(Xs: np.ndarray, B: np.ndarray) -> float:
    R = Xs - B @ (B.T @ Xs)
    return float(np.linalg.norm(R, axis=0).sum())


def _gradient(Xs: np.ndarray, B: np.ndarray, eps: float) -> np.ndarray:
    R = Xs - B @ (B.T @ Xs)
    r = np.linalg.norm(R, axis=0)
    keep = r > eps
    if not np.any(keep):
        return np.zeros_like(B)
    G = -(R[:, keep] / r[keep]) @ (Xs[:, keep].T @ B)
    # R / r amplifies rounding error along span(B) when r is tiny
    return G - B @ (B.T @ G)


def lad_energy(X, S: Subspace) -> float:
    return _energy(spherize(X), S.basis)


def lad_gradient(X, S: Subspace, subgradient_eps: float = 1e-12) -> TangentDirection:
    """Riemannian (sub)gradient of the spherized LAD energy at S.

    Points within ``subgradient_eps`` (relative) of S are left out of the sum,
    which is where the energy is not differentiable.
    """
    Xs = spherize(X)
    return TangentDirection(S, _gradient(Xs, S.basis, subgradient_eps))


def sggd(
    X,
    d: int,
    init: Optional[Subspace] = None,
    cfg: Optional[SggdConfig] = None,
    truth: Optional[Subspace] = None,
    callback: Optional[Callable] = None,
):
    """Geodesic descent along the normalized negative gradient.

    Each iteration moves by the scheduled arclength in direction
    -grad F / |grad F|_2. The returned subspace is the lowest-energy iterate,
    so the result never has higher energy than ``init``.

    Returns ``(subspace, trace)``. ``callback(k, subspace)`` is invoked for the
    initial point (k = 0) and for every iterate.
    """
    cfg = cfg or SggdConfig()
    Xs = spherize(X)
    if init is None:
        init = spca(Xs, d)
    if init.dim != d or init.ambient_dim != Xs.shape[0]:
        raise ValueError("init has the wrong dimensions")

    trace = FitTrace(meta={"schedule": cfg.schedule})
    V = init
    F = _energy(Xs, V.basis)
    theta = largest_angle(V, truth) if truth is not None else math.nan
    g = _gradient(Xs, V.basis, cfg.subgradient_eps)
    gn = float(np.linalg.norm(g, 2)) if np.any(g) else 0.0
    trace.append(TraceRecord(0, F, theta, math.nan, gn))
    if callback:
        callback(0, V)
    if not math.isfinite(F):
        trace.terminal_reason = "non_finite"
        raise NonFiniteEnergy(trace)

    best_F, best_V, best_k = F, V, 0
    step = cfg.s0
    stale = held = 0
    reason = "max_iter"
    for k in range(1, cfg.max_iter + 1):
        if gn == 0.0:
            reason = "converged"
            break
        if cfg.schedule == "sqrt":
            step = cfg.s0 / math.sqrt(k)
        H = TangentDirection(V, g * (-1.0 / gn))
        V_new = geodesic_step(V, H, step)
        moved = largest_angle(V, V_new)
        V = V_new
        F = _energy(Xs, V.basis)
        theta = largest_angle(V, truth) if truth is not None else math.nan
        g = _gradient(Xs, V.basis, cfg.subgradient_eps)
        gn = float(np.linalg.norm(g, 2)) if np.any(g) else 0.0
        trace.append(TraceRecord(k, F, theta, step, gn))
        if callback:
            callback(k, V)
        if not math.isfinite(F):
            trace.terminal_reason = "non_finite"
            raise NonFiniteEnergy(trace)
        if F < best_F:
            best_F, best_V, best_k = F, V, k
            stale = 0
        else:
            stale += 1
        held += 1
        if cfg.schedule == "piecewise" and (stale >= cfg.patience or held >= cfg.max_hold):
            step *= cfg.shrink_factor
            stale = held = 0
        if moved < cfg.converge_tol:
            reason = "converged"
            break
    trace.terminal_reason = reason
    trace.best_iteration = best_k
    trace.meta["best_energy"] = best_F
    return best_V, trace
