"""RANSAC for robust subspace recovery, linear and affine."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..dataset import AffineSubspace, spherize
from ..errors import RankDeficientData
from ..grassmann import RANK_TOL, Subspace, largest_angle, numerical_rank, orthonormalize
from .trace import FitTrace, TraceRecord

# slack added to tau so that tau = 0 admits points whose angle is pure roundoff
ANGLE_SLACK = 1e-10
DIST_SLACK = 1e-10


@dataclass(frozen=True)
class RansacConfig:
    """tau: angle (linear) or distance (affine) tolerance for consensus;
    m: consensus number, None meaning N/2; n: maximum number of trials."""

    tau: float = 0.0
    m: Optional[float] = None
    n: int = 1000
    seed: Optional[int] = None

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")
        if self.n < 1:
            raise ValueError("n must be at least 1")

    def consensus_number(self, N: int) -> float:
        m = N / 2 if self.m is None else self.m
        if m > N:
            raise ValueError(f"consensus number m={m} exceeds N={N}")
        return m


def _grow_span(Y: np.ndarray, order, d: int):
    """Add columns of Y in ``order`` until they span d dimensions.

    Returns the indices drawn (dependent ones included) or None if the pool
    runs out first.
    """
    Q = np.zeros((Y.shape[0], 0))
    drawn = []
    for idx in order:
        y = Y[:, idx]
        drawn.append(idx)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            continue
        r = y - Q @ (Q.T @ y)
        r = r - Q @ (Q.T @ r)
        nr = np.linalg.norm(r)
        if nr > RANK_TOL * ny:
            Q = np.column_stack([Q, r / nr])
            if Q.shape[1] == d:
                return drawn
    return None


def consensus_count(Xs: np.ndarray, L: Subspace, tau: float) -> int:
    """Number of unit columns at angle <= tau (+ roundoff slack) from L."""
    r = np.linalg.norm(Xs - L.basis @ (L.basis.T @ Xs), axis=0)
    ang = np.arcsin(np.clip(r, 0.0, 1.0))
    return int(np.count_nonzero(ang <= tau + ANGLE_SLACK))


def ransac_rsr(X, d: int, cfg: Optional[RansacConfig] = None, rng=None, truth=None):
    """Random-sample consensus over spans of data points.

    Each trial draws points uniformly without replacement until they span a
    d-subspace, counts the points within angle tau of that span, and keeps
    the best span seen. The search stops as soon as the best count exceeds m.

    Returns ``(subspace, trace)``; one trace record per trial.
    """
    cfg = cfg or RansacConfig()
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    Xs = spherize(X)
    D, N = Xs.shape
    if numerical_rank(Xs) < d:
        raise RankDeficientData(f"data spans fewer than d={d} dimensions")
    m = cfg.consensus_number(N)

    trace = FitTrace(meta={"m": m, "tau": cfg.tau})
    best, best_count = None, 0
    reason = "max_iter"
    for i in range(1, cfg.n + 1):
        drawn = _grow_span(Xs, rng.permutation(N), d)
        L = orthonormalize(Xs[:, drawn])
        c = consensus_count(Xs, L, cfg.tau)
        theta = largest_angle(L, truth) if truth is not None else math.nan
        trace.append(TraceRecord(i, theta1=theta, consensus=c))
        if c > best_count:
            best, best_count = L, c
            trace.best_iteration = i
        if best_count > m:
            reason = "consensus"
            break
    trace.terminal_reason = reason
    trace.meta["best_consensus"] = best_count
    return best, trace


def ransac_affine(X, d: int, cfg: Optional[RansacConfig] = None, rng=None, truth=None):
    """Affine RANSAC: a random base point y0 plus points drawn until Y - y0
    spans d dimensions. Consensus is Euclidean distance to the affine set.

    Returns ``(AffineSubspace, trace)`` with the minimal-norm offset.
    """
    cfg = cfg or RansacConfig()
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    X = np.asarray(X, dtype=float)
    D, N = X.shape
    if numerical_rank(X - X[:, :1]) < d:
        raise RankDeficientData(f"data spans fewer than d={d} affine dimensions")
    m = cfg.consensus_number(N)
    slack = DIST_SLACK * max(1.0, float(np.max(np.linalg.norm(X, axis=0))))

    trace = FitTrace(meta={"m": m, "tau": cfg.tau})
    best, best_count = None, 0
    reason = "max_iter"
    for i in range(1, cfg.n + 1):
        j0 = int(rng.integers(N))
        rest = rng.permutation(np.delete(np.arange(N), j0))
        Y = X - X[:, [j0]]
        drawn = _grow_span(Y, rest, d)
        if drawn is None:
            # every difference from this base point is dependent; try another
            trace.append(TraceRecord(i, consensus=0))
            continue
        A = AffineSubspace.from_point(orthonormalize(Y[:, drawn]), X[:, j0])
        c = int(np.count_nonzero(A.distance(X) <= cfg.tau + slack))
        theta = math.nan
        if truth is not None:
            theta = largest_angle(A.linear, truth.linear if isinstance(truth, AffineSubspace) else truth)
        trace.append(TraceRecord(i, theta1=theta, consensus=c))
        if c > best_count:
            best, best_count = A, c
            trace.best_iteration = i
        if best_count > m:
            reason = "consensus"
            break
    if best is None:
        raise RankDeficientData("no trial produced a d-dimensional affine span")
    trace.terminal_reason = reason
    trace.meta["best_consensus"] = best_count
    return best, trace
