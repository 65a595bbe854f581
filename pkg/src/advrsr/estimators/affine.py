"""Geometric median and the symmetrized affine SGGD pipeline."""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..dataset import AffineSubspace, pair_indices, spherize, symmetrize, symmetrized_inlier_fraction
from ..errors import ZeroColumn
from .sggd import SggdConfig, sggd, spca


def geometric_median(points, tol: float = 1e-10, max_iter: int = 10_000) -> np.ndarray:
    """Weiszfeld iteration started from the coordinate-wise mean.

    ``points`` is a D x N matrix (one point per column) or a sequence of
    D-vectors. When an iterate comes within ``tol`` of a data point x, x is
    returned if it satisfies the optimality condition

        | sum_{x_j != x} (x_j - x) / |x_j - x| | <= multiplicity(x);

    otherwise the iterate is pushed off x along that resultant.
    """
    if isinstance(points, np.ndarray) and points.ndim == 2:
        P = np.asarray(points, dtype=float).T
    else:
        P = np.array([np.asarray(p, dtype=float).reshape(-1) for p in points])
    if P.shape[0] == 0:
        raise ValueError("geometric median of an empty set")
    if P.shape[0] == 1:
        return P[0].copy()

    m = P.mean(axis=0)
    for _ in range(max_iter):
        dist = np.linalg.norm(P - m, axis=1)
        near = np.flatnonzero(dist < tol)
        if near.size:
            x, ok, m_off = _vertex_test(P, P[near[0]], tol)
            if ok:
                return x
            m = m_off
            continue
        w = 1.0 / dist
        m_new = (w[:, None] * P).sum(axis=0) / w.sum()
        if np.linalg.norm(m_new - m) < tol:
            m = m_new
            break
        m = m_new
    # Weiszfeld creeps toward an optimal data point without reaching it;
    # snap to the nearest point when it passes the optimality test
    x = P[int(np.argmin(np.linalg.norm(P - m, axis=1)))]
    if _vertex_test(P, x, tol)[1]:
        return x.copy()
    return m


def _vertex_test(P, x, tol):
    """(x, is x optimal, step off x along the resultant when it is not)."""
    dx = np.linalg.norm(P - x, axis=1)
    same = dx < tol
    others = P[~same]
    if others.shape[0] == 0:
        return x.copy(), True, x
    g = ((others - x) / dx[~same][:, None]).sum(axis=0)
    gn = np.linalg.norm(g)
    mult = int(same.sum())
    if gn <= mult:
        return x.copy(), True, x
    # Vardi-Zhang style step off a non-optimal vertex
    step = (gn - mult) / np.sum(1.0 / dx[~same])
    return x, False, x + step * g / gn


def affine_sggd_pipeline(
    X,
    d: int,
    cfg: Optional[SggdConfig] = None,
    inlier_mask=None,
    truth=None,
    median_tol: float = 1e-10,
):
    """Affine subspace from SGGD on symmetrized data plus a geometric median.

    The linear part is fitted to the spherized pairwise differences (which
    cancel the offset). Projecting X onto the orthogonal complement collapses
    the inliers to one point; its geometric median is the offset, already the
    minimal-norm representative.

    Returns ``(AffineSubspace, trace)``; ``trace.meta`` carries the number of
    pairs and, when ``inlier_mask`` is given, the exact inlier-pair fraction.
    """
    X = np.asarray(X, dtype=float)
    Xp = symmetrize(X)
    norms = np.linalg.norm(Xp, axis=0)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        i, j = pair_indices(X.shape[1])
        k = int(zero[0])
        raise ZeroColumn(k, (int(i[k]), int(j[k])))
    Xs = spherize(Xp)
    linear_truth = truth.linear if isinstance(truth, AffineSubspace) else truth
    init = spca(Xs, d)
    L, trace = sggd(Xs, d, init, cfg, truth=linear_truth)

    B = L.basis
    P = X - B @ (B.T @ X)
    scale = max(1.0, float(np.max(np.linalg.norm(P, axis=0))))
    b = geometric_median(P, tol=median_tol * scale)
    result = AffineSubspace.from_point(L, b)

    trace.meta["n_pairs"] = Xp.shape[1]
    if inlier_mask is not None:
        trace.meta["inlier_pair_fraction"] = symmetrized_inlier_fraction(inlier_mask)
    return result, trace
