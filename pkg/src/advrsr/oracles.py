"""Exponential-time reference computations for small instances.

All counts treat the data as a multiset. Before enumerating, parallel points
(same direction up to sign and scale) are merged into one representative
carrying a multiplicity; spans are unchanged by this.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .dataset import LabeledDataset
from .errors import OffSubspace, RankDeficientData, TooLarge
from .grassmann import Subspace, numerical_rank, orthonormalize

ANGLE_TOL = 1e-10
L0_MAX_N = 25
DIRECTIONAL_MAX_N = 30
COMAXIMIZER_CAP = 64

_SIN_TOL = np.sin(ANGLE_TOL)


class Status(str, Enum):
    UNIQUE = "unique"
    TIE = "tie"
    DEGENERATE = "degenerate"


class WellDefined(str, Enum):
    WELL_DEFINED = "well_defined"
    TIE = "tie"
    BEATEN = "beaten"
    DEGENERATE = "degenerate"


@dataclass
class L0Result:
    best: Subspace
    best_count: int
    status: Status
    co_maximizers: list = field(default_factory=list)
    truncated: bool = False
    candidates: int = 0


@dataclass
class _Directions:
    reps: np.ndarray  # D x m unit vectors
    weights: np.ndarray  # multiplicities
    n_zero: int


def _points(X) -> np.ndarray:
    if isinstance(X, LabeledDataset):
        return X.points
    X = np.asarray(X, dtype=float)
    return X[:, None] if X.ndim == 1 else X


def _merge_directions(X: np.ndarray) -> _Directions:
    norms = np.linalg.norm(X, axis=0)
    nz = norms > 0
    U = X[:, nz] / norms[nz]
    reps, weights = [], []
    for u in U.T:
        for k, r in enumerate(reps):
            if np.linalg.norm(u - (u @ r) * r) < _SIN_TOL:
                weights[k] += 1
                break
        else:
            reps.append(u)
            weights.append(1)
    R = np.array(reps).T if reps else np.zeros((X.shape[0], 0))
    return _Directions(R, np.array(weights, dtype=int), int((~nz).sum()))


def _members(B: np.ndarray, reps: np.ndarray) -> np.ndarray:
    res = reps - B @ (B.T @ reps)
    return np.linalg.norm(res, axis=0) <= _SIN_TOL


def count_on(S: Subspace, X) -> int:
    """Number of points of X (with multiplicity) at angle zero from S."""
    X = _points(X)
    norms = np.linalg.norm(X, axis=0)
    res = np.linalg.norm(X - S.basis @ (S.basis.T @ X), axis=0)
    on = (norms == 0) | (res <= _SIN_TOL * np.where(norms == 0, 1.0, norms))
    return int(on.sum())


def _enumerate_spans(dirs: _Directions, max_k: int, min_k: int = 1):
    """Yield (key, rank, basis, count) for every distinct span of at most
    ``max_k`` independent representatives.

    The key is the frozen set of representatives lying in the span, which
    identifies the span exactly.
    """
    seen = set()
    m = dirs.reps.shape[1]
    for k in range(min_k, max_k + 1):
        for combo in itertools.combinations(range(m), k):
            M = dirs.reps[:, combo]
            if k > 1 and numerical_rank(M) < k:
                continue
            B = orthonormalize(M).basis
            inside = _members(B, dirs.reps)
            key = frozenset(np.flatnonzero(inside).tolist())
            if key in seen:
                continue
            seen.add(key)
            count = int(dirs.weights[inside].sum()) + dirs.n_zero
            yield key, k, B, count


def _complete(B: np.ndarray, d: int) -> Subspace:
    """Deterministic completion of a k-frame to a d-frame by coordinate axes."""
    cols = [B[:, i] for i in range(B.shape[1])]
    D = B.shape[0]
    for j in range(D):
        if len(cols) == d:
            break
        e = np.zeros(D)
        e[j] = 1.0
        Q = np.array(cols).T
        r = e - Q @ (Q.T @ e)
        nr = np.linalg.norm(r)
        if nr > 1e-6:
            cols.append(r / nr)
    return orthonormalize(np.array(cols).T)


def l0_bruteforce(X, d: int, cap: int = COMAXIMIZER_CAP) -> L0Result:
    """Exhaustive most-significant-subspace search.

    The maximum of |X cap L| over G(D, d) is attained at a span of at most d
    data points (a rank-deficient span can be completed without picking up
    more points), so enumerating those spans is exact.
    """
    X = _points(X)
    D, N = X.shape
    if N > L0_MAX_N:
        raise TooLarge(N, L0_MAX_N)
    if numerical_rank(X) < d:
        raise RankDeficientData(f"data spans fewer than d={d} dimensions")
    if d == D:
        full = Subspace(np.eye(D))
        return L0Result(full, N, Status.UNIQUE, [full], candidates=1)

    dirs = _merge_directions(X)
    best_count = -1
    full_max, deficient_max = [], []
    n_cand = 0
    for key, k, B, count in _enumerate_spans(dirs, d):
        n_cand += 1
        if count > best_count:
            best_count = count
            full_max, deficient_max = [], []
        if count == best_count:
            (full_max if k == d else deficient_max).append(B)

    truncated = len(full_max) > cap
    co = [Subspace(B) for B in full_max[:cap]]
    if deficient_max:
        status = Status.DEGENERATE
        best = co[0] if co else _complete(deficient_max[0], d)
    else:
        status = Status.UNIQUE if len(full_max) == 1 else Status.TIE
        best = co[0]
    return L0Result(best, best_count, status, co, truncated, n_cand)


def directional_l0_min(X_in, L: Subspace) -> int:
    """min over unit v in L of the number of inliers with nonzero projection on v.

    Equals N_in minus the largest number of inliers held by a subspace of L of
    dimension at most d - 1; that subspace can be taken as a span of inliers.
    """
    X = _points(X_in)
    N = X.shape[1]
    if N > DIRECTIONAL_MAX_N:
        raise TooLarge(N, DIRECTIONAL_MAX_N)
    norms = np.linalg.norm(X, axis=0)
    res = np.linalg.norm(X - L.basis @ (L.basis.T @ X), axis=0)
    for i in range(N):
        if norms[i] > 0 and res[i] > _SIN_TOL * norms[i]:
            raise OffSubspace(i, np.arcsin(min(1.0, res[i] / norms[i])))
    dirs = _merge_directions(X)
    most = dirs.n_zero
    for _, _, _, count in _enumerate_spans(dirs, L.dim - 1):
        most = max(most, count)
    return N - most


def truth_count(ds: LabeledDataset) -> int:
    return count_on(ds.linear_truth, ds.points)


def well_defined_check(ds: LabeledDataset, d: Optional[int] = None) -> WellDefined:
    """Is the truth the unique most significant subspace of both X and X_in?"""
    if ds.truth is None:
        raise ValueError("well_defined_check needs a ground-truth subspace")
    L = ds.linear_truth
    d = L.dim if d is None else d
    try:
        r_in = l0_bruteforce(ds.inliers, d)
    except RankDeficientData:
        return WellDefined.DEGENERATE
    if r_in.status is Status.DEGENERATE:
        return WellDefined.DEGENERATE
    r = l0_bruteforce(ds.points, d)
    if r.best_count > count_on(L, ds.points):
        return WellDefined.BEATEN
    if r.status is Status.DEGENERATE:
        return WellDefined.DEGENERATE
    if r.status is Status.TIE or r_in.status is Status.TIE:
        return WellDefined.TIE
    if r.best == L and r_in.best == L:
        return WellDefined.WELL_DEFINED
    return WellDefined.BEATEN


@dataclass
class ThresholdRecord:
    snr: float
    information_bound: float
    directional_bound: Optional[float]
    hardness_bound: float
    directional_l0: Optional[int] = None
    ill_posed: bool = False

    def as_dict(self) -> dict:
        return {
            "snr": self.snr,
            "information_bound": self.information_bound,
            "directional_bound": self.directional_bound,
            "hardness_bound": self.hardness_bound,
            "directional_l0": self.directional_l0,
            "ill_posed": self.ill_posed,
        }


def snr_and_thresholds(ds: LabeledDataset, d: Optional[int] = None) -> ThresholdRecord:
    """SNR next to the general-position, permeance and hardness thresholds."""
    L = ds.linear_truth
    if d is None:
        if L is None:
            raise ValueError("d is required when the dataset has no truth")
        d = L.dim
    N, D = ds.N, ds.D
    info = (N + d - 1) / (N - d + 1) if N - d + 1 > 0 else float("inf")
    hardness = d / (D - d) if D > d else float("inf")
    c = None
    directional = None
    ill = False
    if L is not None and ds.n_in <= DIRECTIONAL_MAX_N:
        c = directional_l0_min(ds.inliers, L)
        if c == 0:
            directional, ill = float("inf"), True
        else:
            directional = ds.n_in / c
    return ThresholdRecord(ds.snr, info, directional, hardness, c, ill)
