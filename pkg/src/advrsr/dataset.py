"""Inlier/outlier datasets, spherization, symmetrization and generators.

Points are stored column-wise in a D x N matrix. Duplicate columns are
allowed: a dataset is a multiset.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import comb
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import DimensionError, DivisibilityError, ZeroColumn
from .grassmann import Subspace, angles_to, numerical_rank, random_subspace

SYMMETRIZE_MAX_N = 2000
GENERAL_POSITION_CHECK_N = 30
# subsets enumerated at most when checking general position
_GP_CHECK_BUDGET = 200_000


@dataclass(frozen=True, eq=False)
class AffineSubspace:
    """b + L with the offset taken as the minimal-norm representative (B^T b = 0)."""

    linear: Subspace
    offset: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.offset, dtype=float).reshape(-1)
        if b.shape[0] != self.linear.ambient_dim:
            raise DimensionError("offset length does not match the ambient dimension")
        B = self.linear.basis
        scale = max(1.0, float(np.linalg.norm(b)))
        if np.max(np.abs(B.T @ b)) > 1e-10 * scale:
            raise ValueError("offset is not orthogonal to the linear part")
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "offset", b)

    @classmethod
    def from_point(cls, linear: Subspace, point) -> "AffineSubspace":
        p = np.asarray(point, dtype=float).reshape(-1)
        B = linear.basis
        return cls(linear, p - B @ (B.T @ p))

    def distance(self, X) -> np.ndarray:
        """Euclidean distance of each column of X to the affine set."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        Y = X - self.offset[:, None]
        B = self.linear.basis
        return np.linalg.norm(Y - B @ (B.T @ Y), axis=0)

    def __eq__(self, other):
        if not isinstance(other, AffineSubspace):
            return NotImplemented
        return self.linear == other.linear and float(
            np.linalg.norm(self.offset - other.offset)
        ) < 1e-9

    __hash__ = None


@dataclass(frozen=True)
class NoiseSpec:
    epsilon: float = 0.0
    kind: str = "none"  # none | gaussian-clipped | uniform-ball

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.kind not in ("none", "gaussian-clipped", "uniform-ball"):
            raise ValueError(f"unknown noise kind {self.kind!r}")


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    points: np.ndarray
    inlier_mask: np.ndarray
    truth: Optional[Union[Subspace, AffineSubspace]] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        X = np.array(self.points, dtype=float, copy=True)
        if X.ndim != 2:
            raise DimensionError("points must be a D x N matrix")
        mask = np.array(self.inlier_mask, dtype=bool, copy=True).reshape(-1)
        if mask.shape[0] != X.shape[1]:
            raise DimensionError("inlier mask length must equal the number of points")
        X.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "points", X)
        object.__setattr__(self, "inlier_mask", mask)

    @property
    def D(self) -> int:
        return self.points.shape[0]

    @property
    def N(self) -> int:
        return self.points.shape[1]

    @property
    def n_in(self) -> int:
        return int(self.inlier_mask.sum())

    @property
    def n_out(self) -> int:
        return self.N - self.n_in

    @property
    def inliers(self) -> np.ndarray:
        return self.points[:, self.inlier_mask]

    @property
    def outliers(self) -> np.ndarray:
        return self.points[:, ~self.inlier_mask]

    @property
    def snr(self) -> float:
        return self.n_in / self.n_out if self.n_out else float("inf")

    @property
    def linear_truth(self) -> Optional[Subspace]:
        if isinstance(self.truth, AffineSubspace):
            return self.truth.linear
        return self.truth


# ---------------------------------------------------------------- transforms


def spherize(X) -> np.ndarray:
    """Scale every column to unit Euclidean norm."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    norms = np.linalg.norm(X, axis=0)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ZeroColumn(zero[0])
    out = X / norms
    # columns already unit length to working precision stay bit-identical,
    # which makes spherize idempotent
    unit = np.abs(norms - 1.0) <= 4 * np.finfo(float).eps
    out[:, unit] = X[:, unit]
    return out


def pair_indices(N: int):
    """(i, j) index arrays of all pairs i < j in lexicographic order."""
    i, j = np.triu_indices(N, k=1)
    return i, j


def symmetrize(X) -> np.ndarray:
    """All pairwise differences x_i - x_j, i < j, lexicographic in (i, j)."""
    X = np.asarray(X, dtype=float)
    N = X.shape[1]
    if N < 2:
        raise DimensionError("symmetrization needs at least two points")
    if N > SYMMETRIZE_MAX_N:
        raise DimensionError(
            f"symmetrize materializes C(N,2) columns; N={N} exceeds the guard {SYMMETRIZE_MAX_N}"
        )
    i, j = pair_indices(N)
    return X[:, i] - X[:, j]


def symmetrized_inlier_fraction(inlier_mask) -> Fraction:
    """Exact fraction of symmetrized columns that come from two inliers."""
    mask = np.asarray(inlier_mask, dtype=bool)
    N, n_in = mask.size, int(mask.sum())
    return Fraction(comb(n_in, 2), comb(N, 2))


# ---------------------------------------------------------------- generators


def _meta(name, seed=None, **params):
    m = {"generator": name, **params}
    if seed is not None:
        m["seed"] = seed
    return m


def gen_haystack(D, d, N_in, N_out, sigma_in=1.0, sigma_out=1.0, rng=None, seed=None):
    """Haystack model: N(0, s_in^2 P_L/d) inliers and N(0, s_out^2 I/D) outliers.

    Inliers occupy the first N_in columns.
    """
    if rng is None:
        rng = np.random.default_rng(seed)
    if min(D, d, N_in) <= 0 or N_out < 0:
        raise ValueError("dimensions and inlier count must be positive")
    if sigma_in <= 0 or sigma_out <= 0:
        raise ValueError("sigmas must be positive")
    L = random_subspace(D, d, rng)
    X_in = L.basis @ rng.standard_normal((d, N_in)) * (sigma_in / np.sqrt(d))
    X_out = rng.standard_normal((D, N_out)) * (sigma_out / np.sqrt(D))
    X = np.hstack([X_in, X_out])
    mask = np.r_[np.ones(N_in, bool), np.zeros(N_out, bool)]
    meta = _meta("haystack", seed, D=D, d=d, N_in=N_in, N_out=N_out,
                 sigma_in=sigma_in, sigma_out=sigma_out)
    return LabeledDataset(X, mask, L, meta)


def in_general_position(coords: np.ndarray, tol: float = 1e-10) -> bool:
    """True when every d-subset of the columns of a d x N matrix is independent."""
    d, N = coords.shape
    if N < d:
        return numerical_rank(coords) == N
    for combo in itertools.combinations(range(N), d):
        if numerical_rank(coords[:, combo], tol) < d:
            return False
    return True


def gen_general_position(L: Subspace, N_in: int, rng=None, seed=None) -> LabeledDataset:
    """Points uniform on the unit sphere of L.

    For N_in <= 30 every d-subset is checked for independence (when the number
    of subsets is tractable) and the sample is redrawn on failure.
    """
    if rng is None:
        rng = np.random.default_rng(seed)
    d = L.dim
    if N_in < d:
        raise ValueError("need at least d points")
    check = N_in <= GENERAL_POSITION_CHECK_N and comb(N_in, d) <= _GP_CHECK_BUDGET
    while True:
        Z = rng.standard_normal((d, N_in))
        Z /= np.linalg.norm(Z, axis=0)
        if not check or in_general_position(Z):
            break
    X = L.basis @ Z
    meta = _meta("general_position", seed, D=L.ambient_dim, d=d, N_in=N_in)
    return LabeledDataset(X, np.ones(N_in, bool), L, meta)


def gen_adversarial_line(direction, N_out: int, magnitude: float = 1.0) -> np.ndarray:
    """N_out identical outliers at magnitude * direction / |direction|."""
    u = np.asarray(direction, dtype=float).reshape(-1)
    nu = np.linalg.norm(u)
    if nu == 0:
        raise ValueError("direction must be nonzero")
    if magnitude <= 0:
        raise ValueError("magnitude must be positive")
    return np.repeat((magnitude * (u / nu))[:, None], N_out, axis=1)


def with_outliers(inliers: LabeledDataset, X_out, name=None, **params) -> LabeledDataset:
    """Append an outlier block to an inlier-only dataset."""
    X_out = np.asarray(X_out, dtype=float).reshape(inliers.D, -1)
    X = np.hstack([inliers.points, X_out])
    mask = np.r_[inliers.inlier_mask, np.zeros(X_out.shape[1], bool)]
    meta = dict(inliers.meta)
    if name:
        meta["outliers"] = name
    meta.update(params)
    meta["N_out"] = X_out.shape[1]
    return LabeledDataset(X, mask, inliers.truth, meta)


def gen_line_outlier_dataset(D, d, N_in, N_out, magnitude=1.0, rng=None, seed=None):
    """General-position inliers on a random L plus N_out copies of one outlier.

    The outlier direction is a standard Gaussian vector, hence off L almost surely.
    """
    if rng is None:
        rng = np.random.default_rng(seed)
    L = random_subspace(D, d, rng)
    ds = gen_general_position(L, N_in, rng)
    u = rng.standard_normal(D)
    out = gen_adversarial_line(u, N_out, magnitude)
    meta = dict(D=D, d=d, N_in=N_in, N_out=N_out, magnitude=magnitude)
    res = with_outliers(ds, out, "adversarial_line")
    return replace(res, meta=_meta("adversarial_line", seed, **meta))


def gen_affine_line_dataset(D, d, N_in, N_out, offset_scale=1.0, rng=None, seed=None):
    """Affine inliers b* + L (uniform on the unit sphere of L, shifted) and
    outliers at distinct random positions along one affine line."""
    if rng is None:
        rng = np.random.default_rng(seed)
    L = random_subspace(D, d, rng)
    b = rng.standard_normal(D) * offset_scale
    truth = AffineSubspace.from_point(L, b)
    Z = rng.standard_normal((d, N_in))
    Z /= np.linalg.norm(Z, axis=0)
    X_in = L.basis @ Z + truth.offset[:, None]
    u = rng.standard_normal(D)
    u /= np.linalg.norm(u)
    c = rng.standard_normal(D)
    t = rng.uniform(-3.0, 3.0, N_out)
    X_out = c[:, None] + u[:, None] * t
    X = np.hstack([X_in, X_out])
    mask = np.r_[np.ones(N_in, bool), np.zeros(N_out, bool)]
    meta = _meta("affine_line", seed, D=D, d=d, N_in=N_in, N_out=N_out)
    return LabeledDataset(X, mask, truth, meta)


def _coordinate_axes(D, idx):
    return Subspace(np.eye(D)[:, idx])


def fixture_axis_split(d, D, N_in, N_out) -> LabeledDataset:
    """Inliers split evenly over e_1..e_d, outliers all equal to e_{d+1}."""
    if D < d + 1:
        raise DimensionError("need D >= d + 1 to place outliers at e_{d+1}")
    if N_in % d:
        raise DivisibilityError(f"N_in={N_in} is not divisible by d={d}")
    E = np.eye(D)
    k = N_in // d
    cols = [E[:, j] for j in range(d) for _ in range(k)] + [E[:, d]] * N_out
    X = np.array(cols).T if cols else np.zeros((D, 0))
    mask = np.r_[np.ones(N_in, bool), np.zeros(N_out, bool)]
    meta = _meta("axis_split", d=d, D=D, N_in=N_in, N_out=N_out)
    return LabeledDataset(X, mask, _coordinate_axes(D, list(range(d))), meta)


def fixture_heavy_axis(d, D, N_in, N_out) -> LabeledDataset:
    """N_in-(d-1) copies of e_1, one sqrt(N_in-(d-1)) e_j for j = 2..d,
    outliers all equal to e_{d+1}."""
    if d <= 1:
        raise DimensionError("the construction needs d > 1")
    if D < d + 1:
        raise DimensionError("need D >= d + 1 to place outliers at e_{d+1}")
    if N_in <= d - 1:
        raise DimensionError("need N_in > d - 1")
    E = np.eye(D)
    heavy = N_in - (d - 1)
    r = np.sqrt(heavy)
    cols = [E[:, 0]] * heavy + [r * E[:, j] for j in range(1, d)] + [E[:, d]] * N_out
    X = np.array(cols).T
    mask = np.r_[np.ones(N_in, bool), np.zeros(N_out, bool)]
    meta = _meta("heavy_axis", d=d, D=D, N_in=N_in, N_out=N_out)
    return LabeledDataset(X, mask, _coordinate_axes(D, list(range(d))), meta)


def add_noise(ds: LabeledDataset, spec: NoiseSpec, rng=None, seed=None) -> LabeledDataset:
    """Perturb inliers only, every perturbation having norm at most epsilon."""
    if spec.kind == "none" or spec.epsilon == 0:
        return ds
    if rng is None:
        rng = np.random.default_rng(seed)
    D, idx = ds.D, np.flatnonzero(ds.inlier_mask)
    G = rng.standard_normal((D, idx.size))
    if spec.kind == "gaussian-clipped":
        E = G * (spec.epsilon / np.sqrt(D))
        norms = np.linalg.norm(E, axis=0)
        over = norms > spec.epsilon
        E[:, over] *= spec.epsilon / norms[over]
    else:
        G /= np.linalg.norm(G, axis=0)
        radii = spec.epsilon * rng.uniform(0.0, 1.0, idx.size) ** (1.0 / D)
        E = G * radii
    X = np.array(ds.points)
    X[:, idx] += E
    meta = dict(ds.meta, noise=spec.kind, epsilon=spec.epsilon)
    return LabeledDataset(X, ds.inlier_mask, ds.truth, meta)


def inliers_on_truth(ds: LabeledDataset, tol: float = 1e-12) -> bool:
    if ds.truth is None:
        return False
    if isinstance(ds.truth, AffineSubspace):
        return bool(np.all(ds.truth.distance(ds.inliers) < tol))
    return bool(np.all(angles_to(ds.truth, ds.inliers) < tol))


# ---------------------------------------------------------------- file format


def save_dataset(ds: LabeledDataset, path) -> None:
    """Write the plain-text matrix format.

    Layout::

        # meta {json}                    (optional comment line)
        D N d_truth
        D lines of N values              (the point matrix, row by row)
        one line of N 0/1 inlier flags
        D lines of d_truth values        (truth basis, only if d_truth > 0)
        one line of D values             (affine offset, only for affine truth)
    """
    lines = []
    if ds.meta:
        lines.append("# meta " + json.dumps(ds.meta, sort_keys=True, default=str))
    L = ds.linear_truth
    dt = L.dim if L is not None else 0
    lines.append(f"{ds.D} {ds.N} {dt}")
    fmt = lambda row: " ".join(f"{v:.17g}" for v in row)  # noqa: E731
    lines.extend(fmt(row) for row in ds.points)
    lines.append(" ".join("1" if m else "0" for m in ds.inlier_mask))
    if L is not None:
        lines.extend(fmt(row) for row in L.basis)
    if isinstance(ds.truth, AffineSubspace):
        lines.append(fmt(ds.truth.offset))
    Path(path).write_text("\n".join(lines) + "\n")


def load_dataset(path) -> LabeledDataset:
    meta = {}
    rows = []
    for raw in Path(path).read_text().splitlines():
        s = raw.strip()
        if not s:
            continue
        if s.startswith("#"):
            if s.startswith("# meta "):
                meta = json.loads(s[len("# meta "):])
            continue
        rows.append(s.split())
    try:
        D, N, dt = (int(v) for v in rows[0])
        X = np.array([[float(v) for v in r] for r in rows[1:1 + D]])
        mask = np.array([v == "1" for v in rows[1 + D]], dtype=bool)
        pos = 2 + D
        truth = None
        if dt > 0:
            B = np.array([[float(v) for v in r] for r in rows[pos:pos + D]])
            pos += D
            truth = Subspace(B)
            if pos < len(rows):
                truth = AffineSubspace(truth, np.array([float(v) for v in rows[pos]]))
    except (IndexError, ValueError) as exc:
        raise ValueError(f"malformed dataset file {path}: {exc}") from exc
    if X.shape != (D, N):
        raise ValueError(f"dataset file {path}: expected {D}x{N} points, found {X.shape}")
    return LabeledDataset(X, mask, truth, meta)
