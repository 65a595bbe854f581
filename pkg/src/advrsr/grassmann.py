"""Geometry of the Grassmannian G(D, d).

A point of G(D, d) is stored as a D x d matrix with orthonormal columns.
Everything here is basis independent: two bases spanning the same space
describe the same :class:`Subspace`, and equality is tested through the
largest principal angle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    AllZero,
    DimensionMismatch,
    TangencyViolation,
    ZeroVector,
)

RANK_TOL = 1e-10
ORTHO_TOL = 1e-10
EQUAL_TOL = 1e-9
TANGENT_TOL = 1e-8
_ZERO_ABS = 1e-300


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def _fix_signs(U: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of every column made positive
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[idx, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs


@dataclass(frozen=True, eq=False)
class Subspace:
    """A linear subspace held through an orthonormal basis (D x d)."""

    basis: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=float)
        if B.ndim == 1:
            B = B[:, None]
        if B.ndim != 2 or B.shape[1] < 1 or B.shape[1] > B.shape[0]:
            raise DimensionMismatch(f"basis must be D x d with 1 <= d <= D, got {B.shape}")
        gram = B.T @ B
        dev = np.max(np.abs(gram - np.eye(B.shape[1])))
        if not dev <= ORTHO_TOL:
            raise ValueError(f"basis columns are not orthonormal (deviation {dev:.2e})")
        object.__setattr__(self, "basis", _frozen(B))

    @classmethod
    def from_span(cls, M, rank_tol: float = RANK_TOL) -> "Subspace":
        return orthonormalize(M, rank_tol)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def complement_projector(self) -> np.ndarray:
        return np.eye(self.ambient_dim) - self.projector()

    def contains(self, x, tol: float = 1e-10) -> bool:
        return bool(angle_to(self, x) <= tol)

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        if self.basis.shape != other.basis.shape:
            return False
        return largest_angle(self, other) < EQUAL_TOL

    __hash__ = None

    def __repr__(self):
        return f"Subspace(D={self.ambient_dim}, d={self.dim})"


@dataclass(frozen=True, eq=False)
class TangentDirection:
    """Tangent vector H at ``at`` on the Grassmannian (B^T H = 0)."""

    at: Subspace
    direction: np.ndarray

    def __post_init__(self):
        H = np.asarray(self.direction, dtype=float)
        if H.ndim == 1:
            H = H[:, None]
        if H.shape != self.at.basis.shape:
            raise DimensionMismatch(
                f"tangent shape {H.shape} does not match basis shape {self.at.basis.shape}"
            )
        off = np.max(np.abs(self.at.basis.T @ H)) if H.size else 0.0
        if off > TANGENT_TOL:
            raise TangencyViolation(f"max |B^T H| = {off:.2e} exceeds {TANGENT_TOL:g}")
        object.__setattr__(self, "direction", _frozen(H))

    @classmethod
    def project(cls, at: Subspace, M) -> "TangentDirection":
        """Project an arbitrary D x d matrix onto the tangent space at ``at``."""
        M = np.asarray(M, dtype=float)
        if M.ndim == 1:
            M = M[:, None]
        B = at.basis
        return cls(at, M - B @ (B.T @ M))

    def spectral_norm(self) -> float:
        if not np.any(self.direction):
            return 0.0
        return float(np.linalg.norm(self.direction, 2))

    def scaled(self, c: float) -> "TangentDirection":
        return TangentDirection(self.at, c * self.direction)

    def inner(self, other: "TangentDirection") -> float:
        return float(np.sum(self.direction * other.direction))


@dataclass(frozen=True)
class PrincipalAngleVector:
    """Principal angles sorted in descending order."""

    angles: tuple

    def __post_init__(self):
        a = tuple(float(v) for v in self.angles)
        if any(a[i] < a[i + 1] for i in range(len(a) - 1)):
            raise ValueError("principal angles must be sorted descending")
        if a and (a[-1] < 0.0 or a[0] > np.pi / 2):
            raise ValueError("principal angles must lie in [0, pi/2]")
        object.__setattr__(self, "angles", a)

    @property
    def largest(self) -> float:
        return self.angles[0]

    def __len__(self):
        return len(self.angles)

    def __iter__(self):
        return iter(self.angles)

    def __getitem__(self, i):
        return self.angles[i]


def orthonormalize(M, rank_tol: float = RANK_TOL) -> Subspace:
    """Orthonormal basis for the column span of ``M``.

    The basis is the top-r block of left singular vectors, r being the number
    of singular values above ``rank_tol * s_max``. Column signs are fixed so
    that the largest-magnitude entry of each column is positive, which makes
    the result a deterministic function of ``M``.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    if M.size == 0 or np.all(np.abs(M) < _ZERO_ABS):
        raise AllZero("cannot orthonormalize an all-zero matrix")
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    r = int(np.sum(s > rank_tol * s[0]))
    return Subspace(_fix_signs(U[:, :r]))


def numerical_rank(M, rank_tol: float = RANK_TOL) -> int:
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    if M.size == 0 or np.all(np.abs(M) < _ZERO_ABS):
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > rank_tol * s[0]))


def _check_pair(S1: Subspace, S2: Subspace):
    if S1.ambient_dim != S2.ambient_dim or S1.dim != S2.dim:
        raise DimensionMismatch(
            f"subspaces differ in shape: {S1.basis.shape} vs {S2.basis.shape}"
        )


def principal_angles(S1: Subspace, S2: Subspace) -> PrincipalAngleVector:
    """Principal angles between two subspaces of equal dimension.

    Angles below pi/4 are taken from the sines (singular values of
    Q_{S1} B2) and the rest from the cosines (singular values of B1^T B2);
    arccos alone loses about half the digits near zero.
    """
    _check_pair(S1, S2)
    B1, B2 = S1.basis, S2.basis
    C = B1.T @ B2
    cos_desc = np.clip(np.linalg.svd(C, compute_uv=False), 0.0, 1.0)
    sin_asc = np.sort(np.clip(np.linalg.svd(B2 - B1 @ C, compute_uv=False), 0.0, 1.0))
    small = cos_desc**2 >= 0.5
    theta = np.where(small, np.arcsin(sin_asc), np.arccos(cos_desc))
    theta = np.clip(np.sort(theta)[::-1], 0.0, np.pi / 2)
    return PrincipalAngleVector(tuple(theta))


def largest_angle(S1: Subspace, S2: Subspace) -> float:
    return principal_angles(S1, S2).largest


def residual(S: Subspace, x) -> np.ndarray:
    """Q_S x = x - B B^T x; works column-wise on a D x N matrix."""
    x = np.asarray(x, dtype=float)
    B = S.basis
    return x - B @ (B.T @ x)


def angle_to(S: Subspace, x) -> float:
    x = np.asarray(x, dtype=float)
    nx = np.linalg.norm(x)
    if nx == 0.0:
        raise ZeroVector("angle to a subspace is undefined for the zero vector")
    ratio = np.linalg.norm(residual(S, x)) / nx
    return float(np.arcsin(min(max(ratio, 0.0), 1.0)))


def angles_to(S: Subspace, X) -> np.ndarray:
    """Column-wise :func:`angle_to` for a D x N matrix."""
    X = np.asarray(X, dtype=float)
    norms = np.linalg.norm(X, axis=0)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ZeroVector(f"column {zero[0]} is the zero vector")
    ratio = np.linalg.norm(residual(S, X), axis=0) / norms
    return np.arcsin(np.clip(ratio, 0.0, 1.0))


def _tangent_svd(H: TangentDirection):
    U, s, Wt = np.linalg.svd(H.direction, full_matrices=False)
    return U, s, Wt


def geodesic_step(S: Subspace, H: TangentDirection, t: float) -> Subspace:
    """Follow the geodesic from S with initial velocity H for time t.

    With the thin SVD H = U diag(s) W^T the endpoint is spanned by
    B W cos(s t) W^T + U sin(s t) W^T. A unit spectral-norm H therefore
    moves the largest principal angle by exactly t (for t <= pi/2).
    """
    if H.at is not S and not (H.at == S):
        raise DimensionMismatch("tangent direction is not attached to this subspace")
    B = H.at.basis
    off = np.max(np.abs(B.T @ H.direction))
    if off > TANGENT_TOL:
        raise TangencyViolation(f"max |B^T H| = {off:.2e} exceeds {TANGENT_TOL:g}")
    if t == 0:
        return S
    U, s, Wt = _tangent_svd(H)
    W = Wt.T
    Y = (B @ W) * np.cos(s * t) @ Wt + U * np.sin(s * t) @ Wt
    return orthonormalize(Y)


def transport(S: Subspace, H: TangentDirection, t: float) -> tuple:
    """Step along the geodesic and carry H with it.

    Returns ``(S_t, H_t)`` where ``H_t`` is the velocity of the same geodesic
    at time t, expressed in the basis of ``S_t``.
    """
    if t == 0:
        return S, H
    B = H.at.basis
    U, s, Wt = _tangent_svd(H)
    W = Wt.T
    Y = (B @ W) * np.cos(s * t) @ Wt + U * np.sin(s * t) @ Wt
    moved = (-(B @ W) * np.sin(s * t) + U * np.cos(s * t)) * s @ Wt
    St = orthonormalize(Y)
    R = Y.T @ St.basis
    return St, TangentDirection.project(St, moved @ R)


def random_subspace(D: int, d: int, rng: np.random.Generator) -> Subspace:
    if not 0 < d <= D:
        raise DimensionMismatch(f"need 0 < d <= D, got d={d}, D={D}")
    return orthonormalize(rng.standard_normal((D, d)))


def random_tangent(S: Subspace, rng: np.random.Generator) -> Optional[TangentDirection]:
    """Random unit spectral-norm tangent direction, or None when d = D."""
    if S.dim == S.ambient_dim:
        return None
    while True:
        M = rng.standard_normal(S.basis.shape)
        H = TangentDirection.project(S, M)
        n = H.spectral_norm()
        # a draw lying (numerically) inside S has no usable tangent part
        if n > 1e-6 * np.linalg.norm(M, 2):
            return H.scaled(1.0 / n)


def random_in_ball(L: Subspace, gamma: float, rng: np.random.Generator) -> Subspace:
    """Random subspace with largest principal angle to L strictly below gamma."""
    if not 0 < gamma <= np.pi / 2:
        raise ValueError(f"gamma must lie in (0, pi/2], got {gamma}")
    H = random_tangent(L, rng)
    if H is None:
        return L
    t = rng.uniform(0.0, gamma)
    return geodesic_step(L, H, t)
