"""Orthonormal bases, projections and the subspace distance.

Every projection goes through an orthonormal basis obtained from an SVD;
normal equations are never formed.
"""
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidInputError, ShapeError

EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class RankTolerance:
    """Singular-value cutoff used for numerical rank decisions.

    In ``relative`` mode the cutoff is ``value * sigma_max * max(rows, cols)``,
    in ``absolute`` mode it is ``value`` itself.
    """

    mode: str = "relative"
    value: float = EPS

    def __post_init__(self):
        if self.mode not in ("relative", "absolute"):
            raise InvalidInputError(f"unknown rank tolerance mode {self.mode!r}")
        if not (self.value >= 0 and np.isfinite(self.value)):
            raise InvalidInputError("rank tolerance must be a finite nonnegative scalar")

    def threshold(self, sigma_max, shape):
        if self.mode == "absolute":
            return float(self.value)
        return float(self.value) * float(sigma_max) * max(shape)


DEFAULT_TOL = RankTolerance()


@dataclass(frozen=True, eq=False)
class OrthonormalBasis:
    """Columns of ``vectors`` (m x d) are orthonormal; d may be zero."""

    vectors: np.ndarray

    @property
    def ambient_dim(self):
        return self.vectors.shape[0]

    @property
    def dim(self):
        return self.vectors.shape[1]

    @classmethod
    def empty(cls, m):
        return cls(np.zeros((m, 0)))


def as_matrix(M, name="matrix"):
    """Coerce to a finite 2-D float array (vectors become single columns)."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim == 1:
        M = M[:, None]
    if M.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {M.shape}")
    if M.shape[0] < 1:
        raise ShapeError(f"{name} must have at least one row")
    if not np.all(np.isfinite(M)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return M


def _svd_basis(M, tol):
    # returns (U_r, s_r, Vt_r) truncated at the numerical rank
    m, k = M.shape
    if k == 0:
        return np.zeros((m, 0)), np.zeros(0), np.zeros((0, 0))
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((m, 0)), np.zeros(0), np.zeros((0, k))
    rank = int(np.count_nonzero(s > tol.threshold(s[0], M.shape)))
    return U[:, :rank], s[:rank], Vt[:rank]


def orthonormal_basis(M, tol=DEFAULT_TOL):
    """Orthonormal basis of the column space of ``M``.

    Singular directions at or below the rank threshold are dropped, so the
    basis dimension equals the numerical rank. An all-zero or zero-column
    input yields a basis of dimension 0.
    """
    M = as_matrix(M)
    U, _, _ = _svd_basis(M, tol)
    return OrthonormalBasis(U)


def _check_ambient(basis, rows):
    if basis.ambient_dim != rows:
        raise ShapeError(
            f"basis lives in R^{basis.ambient_dim} but operand has {rows} rows"
        )


def project(basis, M):
    """Orthogonal projection ``basis @ basis.T @ M`` onto span(basis)."""
    M = as_matrix(M)
    _check_ambient(basis, M.shape[0])
    Q = basis.vectors
    if Q.shape[1] == 0:
        return np.zeros_like(M)
    return Q @ (Q.T @ M)


def project_out(basis, M):
    """Projection of ``M`` onto the orthogonal complement of span(basis)."""
    M = as_matrix(M)
    return M - project(basis, M)


def subspace_distance(V, W):
    """Subspace distance sqrt(max(p, q) - sum_ij <v_i, w_j>^2).

    Zero-dimensional subspaces are allowed; two trivial subspaces are at
    distance 0. The radicand is clamped at zero against roundoff.
    """
    if V.ambient_dim != W.ambient_dim:
        raise ShapeError(
            f"ambient dimensions differ: {V.ambient_dim} vs {W.ambient_dim}"
        )
    p, q = V.dim, W.dim
    if p == 0 and q == 0:
        return 0.0
    overlap = float(np.sum((V.vectors.T @ W.vectors) ** 2)) if p and q else 0.0
    return float(np.sqrt(max(max(p, q) - overlap, 0.0)))


def residual_subspace_distance(Y_basis, S_basis):
    """``||P_S^perp U_Y||_F``, the distance from R(Y) to its projection onto span(S).

    This is the quantity SSMP compares against its stopping threshold.
    """
    _check_ambient(S_basis, Y_basis.ambient_dim)
    U = Y_basis.vectors
    if U.shape[1] == 0:
        return 0.0
    Q = S_basis.vectors
    if Q.shape[1] == 0:
        return float(np.sqrt(U.shape[1]))
    # explicit residual: d - ||Q^T U||_F^2 cancels catastrophically near zero
    return float(np.linalg.norm(U - Q @ (Q.T @ U)))


def singular_values(M):
    """All min(rows, cols) singular values of ``M`` in descending order."""
    M = as_matrix(M)
    if M.shape[1] == 0:
        return np.zeros(0)
    return np.linalg.svd(M, compute_uv=False)
