"""Signal space matching pursuit (SSMP) and the shared greedy pursuit loop."""
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import (
    InvalidInputError,
    OverdeterminedSupportError,
    SelectionExhaustedError,
    ShapeError,
)
from .linalg import DEFAULT_TOL, OrthonormalBasis, RankTolerance, _svd_basis, as_matrix

# relative spread below which two selection scores count as tied
TIE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SamplingMatrix:
    """Measurement operator A (m x n) with cached column norms."""

    A: np.ndarray
    column_norms: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        A = as_matrix(self.A, "sampling matrix")
        if A.shape[1] < 1:
            raise ShapeError("sampling matrix needs at least one column")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "column_norms", np.linalg.norm(A, axis=0))

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def n(self):
        return self.A.shape[1]


@dataclass(frozen=True, eq=False)
class ObservationMatrix:
    """Observations Y = AX + W; ``noise_frobenius`` is ||W||_F when known."""

    Y: np.ndarray
    noise_frobenius: float = None

    def __post_init__(self):
        object.__setattr__(self, "Y", as_matrix(self.Y, "observation matrix"))
        if self.noise_frobenius is not None and not self.noise_frobenius >= 0:
            raise InvalidInputError("noise_frobenius must be nonnegative")

    @property
    def r(self):
        return self.Y.shape[1]


def as_sampling(A):
    return A if isinstance(A, SamplingMatrix) else SamplingMatrix(A)


def as_observation(Y):
    return Y if isinstance(Y, ObservationMatrix) else ObservationMatrix(Y)


def as_support(indices, n):
    """Validate a support set and return it as a sorted tuple of ints."""
    idx = sorted(int(i) for i in np.atleast_1d(np.asarray(indices, dtype=np.int64)))
    if len(set(idx)) != len(idx):
        raise InvalidInputError("support contains duplicate indices")
    if idx and (idx[0] < 0 or idx[-1] >= n):
        raise InvalidInputError(f"support indices must lie in [0, {n})")
    return tuple(idx)


@dataclass(frozen=True)
class SsmpConfig:
    """Inputs of SSMP besides A and Y.

    ``stop_tol`` is the floor applied to the stopping threshold so that an
    exact fit is detected in floating point when ``epsilon`` is 0.
    """

    K: int
    L: int = 1
    epsilon: float = 0.0
    max_iterations_override: int = None
    stop_tol: float = 1e-10
    tol: RankTolerance = DEFAULT_TOL

    def __post_init__(self):
        if not (1 <= self.L <= self.K):
            raise InvalidInputError(f"need 1 <= L <= K, got L={self.L}, K={self.K}")
        if not self.epsilon >= 0:
            raise InvalidInputError("epsilon must be nonnegative")
        if self.max_iterations_override is not None and self.max_iterations_override < 0:
            raise InvalidInputError("max_iterations_override must be nonnegative")

    def k_max(self, m):
        if self.max_iterations_override is not None:
            return int(self.max_iterations_override)
        return min(self.K, m // self.L)


@dataclass(frozen=True)
class IterationRecord:
    selected: tuple
    residual_norm: float
    distance: float


@dataclass
class RecoveryResult:
    support: tuple
    estimate: np.ndarray
    iterations_run: int
    trace: list
    stop_reason: str
    algorithm: str = "ssmp"

    @property
    def residual_norms(self):
        return [rec.residual_norm for rec in self.trace]

    @property
    def selection_sequence(self):
        return [i for rec in self.trace for i in rec.selected]


def _column_threshold(norms, tol, shape):
    if tol.mode == "absolute":
        return np.full_like(norms, tol.value)
    return tol.value * max(shape) * norms


def _projected_columns(A, Q):
    return A - Q @ (Q.T @ A) if Q.shape[1] else A.copy()


def _normalize_projected(P, norms, excluded_mask, tol):
    pn = np.linalg.norm(P, axis=0)
    ok = (pn > _column_threshold(norms, tol, P.shape)) & ~excluded_mask
    B = np.zeros_like(P)
    B[:, ok] = P[:, ok] / pn[ok]
    return B, ok


def normalized_projected_dictionary(A, S=(), tol=DEFAULT_TOL):
    """l2-normalized counterpart B of P_S^perp A.

    Columns indexed by S, and columns whose projection falls below the rank
    threshold (they lie in span(A_S)), are set to zero.
    """
    A = as_sampling(A)
    S = as_support(S, A.n)
    Q, _, _ = _svd_basis(A.A[:, list(S)], tol)
    mask = np.zeros(A.n, dtype=bool)
    mask[list(S)] = True
    B, _ = _normalize_projected(_projected_columns(A.A, Q), A.column_norms, mask, tol)
    return B


def top_indices(scores, admissible, L, tie_tol=TIE_TOL):
    """Indices of the ``L`` largest admissible scores, ties to the smallest index.

    Scores within ``tie_tol`` (relative to the largest) are treated as equal
    so that roundoff cannot reorder genuinely tied candidates.
    """
    cand = np.flatnonzero(admissible)
    if cand.size < L:
        raise SelectionExhaustedError(int(cand.size), L)
    s = scores[cand]
    top = s.max() if s.size else 0.0
    if top > 0:
        key = np.round(s / (top * tie_tol))
    else:
        key = np.zeros_like(s)
    order = np.argsort(-key, kind="stable")
    return [int(i) for i in cand[order[:L]]]


def ssmp_identify(B, residual_basis, L, excluded=()):
    """L indices maximizing ||P_R(R) b_i||_2 over admissible columns of B.

    A column is admissible when it is not excluded and nonzero.
    """
    B = np.asarray(B, dtype=np.float64)
    if residual_basis.ambient_dim != B.shape[0]:
        raise ShapeError("residual basis and B have different row counts")
    admissible = np.any(B != 0, axis=0)
    admissible[list(excluded)] = False
    U = residual_basis.vectors
    scores = np.linalg.norm(U.T @ B, axis=0) if U.shape[1] else np.zeros(B.shape[1])
    return top_indices(scores, admissible, L)


def least_squares_estimate(A, Y, S):
    """n x r matrix with rows on S equal to pinv(A_S) Y and zero elsewhere."""
    A = as_sampling(A)
    Y = as_observation(Y)
    if Y.Y.shape[0] != A.m:
        raise ShapeError("A and Y have different row counts")
    S = list(as_support(S, A.n))
    if len(S) > A.m:
        raise OverdeterminedSupportError(f"|S| = {len(S)} exceeds m = {A.m}")
    X = np.zeros((A.n, Y.r))
    if S:
        Q, s, Vt = _svd_basis(A.A[:, S], DEFAULT_TOL)
        X[S] = _pinv_apply(Q, s, Vt, Y.Y)
    return X


def _pinv_apply(Q, s, Vt, Y):
    return Vt.T @ ((Q.T @ Y) / s[:, None]) if s.size else np.zeros((Vt.shape[1], Y.shape[1]))


# --- selection rules -------------------------------------------------------
# Each scorer maps the loop state to (scores, admissible) over all n columns.

def ssmp_scores(A, norms, Q, U, R, selected, tol):
    B, ok = _normalize_projected(_projected_columns(A, Q), norms, selected, tol)
    scores = np.linalg.norm(U.T @ B, axis=0) if U.shape[1] else np.zeros(A.shape[1])
    return scores, ok


def _pursuit(A, Y, *, K, L, iterations, epsilon, stop_tol, scorer, tol, algorithm,
             prune=True):
    """Greedy loop shared by SSMP and the baselines.

    While fewer than ``iterations`` rounds have run and the measurement space
    is farther than ``max(epsilon, stop_tol)`` from its projection onto the
    current support: score, pick L indices, re-solve least squares.
    """
    A = as_sampling(A)
    obs = as_observation(Y)
    Ymat = obs.Y
    m, n = A.A.shape
    if Ymat.shape[0] != m:
        raise ShapeError(f"A has {m} rows but Y has {Ymat.shape[0]}")
    r = Ymat.shape[1]
    if not np.any(Ymat):
        return RecoveryResult((), np.zeros((n, r)), 0, [], "exact-zero-observation", algorithm)

    U_Y, s_Y, _ = _svd_basis(Ymat, tol)
    if tol.mode == "absolute":
        res_tol = tol
    else:
        res_tol = RankTolerance("absolute", tol.threshold(s_Y[0], Ymat.shape))
    threshold = max(epsilon, stop_tol)

    selected = np.zeros(n, dtype=bool)
    support = []
    Q = np.zeros((m, 0))
    X_S = np.zeros((0, r))
    R = Ymat
    dist = float(np.sqrt(U_Y.shape[1]))
    trace = []
    k = 0
    while k < iterations and dist > threshold:
        U_R, _, _ = _svd_basis(R, res_tol)
        scores, admissible = scorer(A.A, A.column_norms, Q, U_R, R, selected, tol)
        try:
            picked = top_indices(scores, admissible, L)
        except SelectionExhaustedError as err:
            est = np.zeros((n, r))
            est[support] = X_S
            err.partial = RecoveryResult(tuple(sorted(support)), est, k, trace,
                                         "selection-exhausted", algorithm)
            raise
        k += 1
        support.extend(picked)
        selected[picked] = True
        Q, s, Vt = _svd_basis(A.A[:, support], DEFAULT_TOL)
        X_S = _pinv_apply(Q, s, Vt, Ymat)
        R = Ymat - A.A[:, support] @ X_S
        dist = float(np.linalg.norm(U_Y - Q @ (Q.T @ U_Y)))
        trace.append(IterationRecord(tuple(picked), float(np.linalg.norm(R)), dist))

    stop_reason = "epsilon-met" if dist <= threshold else "k-max"
    est = np.zeros((n, r))
    est[support] = X_S
    if prune and len(support) > K:
        row_norms = np.linalg.norm(est, axis=1)
        keep = top_indices(row_norms, selected, K)
        final = as_support(keep, n)
        est = least_squares_estimate(A, obs, final)
    else:
        final = as_support(support, n)
    return RecoveryResult(final, est, k, trace, stop_reason, algorithm)


def _check_budget(m, L, iterations):
    if iterations * L > m:
        raise OverdeterminedSupportError(
            f"{iterations} iterations x L={L} exceeds m={m} measurements"
        )


def ssmp_recover(A, Y, cfg):
    """Run SSMP: identify L indices per round by the refined rule, then prune to K rows."""
    A = as_sampling(A)
    iterations = cfg.k_max(A.m)
    _check_budget(A.m, cfg.L, iterations)
    return _pursuit(A, Y, K=cfg.K, L=cfg.L, iterations=iterations,
                    epsilon=cfg.epsilon, stop_tol=cfg.stop_tol, scorer=ssmp_scores,
                    tol=cfg.tol, algorithm=f"ssmp-L{cfg.L}")


def ra_ormp_recover(A, Y, cfg):
    """SSMP with one index per iteration (rank-aware order recursive matching pursuit)."""
    res = ssmp_recover(A, Y, replace(cfg, L=1))
    res.algorithm = "ra-ormp"
    return res


def ssmp_recover_extended(A, Y, cfg, total_iterations):
    """SSMP with the iteration cap raised to ``total_iterations`` (still pruned to K rows)."""
    A = as_sampling(A)
    _check_budget(A.m, cfg.L, total_iterations)
    return _pursuit(A, Y, K=cfg.K, L=cfg.L, iterations=total_iterations,
                    epsilon=cfg.epsilon, stop_tol=cfg.stop_tol, scorer=ssmp_scores,
                    tol=cfg.tol, algorithm=f"ssmp-L{cfg.L}")


def calibrated_epsilon(Y, noise_frobenius):
    """Stopping threshold ||W||_F / sigma_max(Y)."""
    Y = as_matrix(Y)
    smax = np.linalg.norm(Y, 2)
    return float(noise_frobenius / smax) if smax > 0 else 0.0
