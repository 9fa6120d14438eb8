"""Reference joint sparse recovery algorithms and the Oracle-LS estimator.

SOMP and RA-OMP follow their usual literature definitions; they share the
tie-break and rank-tolerance conventions of :mod:`ssmp.core`.
"""
import numpy as np

from .core import (
    SsmpConfig,
    _pursuit,
    as_sampling,
    as_support,
    least_squares_estimate,
    ra_ormp_recover,
    ssmp_recover,
)
from .exceptions import InvalidInputError, OverdeterminedSupportError
from .linalg import DEFAULT_TOL

ALGORITHM_IDS = ("ssmp-L2", "ssmp-L3", "ra-ormp", "ra-omp", "somp", "oracle-ls")
# cited for comparison but not implemented
UNAVAILABLE_IDS = ("m-ormp", "l1l2", "cs-music", "sa-music")


def somp_scores(A, norms, Q, U, R, selected, tol):
    scores = np.linalg.norm(A.T @ R, axis=1)
    return scores, ~selected & (norms > 0)


def ra_omp_scores(A, norms, Q, U, R, selected, tol):
    ok = ~selected & (norms > 0)
    scores = np.zeros(A.shape[1])
    if U.shape[1]:
        scores[ok] = np.linalg.norm(U.T @ A[:, ok], axis=0) / norms[ok]
    return scores, ok


def _baseline(A, Y, K, scorer, name):
    A = as_sampling(A)
    if K < 1:
        raise InvalidInputError("K must be positive")
    if K > A.m:
        raise OverdeterminedSupportError(f"K = {K} exceeds m = {A.m}")
    return _pursuit(A, Y, K=K, L=1, iterations=K, epsilon=0.0, stop_tol=1e-10,
                    scorer=scorer, tol=DEFAULT_TOL, algorithm=name, prune=False)


def somp_recover(A, Y, K):
    """Simultaneous OMP: pick argmax_i ||a_i^T R||_2, then least squares."""
    return _baseline(A, Y, K, somp_scores, "somp")


def ra_omp_recover(A, Y, K):
    """Rank-aware OMP: pick argmax_i ||P_R(R) a_i|| / ||a_i||, then least squares."""
    return _baseline(A, Y, K, ra_omp_scores, "ra-omp")


def oracle_ls(A, Y, true_support):
    """Least squares on the known support, zero elsewhere."""
    A = as_sampling(A)
    return least_squares_estimate(A, Y, as_support(true_support, A.n))


def parse_ssmp_tag(tag):
    """Return L for tags of the form ``ssmp-L<N>``, else None."""
    if tag.startswith("ssmp-L") and tag[6:].isdigit() and int(tag[6:]) >= 1:
        return int(tag[6:])
    return None


def is_known(tag):
    return tag in ALGORITHM_IDS or parse_ssmp_tag(tag) is not None


def run_algorithm(tag, A, Y, K, epsilon=0.0, true_support=None):
    """Dispatch on an algorithm tag. ``oracle-ls`` returns a bare estimate."""
    L = parse_ssmp_tag(tag)
    if L is not None:
        # L <= K is required; small-K grid points fall back to L = K
        return ssmp_recover(A, Y, SsmpConfig(K=K, L=min(L, K), epsilon=epsilon))
    if tag == "ra-ormp":
        return ra_ormp_recover(A, Y, SsmpConfig(K=K, L=1, epsilon=epsilon))
    if tag == "somp":
        return somp_recover(A, Y, K)
    if tag == "ra-omp":
        return ra_omp_recover(A, Y, K)
    if tag == "oracle-ls":
        return oracle_ls(A, Y, true_support)
    raise InvalidInputError(f"unknown or unavailable algorithm {tag!r}")
