"""Subset-enumeration kernels behind the exhaustive verifiers.

Each kernel has a numba version and a batched numpy version with identical
results; :data:`ssmp._accel.USE_NUMBA` picks one at call time.
"""
from itertools import combinations, islice

import numpy as np

from . import _accel
from ._accel import njit

_BATCH = 4096


@njit(cache=True)
def _next_combination(idx, n):
    k = idx.size
    i = k - 1
    while i >= 0 and idx[i] == n - k + i:
        i -= 1
    if i < 0:
        return False
    idx[i] += 1
    for j in range(i + 1, k):
        idx[j] = idx[j - 1] + 1
    return True


@njit(cache=True)
def _gram_extremes_nb(A, k):
    n = A.shape[1]
    idx = np.arange(k)
    hi = -np.inf
    lo = np.inf
    G = np.empty((k, k))
    AtA = A.T @ A
    while True:
        for a in range(k):
            for b in range(k):
                G[a, b] = AtA[idx[a], idx[b]]
        ev = np.linalg.eigvalsh(G)
        if ev[-1] > hi:
            hi = ev[-1]
        if ev[0] < lo:
            lo = ev[0]
        if not _next_combination(idx, n):
            break
    return hi, lo


def _gram_extremes_np(A, k):
    n = A.shape[1]
    AtA = A.T @ A
    hi, lo = -np.inf, np.inf
    it = combinations(range(n), k)
    while True:
        chunk = np.array(list(islice(it, _BATCH)), dtype=np.intp)
        if chunk.size == 0:
            break
        G = AtA[chunk[:, :, None], chunk[:, None, :]]
        ev = np.linalg.eigvalsh(G)
        hi = max(hi, float(ev[:, -1].max()))
        lo = min(lo, float(ev[:, 0].min()))
    return hi, lo


def gram_extremes(A, k):
    """Largest and smallest eigenvalue of A_S^T A_S over every k-subset S."""
    A = np.ascontiguousarray(A, dtype=np.float64)
    if _accel.USE_NUMBA:
        hi, lo = _gram_extremes_nb(A, k)
        return float(hi), float(lo)
    return _gram_extremes_np(A, k)


@njit(cache=True)
def _all_full_rank_nb(A, k, rtol):
    n = A.shape[1]
    m = A.shape[0]
    idx = np.arange(k)
    sub = np.empty((m, k))
    while True:
        for j in range(k):
            sub[:, j] = A[:, idx[j]]
        s = np.linalg.svd(sub, full_matrices=False)[1]
        if s[0] == 0.0 or s[k - 1] <= rtol * s[0] * max(m, k):
            return False
        if not _next_combination(idx, n):
            break
    return True


def _all_full_rank_np(A, k, rtol):
    m, n = A.shape
    it = combinations(range(n), k)
    while True:
        chunk = np.array(list(islice(it, _BATCH)), dtype=np.intp)
        if chunk.size == 0:
            return True
        sub = np.transpose(A[:, chunk], (1, 0, 2))
        s = np.linalg.svd(sub, compute_uv=False)
        bad = (s[:, 0] == 0.0) | (s[:, k - 1] <= rtol * s[:, 0] * max(m, k))
        if bad.any():
            return False


def all_full_rank(A, k, rtol):
    """True iff every k-subset of columns has numerical rank k."""
    A = np.ascontiguousarray(A, dtype=np.float64)
    if k > A.shape[0]:
        return False
    if _accel.USE_NUMBA:
        return bool(_all_full_rank_nb(A, k, rtol))
    return _all_full_rank_np(A, k, rtol)
