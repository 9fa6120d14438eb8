"""Independent oracles and instance builders shared by the tests."""
import numpy as np

from ssmp.linalg import orthonormal_basis, subspace_distance


def planted(rng, m, n, K, r, model="gaussian"):
    """Gaussian A with N(0, 1/m) entries and a row-K-sparse X of rank min(K, r)."""
    A = rng.standard_normal((m, n)) / np.sqrt(m)
    support = tuple(sorted(int(i) for i in rng.choice(n, size=K, replace=False)))
    X = np.zeros((n, r))
    if model == "two-pam":
        X[list(support)] = rng.choice([-1.0, 1.0], size=(K, r))
    else:
        X[list(support)] = rng.standard_normal((K, r))
    return A, X, support


def brute_force_selection(A, R, S, L):
    """L indices minimising dist(R(R), P_{S u {i}} R(R)), ties to the smallest index.

    Each candidate's projection is formed from a fresh QR of [A_S, a_i], with
    no use of the projected dictionary.
    """
    U = orthonormal_basis(R)
    dists = []
    cand = [i for i in range(A.shape[1]) if i not in S]
    for i in cand:
        Q, _ = np.linalg.qr(A[:, list(S) + [i]])
        P = Q @ (Q.T @ U.vectors)
        dists.append(subspace_distance(U, orthonormal_basis(P)))
    order = np.argsort(np.round(np.array(dists), 12), kind="stable")
    return [cand[j] for j in order[:L]]


def ols_selection(A, y, K):
    """Orthogonal least squares: each step adds the column giving the smallest LS residual."""
    S = []
    for _ in range(K):
        best, best_res = None, np.inf
        for i in range(A.shape[1]):
            if i in S:
                continue
            cols = A[:, S + [i]]
            coef, *_ = np.linalg.lstsq(cols, y, rcond=None)
            res = np.linalg.norm(y - cols @ coef)
            if res < best_res - 1e-12:
                best, best_res = i, res
        S.append(best)
    return S


def omp_selection(A, y, K):
    """Plain OMP on a single vector."""
    S, res = [], y.copy()
    for _ in range(K):
        scores = np.abs(A.T @ res)
        scores[S] = -1
        S.append(int(np.argmax(scores)))
        coef, *_ = np.linalg.lstsq(A[:, S], y, rcond=None)
        res = y - A[:, S] @ coef
    return S


def low_coherence_frame(m, n, seed=0, clip=0.16, iters=300):
    """Unit-norm m x n frame with small mutual coherence (alternating projections)."""
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n))
    A /= np.linalg.norm(A, axis=0)
    for _ in range(iters):
        G = np.clip(A.T @ A, -clip, clip)
        np.fill_diagonal(G, 1.0)
        w, V = np.linalg.eigh(G)
        A = (V[:, -m:] * np.sqrt(np.maximum(w[-m:], 0))).T
        A /= np.linalg.norm(A, axis=0)
    return A


def rip_oracle(A, k):
    """RIP constant from singular values of every k-column submatrix."""
    from itertools import combinations

    worst = 0.0
    for S in combinations(range(A.shape[1]), k):
        s = np.linalg.svd(A[:, S], compute_uv=False)
        worst = max(worst, s[0] ** 2 - 1, 1 - s[-1] ** 2)
    return worst
