from itertools import combinations
from math import floor, sqrt

import numpy as np
import pytest

from ssmp.core import SsmpConfig, ssmp_recover
from ssmp.exceptions import InvalidInputError, NotComputableError
from ssmp.verifiers import (
    NOT_COMPUTABLE,
    SATISFIED,
    VIOLATED,
    GuaranteeReport,
    approx_sparse_noise_bound,
    consistent_supports,
    early_stop_error_bound,
    fundamental_limit,
    krank,
    noise_f,
    parse_report,
    projector_gap,
    rip_constant,
    rip_lower_bound,
    table3_constraints,
    table3_guarantee,
    theorem1_bound,
    theorem1_guarantee,
    theorem3_noise_guarantee,
)

from helpers import low_coherence_frame, planted, rip_oracle


# --- krank -----------------------------------------------------------------

def test_krank_identity():
    assert krank(np.eye(3)) == 3


def test_krank_duplicate_column():
    e = np.eye(3)
    assert krank(np.column_stack([e[:, 0], e[:, 0], e[:, 1]])) == 1


def test_krank_gaussian_4x8():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((4, 8))
    assert krank(A) == 4
    assert all(np.linalg.matrix_rank(A[:, S]) == 4 for S in combinations(range(8), 4))


def test_krank_zero_column():
    A = np.eye(3)
    A[:, 1] = 0
    assert krank(A) == 0


def test_krank_guard():
    with pytest.raises(NotComputableError):
        krank(np.ones((2, 25)))


# --- RIP -------------------------------------------------------------------

def test_rip_orthonormal_columns():
    Q, _ = np.linalg.qr(np.random.default_rng(1).standard_normal((6, 4)))
    for k in range(1, 5):
        est = rip_constant(Q, k)
        assert est.delta == pytest.approx(0, abs=1e-12) and est.exhaustive


def test_rip_duplicate_columns_hits_one():
    e = np.eye(2)
    est = rip_constant(np.column_stack([e[:, 0], e[:, 0]]), 2)
    assert est.delta == pytest.approx(1.0)
    assert not est.has_rip


def test_rip_matches_oracle_and_is_monotone():
    rng = np.random.default_rng(2)
    A = rng.standard_normal((8, 12))
    A /= np.linalg.norm(A, axis=0)
    deltas = [rip_constant(A, k).delta for k in range(1, 5)]
    for k, d in enumerate(deltas, 1):
        assert d == pytest.approx(rip_oracle(A, k), abs=1e-10)
    assert all(a <= b + 1e-12 for a, b in zip(deltas, deltas[1:]))


def test_rip_guard_and_order_check():
    with pytest.raises(NotComputableError):
        rip_constant(np.ones((3, 40)), 10)
    with pytest.raises(InvalidInputError):
        rip_constant(np.ones((3, 4)), 5)


def test_rip_lower_bound_is_below_exact():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((8, 12)) / sqrt(8)
    exact = rip_constant(A, 3).delta
    some = [tuple(rng.choice(12, 3, replace=False)) for _ in range(5)]
    assert rip_lower_bound(A, some) <= exact + 1e-12
    assert rip_lower_bound(A, combinations(range(12), 3)) == pytest.approx(exact, abs=1e-10)


# --- guarantee reports -----------------------------------------------------

def test_report_requires_values_when_decided():
    with pytest.raises(ValueError):
        GuaranteeReport("x", 1.0, None, SATISFIED)
    GuaranteeReport("x", 1.0, None, NOT_COMPUTABLE)


def test_report_text_round_trip():
    rep = GuaranteeReport("p", 0.5, 0.25, SATISFIED, {"K": 4, "flag": True})
    parsed = parse_report(rep.to_text())
    assert parsed == {"predicate": "p", "bound_value": "0.5", "measured_value": "0.25",
                      "status": "satisfied", "K": "4", "flag": "true"}


def test_theorem1_bound_value():
    rep = theorem1_guarantee(None, 4, 2, 2)
    assert rep.bound_value == pytest.approx(0.5, abs=1e-12)
    assert rep.status == NOT_COMPUTABLE
    assert rep.details["rip_order"] == 7 and rep.details["iterations"] == 3


@pytest.mark.parametrize("K", [1, 3, 10, 50])
def test_theorem1_single_vector_form(K):
    assert theorem1_bound(K, 1, 1) == pytest.approx(1 / (sqrt(K + 0.25) + 0.5))


def test_theorem1_full_row_rank_duplicate_violated():
    A = np.column_stack([np.eye(2), np.eye(2)[:, 0]])
    rep = theorem1_guarantee(A, 1, 1, 1)
    assert rep.measured_value == 1 and rep.bound_value == 2 and rep.status == VIOLATED


def test_theorem1_full_row_rank_gaussian_satisfied():
    A = np.random.default_rng(4).standard_normal((6, 10))
    assert theorem1_guarantee(A, 4, 4, 1).status == SATISFIED


def test_theorem1_invalid():
    with pytest.raises(InvalidInputError):
        theorem1_guarantee(None, 2, 3, 1)


def test_fundamental_limit():
    assert fundamental_limit(50, 6) == 95
    assert fundamental_limit(7, 7) == 8
    assert fundamental_limit(1, 1) == 2
    with pytest.raises(InvalidInputError):
        fundamental_limit(2, 3)


@pytest.mark.parametrize("K,r,m,n", [(2, 1, 3, 8), (3, 2, 4, 10)])
def test_below_fundamental_limit_has_ambiguous_instance(K, r, m, n):
    assert m == fundamental_limit(K, r) - 1
    rng = np.random.default_rng(5)
    A = rng.standard_normal((m, n))
    S1, S2 = list(range(K)), list(range(K, 2 * K))
    # null space of A restricted to S1 u S2 has dimension 2K - m = r
    _, _, Vt = np.linalg.svd(A[:, S1 + S2])
    Z = Vt[m:].T
    X = np.zeros((n, r))
    X[S1] = Z[:K]
    assert np.linalg.matrix_rank(X) == r
    sols = consistent_supports(A, A @ X, K)
    assert tuple(S1) in sols and tuple(S2) in sols


def test_theorem1_soundness_rank_deficient():
    A = low_coherence_frame(12, 16)
    rep = theorem1_guarantee(A, 3, 2, 1)
    assert rep.status == SATISFIED
    rng = np.random.default_rng(6)
    for _ in range(200):
        X = np.zeros((16, 2))
        S = rng.choice(16, 3, replace=False)
        X[S] = rng.standard_normal((3, 2))
        res = ssmp_recover(A, A @ X, SsmpConfig(K=3, L=1))
        assert np.allclose(res.estimate, X, atol=1e-8)


def test_theorem1_soundness_full_row_rank():
    rng = np.random.default_rng(7)
    A = rng.standard_normal((8, 14))
    assert theorem1_guarantee(A, 5, 5, 2).status == SATISFIED
    for _ in range(200):
        X = np.zeros((14, 5))
        X[rng.choice(14, 5, replace=False)] = rng.standard_normal((5, 5))
        res = ssmp_recover(A, A @ X, SsmpConfig(K=5, L=2))
        assert np.allclose(res.estimate, X, atol=1e-8)


# --- noisy guarantee -------------------------------------------------------

@pytest.mark.parametrize("K,r,L", [(3, 2, 1), (4, 2, 2), (6, 1, 1), (8, 3, 2)])
def test_noise_function_sign_matches_theorem1(K, r, L):
    b = theorem1_bound(K, r, L)
    assert noise_f(b - 1e-6, K, r, L) > 0 > noise_f(b + 1e-6, K, r, L)


def test_theorem3_noiseless_limit():
    A = low_coherence_frame(12, 16)
    rng = np.random.default_rng(8)
    _, X, _ = planted(rng, 12, 16, 3, 2)
    rep = theorem3_noise_guarantee(A, X, np.zeros((12, 2)), 3, 2, 1)
    assert rep.measured_value == 0.0
    assert rep.status == theorem1_guarantee(A, 3, 2, 1).status == SATISFIED


def test_theorem3_transition_monotone_in_noise():
    A = low_coherence_frame(12, 16)
    rng = np.random.default_rng(9)
    _, X, _ = planted(rng, 12, 16, 3, 2)
    W0 = rng.standard_normal((12, 2))
    statuses = []
    for scale in np.geomspace(1e-6, 1.0, 25):
        statuses.append(theorem3_noise_guarantee(A, X, scale * W0, 3, 2, 1).status)
    first_bad = statuses.index(VIOLATED)
    assert statuses[0] == SATISFIED
    assert all(s == VIOLATED for s in statuses[first_bad:])


def test_theorem3_precondition():
    A = np.eye(4)
    X = np.zeros((4, 1))
    X[0] = 1e-3
    rep = theorem3_noise_guarantee(A, X, np.ones((4, 1)), 1, 1, 1)
    assert rep.status == VIOLATED and "sigma_max_W" in rep.details


def test_projector_gap_below_eta():
    rng = np.random.default_rng(10)
    checked = 0
    while checked < 50:
        A, X, _ = planted(rng, 12, 16, 3, 2)
        W = rng.uniform(1e-3, 0.2) * rng.standard_normal((12, 2))
        rep = theorem3_noise_guarantee(A, X, W, 3, 2, 1)
        if "eta_bar" in rep.details:
            checked += 1
            assert rep.details["eta_bar"] <= rep.details["eta"] + 1e-12


def test_projector_gap_zero_for_same_space():
    M = np.random.default_rng(11).standard_normal((5, 2))
    assert projector_gap(M, M @ np.array([[1.0, 2.0], [0.0, 1.0]])) < 1e-12


# --- extended-run table ----------------------------------------------------

@pytest.mark.parametrize("c,expected", [(2, 0.155), (3, 0.235), (4, 0.263), (5, 0.281), (6, 0.291)])
def test_table3_bounds(c, expected):
    assert table3_guarantee(c, 5).bound_value == pytest.approx(expected, abs=1e-3)


def test_table3_c2_constraints():
    c1, c2, c3 = table3_constraints(2)
    assert c1 == pytest.approx(0.167, abs=1e-3)
    assert c2 == pytest.approx(0.155, abs=1e-3)
    assert c3 == pytest.approx(0.185, abs=1e-3)


def test_table3_orders_and_iterations():
    rep = table3_guarantee(2, 10, L=3)
    assert rep.details["order_factor"] == pytest.approx(1 + 8 - 8 / (np.e**2 - 1))
    assert rep.details["rip_order"] == 77
    assert rep.details["published_rip_order"] == 78
    assert rep.details["iterations"] == max(10, floor(80 / 3))
    rep6 = table3_guarantee(6, 2)
    assert rep6.details["rip_order"] == 49 and rep6.details["published_rip_order"] == 50


def test_table3_with_small_matrix():
    A = np.random.default_rng(12).standard_normal((40, 80)) / sqrt(40)
    rep = table3_guarantee(2, 8, 1, A)
    assert rep.status == VIOLATED and rep.measured_value >= 1.0


def test_table3_rejects_c_below_two():
    with pytest.raises(InvalidInputError):
        table3_guarantee(1, 3)


# --- error bounds ----------------------------------------------------------

def test_early_stop_bound_at_zero_delta():
    assert early_stop_error_bound(2.0, 0.0, 0.0) == pytest.approx(12.0)


def test_early_stop_bound_increases_with_delta():
    vals = [early_stop_error_bound(1.0, d, d) for d in np.linspace(0, 0.9, 10)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert early_stop_error_bound(1.0, 1.0, 0.2) == float("inf")


def test_early_stop_general_form_matches_calibrated():
    sigma, w = 3.0, 0.7
    general = early_stop_error_bound(w, 0.2, 0.3, epsilon=w / sigma, sigma_max_y=sigma)
    assert general == pytest.approx(early_stop_error_bound(w, 0.2, 0.3))


def test_approx_sparse_noise_bound_holds():
    rng = np.random.default_rng(13)
    A = rng.standard_normal((10, 14))
    A /= np.linalg.norm(A, axis=0)
    dK = rip_constant(A, 3).delta
    for _ in range(20):
        X = 0.05 * rng.standard_normal((14, 2))
        X[rng.choice(14, 3, replace=False)] += rng.standard_normal((3, 2))
        rows = np.linalg.norm(X, axis=1)
        XK = np.zeros_like(X)
        keep = np.argsort(-rows)[:3]
        XK[keep] = X[keep]
        W = 0.01 * rng.standard_normal((10, 2))
        eff = np.linalg.norm(A @ (X - XK) + W)
        assert eff <= approx_sparse_noise_bound(X, 3, np.linalg.norm(W), dK) + 1e-12


def test_consistent_supports_unique_for_generic():
    rng = np.random.default_rng(14)
    A, X, support = planted(rng, 8, 10, 2, 1)
    assert consistent_supports(A, A @ X, 2) == [support]
