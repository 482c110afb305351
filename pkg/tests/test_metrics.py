import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linear_sum_assignment

from specc.metrics import (_conditional_costs, _min_assignment, binarize, metrics_report,
                           misclustering, nvi, overlap_count)
from specc.simulate import membership_matrix
from specc.spca import MembershipBasis

from conftest import nvi_oracle, random_binary_membership


# binarize

def test_threshold_over_k_examples():
    m = np.array([[0.5, 0.5, 0.0], [0.4, 0.35, 0.25]])
    assert binarize(m, "threshold").tolist() == [[1, 1, 0], [1, 1, 0]]


def test_support_rule_marks_nonzeros():
    V = np.array([[0.3, 0.0], [0.0, 1e-9], [0.2, 0.7]])
    assert binarize(V).tolist() == [[1, 0], [0, 1], [1, 1]]
    b = MembershipBasis(V / np.linalg.norm(V, axis=0), "column_l2", 0.5, 3, True)
    assert np.array_equal(binarize(b), binarize(V))


def test_binarize_rejects_negative_and_unknown_rule():
    with pytest.raises(ValueError):
        binarize(np.array([[-0.1, 1.0]]))
    with pytest.raises(ValueError):
        binarize(np.eye(2), "median")


# overlap_count

def test_overlap_count_examples():
    assert overlap_count(np.eye(3)) == 0
    assert overlap_count(np.array([[1, 1, 0], [0, 0, 1]])) == 1
    assert overlap_count(membership_matrix(500, 3, 0.1)) == 50


# nvi

def test_nvi_identity_and_permutation():
    rng = np.random.default_rng(0)
    x = random_binary_membership(30, 3, rng)
    assert nvi(x, x) == 1.0
    assert nvi(x[:, [2, 0, 1]], x) == 1.0


def test_nvi_four_node_example():
    x = np.array([[1, 0], [0, 1], [1, 0], [0, 1]])
    y = np.array([[1, 0], [1, 0], [0, 1], [0, 1]])
    # the two partitions are independent: every conditional entropy equals its marginal
    assert nvi_oracle(x, y) == pytest.approx(0.0, abs=1e-15)
    assert abs(nvi(x, y) - nvi_oracle(x, y)) <= 1e-12


def test_nvi_matches_bruteforce():
    rng = np.random.default_rng(1)
    for _ in range(60):
        n, K = int(rng.integers(4, 50)), int(rng.integers(1, 5))
        x = random_binary_membership(n, K, rng)
        y = random_binary_membership(n, K, rng)
        assert abs(nvi(x, y) - nvi_oracle(x, y)) <= 1e-12


def test_nvi_degenerate_columns_follow_limit_convention():
    ones = np.ones((6, 1))
    assert nvi(ones, ones) == 1.0
    x = np.array([[1], [1], [0], [0], [1], [0]])
    assert nvi(ones, x) == pytest.approx(nvi_oracle(ones, x), abs=1e-12)
    # H(ones|x) = 0 gives ratio 0, H(x|ones) = H(x) gives ratio 1
    assert nvi(ones, x) == pytest.approx(0.5, abs=1e-12)


def test_nvi_pads_smaller_k():
    rng = np.random.default_rng(2)
    x = random_binary_membership(20, 2, rng)
    y = random_binary_membership(20, 3, rng)
    assert abs(nvi(x, y) - nvi_oracle(x, y)) <= 1e-12
    assert metrics_report(x, y)["padded"] is True


def test_nvi_row_mismatch():
    with pytest.raises(ValueError):
        nvi(np.eye(3), np.eye(4))


binary = st.integers(0, 10_000).map(lambda s: np.random.default_rng(s))


@settings(max_examples=60, deadline=None)
@given(binary, st.integers(3, 40), st.integers(1, 4))
def test_nvi_symmetric_bounded_invariant(rng, n, K):
    x = random_binary_membership(n, K, rng)
    y = random_binary_membership(n, K, rng)
    v = nvi(x, y)
    assert 0.0 <= v <= 1.0
    assert nvi(y, x) == v
    px, py = rng.permutation(K), rng.permutation(K)
    assert nvi(x[:, px], y[:, py]) == v


@settings(max_examples=100, deadline=None)
@given(binary, st.integers(1, 4))
def test_enumeration_matches_hungarian(rng, K):
    x = random_binary_membership(25, K, rng)
    y = random_binary_membership(25, K, rng)
    cost = _conditional_costs(x != 0, y != 0)
    total, perm = _min_assignment(cost)
    r, c = linear_sum_assignment(cost)
    assert abs(total - cost[r, c].sum()) <= 1e-12
    assert abs(cost[perm, np.arange(K)].sum() - total) <= 1e-12


def test_large_k_uses_assignment():
    rng = np.random.default_rng(3)
    x = np.eye(10)[rng.integers(0, 10, 200)]
    assert nvi(x, x[:, rng.permutation(10)]) == 1.0


# misclustering

def test_misclustering_examples():
    Z = np.eye(3)[np.repeat(np.arange(3), 5)]
    assert misclustering(Z, Z) == 0
    assert misclustering(Z[:, [1, 2, 0]], Z) == 0
    noisy = Z.copy()
    noisy[0] = [0.2, 0.5, 0.3]
    assert misclustering(noisy, Z) == 1


def test_misclustering_ties_go_to_lowest_index():
    Z = np.array([[1, 0], [1, 0], [0, 1], [0, 1]], float)
    est = np.array([[0.5, 0.5], [1, 0], [0, 1], [0, 1]])
    assert misclustering(est, Z) == 0
    assert misclustering(est[:, ::-1], Z) == 1


def test_misclustering_bruteforce():
    from itertools import permutations
    rng = np.random.default_rng(4)
    for _ in range(30):
        K = int(rng.integers(2, 5))
        truth = np.eye(K)[rng.integers(0, K, 40)]
        est = rng.random((40, K))
        lab = est.argmax(1)
        best = min(int(np.sum(np.array(p)[lab] != truth.argmax(1))) for p in permutations(range(K)))
        assert misclustering(est, truth) == best


def test_misclustering_requires_single_membership_truth():
    with pytest.raises(ValueError):
        misclustering(np.eye(2), np.ones((2, 2)))


def test_metrics_report_fields():
    Z = np.eye(2)[[0, 0, 1, 1]]
    rep = metrics_report(Z, Z)
    assert rep == {"nvi": 1.0, "misclustering": 0, "overlap_count": 0, "support_size": 4,
                   "truth_overlap_count": 0, "padded": False}
