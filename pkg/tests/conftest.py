import itertools
import math
from collections import Counter

import numpy as np
import pytest
import scipy.sparse as sp

from specc.datasets import load_karate
from specc.graph import SparseGraph


@pytest.fixture(scope="session")
def karate():
    return load_karate()


def two_cliques(size=5):
    """Disjoint union of two complete graphs and its block indicator."""
    block = np.ones((size, size)) - np.eye(size)
    A = sp.block_diag([block, block]).toarray()
    Z = np.zeros((2 * size, 2))
    Z[:size, 0] = 1
    Z[size:, 1] = 1
    return SparseGraph.from_matrix(A), Z


def random_symmetric(n, rng):
    m = rng.standard_normal((n, n))
    return (m + m.T) / 2


def _h(probs):
    return -sum(p * math.log(p) for p in probs if p > 0)


def _cond_ratio(a, b):
    """H(a|b)/H(a) for two binary columns, from cell counts; 0/0 -> 0, x/0 -> 1."""
    n = len(a)
    cells = Counter(zip(a, b))
    h_joint = _h([c / n for c in cells.values()])
    h_b = _h([c / n for c in Counter(b).values()])
    h_a = _h([c / n for c in Counter(a).values()])
    cond = max(h_joint - h_b, 0.0)
    if h_a == 0:
        return 0.0 if cond <= 1e-15 else 1.0
    return cond / h_a


def nvi_oracle(x, y):
    """NVI by enumerating every column permutation of ``x`` and evaluating the entropies directly."""
    x = (np.asarray(x) != 0).astype(int)
    y = (np.asarray(y) != 0).astype(int)
    K = max(x.shape[1], y.shape[1])
    x = np.hstack([x, np.zeros((x.shape[0], K - x.shape[1]), int)])
    y = np.hstack([y, np.zeros((y.shape[0], K - y.shape[1]), int)])
    best = math.inf
    for perm in itertools.permutations(range(K)):
        xs = x[:, perm]
        hx = sum(_cond_ratio(tuple(xs[:, k]), tuple(y[:, k])) for k in range(K)) / K
        hy = sum(_cond_ratio(tuple(y[:, k]), tuple(xs[:, k])) for k in range(K)) / K
        best = min(best, 0.5 * (hx + hy))
    return 1.0 - best


def random_binary_membership(n, K, rng, density=0.4):
    """Random 0/1 matrix with every row nonempty."""
    m = (rng.random((n, K)) < density).astype(int)
    m[np.arange(n), rng.integers(0, K, n)] = 1
    return m


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "_specc_acceptance", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
