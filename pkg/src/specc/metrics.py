"""Agreement between estimated and true memberships."""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import linear_sum_assignment

from .spca import MembershipBasis

_EXACT_MAX_K = 8


def _matrix(x) -> np.ndarray:
    return x.V if isinstance(x, MembershipBasis) else np.asarray(x, dtype=float)


def binarize(x, rule: str = "support", K: int | None = None) -> np.ndarray:
    """Binary membership matrix.

    ``rule="support"`` marks the nonzero entries; ``rule="threshold"`` marks
    entries ``>= 1/K`` (``K`` defaults to the column count), the convention
    for continuous-membership estimates.
    """
    m = _matrix(x)
    if np.any(m < 0):
        raise ValueError("memberships must be non-negative")
    if rule == "support":
        return (m != 0).astype(np.int8)
    if rule == "threshold":
        K = K or m.shape[1]
        return (m >= 1.0 / K).astype(np.int8)
    raise ValueError(f"unknown rule {rule!r}")


def overlap_count(b) -> int:
    """Number of nodes in two or more communities."""
    return int(np.sum(np.count_nonzero(_matrix(b), axis=1) >= 2))


def _pad(x: np.ndarray, y: np.ndarray):
    K = max(x.shape[1], y.shape[1])
    pad = lambda m: np.hstack([m, np.zeros((m.shape[0], K - m.shape[1]), m.dtype)])
    return pad(x), pad(y), x.shape[1] != y.shape[1]


def _entropy(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(p > 0, -p * np.log(p), 0.0)
    return np.sort(t, axis=0).sum(axis=0)  # sorted: same result for any cell order


def _conditional_costs(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``C[a, b] = (H(X_a|Y_b)/H(X_a) + H(Y_b|X_a)/H(Y_b)) / 2`` for all column pairs."""
    n = x.shape[0]
    x = x.astype(float)
    y = y.astype(float)
    n11 = x.T @ y
    n10 = x.sum(0)[:, None] - n11
    n01 = y.sum(0)[None, :] - n11
    n00 = n - n11 - n10 - n01
    joint = np.stack([n00, n01, n10, n11]) / n
    hxy = _entropy(joint)
    px = x.mean(0)
    py = y.mean(0)
    hx = _entropy(np.stack([1 - px, px]))[:, None]
    hy = _entropy(np.stack([1 - py, py]))[None, :]
    h_x_given_y = hxy - hy
    h_y_given_x = hxy - hx

    def ratio(num, den):
        num = np.maximum(num, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(den > 0, num / den, np.where(num > 1e-15, 1.0, 0.0))
        return r

    return 0.5 * (ratio(h_x_given_y, hx) + ratio(h_y_given_x, hy))


def _min_assignment(cost: np.ndarray) -> tuple[float, np.ndarray]:
    K = cost.shape[0]
    if K <= _EXACT_MAX_K:
        perms = np.array(list(itertools.permutations(range(K))))
        totals = np.sort(cost[perms, np.arange(K)], axis=1).sum(axis=1)
        perm = perms[int(np.argmin(totals))]
    else:
        r, c = linear_sum_assignment(cost)
        perm = np.empty(K, dtype=int)
        perm[c] = r
    # fsum is correctly rounded, so the total does not depend on column order
    return math.fsum(cost[perm, np.arange(K)]), perm


def nvi(x, y) -> float:
    """Normalised variation of information between two binary membership matrices.

    Column permutations of ``x`` are searched exhaustively for ``K <= 8`` and
    by linear assignment beyond. Matrices with different column counts are
    padded with empty columns. A column with zero entropy contributes 0 when
    its conditional entropy is also 0, else 1.
    """
    x = np.asarray(_matrix(x)) != 0
    y = np.asarray(_matrix(y)) != 0
    if x.shape[0] != y.shape[0]:
        raise ValueError("membership matrices must have the same number of rows")
    x, y, _ = _pad(x, y)
    K = x.shape[1]
    total, _ = _min_assignment(_conditional_costs(x, y))
    return float(1.0 - total / K)


def _hard_labels(m: np.ndarray) -> np.ndarray:
    return np.argmax(m, axis=1)  # first maximum wins ties


def misclustering(zhat, z_true) -> int:
    """Nodes whose argmax community disagrees with the truth, under the best column matching."""
    est = _hard_labels(_matrix(zhat))
    truth_m = np.asarray(_matrix(z_true))
    if np.any(np.count_nonzero(truth_m, axis=1) != 1):
        raise ValueError("z_true must have exactly one membership per node")
    truth = _hard_labels(truth_m)
    K = max(_matrix(zhat).shape[1], truth_m.shape[1])
    conf = np.zeros((K, K))
    np.add.at(conf, (est, truth), 1)
    agree, _ = _min_assignment(-conf)
    return int(round(est.size + agree))


def metrics_report(estimate, truth) -> dict:
    """Summary used by the CLI: NVI, misclustering (single-membership truth only), overlaps, support size."""
    est = binarize(estimate)
    tb = np.asarray(_matrix(truth)) != 0
    _, _, padded = _pad(est.astype(bool), tb)
    out = {
        "nvi": nvi(est, tb),
        "misclustering": None,
        "overlap_count": overlap_count(est),
        "support_size": int(est.sum()),
        "truth_overlap_count": overlap_count(tb.astype(np.int8)),
        "padded": bool(padded),
    }
    if np.all(tb.sum(axis=1) == 1):
        out["misclustering"] = misclustering(_matrix(estimate), tb.astype(float))
    return out
