"""Goodness of fit and tuning: projection estimator, Bernoulli log-likelihood,
BIC, edge cross-validation with low-rank completion, and lambda / K selection.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .linalg import (RankDeficientError, as_operator, dense, operator_size, spmm, thin_qr,
                     truncated_svd)
from .spca import FitConfig, FitError, MembershipBasis, get_algorithm

DEFAULT_GRID = tuple(round(0.05 * i, 2) for i in range(1, 20))
DEFAULT_CLAMP = 1e-6
WARM_STARTS = ("descending", "ascending", "none")


def n_workers() -> int:
    """Worker cap from ``SPECC_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("SPECC_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn, items):
    items = list(items)
    workers = min(n_workers(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _basis_matrix(v) -> np.ndarray:
    return v.V if isinstance(v, MembershipBasis) else np.asarray(v, dtype=float)


def project_p(a, v) -> np.ndarray:
    """Least-squares fit of ``A`` by ``V B V^T`` over all ``K x K`` matrices ``B``.

    Computed as ``Q (Q^T A Q) Q^T`` with ``Q`` an orthonormal basis of ``span(V)``.
    """
    Q, _ = thin_qr(_basis_matrix(v))
    M = Q.T @ spmm(a, Q)
    M = (M + M.T) / 2
    P = (Q @ M) @ Q.T
    return (P + P.T) / 2


def projection_residual(a, v) -> float:
    """``||A - P_hat||_F^2`` for the projection estimator, without forming ``P_hat``."""
    Q, _ = thin_qr(_basis_matrix(v))
    M = Q.T @ spmm(a, Q)
    op = as_operator(a)
    total = float(op.multiply(op).sum()) if sp.issparse(op) else float(np.sum(op * op))
    return max(total - float(np.sum(M * M)), 0.0)


def _upper(a) -> tuple[np.ndarray, np.ndarray]:
    n = operator_size(a)
    return np.triu_indices(n, k=1)


def log_likelihood(a, p_hat: np.ndarray, clamp_eps: float = DEFAULT_CLAMP) -> float:
    """Bernoulli log-likelihood of the upper triangle of ``A`` under clamped ``p_hat``.

    ``p_hat`` is clipped to ``[clamp_eps, 1 - clamp_eps]`` first.
    """
    if not 0 < clamp_eps < 0.5:
        raise ValueError("clamp_eps must lie in (0, 0.5)")
    A = dense(a)
    iu = _upper(a)
    p = np.clip(np.asarray(p_hat, dtype=float)[iu], clamp_eps, 1 - clamp_eps)
    y = A[iu]
    return float(np.sum(np.where(y > 0, np.log(p), np.log1p(-p))))


def bic_score(a, basis, clamp_eps: float = DEFAULT_CLAMP) -> float:
    """``-2 loglik(P_hat) + ||V||_0 log(n(n-1)/2)``."""
    V = _basis_matrix(basis)
    n = V.shape[0]
    ll = log_likelihood(a, project_p(a, V), clamp_eps)
    return -2.0 * ll + np.count_nonzero(V) * np.log(n * (n - 1) / 2)


@dataclass(frozen=True)
class FoldPlan:
    """Partition of the node pairs ``i < j`` into ``L`` folds.

    ``rows``/``cols`` enumerate the pairs in ``numpy.triu_indices`` order and
    ``fold[p]`` is the fold of pair ``p``.
    """

    n: int
    L: int
    seed: int
    rows: np.ndarray = field(repr=False)
    cols: np.ndarray = field(repr=False)
    fold: np.ndarray = field(repr=False)

    def pairs(self, l: int) -> tuple[np.ndarray, np.ndarray]:
        sel = self.fold == l
        return self.rows[sel], self.cols[sel]

    def sizes(self) -> np.ndarray:
        return np.bincount(self.fold, minlength=self.L)

    def assignment(self) -> dict[tuple[int, int], int]:
        return {(int(i), int(j)): int(f) for i, j, f in zip(self.rows, self.cols, self.fold)}


def make_folds(n: int, L: int, seed: int = 0) -> FoldPlan:
    """Uniformly random balanced split of all ``n(n-1)/2`` node pairs into ``L`` folds."""
    if L < 2:
        raise ValueError("need at least 2 folds")
    rows, cols = np.triu_indices(n, k=1)
    n_pairs = rows.size
    if L > n_pairs:
        raise ValueError(f"{L} folds exceed the {n_pairs} available node pairs")
    rng = np.random.default_rng(seed)
    fold = np.empty(n_pairs, dtype=np.int64)
    fold[rng.permutation(n_pairs)] = np.arange(n_pairs) % L
    return FoldPlan(n=n, L=L, seed=seed, rows=rows, cols=cols, fold=fold)


def complete_matrix(a, heldout, K: int) -> np.ndarray:
    """Fill held-out node pairs by rank-``K`` truncation of the rescaled observed matrix.

    Observed entries are divided by the observed fraction ``p_obs``; held-out
    pairs and the diagonal are set to zero. The rank-``K`` approximation is
    clipped to ``[0, 1]``.

    Parameters
    ----------
    heldout : tuple of (rows, cols) arrays
        Held-out unordered pairs (either orientation).
    """
    A = dense(a).copy()
    n = A.shape[0]
    hr, hc = (np.asarray(x, dtype=np.int64) for x in heldout)
    total = n * (n - 1) / 2
    p_obs = 1.0 - hr.size / total
    if p_obs <= 0:
        raise ValueError("no observed node pairs left")
    A /= p_obs
    A[hr, hc] = 0.0
    A[hc, hr] = 0.0
    np.fill_diagonal(A, 0.0)
    return np.clip(truncated_svd(A, K), 0.0, 1.0)


def heldout_mse(a, p_hat: np.ndarray, pairs) -> float:
    """Mean squared error of ``p_hat`` against ``A`` over the given pairs."""
    r, c = pairs
    A = as_operator(a)
    y = np.asarray(A[r, c]).ravel()
    return float(np.mean((y - np.asarray(p_hat)[r, c]) ** 2))


class FoldFitError(FitError):
    def __init__(self, fold: int, cause: Exception):
        self.fold = fold
        super().__init__(f"fit failed on fold {fold}: {cause}")


def _path_fits(a, K, lambdas, fit, cfg: FitConfig, warm_start: str):
    """Fit every lambda; returns a list aligned with ``lambdas`` (None where the fit failed).

    ``warm_start`` is ``"descending"`` (largest lambda first, each later fit
    started from the previous result), ``"ascending"`` or ``"none"``.
    """
    if warm_start not in WARM_STARTS:
        raise ValueError(f"warm_start must be one of {WARM_STARTS}")
    order = list(range(len(lambdas)))
    if warm_start == "descending":
        order.reverse()
    out = [None] * len(lambdas)
    init = cfg.init
    for i in order:
        try:
            res = fit(a, K, replace(cfg, lam=lambdas[i], init=init))
        except (FitError, RankDeficientError):
            continue
        out[i] = res
        if warm_start != "none":
            init = res.V
    return out


def _fold_path(a, K, lambdas, plan: FoldPlan, l: int, fit, cfg: FitConfig, warm_start) -> np.ndarray:
    """Held-out MSE for every lambda on fold ``l`` (NaN where the fit fails)."""
    pairs = plan.pairs(l)
    M = complete_matrix(a, pairs, K)
    out = np.full(len(lambdas), np.nan)
    for i, res in enumerate(_path_fits(M, K, lambdas, fit, cfg, warm_start)):
        if res is None:
            continue
        try:
            out[i] = heldout_mse(a, project_p(M, res.V), pairs)
        except RankDeficientError:
            pass  # collinear columns: no usable projection
    return out


def ecv_fold_errors(a, K: int, lambdas, plan: FoldPlan, fit="eig", cfg: FitConfig | None = None,
                    warm_start: str = "descending") -> np.ndarray:
    """Held-out MSEs, shape ``(L, len(lambdas))``, NaN where a fold's fit failed."""
    cfg = cfg or FitConfig()
    fit = get_algorithm(fit)
    lambdas = list(lambdas)
    rows = _map(lambda l: _fold_path(a, K, lambdas, plan, l, fit, cfg, warm_start), range(plan.L))
    return np.vstack(rows)


def ecv_score(a, K: int, lam: float, plan: FoldPlan, fit="eig", cfg: FitConfig | None = None) -> float:
    """Edge cross-validation error: held-out MSE of the projection estimator, averaged over folds."""
    errs = ecv_fold_errors(a, K, [lam], plan, fit, cfg)[:, 0]
    bad = np.flatnonzero(np.isnan(errs))
    if bad.size:
        l = int(bad[0])
        M = complete_matrix(a, plan.pairs(l), K)
        try:
            res = get_algorithm(fit)(M, K, replace(cfg or FitConfig(), lam=lam))
            project_p(M, res.V)
        except (FitError, RankDeficientError) as exc:
            raise FoldFitError(l, exc) from exc
    return float(errs.mean())


@dataclass
class PathEntry:
    lam: float
    basis: MembershipBasis
    bic: float
    cv_mse: float | None = None
    cv_se: float | None = None

    @property
    def support_size(self) -> int:
        return self.basis.support_size

    @property
    def overlap_count(self) -> int:
        return self.basis.overlap_count


@dataclass
class LambdaPath:
    entries: list[PathEntry]
    criterion: str = "bic"

    @property
    def lambdas(self) -> list[float]:
        return [e.lam for e in self.entries]

    def score(self, e: PathEntry) -> float:
        s = e.bic if self.criterion == "bic" else e.cv_mse
        return np.inf if s is None or not np.isfinite(s) else s

    def best_index(self) -> int:
        scores = [self.score(e) for e in self.entries]
        best = min(scores)
        if not np.isfinite(best):
            raise FitError("no lambda produced a usable fit")
        # ties go to the larger (sparser) lambda
        return max(i for i, s in enumerate(scores) if s == best)

    def best(self) -> PathEntry:
        return self.entries[self.best_index()]

    def __len__(self):
        return len(self.entries)


def select_lambda(a, K: int, grid=DEFAULT_GRID, criterion: str = "bic", fit="eig",
                  cfg: FitConfig | None = None, plan: FoldPlan | None = None,
                  folds: int = 5, clamp_eps: float = DEFAULT_CLAMP,
                  warm_start: str = "descending"):
    """Fit the whole lambda grid and pick the value minimising BIC or ECV error.

    By default lambdas are fitted from largest to smallest, each fit
    warm-started from the previous successful one; the first uses
    ``cfg.init``. Lambdas whose fit fails are left out of the path. Ties in
    the criterion go to the larger lambda.

    Returns
    -------
    best_lambda : float
    path : LambdaPath
    """
    if criterion not in ("bic", "ecv"):
        raise ValueError("criterion must be 'bic' or 'ecv'")
    grid = [float(x) for x in grid]
    if not grid or any(b <= a_ for a_, b in zip(grid, grid[1:])) or grid[0] < 0 or grid[-1] >= 1:
        raise ValueError("grid must be non-empty, strictly increasing and within [0, 1)")
    cfg = cfg or FitConfig()
    algo = get_algorithm(fit)

    cv = se = None
    if criterion == "ecv":
        if plan is None:
            plan = make_folds(operator_size(a), folds, cfg.seed)
        errs = ecv_fold_errors(a, K, grid, plan, algo, cfg, warm_start)
        cv = errs.mean(axis=0)
        se = errs.std(axis=0, ddof=1) / np.sqrt(plan.L)

    entries = []
    for i, res in enumerate(_path_fits(a, K, grid, algo, cfg, warm_start)):
        if res is None:
            continue
        try:
            bic = bic_score(a, res, clamp_eps)
        except RankDeficientError:
            continue
        entry = PathEntry(lam=grid[i], basis=res, bic=bic)
        if cv is not None:
            entry.cv_mse = float(cv[i])
            entry.cv_se = float(se[i])
        entries.append(entry)
    if not entries:
        raise FitError("every lambda in the grid failed; try smaller lambdas or another init")
    path = LambdaPath(entries, criterion)
    return path.best().lam, path


@dataclass
class KScore:
    k: int
    mean_mse: float
    se: float
    lam: float


def select_k(a, k_grid, lambda_grid=DEFAULT_GRID, plan: FoldPlan | None = None, fit="eig",
             cfg: FitConfig | None = None, folds: int = 20, warm_start: str = "descending"):
    """Choose the number of communities by edge cross-validation.

    For each ``K`` the ECV error is minimised over ``lambda_grid``; the
    ``K`` with the smallest minimum wins. Standard errors are taken across
    folds at each ``K``'s best lambda.

    Returns
    -------
    best_k : int
    scores : list of KScore
    """
    k_grid = sorted(int(k) for k in k_grid)
    if not k_grid:
        raise ValueError("k_grid is empty")
    cfg = cfg or FitConfig()
    if plan is None:
        plan = make_folds(operator_size(a), folds, cfg.seed)
    grid = sorted(float(x) for x in lambda_grid)
    scores = []
    for k in k_grid:
        errs = ecv_fold_errors(a, k, grid, plan, fit, cfg, warm_start)
        mean = errs.mean(axis=0)
        if not np.any(np.isfinite(mean)):
            scores.append(KScore(k, np.inf, np.nan, np.nan))
            continue
        j = int(np.nanargmin(mean))
        scores.append(KScore(k, float(mean[j]),
                             float(errs[:, j].std(ddof=1) / np.sqrt(plan.L)), grid[j]))
    best = min(scores, key=lambda s: (s.mean_mse, s.k))
    if not np.isfinite(best.mean_mse):
        raise FitError("no K produced a usable fit")
    return best.k, scores
