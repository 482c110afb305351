"""Sparse non-negative eigenbasis estimation by iterative thresholding.

Two fitting schemes share the multiply / transform / threshold / normalise
loop:

* :func:`spca_eig_fit` keeps unit-L2 columns and undoes the drift of the
  multiplication step with the least-squares back-transform, so the output
  carries degree information.
* :func:`spca_cd_fit` L1-normalises columns before thresholding and rows
  after, targeting networks with homogeneous degrees.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Literal

import numpy as np
import scipy.linalg as sla
from sklearn.cluster import KMeans

from .linalg import (RankDeficientError, as_operator, operator_size, spmm,
                     thin_qr, top_k_eigen)

Mode = Literal["column_l2", "row_l1"]


class FitError(RuntimeError):
    """A fit could not proceed; the message suggests a remedy."""


class ZeroColumnError(FitError):
    def __init__(self, column: int, lam: float):
        self.column = column
        super().__init__(f"community {column} lost all members at lambda={lam:g}; "
                         "use a smaller lambda or a different initialisation")


class SingularTransformError(FitError):
    pass


@dataclass
class MembershipBasis:
    """Non-negative ``n x K`` basis produced by a fit.

    ``mode`` records the normalisation: ``"column_l2"`` (unit-L2 columns,
    SPCA-eig) or ``"row_l1"`` (unit-L1 rows, SPCA-CD).
    """

    V: np.ndarray
    mode: Mode
    lam: float = 0.0
    iterations: int = 0
    converged: bool = False

    @property
    def n(self) -> int:
        return self.V.shape[0]

    @property
    def K(self) -> int:
        return self.V.shape[1]

    def support(self) -> np.ndarray:
        return self.V != 0

    @property
    def support_size(self) -> int:
        return int(np.count_nonzero(self.V))

    @property
    def overlap_count(self) -> int:
        return int(np.sum(np.count_nonzero(self.V, axis=1) >= 2))

    def memberships(self) -> np.ndarray:
        """Rows rescaled to unit L2 norm (zero rows stay zero)."""
        norms = np.linalg.norm(self.V, axis=1, keepdims=True)
        return np.divide(self.V, norms, out=np.zeros_like(self.V), where=norms > 0)

    def check(self, atol: float = 1e-10) -> None:
        """Raise ``AssertionError`` if a basis invariant is violated."""
        V = self.V
        assert np.all(np.isfinite(V)) and np.all(V >= 0), "entries must be finite and non-negative"
        assert np.all(np.any(V != 0, axis=0)), "empty community"
        if self.mode == "column_l2":
            assert np.allclose(np.linalg.norm(V, axis=0), 1.0, atol=atol, rtol=0)
        else:
            s = V.sum(axis=1)
            assert np.allclose(s[s > 0], 1.0, atol=atol, rtol=0)


@dataclass
class FitConfig:
    """Settings for one fit.

    ``init`` is ``"score"``, ``"random"`` (best of ``n_starts`` random
    single-membership starts) or an explicit ``n x K`` starting matrix.
    """

    lam: float = 0.5
    epsilon: float = 1e-6
    max_iter: int = 200
    init: str | np.ndarray = "score"
    n_starts: int = 5
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.lam < 1:
            raise ValueError(f"lambda must lie in [0, 1), got {self.lam}")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.max_iter < 1 or self.n_starts < 1:
            raise ValueError("max_iter and n_starts must be >= 1")
        if isinstance(self.init, str) and self.init not in ("score", "random"):
            raise ValueError(f"unknown init {self.init!r}")


def threshold_rows(t: np.ndarray, lam: float) -> np.ndarray:
    """Keep ``t_ik`` only where it exceeds ``lam * max_j |t_ij|``; zero elsewhere.

    Negative entries never survive for ``lam >= 0``.
    """
    t = np.asarray(t, dtype=float)
    bound = lam * np.max(np.abs(t), axis=1, keepdims=True)
    return np.where(t > bound, t, 0.0)


def _normalize_columns_l2(u: np.ndarray, lam: float) -> np.ndarray:
    norms = np.linalg.norm(u, axis=0)
    if np.any(norms == 0):
        raise ZeroColumnError(int(np.flatnonzero(norms == 0)[0]), lam)
    return u / norms


def _normalize_rows_l1(u: np.ndarray) -> np.ndarray:
    s = u.sum(axis=1, keepdims=True)
    return np.divide(u, s, out=np.zeros_like(u), where=s > 0)


def _relative_change(new: np.ndarray, old: np.ndarray) -> float:
    return float(np.linalg.norm(new - old, 2) / np.linalg.norm(old, 2))


def spca_eig_step(a, V: np.ndarray, lam: float) -> np.ndarray:
    """One SPCA-eig iteration from a basis with unit-L2 columns."""
    T = spmm(a, V)
    # T Gamma^{-1} with Gamma = (V'V)^{-1} V'T; via V = QR this is T (Q'T)^{-1} R
    Q, R = thin_qr(V)
    G = Q.T @ T
    if np.linalg.cond(G) > 1e12:
        raise SingularTransformError(
            f"back-transform is numerically singular at lambda={lam:g}; "
            "use a smaller lambda or a different initialisation")
    Tt = sla.solve(G.T, T.T).T @ R
    U = threshold_rows(Tt, lam)
    return _normalize_columns_l2(U, lam)


def spca_cd_step(a, V: np.ndarray, lam: float) -> np.ndarray:
    """One SPCA-CD iteration from a basis with unit-L1 rows."""
    T = spmm(a, V)
    norms = np.abs(T).sum(axis=0)
    if np.any(norms == 0):
        raise ZeroColumnError(int(np.flatnonzero(norms == 0)[0]), lam)
    Tt = T / norms
    U = threshold_rows(Tt, lam)
    # rows emptied by the threshold keep their largest entry
    empty = ~np.any(U != 0, axis=1)
    if np.any(empty):
        rows = np.flatnonzero(empty)
        best = np.argmax(Tt[rows], axis=1)
        vals = Tt[rows, best]
        keep = vals > 0
        U[rows[keep], best[keep]] = vals[keep]
    V = _normalize_rows_l1(U)
    dead = ~np.any(V != 0, axis=0)
    if np.any(dead):
        raise ZeroColumnError(int(np.flatnonzero(dead)[0]), lam)
    return V


def _sort_columns(V: np.ndarray) -> np.ndarray:
    order = np.argsort(-V.sum(axis=0), kind="stable")
    return V[:, order]


def _iterate(step, a, V0: np.ndarray, cfg: FitConfig, mode: Mode) -> MembershipBasis:
    V = V0
    converged = False
    it = 0
    for it in range(1, cfg.max_iter + 1):
        V_new = step(a, V, cfg.lam)
        change = _relative_change(V_new, V)
        V = V_new
        if change < cfg.epsilon:
            converged = True
            break
    return MembershipBasis(V=_sort_columns(V), mode=mode, lam=cfg.lam,
                           iterations=it, converged=converged)


def _prepare_init(a, K: int, cfg: FitConfig) -> np.ndarray:
    n = operator_size(a)
    if isinstance(cfg.init, str):
        if cfg.init == "score":
            return score_init(a, K, seed=cfg.seed)
        return random_indicator(n, K, np.random.default_rng(cfg.seed))
    V0 = np.asarray(cfg.init, dtype=float)
    if V0.shape != (n, K):
        raise ValueError(f"initial basis has shape {V0.shape}, expected {(n, K)}")
    if np.any(V0 < 0):
        raise ValueError("initial basis must be non-negative")
    return V0


def _check_k(a, K: int) -> None:
    n = operator_size(a)
    if not 1 <= K < n:
        raise ValueError(f"need 1 <= K < n, got K={K}, n={n}")


def spca_eig_fit(a, K: int, cfg: FitConfig | None = None) -> MembershipBasis:
    """Sparse eigenbasis estimation (SPCA-eig).

    Iterates ``T = A V``; ``T~ = T [V'T]^{-1} [V'V]``; ``U = S(T~, lam)``;
    unit-L2 column normalisation, until the relative spectral-norm change of
    ``V`` drops below ``cfg.epsilon`` or ``cfg.max_iter`` is reached.

    Parameters
    ----------
    a : SparseGraph, sparse matrix or ndarray
        Symmetric adjacency (or any symmetric weight matrix).
    K : int
        Number of communities.
    cfg : FitConfig, optional

    Returns
    -------
    MembershipBasis
        ``mode="column_l2"``; columns ordered by decreasing total mass.

    Raises
    ------
    ZeroColumnError, SingularTransformError
    """
    cfg = cfg or FitConfig()
    _check_k(a, K)
    if isinstance(cfg.init, str) and cfg.init == "random":
        return random_multistart(a, K, cfg.n_starts, spca_eig_fit, cfg)
    V0 = _normalize_columns_l2(_prepare_init(a, K, cfg), cfg.lam)
    return _iterate(spca_eig_step, as_operator(a), V0, cfg, "column_l2")


def spca_cd_fit(a, K: int, cfg: FitConfig | None = None) -> MembershipBasis:
    """Sparse eigenbasis estimation for homogeneous-degree networks (SPCA-CD).

    Iterates ``T = A V``; column L1 normalisation; ``U = S(T~, lam)``; row L1
    normalisation. A row emptied by the threshold keeps its largest entry.
    Returns a basis with ``mode="row_l1"``.
    """
    cfg = cfg or FitConfig()
    _check_k(a, K)
    if isinstance(cfg.init, str) and cfg.init == "random":
        return random_multistart(a, K, cfg.n_starts, spca_cd_fit, cfg)
    V0 = _normalize_rows_l1(_prepare_init(a, K, cfg))
    return _iterate(spca_cd_step, as_operator(a), V0, cfg, "row_l1")


ALGORITHMS: dict[str, Callable[..., MembershipBasis]] = {
    "eig": spca_eig_fit,
    "cd": spca_cd_fit,
}


def get_algorithm(name) -> Callable[..., MembershipBasis]:
    if callable(name):
        return name
    try:
        return ALGORITHMS[name]
    except KeyError:
        raise ValueError(f"unknown algorithm {name!r}; choose from {sorted(ALGORITHMS)}") from None


def random_indicator(n: int, K: int, rng: np.random.Generator) -> np.ndarray:
    """Each node in one uniformly random community; every community non-empty."""
    if K > n:
        raise ValueError("K exceeds n")
    labels = rng.integers(0, K, size=n)
    labels[rng.choice(n, size=K, replace=False)] = np.arange(K)
    Z = np.zeros((n, K))
    Z[np.arange(n), labels] = 1.0
    return Z


def _score_ratios(vecs: np.ndarray, rotate: bool) -> np.ndarray:
    n, K = vecs.shape
    if rotate:
        # first basis vector: projection of the all-ones vector onto the eigenspace,
        # positive on every node even when leading eigenvalues are (near) tied
        w = vecs.T @ np.ones(n)
        if np.any(w):
            Q, _ = np.linalg.qr(np.column_stack([w, np.eye(K)]))
            vecs = vecs @ (Q * np.sign(Q[:, 0] @ w))
    v1 = vecs[:, 0] * (1 if vecs[:, 0].sum() >= 0 else -1)
    num = vecs[:, 1:]
    bound = np.log(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = num / v1[:, None]
    zero = v1 == 0
    ratio[zero] = bound * np.sign(num[zero])
    return np.clip(ratio, -bound, bound)


def score_init(a, K: int, seed: int = 0, rotate: bool = True) -> np.ndarray:
    """Hard community assignment by SCORE, as a binary ``n x K`` indicator.

    Rows of the entrywise ratios ``v_{k+1} / v_1`` of the leading
    eigenvectors are clipped to ``[-log n, log n]`` and clustered by k-means.
    With ``rotate=True`` the eigenbasis is first rotated so that ``v_1`` is
    the projection of the all-ones vector onto the leading eigenspace; the
    ratios are then well defined on disconnected or nearly disconnected
    graphs, where the top eigenvector can vanish on whole communities.
    """
    n = operator_size(a)
    if K == 1:
        return np.ones((n, 1))
    eig = top_k_eigen(a, K, seed=seed)
    ratio = _score_ratios(eig.vectors, rotate)
    rng = np.random.default_rng(seed)
    for _ in range(10):
        km = KMeans(n_clusters=K, n_init=10, random_state=int(rng.integers(2**31 - 1)))
        labels = km.fit_predict(ratio)
        if np.unique(labels).size == K:
            Z = np.zeros((n, K))
            Z[np.arange(n), labels] = 1.0
            return Z
    raise FitError(f"k-means produced an empty cluster in 10 restarts (K={K})")


def random_multistart(a, K: int, count: int, fit=spca_cd_fit, cfg: FitConfig | None = None) -> MembershipBasis:
    """Best of ``count`` fits from random single-membership starts.

    "Best" minimises ``||A - P_hat||_F^2`` with ``P_hat`` the projection
    estimator for the fitted basis. Start ``s`` uses seed ``cfg.seed + s``.
    """
    from .selection import projection_residual

    if count < 1:
        raise ValueError("count must be >= 1")
    cfg = cfg or FitConfig()
    fit = get_algorithm(fit)
    n = operator_size(a)
    best, best_err, last_exc = None, np.inf, None
    for s in range(count):
        rng = np.random.default_rng(cfg.seed + s)
        start = replace(cfg, init=random_indicator(n, K, rng), seed=cfg.seed + s)
        try:
            res = fit(a, K, start)
        except (FitError, RankDeficientError) as exc:
            last_exc = exc
            continue
        err = projection_residual(a, res.V)
        if err < best_err:
            best, best_err = res, err
    if best is None:
        raise last_exc
    return best


def v_to_occam(v, P):
    """Map a non-negative eigenbasis of ``P`` to OCCAM form ``P = Theta Z B Z^T Theta``.

    ``theta_i = ||V_i.||_2``, ``Z = Theta^{-1} V`` (zero rows stay zero) and
    ``B = (V'V)^{-1} V' P V (V'V)^{-1}``.

    Returns
    -------
    theta : ndarray, shape (n,)
    Z : ndarray, shape (n, K)
    B : ndarray, shape (K, K)
    """
    V = v.V if isinstance(v, MembershipBasis) else np.asarray(v, dtype=float)
    thin_qr(V)  # raises on rank deficiency
    PV = spmm(P, V)
    G = V.T @ V
    B = sla.solve(G, sla.solve(G, V.T @ PV, assume_a="pos").T, assume_a="pos")
    B = (B + B.T) / 2
    theta = np.linalg.norm(V, axis=1)
    Z = np.divide(V, theta[:, None], out=np.zeros_like(V), where=theta[:, None] > 0)
    return theta, Z, B
