"""Linear-algebra kernels: products with the adjacency operator, truncated
eigendecomposition by block orthogonal iteration, thin QR, subspace distance
and rank-k truncation.

Matrix "operators" accepted throughout are a :class:`~specc.graph.SparseGraph`,
a scipy sparse matrix or a dense square ``ndarray``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .graph import SparseGraph


class RankDeficientError(np.linalg.LinAlgError):
    """A matrix expected to have full column rank does not."""


class EigenConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (last relative residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class EigenPair:
    values: np.ndarray
    vectors: np.ndarray
    iterations: int = 0


def as_operator(a):
    """Return something supporting ``@`` for a graph, sparse or dense matrix."""
    if isinstance(a, SparseGraph):
        return a.adj
    if sp.issparse(a):
        return a.tocsr()
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"operator must be square, got shape {a.shape}")
    return a


def operator_size(a) -> int:
    return as_operator(a).shape[0]


def dense(a) -> np.ndarray:
    op = as_operator(a)
    return op.toarray() if sp.issparse(op) else op


def spmm(a, m: np.ndarray) -> np.ndarray:
    """Product of the adjacency operator with a dense ``n x K`` block."""
    op = as_operator(a)
    m = np.asarray(m, dtype=float)
    if m.ndim == 1:
        m = m[:, None]
    if m.shape[0] != op.shape[1]:
        raise ValueError(f"dimension mismatch: operator is {op.shape}, block has {m.shape[0]} rows")
    return np.asarray(op @ m)


def thin_qr(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Reduced QR with ``diag(R) > 0``.

    Raises
    ------
    RankDeficientError
        If some ``|R_kk|`` falls below ``1e-12`` times the norm of column ``k``.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim == 1:
        m = m[:, None]
    q, r = np.linalg.qr(m, mode="reduced")
    d = np.diag(r)
    colnorm = np.linalg.norm(m, axis=0)
    bad = np.abs(d) <= 1e-12 * np.maximum(colnorm, np.finfo(float).tiny)
    if np.any(bad) or np.any(colnorm == 0):
        k = int(np.flatnonzero(bad | (colnorm == 0))[0])
        raise RankDeficientError(f"matrix is rank deficient at column {k}")
    s = np.sign(d)
    return q * s, r * s[:, None]


def orth(m: np.ndarray) -> np.ndarray:
    return thin_qr(m)[0]


def subspace_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Spectral norm of the difference of the orthogonal projectors onto ``span(u)`` and ``span(v)``.

    For equal dimensions this is the sine of the largest principal angle,
    computed as ``||(I - Q_u Q_u^T) Q_v||_2`` without forming ``n x n`` projectors.
    """
    qu, qv = orth(u), orth(v)
    if qu.shape != qv.shape:
        raise ValueError("subspaces must have the same dimension")
    resid = qv - qu @ (qu.T @ qv)
    # largest singular value via the K x K Gram form
    gram = resid.T @ resid
    top = float(np.linalg.eigvalsh((gram + gram.T) / 2)[-1])
    return float(min(1.0, np.sqrt(max(top, 0.0))))


def _rayleigh_ritz(op, q: np.ndarray):
    aq = np.asarray(op @ q)
    h = q.T @ aq
    w, s = np.linalg.eigh((h + h.T) / 2)
    order = np.argsort(-np.abs(w), kind="stable")
    return w[order], q @ s[:, order], aq @ s[:, order]


def top_k_eigen(a, k: int, tol: float = 1e-8, max_iter: int = 1000, seed: int = 0,
                oversample: int | None = None) -> EigenPair:
    """Leading ``k`` eigenpairs by absolute eigenvalue of a symmetric operator.

    Block orthogonal iteration on ``k + oversample`` columns with a
    Rayleigh-Ritz extraction after every multiplication. Converged once
    ``||A v_j - lambda_j v_j|| <= tol * |lambda_1|`` for all ``j <= k``.
    """
    op = as_operator(a)
    n = op.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
    if oversample is None:
        oversample = max(k, 8)
    b = min(n, k + oversample)
    rng = np.random.default_rng(seed)
    q = orth(rng.standard_normal((n, b))) if b < n else np.eye(n)
    resid = np.inf
    for it in range(1, max_iter + 1):
        w, x, ax = _rayleigh_ritz(op, q)
        scale = max(abs(w[0]), np.finfo(float).tiny)
        r = ax[:, :k] - x[:, :k] * w[:k]
        resid = float(np.max(np.linalg.norm(r, axis=0)) / scale)
        if resid <= tol or b == n:
            vecs = x[:, :k]
            # sign convention: largest-magnitude entry positive
            idx = np.argmax(np.abs(vecs), axis=0)
            vecs = vecs * np.sign(vecs[idx, np.arange(k)])
            return EigenPair(values=w[:k].copy(), vectors=vecs, iterations=it)
        q, _ = np.linalg.qr(ax)
    raise EigenConvergenceError(f"top_k_eigen did not converge in {max_iter} iterations", resid)


def truncated_svd(m: np.ndarray, k: int) -> np.ndarray:
    """Best rank-``k`` approximation of a square matrix.

    Symmetric input goes through an eigendecomposition (top ``k`` by absolute
    eigenvalue) so the output is exactly symmetric.
    """
    m = dense(m)
    n = m.shape[0]
    if m.ndim != 2 or m.shape[1] != n:
        raise ValueError("matrix must be square")
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    if np.array_equal(m, m.T):
        w, s = sla.eigh(m)
        top = np.argsort(-np.abs(w), kind="stable")[:k]
        out = (s[:, top] * w[top]) @ s[:, top].T
        return (out + out.T) / 2
    u, sv, vt = np.linalg.svd(m)
    return (u[:, :k] * sv[:k]) @ vt[:k]
