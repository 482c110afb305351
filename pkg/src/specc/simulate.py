"""Synthetic networks from the overlapping continuous community assignment
model (OCCAM), ``P = alpha * Theta Z B Z^T Theta``, and the planted-partition SBM.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .graph import SparseGraph

_CHUNK = 512


class ScenarioError(ValueError):
    pass


@dataclass
class OccamParams:
    """Generative parameters of OCCAM.

    ``Z`` rows are L1-normalised as produced by :func:`build_scenario`;
    :meth:`z_l2` gives the unit-L2 view used by the general model.
    """

    alpha: float
    theta: np.ndarray
    Z: np.ndarray
    B: np.ndarray
    clip: bool = False

    @property
    def n(self) -> int:
        return self.Z.shape[0]

    @property
    def K(self) -> int:
        return self.Z.shape[1]

    def z_l2(self) -> np.ndarray:
        norms = np.linalg.norm(self.Z, axis=1, keepdims=True)
        return np.divide(self.Z, norms, out=np.zeros_like(self.Z), where=norms > 0)

    def basis(self) -> np.ndarray:
        """Non-negative eigenbasis ``Theta Z`` of the expected adjacency."""
        return self.theta[:, None] * self.Z

    def expected_adjacency(self) -> np.ndarray:
        return expected_adjacency(self)

    def to_dict(self) -> dict:
        return {"alpha": float(self.alpha), "theta": self.theta.tolist(),
                "Z": self.Z.tolist(), "B": self.B.tolist(), "clip": self.clip}


@dataclass
class ScenarioSpec:
    n: int = 500
    K: int = 3
    overlap_fraction: float = 0.1
    rho: float = 0.1
    target_degree: float = 50.0
    hub_probability: float = 0.0
    hub_theta: float = 5.0
    seed: int = 1
    clip_probabilities: bool = False

    def __post_init__(self):
        if self.n < 2 or self.K < 1 or self.K > self.n:
            raise ScenarioError(f"invalid sizes n={self.n}, K={self.K}")
        if not 0 <= self.overlap_fraction < 1:
            raise ScenarioError("overlap_fraction must lie in [0, 1)")
        if not 0 <= self.rho <= 1:
            raise ScenarioError("rho must lie in [0, 1]")
        if self.target_degree <= 0:
            raise ScenarioError("target_degree must be positive")
        if not 0 <= self.hub_probability <= 1:
            raise ScenarioError("hub_probability must lie in [0, 1]")
        if self.hub_theta < 1:
            raise ScenarioError("hub_theta must be >= 1")
        if self.overlap_fraction > 0 and self.K < 2:
            raise ScenarioError("overlaps need K >= 2")

    @classmethod
    def from_file(cls, path) -> "ScenarioSpec":
        """Read a spec from JSON or ``key=value`` lines."""
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        try:
            raw = json.loads(text)
        except json.JSONDecodeError:
            raw = {}
            for line in text.splitlines():
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                key, _, value = line.partition("=")
                raw[key.strip()] = value.strip()
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "ScenarioSpec":
        types = {f: t for f, t in cls.__annotations__.items()}
        unknown = set(raw) - set(types)
        if unknown:
            raise ScenarioError(f"unknown scenario keys: {sorted(unknown)}")
        kw = {}
        for key, value in raw.items():
            if types[key] == "bool":
                kw[key] = value if isinstance(value, bool) else str(value).lower() in ("1", "true", "yes")
            else:
                kw[key] = int(value) if types[key] == "int" else float(value)
        return cls(**kw)

    def to_dict(self) -> dict:
        return asdict(self)


def membership_matrix(n: int, K: int, overlap_fraction: float) -> np.ndarray:
    """Row-L1-normalised membership matrix with the overlap layout used in simulations.

    ``ceil(overlap_fraction * n)`` nodes overlap. With ``K == 3`` a quarter
    of them (rounded down) belong to all three communities; every other
    overlapping node belongs to a pair of communities, cycling through all
    ``K(K-1)/2`` pairs. Pure nodes fill communities in contiguous blocks of
    sizes differing by at most one. Row order: pure nodes, triples, pairs.
    """
    n_over = math.ceil(overlap_fraction * n - 1e-9)
    n_pure = n - n_over
    if n_pure < K:
        raise ScenarioError("too many overlapping nodes to keep a pure node per community")
    Z = np.zeros((n, K))
    labels = np.concatenate([np.full(len(b), k) for k, b in
                             enumerate(np.array_split(np.arange(n_pure), K))])
    Z[np.arange(n_pure), labels] = 1.0
    n_triple = n_over // 4 if K == 3 else 0
    row = n_pure
    Z[row:row + n_triple] = 1.0 / 3.0
    row += n_triple
    pairs = list(itertools.combinations(range(K), 2))
    for j in range(n_over - n_triple):
        a, b = pairs[j % len(pairs)]
        Z[row + j, [a, b]] = 0.5
    return Z


def mixing_matrix(K: int, rho: float) -> np.ndarray:
    return (1 - rho) * np.eye(K) + rho * np.ones((K, K))


def _pair_mass(theta: np.ndarray, Z: np.ndarray, B: np.ndarray) -> float:
    """Sum over ordered pairs ``i != j`` of ``theta_i theta_j z_i^T B z_j``."""
    W = theta[:, None] * Z
    col = W.sum(axis=0)
    total = float(col @ B @ col)
    diag = float(np.einsum("ik,kl,il->", W, B, W))
    return total - diag


def calibrate_alpha(theta: np.ndarray, Z: np.ndarray, B: np.ndarray, target_degree: float) -> float:
    """Density scalar giving expected average degree ``target_degree`` (zero diagonal)."""
    if target_degree <= 0:
        raise ScenarioError("target_degree must be positive")
    n = Z.shape[0]
    mass = _pair_mass(np.asarray(theta, float), np.asarray(Z, float), np.asarray(B, float))
    if mass <= 0:
        raise ScenarioError("cannot calibrate alpha: expected edge mass is zero")
    return target_degree * n / mass


def _prob_rows(params: OccamParams, start: int, stop: int) -> np.ndarray:
    W = params.basis()
    block = params.alpha * (W[start:stop] @ params.B) @ W.T
    block[np.arange(stop - start), np.arange(start, stop)] = 0.0
    return np.minimum(block, 1.0) if params.clip else block


def max_probability(params: OccamParams) -> float:
    top = 0.0
    for s in range(0, params.n, _CHUNK):
        top = max(top, float(_prob_rows(params, s, min(s + _CHUNK, params.n)).max()))
    return top


def min_probability(params: OccamParams) -> float:
    low = np.inf
    for s in range(0, params.n, _CHUNK):
        block = _prob_rows(params, s, min(s + _CHUNK, params.n))
        off = np.ones_like(block, dtype=bool)
        off[np.arange(block.shape[0]), np.arange(s, s + block.shape[0])] = False
        if off.any():
            low = min(low, float(block[off].min()))
    return low


def expected_adjacency(params: OccamParams) -> np.ndarray:
    """Dense ``E[A]``: the OCCAM probability matrix with zero diagonal."""
    return _prob_rows(params, 0, params.n)


def build_scenario(spec: ScenarioSpec) -> OccamParams:
    """OCCAM parameters for one simulation scenario.

    Hub nodes (``theta = hub_theta``) are drawn independently with
    ``hub_probability`` from the scenario seed; theta is then rescaled to sum
    to ``n`` before alpha is calibrated to the target degree.

    Edge probabilities above 1 raise :class:`ScenarioError` unless
    ``spec.clip_probabilities`` is set, in which case they are capped at 1
    and the realised mean degree falls below the target.
    """
    Z = membership_matrix(spec.n, spec.K, spec.overlap_fraction)
    B = mixing_matrix(spec.K, spec.rho)
    rng = np.random.default_rng(spec.seed)
    theta = np.where(rng.random(spec.n) < spec.hub_probability, spec.hub_theta, 1.0)
    theta = theta * (spec.n / theta.sum())
    alpha = calibrate_alpha(theta, Z, B, spec.target_degree)
    params = OccamParams(alpha=alpha, theta=theta, Z=Z, B=B)
    if spec.clip_probabilities:
        return replace(params, clip=True)
    top = max_probability(params)
    if top > 1 + 1e-12:
        raise ScenarioError(f"alpha={alpha:.6g} gives edge probabilities up to {top:.4f} > 1; "
                            "lower target_degree or hub_theta, or clip probabilities")
    return params


def _sample(prob_rows, n: int, rng: np.random.Generator) -> SparseGraph:
    rows, cols = [], []
    for s in range(0, n, _CHUNK):
        e = min(s + _CHUNK, n)
        p = prob_rows(s, e)
        if p.min() < -1e-12 or p.max() > 1 + 1e-12:
            raise ScenarioError("edge probabilities outside [0, 1]")
        hit = rng.random(p.shape) < p
        hit &= np.arange(n)[None, :] > np.arange(s, e)[:, None]  # upper triangle only
        r, c = np.nonzero(hit)
        rows.append(r + s)
        cols.append(c)
    edges = np.column_stack([np.concatenate(rows), np.concatenate(cols)])
    return SparseGraph.from_edges(n, edges)


def sample_adjacency(params: OccamParams, seed=None) -> SparseGraph:
    """Draw a symmetric adjacency with independent Bernoulli upper-triangle entries."""
    rng = np.random.default_rng(seed)
    return _sample(lambda s, e: _prob_rows(params, s, e), params.n, rng)


def sample_from_probabilities(P: np.ndarray, seed=None) -> SparseGraph:
    P = np.asarray(P, float)
    rng = np.random.default_rng(seed)
    return _sample(lambda s, e: P[s:e], P.shape[0], rng)


def planted_partition(n: int, K: int, p: float, q: float, block_sizes=None, seed=None):
    """Stochastic block model with within-block probability ``p`` and between-block ``q``.

    Returns
    -------
    graph : SparseGraph
    Z_true : ndarray, shape (n, K)
        Binary block indicator; blocks are contiguous.
    """
    if not (0 <= q <= p <= 1):
        raise ScenarioError(f"need 0 <= q <= p <= 1, got p={p}, q={q}")
    if block_sizes is None:
        block_sizes = [len(b) for b in np.array_split(np.arange(n), K)]
    block_sizes = list(block_sizes)
    if len(block_sizes) != K or sum(block_sizes) != n or min(block_sizes) < 1:
        raise ScenarioError("block sizes must be K positive integers summing to n")
    labels = np.repeat(np.arange(K), block_sizes)
    Z = np.zeros((n, K))
    Z[np.arange(n), labels] = 1.0
    B = np.full((K, K), q) + (p - q) * np.eye(K)
    rng = np.random.default_rng(seed)

    def rows(s, e):
        block = B[labels[s:e]][:, labels]
        block[np.arange(e - s), np.arange(s, e)] = 0.0
        return block

    return _sample(rows, n, rng), Z
