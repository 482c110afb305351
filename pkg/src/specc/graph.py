"""Undirected binary graphs: edge-list ingestion, export and preprocessing."""

from __future__ import annotations

import io
import os
import re
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

_SEPARATORS = {"auto": None, "space": " ", "tab": "\t", "comma": ","}
_AUTO_SPLIT = re.compile(r"[,\s]+")


class EdgeListError(ValueError):
    """Raised for unreadable edge-list input."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class SparseGraph:
    """Symmetric 0/1 adjacency matrix without self-loops.

    Parameters
    ----------
    adj : scipy.sparse.csr_matrix, shape (n, n)
        Adjacency in CSR layout with float64 ones as stored values. Build
        instances with :meth:`from_edges` or :meth:`from_matrix`, which
        canonicalise the input.
    labels : tuple of str, optional
        Original node identifiers, indexed by the compacted node index.
    """

    adj: sp.csr_matrix
    labels: tuple[str, ...] | None = field(default=None)

    def __post_init__(self):
        a = self.adj
        if a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError(f"adjacency must be square and non-empty, got {a.shape}")
        if a.diagonal().any():
            raise ValueError("adjacency has self-loops")
        if a.nnz and not np.all(a.data == 1.0):
            raise ValueError("adjacency must be binary")
        if (a != a.T).nnz:
            raise ValueError("adjacency must be symmetric")
        if self.labels is not None and len(self.labels) != a.shape[0]:
            raise ValueError("labels length does not match node count")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]] | np.ndarray,
                   labels: Sequence[str] | None = None) -> "SparseGraph":
        """Build a graph from index pairs; duplicates, self-loops and direction are dropped."""
        e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                       dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise ValueError("edge index out of range")
        e = e[e[:, 0] != e[:, 1]]
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        a = sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))
        a.sum_duplicates()
        a.data[:] = 1.0
        a.sort_indices()
        return cls(a, tuple(labels) if labels is not None else None)

    @classmethod
    def from_matrix(cls, m, labels: Sequence[str] | None = None) -> "SparseGraph":
        """Build a graph from any dense or sparse matrix, treating nonzeros as edges (union symmetrised)."""
        coo = sp.coo_matrix(m)
        return cls.from_edges(coo.shape[0], np.column_stack([coo.row, coo.col]), labels)

    @property
    def n(self) -> int:
        return self.adj.shape[0]

    @property
    def n_edges(self) -> int:
        return self.adj.nnz // 2

    def edges(self) -> np.ndarray:
        """Unordered edges as an ``(m, 2)`` array with ``i < j``, sorted ascending."""
        upper = sp.triu(self.adj, k=1).tocoo()
        order = np.lexsort((upper.col, upper.row))
        return np.column_stack([upper.row[order], upper.col[order]]).astype(np.int64)

    def degrees(self) -> np.ndarray:
        return np.diff(self.adj.indptr).astype(np.int64)

    def toarray(self) -> np.ndarray:
        return self.adj.toarray()

    def label_of(self, i: int) -> str:
        return self.labels[i] if self.labels is not None else str(i)

    def node_labels(self) -> list[str]:
        return list(self.labels) if self.labels is not None else [str(i) for i in range(self.n)]

    def subgraph(self, nodes: Sequence[int]) -> "SparseGraph":
        """Induced subgraph on ``nodes`` (kept in the given order)."""
        idx = np.asarray(nodes, dtype=np.int64)
        sub = self.adj[idx][:, idx].tocsr()
        sub.sort_indices()
        labels = tuple(self.labels[i] for i in idx) if self.labels is not None else None
        return SparseGraph(sub, labels)

    def __eq__(self, other):
        if not isinstance(other, SparseGraph):
            return NotImplemented
        return (self.n == other.n and (self.adj != other.adj).nnz == 0
                and self.labels == other.labels)

    def __repr__(self):
        return f"SparseGraph(n={self.n}, edges={self.n_edges})"


@dataclass(frozen=True)
class DegreeSummary:
    degrees: np.ndarray
    mean_degree: float
    max_degree: int


def _open_text(source) -> tuple[IO[str], bool]:
    if isinstance(source, (str, os.PathLike)):
        return open(source, "r", encoding="utf-8"), True
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode("utf-8")), True
    if isinstance(source, io.TextIOBase):
        return source, False
    # binary stream
    return io.TextIOWrapper(source, encoding="utf-8"), False


def _compact(tokens: list[str]) -> tuple[dict[str, int], list[str]]:
    uniq = list(dict.fromkeys(tokens))
    try:
        uniq.sort(key=int)
    except ValueError:
        pass  # non-integer ids keep first-appearance order
    return {t: i for i, t in enumerate(uniq)}, uniq


def load_edge_list(source, fmt: str = "auto") -> SparseGraph:
    """Read an undirected graph from an edge list.

    Each non-comment line holds two node identifiers separated by a space,
    tab or comma (``fmt="auto"`` accepts any of them). Lines starting with
    ``#`` and blank lines are skipped. Directed input is symmetrised by
    union, repeated edges are collapsed and self-loops dropped.

    Node identifiers are compacted to ``0..n-1``: numerically when every
    identifier is an integer, otherwise in order of first appearance. The
    original identifiers are kept in ``SparseGraph.labels``.
    """
    if fmt not in _SEPARATORS:
        raise ValueError(f"unknown edge-list format {fmt!r}")
    sep = _SEPARATORS[fmt]
    fh, close = _open_text(source)
    pairs: list[tuple[str, str]] = []
    try:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if sep is None:
                toks = _AUTO_SPLIT.split(line)
            else:
                toks = [t.strip() for t in line.split(sep)]
            if len(toks) != 2 or not all(toks):
                raise EdgeListError(f"expected 2 tokens, got {len(toks)}: {line!r}", lineno)
            pairs.append((toks[0], toks[1]))
    finally:
        if close:
            fh.close()
    if not pairs:
        raise EdgeListError("edge list is empty")
    index, labels = _compact([t for p in pairs for t in p])
    e = np.array([(index[a], index[b]) for a, b in pairs], dtype=np.int64)
    return SparseGraph.from_edges(len(labels), e, labels)


def save_edge_list(g: SparseGraph, dest, sep: str = " ") -> None:
    """Write the edge list in canonical order (``i < j`` ascending) using node labels.

    Isolated nodes cannot be represented in this format and are not written.
    """
    lines = [f"{g.label_of(i)}{sep}{g.label_of(j)}\n" for i, j in g.edges()]
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", encoding="utf-8") as fh:
            fh.writelines(lines)
    else:
        dest.writelines(lines)


def largest_connected_component(g: SparseGraph) -> SparseGraph:
    """Induced subgraph on the largest connected component.

    Ties between equally large components go to the one containing the
    smallest node index. Nodes keep their relative order.
    """
    n_comp, comp = connected_components(g.adj, directed=False)
    if n_comp == 1:
        return g
    sizes = np.bincount(comp, minlength=n_comp)
    first = np.full(n_comp, g.n, dtype=np.int64)
    np.minimum.at(first, comp, np.arange(g.n))
    best = min(range(n_comp), key=lambda c: (-sizes[c], first[c]))
    return g.subgraph(np.flatnonzero(comp == best))


def degree_summary(g: SparseGraph) -> DegreeSummary:
    deg = g.degrees()
    return DegreeSummary(degrees=deg, mean_degree=float(deg.sum()) / g.n,
                         max_degree=int(deg.max()) if deg.size else 0)


def empty_graph(n: int) -> SparseGraph:
    return SparseGraph(sp.csr_matrix((n, n)))
