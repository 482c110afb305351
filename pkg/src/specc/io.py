"""CSV / JSON export of memberships, lambda paths and K-selection scores."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment

from .spca import MembershipBasis


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _rows_to_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([v if isinstance(v, str) else _fmt(v) for v in r])


def _as_matrix(m) -> np.ndarray:
    return m.V if isinstance(m, MembershipBasis) else np.asarray(m, dtype=float)


def write_json(path, obj) -> None:
    def default(o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        raise TypeError(f"cannot serialise {type(o).__name__}")

    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, default=default) + "\n",
                          encoding="utf-8")


def write_membership_csv(path, membership, labels) -> None:
    """One row per node: ``node, c0, ..., c{K-1}``."""
    M = _as_matrix(membership)
    header = ["node"] + [f"c{k}" for k in range(M.shape[1])]
    _rows_to_csv(path, header, ([lab, *row] for lab, row in zip(labels, M)))


def read_membership_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        labels, rows = [], []
        for r in reader:
            if not r:
                continue
            if len(r) != len(header):
                raise ValueError(f"{path}: row for node {r[0]!r} has {len(r)} fields, expected {len(header)}")
            labels.append(r[0].strip())
            rows.append([float(v) for v in r[1:]])
    return labels, np.array(rows, dtype=float).reshape(len(labels), len(header) - 1)


def membership_json(basis: MembershipBasis, labels) -> dict:
    return {
        "mode": basis.mode,
        "lambda": basis.lam,
        "iterations": basis.iterations,
        "converged": basis.converged,
        "nodes": list(labels),
        "V": basis.V.tolist(),
    }


def support_triplets(membership) -> list[tuple[int, int, float]]:
    M = _as_matrix(membership)
    r, c = np.nonzero(M)
    return [(int(i), int(k), float(M[i, k])) for i, k in zip(r, c)]


def write_support_csv(path, membership, labels) -> None:
    _rows_to_csv(path, ["node", "community", "value"],
                 ([labels[i], k, v] for i, k, v in support_triplets(membership)))


def align_columns(V: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Permute the columns of ``V`` to best match ``ref`` (cosine similarity)."""
    def unit(m):
        nrm = np.linalg.norm(m, axis=0)
        return m / np.where(nrm > 0, nrm, 1.0)

    r, c = linear_sum_assignment(-(unit(ref).T @ unit(V)))
    return V[:, c[np.argsort(r)]]


def write_path_scores_csv(path, lpath) -> None:
    """Per-lambda scores; ``selected`` flags the criterion minimiser."""
    best = lpath.best_index()
    _rows_to_csv(path, ["lambda", "bic", "cv_mse", "cv_se", "support_size", "overlap_count",
                        "iterations", "converged", "selected"],
                 ([e.lam, e.bic, e.cv_mse, e.cv_se, e.support_size, e.overlap_count,
                   e.basis.iterations, e.basis.converged, i == best]
                  for i, e in enumerate(lpath.entries)))


def write_path_members_csv(path, lpath, labels) -> None:
    """Long-format membership paths ``node, lambda, k, value``.

    Columns of every fit are aligned to the selected fit so that ``k`` means
    the same community along the path.
    """
    ref = lpath.best().basis.V
    rows = []
    for e in lpath.entries:
        V = align_columns(e.basis.V, ref)
        for i, lab in enumerate(labels):
            for k in range(V.shape[1]):
                rows.append([lab, e.lam, k, V[i, k]])
    _rows_to_csv(path, ["node", "lambda", "k", "value"], rows)


def write_k_scores_csv(path, scores) -> None:
    _rows_to_csv(path, ["k", "mean_mse", "se", "lambda"],
                 ([s.k, s.mean_mse, s.se, s.lam] for s in scores))
