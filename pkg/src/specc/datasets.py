"""Bundled and locally supplied real networks with ground-truth labels."""

from __future__ import annotations

import csv
import os
import re
from importlib import resources
from pathlib import Path

import numpy as np

from .graph import SparseGraph, largest_connected_component, load_edge_list

POLBLOGS_ENV = "SPECC_POLBLOGS"


class FixtureMissingError(FileNotFoundError):
    pass


def _data_path(name: str) -> Path:
    return Path(str(resources.files("specc") / "data" / name))


def read_labels(path, graph: SparseGraph) -> np.ndarray:
    """Read a ``node,label`` CSV (header row required) aligned to ``graph.labels``.

    Returns a binary ``n x K`` indicator with communities ordered by sorted
    label value.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        table = {row[0].strip(): row[1].strip() for row in reader if row}
    nodes = graph.node_labels()
    missing = [v for v in nodes if v not in table]
    if missing:
        raise ValueError(f"{len(missing)} nodes have no label, e.g. {missing[:3]}")
    values = [table[v] for v in nodes]
    classes = sorted(set(values))
    Z = np.zeros((graph.n, len(classes)))
    Z[np.arange(graph.n), [classes.index(v) for v in values]] = 1.0
    return Z


def load_karate() -> tuple[SparseGraph, np.ndarray]:
    """Zachary's karate club (34 nodes, 78 edges) and the two-faction split."""
    g = load_edge_list(_data_path("karate_edges.txt"))
    return g, read_labels(_data_path("karate_factions.csv"), g)


def _read_gml(path) -> tuple[SparseGraph, dict[str, str]]:
    text = Path(path).read_text(encoding="utf-8", errors="replace")
    node_re = re.compile(r"node\s*\[(.*?)\]", re.S)
    edge_re = re.compile(r"edge\s*\[(.*?)\]", re.S)
    field = lambda body, key: re.search(rf"\b{key}\s+(\"[^\"]*\"|\S+)", body)
    labels = {}
    for body in node_re.findall(text):
        node_id = field(body, "id").group(1)
        value = field(body, "value")
        labels[node_id] = value.group(1).strip('"') if value else ""
    lines = []
    for body in edge_re.findall(text):
        lines.append(f"{field(body, 'source').group(1)} {field(body, 'target').group(1)}")
    g = load_edge_list("\n".join(lines).encode())
    return g, labels


def load_polblogs(path=None) -> tuple[SparseGraph, np.ndarray]:
    """Political blogs network (Adamic & Glance 2005), largest connected component.

    The data are not bundled. ``path`` (or the ``SPECC_POLBLOGS`` environment
    variable, or ``specc/data/polblogs.gml``) must point to either the GML
    file distributed by M. Newman, whose nodes carry a 0/1 ``value``
    attribute, or to an edge list accompanied by ``<stem>_labels.csv``.
    Directed hyperlinks are symmetrised; the LCC has 1222 nodes.
    """
    candidates = [path, os.environ.get(POLBLOGS_ENV), _data_path("polblogs.gml"),
                  _data_path("polblogs_edges.txt")]
    found = next((Path(p) for p in candidates if p and Path(p).exists()), None)
    if found is None:
        raise FixtureMissingError(
            "polblogs data not found; pass a path or set SPECC_POLBLOGS to polblogs.gml")
    if found.suffix == ".gml":
        g, table = _read_gml(found)
        g = largest_connected_component(g)
        values = [table[v] for v in g.node_labels()]
        classes = sorted(set(values))
        Z = np.zeros((g.n, len(classes)))
        Z[np.arange(g.n), [classes.index(v) for v in values]] = 1.0
        return g, Z
    g = largest_connected_component(load_edge_list(found))
    labels = found.with_name(found.stem.replace("_edges", "") + "_labels.csv")
    return g, read_labels(labels, g)
