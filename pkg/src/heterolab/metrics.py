"""Edge homophily ratio and cross-class neighborhood similarity (CCNS)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from heterolab.errors import ValidationError
from heterolab.graph import LabeledGraph, neighbors


@dataclass(frozen=True)
class NeighborHistogram:
    counts: np.ndarray
    normalized: np.ndarray | None  # None for isolated nodes


@dataclass(frozen=True)
class CcnsMatrix:
    values: np.ndarray
    class_sizes: np.ndarray
    excluded_isolated: int


def homophily_ratio(g: LabeledGraph) -> float:
    """Fraction of undirected edges whose endpoints share a label."""
    edges = g.edge_array()
    if edges.shape[0] == 0:
        raise ValidationError("homophily ratio undefined for a graph with no edges")
    same = np.count_nonzero(g.labels[edges[:, 0]] == g.labels[edges[:, 1]])
    return same / edges.shape[0]


def neighbor_histogram(g: LabeledGraph, i: int) -> NeighborHistogram:
    nbrs = neighbors(g, i)
    counts = np.bincount(g.labels[nbrs], minlength=g.num_classes)
    normalized = counts / counts.sum() if nbrs.size else None
    return NeighborHistogram(counts=counts, normalized=normalized)


def neighbor_label_counts(g: LabeledGraph) -> np.ndarray:
    """(n, C) matrix of neighbor-label counts for every node."""
    rows = np.repeat(np.arange(g.n), g.degrees)
    out = np.zeros((g.n, g.num_classes), dtype=np.int64)
    np.add.at(out, (rows, g.labels[g.indices]), 1)
    return out


def ccns(g: LabeledGraph) -> CcnsMatrix:
    """Mean pairwise cosine similarity of neighbor-label histograms per class pair.

    Degree-0 nodes have no histogram direction and are dropped from both the
    sums and the class sizes. Same-class pairs include i == j.
    """
    counts = neighbor_label_counts(g).astype(np.float64)
    keep = g.degrees > 0
    hist = counts[keep] / counts[keep].sum(axis=1, keepdims=True)
    unit = hist / np.linalg.norm(hist, axis=1, keepdims=True)
    labels = g.labels[keep]

    sizes = np.bincount(labels, minlength=g.num_classes)
    if (sizes == 0).any():
        empty = int(np.flatnonzero(sizes == 0)[0])
        raise ValidationError(f"class {empty} has no non-isolated nodes")

    # sum_{i in c, j in c'} u_i . u_j == (sum_i u_i) . (sum_j u_j)
    class_sums = np.zeros((g.num_classes, g.num_classes))
    np.add.at(class_sums, labels, unit)
    values = (class_sums @ class_sums.T) / np.outer(sizes, sizes)
    values = np.clip(values, 0.0, 1.0)
    values = np.triu(values) + np.triu(values, 1).T
    return CcnsMatrix(values=values, class_sizes=sizes, excluded_isolated=int((~keep).sum()))
