"""Immutable labeled undirected graph stored as symmetric CSR."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from heterolab.errors import ValidationError


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class LabeledGraph:
    """Undirected simple graph with dense class labels and optional features.

    ``indptr``/``indices`` hold the symmetrized adjacency: every undirected
    edge appears in both endpoint rows and each row is strictly increasing.
    Construct through :func:`build_graph`, which validates everything.
    """

    n: int
    num_classes: int
    indptr: np.ndarray
    indices: np.ndarray
    labels: np.ndarray
    features: np.ndarray | None
    class_index: tuple[np.ndarray, ...]

    @property
    def num_edges(self) -> int:
        return int(self.indices.size // 2)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def num_features(self) -> int:
        return 0 if self.features is None else int(self.features.shape[1])

    def edge_array(self) -> np.ndarray:
        """(|E|, 2) array of undirected edges with u < v, sorted lexicographically."""
        rows = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        keep = rows < self.indices
        return np.stack([rows[keep], self.indices[keep]], axis=1)

    def with_edges(self, extra) -> LabeledGraph:
        """New graph with ``extra`` edges merged in; labels and features shared."""
        extra = np.asarray(extra, dtype=np.int64).reshape(-1, 2)
        edges = np.concatenate([self.edge_array(), extra], axis=0)
        return build_graph(edges, self.labels, self.features, num_classes=self.num_classes)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LabeledGraph):
            return NotImplemented
        if (self.n, self.num_classes) != (other.n, other.num_classes):
            return False
        if not (
            np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.labels, other.labels)
        ):
            return False
        if (self.features is None) != (other.features is None):
            return False
        return self.features is None or np.array_equal(self.features, other.features)

    __hash__ = None


@dataclass(frozen=True)
class DegreeSummary:
    min: int
    max: int
    mean: float
    zeros: int


def build_graph(edges, labels, features=None, num_classes: int | None = None) -> LabeledGraph:
    """Validate and assemble a :class:`LabeledGraph`.

    ``edges`` is any iterable of (u, v) pairs; duplicates and reversed
    duplicates are merged, self-loops raise. ``labels`` must be integer class
    ids in ``[0, num_classes)``; ``num_classes`` defaults to ``max(labels) + 1``.
    """
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise ValidationError("labels must be a 1-d sequence")
    if labels.size and not np.issubdtype(labels.dtype, np.integer):
        if not np.all(np.mod(labels, 1) == 0):
            raise ValidationError("labels must be integers")
    labels = labels.astype(np.int64)
    n = int(labels.size)
    if num_classes is None:
        num_classes = int(labels.max()) + 1 if n else 0
    if n and (labels.min() < 0 or labels.max() >= num_classes):
        bad = int(labels[(labels < 0) | (labels >= num_classes)][0])
        raise ValidationError(f"label {bad} out of range [0, {num_classes})")

    e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
    e = e.reshape(-1, 2)
    if e.size:
        if e.min() < 0 or e.max() >= n:
            bad = int(e[(e < 0) | (e >= n)][0])
            raise ValidationError(f"node id {bad} out of range [0, {n})")
        loops = e[:, 0] == e[:, 1]
        if loops.any():
            raise ValidationError(f"self-loop at node {int(e[loops][0, 0])}")
    lo = np.minimum(e[:, 0], e[:, 1])
    hi = np.maximum(e[:, 0], e[:, 1])
    und = np.unique(np.stack([lo, hi], axis=1), axis=0) if e.size else np.empty((0, 2), np.int64)

    src = np.concatenate([und[:, 0], und[:, 1]])
    dst = np.concatenate([und[:, 1], und[:, 0]])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])

    feats = None
    if features is not None:
        feats = np.array(features, dtype=np.float64, copy=True)
        if feats.ndim != 2 or feats.shape[0] != n:
            raise ValidationError(f"features shape {feats.shape} does not match n={n}")
        if not np.isfinite(feats).all():
            raise ValidationError("features contain non-finite values")
        feats = _frozen(feats)

    class_index = tuple(_frozen(np.flatnonzero(labels == c)) for c in range(num_classes))
    return LabeledGraph(
        n=n,
        num_classes=int(num_classes),
        indptr=_frozen(indptr),
        indices=_frozen(dst.astype(np.int64)),
        labels=_frozen(labels),
        features=feats,
        class_index=class_index,
    )


def neighbors(g: LabeledGraph, i: int) -> np.ndarray:
    if not 0 <= i < g.n:
        raise ValidationError(f"node id {i} out of range [0, {g.n})")
    return g.indices[g.indptr[i] : g.indptr[i + 1]]


def degree_summary(g: LabeledGraph) -> DegreeSummary:
    deg = g.degrees
    if g.n == 0:
        return DegreeSummary(0, 0, 0.0, 0)
    return DegreeSummary(
        min=int(deg.min()),
        max=int(deg.max()),
        mean=2.0 * g.num_edges / g.n,
        zeros=int(np.count_nonzero(deg == 0)),
    )
