"""Graph and feature generators.

Edge addition follows a target neighbor-label distribution per class, with
an optional noise level that redirects a fraction of additions to uniformly
random other classes. Also: (contextual) stochastic block models and a
per-node simulator of one mean-aggregation step under i.i.d. neighbor labels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from heterolab.errors import ValidationError
from heterolab.graph import LabeledGraph, build_graph

REJECTION_FACTOR = 1000


@dataclass(frozen=True)
class RngSeed:
    """(master, stream) pair; each pair maps to an independent numpy Generator."""

    master: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.master & (2**64 - 1), self.stream & (2**64 - 1)]))

    def child(self, stream: int) -> RngSeed:
        return RngSeed(self.master, self.stream * 1_000_003 + stream + 1)


def _as_seed(seed) -> RngSeed:
    if isinstance(seed, RngSeed):
        return seed
    return RngSeed(int(seed))


@dataclass(frozen=True)
class NeighborDistribution:
    weights: np.ndarray
    cumulative: np.ndarray = field(repr=False)

    @classmethod
    def from_weights(cls, weights) -> NeighborDistribution:
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise ValidationError("neighbor distribution must be a non-empty vector")
        if (w < 0).any() or not np.isfinite(w).all():
            raise ValidationError("neighbor distribution weights must be finite and >= 0")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValidationError(f"neighbor distribution sums to {w.sum()!r}, not 1")
        cum = np.cumsum(w)
        cum[-1] = 1.0
        return cls(weights=w, cumulative=cum)

    @property
    def num_classes(self) -> int:
        return int(self.weights.size)

    def sample(self, rng: np.random.Generator, size=None):
        """Inverse-CDF draw; zero-weight classes are never returned."""
        u = rng.random(size)
        return np.searchsorted(self.cumulative, u, side="right")


def circulant_2hop(num_classes: int) -> list[NeighborDistribution]:
    """Half the mass on each ring neighbor: D_c puts 0.5 on c-1 and c+1 (mod C)."""
    if num_classes < 3:
        raise ValidationError("circulant-2hop needs at least 3 classes")
    out = []
    for c in range(num_classes):
        w = np.zeros(num_classes)
        w[(c + 1) % num_classes] += 0.5
        w[(c - 1) % num_classes] += 0.5
        out.append(NeighborDistribution.from_weights(w))
    return out


PRESETS = {"circulant-2hop": circulant_2hop}

# Added-edge counts listed for the Cora-derived graphs, with the homophily
# ratio each produced. K here counts directed arcs (see README).
CORA_K_TABLE = {
    1003: 0.740, 2006: 0.681, 3009: 0.630, 4012: 0.587, 6018: 0.516, 8024: 0.460,
    10030: 0.415, 12036: 0.378, 16048: 0.321, 20060: 0.279, 24072: 0.247,
}


def load_dists(spec, num_classes: int | None = None) -> list[NeighborDistribution]:
    """Distributions from a preset name or a ``{"classes": C, "dists": [...]}`` mapping."""
    if isinstance(spec, str):
        if spec not in PRESETS:
            raise ValidationError(f"unknown distribution preset {spec!r}")
        if num_classes is None:
            raise ValidationError("preset distributions need num_classes")
        return PRESETS[spec](num_classes)
    classes = int(spec["classes"])
    rows = spec["dists"]
    if len(rows) != classes:
        raise ValidationError(f"expected {classes} distributions, got {len(rows)}")
    dists = [NeighborDistribution.from_weights(r) for r in rows]
    if any(d.num_classes != classes for d in dists):
        raise ValidationError("every distribution must have one weight per class")
    return dists


def dists_to_json(dists) -> dict:
    return {"classes": len(dists), "dists": [d.weights.tolist() for d in dists]}


def _check_dists(g: LabeledGraph, dists) -> None:
    if len(dists) != g.num_classes:
        raise ValidationError(f"need {g.num_classes} distributions, got {len(dists)}")
    for c, d in enumerate(dists):
        if d.num_classes != g.num_classes:
            raise ValidationError(f"distribution {c} has {d.num_classes} weights, graph has {g.num_classes} classes")


def add_heterophilous_edges(g: LabeledGraph, k: int, dists, seed) -> LabeledGraph:
    """Add exactly ``k`` new edges, each drawn as (i ~ U(V), c ~ D_{y_i}, j ~ U(V_c))."""
    return add_heterophilous_edges_noisy(g, k, dists, 0.0, seed)


def add_heterophilous_edges_noisy(g: LabeledGraph, k: int, dists, gamma: float, seed) -> LabeledGraph:
    """Like :func:`add_heterophilous_edges`, but with probability ``gamma`` the
    target class is uniform over the classes other than ``y_i``.

    Self-loops and edges already present are rejected and the whole
    (i, r, c, j) draw is repeated, so exactly ``k`` distinct edges are added.
    """
    k = int(k)
    if k < 0:
        raise ValidationError("K must be >= 0")
    if not 0.0 <= gamma <= 1.0:
        raise ValidationError(f"gamma must lie in [0, 1], got {gamma}")
    _check_dists(g, dists)
    if k == 0:
        return g
    C = g.num_classes
    if gamma > 0 and C < 2:
        raise ValidationError("noisy edge addition needs at least two classes")
    if g.num_edges + k > g.n * (g.n - 1) // 2:
        raise ValidationError(f"cannot place {k} new edges: graph would exceed complete")

    rng = _as_seed(seed).generator()
    existing = set(map(tuple, g.edge_array().tolist()))
    added: list[tuple[int, int]] = []
    labels = g.labels
    sizes = [len(v) for v in g.class_index]
    budget = REJECTION_FACTOR * k
    draws = 0
    while len(added) < k:
        if draws >= budget:
            raise ValidationError(f"placed only {len(added)} of {k} edges after {budget} draws")
        draws += 1
        i = int(rng.integers(g.n))
        yi = int(labels[i])
        r = rng.random()
        if r <= gamma and gamma > 0:
            c = int(rng.integers(C - 1))
            c += c >= yi
        else:
            c = int(dists[yi].sample(rng))
        if sizes[c] == 0:
            raise ValidationError(f"sampled class {c} has no nodes")
        j = int(g.class_index[c][rng.integers(sizes[c])])
        if i == j:
            continue
        e = (i, j) if i < j else (j, i)
        if e in existing:
            continue
        existing.add(e)
        added.append(e)
    return g.with_edges(added)


@dataclass(frozen=True)
class CsbmParams:
    n0: int
    n1: int
    p: float
    q: float
    mu0: np.ndarray
    mu1: np.ndarray

    def __post_init__(self):
        mu0 = np.asarray(self.mu0, dtype=np.float64).reshape(-1)
        mu1 = np.asarray(self.mu1, dtype=np.float64).reshape(-1)
        object.__setattr__(self, "mu0", mu0)
        object.__setattr__(self, "mu1", mu1)
        if mu0.shape != mu1.shape:
            raise ValidationError("mu0 and mu1 must have the same length")
        if self.n0 < 1 or self.n1 < 1:
            raise ValidationError("class sizes must be >= 1")
        for name in ("p", "q"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1], got {v}")

    @property
    def l(self) -> int:
        return int(self.mu0.size)

    @property
    def separation(self) -> float:
        return float(np.linalg.norm(self.mu0 - self.mu1))

    @classmethod
    def symmetric(cls, n: int, p: float, q: float, sep: float, l: int) -> CsbmParams:
        """Balanced classes with means at +-sep/2 along the first axis."""
        mu = np.zeros(l)
        mu[0] = sep / 2.0
        return cls(n0=n // 2, n1=n - n // 2, p=p, q=q, mu0=mu, mu1=-mu)


def sample_sbm(sizes, p: float, q: float, means, seed) -> LabeledGraph:
    """Multi-class SBM with unit-variance Gaussian features around ``means[c]``.

    Every unordered pair gets an edge independently: probability ``p`` within
    a class, ``q`` across classes. Pairs are scanned row by row, one uniform
    per pair.
    """
    sizes = [int(s) for s in sizes]
    if any(s < 1 for s in sizes):
        raise ValidationError("class sizes must be >= 1")
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
        raise ValidationError("edge probabilities must lie in [0, 1]")
    means = np.asarray(means, dtype=np.float64)
    if means.ndim != 2 or means.shape[0] != len(sizes):
        raise ValidationError("means must be a (C, l) matrix")
    root = _as_seed(seed)
    edge_rng = root.child(0).generator()
    feat_rng = root.child(1).generator()

    labels = np.repeat(np.arange(len(sizes)), sizes)
    n = labels.size
    src, dst = [], []
    for i in range(n - 1):
        u = edge_rng.random(n - i - 1)
        prob = np.where(labels[i + 1 :] == labels[i], p, q)
        hit = np.flatnonzero(u < prob) + i + 1
        src.append(np.full(hit.size, i))
        dst.append(hit)
    edges = np.stack([np.concatenate(src), np.concatenate(dst)], axis=1) if n > 1 else np.empty((0, 2))
    features = means[labels] + feat_rng.standard_normal((n, means.shape[1]))
    return build_graph(edges, labels, features, num_classes=len(sizes))


def sample_csbm(params: CsbmParams, seed) -> LabeledGraph:
    """Two-class contextual SBM: class 0 occupies ids [0, n0), class 1 the rest."""
    return sample_sbm([params.n0, params.n1], params.p, params.q, np.stack([params.mu0, params.mu1]), seed)


@dataclass(frozen=True)
class FeatureDistribution:
    """Per-class feature law: ``gaussian`` (unit variance) or ``uniform`` on
    ``[mean - s, mean + s]`` with ``s = bound - max|mean|`` so every coordinate
    stays within ``[-bound, bound]``."""

    mean: np.ndarray
    shape: str = "uniform"
    bound: float | None = None

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64).reshape(-1)
        object.__setattr__(self, "mean", mean)
        if self.shape not in ("gaussian", "uniform"):
            raise ValidationError(f"unknown feature shape {self.shape!r}")
        if self.shape == "uniform":
            if self.bound is None or not self.bound > 0:
                raise ValidationError("uniform features need a positive bound B")
            if np.abs(mean).max() > self.bound:
                raise ValidationError("feature mean lies outside [-B, B]")

    @property
    def half_width(self) -> float:
        return float(self.bound - np.abs(self.mean).max())

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        l = self.mean.size
        if self.shape == "gaussian":
            return self.mean + rng.standard_normal((size, l))
        s = self.half_width
        return self.mean + rng.uniform(-s, s, (size, l))


def sample_aggregates(dist: NeighborDistribution, feats, degree: int, weight, trials: int, rng) -> np.ndarray:
    """``trials`` independent draws of W * mean(x_j) over ``degree`` neighbors.

    Neighbor labels are i.i.d. from ``dist``; each neighbor's features come
    from ``feats[label]``. Returns a (trials, out_dim) array.
    """
    if degree < 1:
        raise ValidationError("degree must be >= 1")
    W = np.asarray(weight, dtype=np.float64)
    l = feats[0].mean.size
    if W.ndim != 2 or W.shape[1] != l:
        raise ValidationError(f"weight shape {W.shape} incompatible with feature dim {l}")
    labels = dist.sample(rng, (trials, degree))
    x = np.empty((trials, degree, l))
    for c, f in enumerate(feats):
        mask = labels == c
        cnt = int(mask.sum())
        if cnt:
            x[mask] = f.sample(rng, cnt)
    return x.mean(axis=1) @ W.T


def sample_assumption_neighborhood(dist: NeighborDistribution, feats, degree: int, weight, seed) -> np.ndarray:
    """One aggregated vector ``h_i = W * mean_j x_j`` for a node whose
    ``degree`` neighbor labels are drawn i.i.d. from ``dist``."""
    return sample_aggregates(dist, feats, degree, weight, 1, _as_seed(seed).generator())[0]


def expected_aggregate(dist: NeighborDistribution, feats, weight) -> np.ndarray:
    """E[h_i] = W * sum_c D(c) mean(F_c)."""
    means = np.stack([f.mean for f in feats])
    return np.asarray(weight, dtype=np.float64) @ (dist.weights @ means)


def expected_sbm_mean_degree(sizes, p: float, q: float) -> float:
    n = sum(sizes)
    intra = sum(s * (s - 1) / 2 for s in sizes)
    inter = n * (n - 1) / 2 - intra
    return 2.0 * (p * intra + q * inter) / n


def sbm_homophily(sizes, p: float, q: float) -> float:
    """Expected edge homophily ratio of an SBM (ratio of expected counts)."""
    n = sum(sizes)
    intra = sum(s * (s - 1) / 2 for s in sizes)
    inter = n * (n - 1) / 2 - intra
    return p * intra / (p * intra + q * inter) if p * intra + q * inter > 0 else math.nan
