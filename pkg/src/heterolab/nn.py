"""Two-layer GCN / MLP / blended MLP+GCN in numpy with hand-written backprop.

All math is float64. Aggregation is the row mean ``D^-1 A`` (self-loops
optional). Training is full-batch Adam on masked softmax cross-entropy with
L2 weight decay, early-stopped on validation accuracy.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from heterolab.errors import NumericalError, ValidationError
from heterolab.graph import LabeledGraph
from heterolab.synth import RngSeed

MODEL_KINDS = ("gcn", "mlp", "blend")

# Tuning grid (used by grid_search only; acceptance runs the defaults).
GRID = {
    "learning_rate": (0.002, 0.005, 0.01, 0.05),
    "weight_decay": (5e-4, 5e-5, 5e-6, 5e-7, 5e-8, 1e-5, 0.0),
    "dropout": (0.0, 0.2, 0.5, 0.8),
    "alpha": (0.2, 0.4, 0.6, 0.8, 1.0),
}


@dataclass(frozen=True)
class AggregationOperator:
    matrix: sp.csr_matrix
    self_loops: bool

    def __matmul__(self, other):
        return self.matrix @ other

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def build_aggregator(g: LabeledGraph, self_loops: bool = True) -> AggregationOperator:
    """Row-normalized adjacency; rows of isolated nodes (no self-loop) are zero."""
    A = sp.csr_matrix(
        (np.ones(g.indices.size), g.indices.copy(), g.indptr.copy()), shape=(g.n, g.n)
    )
    if self_loops:
        A = (A + sp.identity(g.n, format="csr")).tocsr()
    deg = np.asarray(A.sum(axis=1)).ravel()
    inv = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
    M = sp.diags(inv) @ A
    M = sp.csr_matrix(M)
    M.sort_indices()
    return AggregationOperator(matrix=M, self_loops=self_loops)


@dataclass
class TwoLayer:
    """Weights of one two-layer branch: ``W0`` (l x h) then ``W1`` (h x C)."""

    W0: np.ndarray
    W1: np.ndarray

    @classmethod
    def glorot(cls, l: int, hidden: int, C: int, rng: np.random.Generator) -> TwoLayer:
        def init(fan_in, fan_out):
            a = math.sqrt(6.0 / (fan_in + fan_out))
            return rng.uniform(-a, a, (fan_in, fan_out))

        return cls(init(l, hidden), init(hidden, C))

    @classmethod
    def zeros(cls, l: int, hidden: int, C: int) -> TwoLayer:
        return cls(np.zeros((l, hidden)), np.zeros((hidden, C)))

    def params(self) -> list[np.ndarray]:
        return [self.W0, self.W1]


GcnModel = TwoLayer
MlpModel = TwoLayer


def _dropout_mask(rng, shape, rate):
    if rng is None or rate <= 0.0:
        return None
    keep = 1.0 - rate
    return (rng.random(shape) < keep) / keep


def _forward_branch(model: TwoLayer, X, A, rate, rng):
    """Returns logits and the cache needed by ``_backward_branch``.

    ``A`` is None for the MLP branch.
    """
    m0 = _dropout_mask(rng, X.shape, rate)
    Xd = X if m0 is None else X * m0
    Z1 = Xd @ model.W0
    if A is not None:
        Z1 = A @ Z1
    H1 = np.maximum(Z1, 0.0)
    m1 = _dropout_mask(rng, H1.shape, rate)
    Hd = H1 if m1 is None else H1 * m1
    Z2 = Hd @ model.W1
    if A is not None:
        Z2 = A @ Z2
    return Z2, (Xd, Z1, Hd, m1)


def _backward_branch(model: TwoLayer, A, cache, dZ2):
    Xd, Z1, Hd, m1 = cache
    dP2 = dZ2 if A is None else A.T @ dZ2
    gW1 = Hd.T @ dP2
    dH = dP2 @ model.W1.T
    if m1 is not None:
        dH = dH * m1
    dZ1 = dH * (Z1 > 0)
    dP1 = dZ1 if A is None else A.T @ dZ1
    gW0 = Xd.T @ dP1
    return [gW0, gW1]


def gcn_forward(model: TwoLayer, X, agg: AggregationOperator, rate: float = 0.0, rng=None) -> np.ndarray:
    """``A relu(A X W0) W1`` with inverted dropout on both layer inputs when ``rng`` is given."""
    _check_shapes(model, X)
    return _forward_branch(model, X, agg.matrix, rate, rng)[0]


def mlp_forward(model: TwoLayer, X, rate: float = 0.0, rng=None) -> np.ndarray:
    _check_shapes(model, X)
    return _forward_branch(model, X, None, rate, rng)[0]


def blend(h_gcn, h_mlp, alpha: float) -> np.ndarray:
    """``alpha * h_gcn + (1 - alpha) * h_mlp``; alpha 1 and 0 return the inputs exactly."""
    h_gcn = np.asarray(h_gcn, dtype=np.float64)
    h_mlp = np.asarray(h_mlp, dtype=np.float64)
    if h_gcn.shape != h_mlp.shape:
        raise ValidationError(f"shape mismatch {h_gcn.shape} vs {h_mlp.shape}")
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError(f"alpha must lie in [0, 1], got {alpha}")
    if alpha == 1.0:
        return h_gcn.copy()
    if alpha == 0.0:
        return h_mlp.copy()
    return alpha * h_gcn + (1.0 - alpha) * h_mlp


def _check_shapes(model: TwoLayer, X):
    if X.ndim != 2 or X.shape[1] != model.W0.shape[0] or model.W0.shape[1] != model.W1.shape[0]:
        raise ValidationError(
            f"shape mismatch: X {X.shape}, W0 {model.W0.shape}, W1 {model.W1.shape}"
        )


def softmax(logits) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def softmax_cross_entropy(logits, labels, mask) -> tuple[float, np.ndarray]:
    """Mean NLL over ``mask`` rows and its gradient w.r.t. all logits."""
    mask = np.asarray(mask)
    if mask.dtype == bool:
        mask = np.flatnonzero(mask)
    if mask.size == 0:
        raise ValidationError("empty mask")
    z = logits[mask] - logits[mask].max(axis=1, keepdims=True)
    logsum = np.log(np.exp(z).sum(axis=1))
    y = np.asarray(labels)[mask]
    loss = float(np.mean(logsum - z[np.arange(mask.size), y]))
    grad = np.zeros_like(logits, dtype=np.float64)
    p = np.exp(z - logsum[:, None])
    p[np.arange(mask.size), y] -= 1.0
    grad[mask] = p / mask.size
    return loss, grad


class Network:
    """A model of one kind plus its forward/backward over a fixed graph."""

    def __init__(self, kind: str, X, agg: AggregationOperator | None, C: int, hidden: int,
                 seed: RngSeed, alpha: float = 1.0, zero: bool = False):
        if kind not in MODEL_KINDS:
            raise ValidationError(f"unknown model kind {kind!r}")
        self.kind = kind
        self.X = X
        self.A = None if agg is None else agg.matrix
        self.alpha = alpha if kind == "blend" else (1.0 if kind == "gcn" else 0.0)
        l = X.shape[1]
        # separate streams per branch so the GCN branch of a blend sees exactly
        # the init and dropout draws a plain GCN run would
        self.streams = {b: (seed.child(10 + i), seed.child(20 + i)) for i, b in enumerate(("gcn", "mlp"))}
        self.branches: dict[str, TwoLayer] = {}
        for b in self._branch_names():
            init_rng = self.streams[b][0].generator()
            self.branches[b] = TwoLayer.zeros(l, hidden, C) if zero else TwoLayer.glorot(l, hidden, C, init_rng)
        self.drop_rngs = {b: self.streams[b][1].generator() for b in self._branch_names()}

    def _branch_names(self):
        return {"gcn": ("gcn",), "mlp": ("mlp",), "blend": ("gcn", "mlp")}[self.kind]

    def params(self) -> list[np.ndarray]:
        return [w for b in self._branch_names() for w in self.branches[b].params()]

    def forward(self, rate: float = 0.0, train: bool = False):
        outs, caches = {}, {}
        for b in self._branch_names():
            A = self.A if b == "gcn" else None
            rng = self.drop_rngs[b] if train else None
            outs[b], caches[b] = _forward_branch(self.branches[b], self.X, A, rate, rng)
        if self.kind == "blend":
            logits = blend(outs["gcn"], outs["mlp"], self.alpha)
        else:
            logits = outs[self.kind]
        return logits, caches

    def backward(self, caches, dlogits) -> list[np.ndarray]:
        grads = []
        for b in self._branch_names():
            A = self.A if b == "gcn" else None
            scale = 1.0
            if self.kind == "blend":
                scale = self.alpha if b == "gcn" else 1.0 - self.alpha
            d = dlogits if scale == 1.0 else scale * dlogits
            grads.extend(_backward_branch(self.branches[b], A, caches[b], d))
        return grads

    def loss_and_grads(self, labels, mask, weight_decay: float, rate: float = 0.0, train: bool = False):
        logits, caches = self.forward(rate, train)
        loss, dlogits = softmax_cross_entropy(logits, labels, mask)
        grads = self.backward(caches, dlogits)
        params = self.params()
        if weight_decay:
            loss += 0.5 * weight_decay * sum(float(np.sum(w * w)) for w in params)
            grads = [g + weight_decay * w for g, w in zip(grads, params)]
        return loss, grads, logits


class Adam:
    def __init__(self, params, lr=0.01, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr, self.b1, self.b2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads):
        self.t += 1
        c1 = 1.0 - self.b1**self.t
        c2 = 1.0 - self.b2**self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    weight_decay: float = 5e-4
    dropout: float = 0.5
    epochs: int = 200
    patience: int = 50
    hidden: int = 64
    seed: int = 0
    alpha: float = 1.0
    self_loops: bool = True

    def __post_init__(self):
        for name in ("learning_rate", "weight_decay", "dropout"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be >= 0")
        if not self.dropout < 1.0:
            raise ValidationError("dropout must be < 1")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.epochs < 1 or self.hidden < 1 or self.patience < 0:
            raise ValidationError("epochs and hidden must be >= 1, patience >= 0")


@dataclass(frozen=True)
class Split:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray


def random_split(n: int, seed, split_id: int = 0) -> Split:
    """Seeded 48/32/20 partition.

    Sizes start from the floor of each share; the leftover nodes go one each
    to the largest fractional parts (train first on ties), so every size is
    within 1 of its exact share.
    """
    if n < 5:
        raise ValidationError(f"need at least 5 nodes to split, got {n}")
    seed = seed if isinstance(seed, RngSeed) else RngSeed(int(seed), 7_000 + split_id)
    perm = seed.generator().permutation(n)
    shares = (48, 32, 20)
    sizes = [(s * n) // 100 for s in shares]
    frac = [(s * n) % 100 for s in shares]
    for k in sorted(range(3), key=lambda k: -frac[k])[: n - sum(sizes)]:
        sizes[k] += 1
    n_train, n_val, _ = sizes
    return Split(
        train=np.sort(perm[:n_train]),
        val=np.sort(perm[n_train : n_train + n_val]),
        test=np.sort(perm[n_train + n_val :]),
    )


@dataclass
class TrainReport:
    model: str
    seed: int
    split_id: int
    alpha: float
    best_epoch: int
    test_accuracy: float
    history: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)


def _accuracy(logits, labels, idx) -> float:
    return float(np.mean(np.argmax(logits[idx], axis=1) == labels[idx]))


def train(g: LabeledGraph, config: TrainConfig, model_kind: str, split: Split, split_id: int = 0) -> TrainReport:
    """Full-batch training; reports test accuracy at the best validation epoch.

    ``history`` loss is the training-mask cross-entropy (without the decay
    term) so that a blend at alpha 1 reports the same numbers as a plain GCN.
    """
    if g.features is None:
        raise ValidationError("training needs node features")
    if model_kind not in MODEL_KINDS:
        raise ValidationError(f"unknown model kind {model_kind!r}")
    X = np.asarray(g.features, dtype=np.float64)
    agg = build_aggregator(g, config.self_loops) if model_kind != "mlp" else None
    net = Network(model_kind, X, agg, g.num_classes, config.hidden, RngSeed(config.seed, 1), alpha=config.alpha)
    opt = Adam(net.params(), lr=config.learning_rate)
    y = g.labels

    history = []
    best_val, best_epoch, best_test, since = -1.0, 0, 0.0, 0
    for epoch in range(1, config.epochs + 1):
        logits, caches = net.forward(config.dropout, train=True)
        loss, dlogits = softmax_cross_entropy(logits, y, split.train)
        if not math.isfinite(loss):
            raise NumericalError(f"non-finite loss at epoch {epoch}")
        grads = net.backward(caches, dlogits)
        if config.weight_decay:
            grads = [gr + config.weight_decay * w for gr, w in zip(grads, net.params())]
        opt.step(grads)

        eval_logits, _ = net.forward()
        val_acc = _accuracy(eval_logits, y, split.val)
        history.append({"epoch": epoch, "loss": loss, "val_acc": val_acc})
        if val_acc > best_val:
            best_val, best_epoch, since = val_acc, epoch, 0
            best_test = _accuracy(eval_logits, y, split.test)
        else:
            since += 1
            if config.patience and since >= config.patience:
                break
    return TrainReport(
        model=model_kind,
        seed=config.seed,
        split_id=split_id,
        alpha=net.alpha,
        best_epoch=best_epoch,
        test_accuracy=best_test,
        history=history,
    )


def gradient_check(model_kind: str, g: LabeledGraph | None = None, step: float = 1e-3, seed: int = 0,
                   hidden: int = 4, alpha: float = 0.5, weight_decay: float = 5e-4,
                   zero: bool = False, max_tries: int = 50) -> float:
    """Max relative error between backprop and central differences over every weight.

    Dropout is off. Instances whose hidden pre-activations sit within reach
    of the rectifier kink under a ``step`` perturbation are re-drawn.
    Relative error per entry is ``|a - n| / max(|a| + |n|, 1e-8)``.
    """
    if g is None:
        g = tiny_instance(seed)
    X = np.asarray(g.features, dtype=np.float64)
    agg = build_aggregator(g, True)
    y = g.labels
    mask = np.arange(g.n)

    for attempt in range(max_tries):
        net = Network(model_kind, X, agg, g.num_classes, hidden, RngSeed(seed, 100 + attempt),
                      alpha=alpha, zero=zero)
        if zero or _kink_margin_ok(net, step):
            break
    else:
        raise NumericalError("could not find an instance away from the rectifier kink")

    _, grads, _ = net.loss_and_grads(y, mask, weight_decay)
    worst = 0.0
    for W, G in zip(net.params(), grads):
        num = np.zeros_like(W)
        for idx in itertools.product(*map(range, W.shape)):
            old = W[idx]
            W[idx] = old + step
            lp = net.loss_and_grads(y, mask, weight_decay)[0]
            W[idx] = old - step
            lm = net.loss_and_grads(y, mask, weight_decay)[0]
            W[idx] = old
            num[idx] = (lp - lm) / (2 * step)
        rel = np.abs(G - num) / np.maximum(np.abs(G) + np.abs(num), 1e-8)
        worst = max(worst, float(rel.max()))
    return worst


def _kink_margin_ok(net: Network, step: float) -> bool:
    for b in net._branch_names():
        W0 = net.branches[b].W0
        P = net.X if b == "mlp" else net.A @ net.X
        Z1 = P @ W0
        reach = step * np.abs(P).max(axis=1, keepdims=True)
        if (np.abs(Z1) <= 2 * reach).any():
            return False
    return True


def tiny_instance(seed: int, n: int = 10, l: int = 3, C: int = 3) -> LabeledGraph:
    """Random connected-ish 10-node graph with Gaussian features for gradient checks."""
    from heterolab.graph import build_graph

    rng = RngSeed(seed, 55).generator()
    labels = np.arange(n) % C
    rng.shuffle(labels)
    edges = [(i, i + 1) for i in range(n - 1)]
    extra = rng.integers(0, n, (n, 2))
    edges += [tuple(e) for e in extra.tolist() if e[0] != e[1]]
    return build_graph(edges, labels, rng.standard_normal((n, l)), num_classes=C)


def grid_search(g: LabeledGraph, split: Split, model_kind: str = "gcn", base: TrainConfig | None = None,
                grid: dict | None = None) -> tuple[TrainConfig, float]:
    """Pick the config with the best validation accuracy over ``grid``; returns (config, val_acc)."""
    base = base or TrainConfig()
    grid = dict(grid or GRID)
    if model_kind != "blend":
        grid.pop("alpha", None)
    keys = sorted(grid)
    best, best_val = None, -1.0
    for values in itertools.product(*(grid[k] for k in keys)):
        cfg = replace(base, **dict(zip(keys, values)))
        rep = train(g, cfg, model_kind, split)
        val = rep.history[rep.best_epoch - 1]["val_acc"]
        if val > best_val:
            best, best_val = cfg, val
    return best, best_val
