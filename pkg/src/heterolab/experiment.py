"""Accuracy-vs-homophily experiments over (K, seed) grids."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from heterolab import __version__
from heterolab.errors import BundleError, ValidationError
from heterolab.graph import LabeledGraph
from heterolab.metrics import homophily_ratio
from heterolab.nn import TrainConfig, random_split, train
from heterolab.synth import RngSeed, add_heterophilous_edges_noisy, dists_to_json

SCHEMA = "heterolab-result-v1"


@dataclass
class ExperimentResult:
    kind: str
    params: dict
    points: list[dict] = field(default_factory=list)
    version: str = __version__

    def to_json(self) -> dict:
        return {"schema": SCHEMA, "kind": self.kind, "version": self.version,
                "params": self.params, "points": self.points}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, data: dict) -> ExperimentResult:
        if data.get("schema") != SCHEMA:
            raise BundleError(f"unsupported result schema {data.get('schema')!r}")
        return cls(kind=data["kind"], params=data["params"], points=data["points"], version=data["version"])

    @classmethod
    def loads(cls, text: str) -> ExperimentResult:
        return cls.from_json(json.loads(text))

    def accuracies(self) -> np.ndarray:
        return np.array([p["acc_mean"] for p in self.points])


def _config_json(config: TrainConfig) -> dict:
    d = dict(config.__dict__)
    d.pop("seed")
    return d


def run_point(base: LabeledGraph, dists, k: int, gamma: float, seed: int, config: TrainConfig,
              model_kind: str = "gcn") -> tuple[float, float]:
    """One (K, seed) cell: synthesize, measure h, split, train. Returns (h, test accuracy)."""
    g = add_heterophilous_edges_noisy(base, k, dists, gamma, RngSeed(seed, 1000 + int(k)))
    h = homophily_ratio(g)
    split = random_split(g.n, seed)
    rep = train(g, replace(config, seed=seed), model_kind, split)
    return h, rep.test_accuracy


def run_curve_experiment(base: LabeledGraph, dists, k_grid, gamma: float, seeds, config: TrainConfig | None = None,
                         model_kind: str = "gcn", kind: str = "curve") -> ExperimentResult:
    """For each K and seed: add K edges (noise ``gamma``), record h, train, record accuracy.

    Points keep the raw per-seed values next to mean and population std.
    """
    config = config or TrainConfig()
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ValidationError("need at least one seed")
    k_grid = [int(k) for k in k_grid]
    points = []
    for k in k_grid:
        hs, accs = [], []
        for s in seeds:
            h, acc = run_point(base, dists, k, gamma, s, config, model_kind)
            hs.append(h)
            accs.append(acc)
        points.append({
            "K": k,
            "h": float(np.mean(hs)),
            "h_values": hs,
            "acc_mean": float(np.mean(accs)),
            "acc_std": float(np.std(accs)),
            "accs": accs,
            "seeds": seeds,
        })
    params = {
        "k_grid": k_grid,
        "gamma": float(gamma),
        "seeds": seeds,
        "model": model_kind,
        "dists": dists_to_json(dists),
        "base": {"n": base.n, "edges": base.num_edges, "classes": base.num_classes},
        "config": _config_json(config),
    }
    return ExperimentResult(kind=kind, params=params, points=points)
