"""Toy graphs shipped as bundles under ``heterolab/fixtures``.

``bipartite2``: 8 nodes, every edge joins a class-0 ("blue", feature 0) node
to a class-1 ("orange", feature 1) node. ``path4``: path 0-1-2-3 labeled
[0, 0, 1, 1]. ``csbm600``: two-class CSBM, p=0.05, q=0.005, ||mu0-mu1||=2,
l=8, seed 0.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from heterolab.graph import LabeledGraph, build_graph

NAMES = ("bipartite2", "path4", "csbm600")


def bipartite2() -> LabeledGraph:
    blue, orange = [0, 2, 4, 6], [1, 3, 5, 7]
    ring = [(i, (i + 1) % 8) for i in range(8)]
    chords = [(0, 5), (2, 7), (4, 1)]
    labels = np.zeros(8, dtype=np.int64)
    labels[orange] = 1
    features = labels.astype(np.float64).reshape(-1, 1)
    assert all((a in blue) != (b in blue) for a, b in ring + chords)
    return build_graph(ring + chords, labels, features)


def path4() -> LabeledGraph:
    return build_graph([(0, 1), (1, 2), (2, 3)], [0, 0, 1, 1])


def csbm600() -> LabeledGraph:
    from heterolab.synth import CsbmParams, RngSeed, sample_csbm

    return sample_csbm(CsbmParams.symmetric(600, 0.05, 0.005, 2.0, 8), RngSeed(0))


BUILDERS = {"bipartite2": bipartite2, "path4": path4, "csbm600": csbm600}


def fixture_path(name: str) -> Path:
    if name not in BUILDERS:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(NAMES)}")
    return Path(str(resources.files("heterolab") / "fixtures" / name))


def load_fixture(name: str) -> LabeledGraph:
    from heterolab.bundle import load_bundle

    return load_bundle(fixture_path(name))


def write_fixtures(root=None) -> None:
    from heterolab.bundle import save_bundle

    root = Path(root) if root else Path(str(resources.files("heterolab") / "fixtures"))
    for name, build in BUILDERS.items():
        names = ["blue", "orange"] if name == "bipartite2" else None
        save_bundle(build(), root / name, names)


if __name__ == "__main__":
    write_fixtures()
