"""Dataset bundle directories.

Layout::

    graph.json     {"format_version", "n", "num_classes", "has_features", "l", "label_names"}
    edges.tsv      "u<TAB>v" per undirected edge, 0-indexed, each edge once
    labels.tsv     one class id per line, in node-id order
    features.f32   optional little-endian float32, row-major n x l
"""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path

import numpy as np

from heterolab.errors import BundleError, ValidationError
from heterolab.graph import LabeledGraph, build_graph

FORMAT_VERSION = 1


def save_bundle(g: LabeledGraph, path, label_names=None) -> None:
    path = Path(path)
    if label_names is None:
        label_names = [str(c) for c in range(g.num_classes)]
    if len(label_names) != g.num_classes:
        raise ValidationError("label_names must have one entry per class")
    manifest = {
        "format_version": FORMAT_VERSION,
        "n": g.n,
        "num_classes": g.num_classes,
        "has_features": g.features is not None,
        "l": g.num_features,
        "label_names": list(label_names),
    }
    try:
        path.mkdir(parents=True, exist_ok=True)
        (path / "graph.json").write_text(json.dumps(manifest, indent=2) + "\n")
        with open(path / "edges.tsv", "w") as fh:
            fh.writelines(f"{u}\t{v}\n" for u, v in g.edge_array().tolist())
        with open(path / "labels.tsv", "w") as fh:
            fh.writelines(f"{y}\n" for y in g.labels.tolist())
        feat_path = path / "features.f32"
        if g.features is not None:
            g.features.astype("<f4").tofile(feat_path)
        elif feat_path.exists():
            feat_path.unlink()
    except OSError as exc:
        raise BundleError(f"cannot write bundle {path}: {exc}") from exc


def _read_lines(path: Path):
    try:
        with open(path) as fh:
            return fh.read().splitlines()
    except FileNotFoundError as exc:
        raise BundleError(f"missing file {path}") from exc
    except OSError as exc:
        raise BundleError(f"cannot read {path}: {exc}") from exc


def read_manifest(path) -> dict:
    path = Path(path)
    lines = _read_lines(path / "graph.json")
    try:
        manifest = json.loads("\n".join(lines))
    except json.JSONDecodeError as exc:
        raise BundleError(f"{path / 'graph.json'}: invalid JSON ({exc})") from exc
    if manifest.get("format_version") != FORMAT_VERSION:
        raise BundleError(f"unknown format_version {manifest.get('format_version')!r}")
    for key in ("n", "num_classes", "has_features", "l"):
        if key not in manifest:
            raise BundleError(f"graph.json missing {key!r}")
    return manifest


def load_bundle(path) -> LabeledGraph:
    path = Path(path)
    if not path.is_dir():
        raise BundleError(f"bundle directory {path} not found")
    manifest = read_manifest(path)
    n, C, l = int(manifest["n"]), int(manifest["num_classes"]), int(manifest["l"])

    edges = []
    for lineno, line in enumerate(_read_lines(path / "edges.tsv"), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        try:
            if len(parts) != 2:
                raise ValueError
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise BundleError(f"edges.tsv line {lineno}: malformed edge {line!r}") from None

    labels = []
    for lineno, line in enumerate(_read_lines(path / "labels.tsv"), 1):
        if not line.strip():
            continue
        try:
            labels.append(int(line))
        except ValueError:
            raise BundleError(f"labels.tsv line {lineno}: malformed label {line!r}") from None
    if len(labels) != n:
        raise BundleError(f"labels.tsv has {len(labels)} lines, manifest says n={n}")

    features = None
    if manifest["has_features"]:
        fpath = path / "features.f32"
        if not fpath.exists():
            raise BundleError(f"missing file {fpath}")
        expected = 4 * n * l
        actual = os.path.getsize(fpath)
        if actual != expected:
            raise BundleError(f"features.f32 has {actual} bytes, expected {expected} (4*n*l)")
        features = np.fromfile(fpath, dtype="<f4").reshape(n, l).astype(np.float64)

    try:
        g = build_graph(edges, labels, features, num_classes=C)
    except ValidationError as exc:
        raise ValidationError(f"bundle {path}: {exc}") from exc
    if g.num_edges != len(edges):
        raise BundleError(f"edges.tsv lists {len(edges) - g.num_edges} duplicate edge(s)")
    return g


def convert_csv(edges_csv, labels_csv, out, features_csv=None, delimiter=",") -> LabeledGraph:
    """Import a generic CSV dataset.

    ``labels_csv`` rows are ``node,label`` with arbitrary node names and label
    strings; ``edges_csv`` rows are ``src,dst`` by node name; the optional
    ``features_csv`` rows are ``node,f1,f2,...``. A header row is skipped if
    its fields are not all known node names. Node ids follow the order of
    ``labels_csv``; label ids follow sorted label names. Self-loop rows are
    dropped, since real citation dumps carry a few.
    """
    def rows(p):
        try:
            with open(p, newline="") as fh:
                return [r for r in csv.reader(fh, delimiter=delimiter) if r]
        except OSError as exc:
            raise BundleError(f"cannot read {p}: {exc}") from exc

    lab_rows = rows(labels_csv)
    if lab_rows and len(lab_rows[0]) >= 2 and lab_rows[0][0].strip().lower() in ("node", "id", "node_id"):
        lab_rows = lab_rows[1:]
    names = [r[0].strip() for r in lab_rows]
    ids = {name: i for i, name in enumerate(names)}
    if len(ids) != len(names):
        raise ValidationError("duplicate node names in labels file")
    label_names = sorted({r[1].strip() for r in lab_rows})
    label_id = {s: c for c, s in enumerate(label_names)}
    labels = [label_id[r[1].strip()] for r in lab_rows]

    edges = []
    for lineno, r in enumerate(rows(edges_csv), 1):
        a, b = r[0].strip(), r[1].strip()
        if a not in ids or b not in ids:
            if lineno == 1:
                continue
            raise ValidationError(f"edges line {lineno}: unknown node {(a if a not in ids else b)!r}")
        if a != b:
            edges.append((ids[a], ids[b]))

    features = None
    if features_csv is not None:
        frows = [r for r in rows(features_csv) if r[0].strip() in ids]
        if len(frows) != len(names):
            raise ValidationError("features file must have one row per node")
        features = np.zeros((len(names), len(frows[0]) - 1))
        for r in frows:
            features[ids[r[0].strip()]] = [float(v) for v in r[1:]]

    g = build_graph(edges, labels, features, num_classes=len(label_names))
    save_bundle(g, out, label_names)
    return g
