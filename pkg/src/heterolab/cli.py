"""Command line entry point: ``heterolab <command> ...``.

Exit codes: 0 success, 2 validation error, 3 I/O error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from heterolab.bundle import convert_csv, load_bundle, save_bundle
from heterolab.errors import BundleError, NumericalError, ValidationError
from heterolab.graph import degree_summary
from heterolab.metrics import ccns, homophily_ratio
from heterolab.render import HeatmapSpec, csv_to_matrix, matrix_to_csv, render_curve, render_heatmap, render_misclassification

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _write(path, text: str) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
    except OSError as exc:
        raise BundleError(f"cannot write {path}: {exc}") from exc


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise BundleError(f"cannot read {path}: {exc}") from exc


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _dump(obj) -> str:
    return json.dumps(_json_safe(obj), indent=2, sort_keys=True) + "\n"


def cmd_analyze(args) -> None:
    g = load_bundle(args.bundle)
    ds = degree_summary(g)
    print(f"nodes: {g.n}  edges: {g.num_edges}  classes: {g.num_classes}")
    print(f"homophily ratio: {homophily_ratio(g):.6f}")
    print(f"degree min/max/mean: {ds.min}/{ds.max}/{ds.mean:.4f}  isolated: {ds.zeros}")
    m = ccns(g)
    out = Path(args.out or args.bundle)
    _write(out / "ccns.csv", matrix_to_csv(m.values))
    _write(out / "ccns.svg", render_heatmap(HeatmapSpec(m.values, title="Cross-class neighborhood similarity")))
    print(f"ccns excluded isolated nodes: {m.excluded_isolated}")
    print(f"wrote {out / 'ccns.csv'} and {out / 'ccns.svg'}")


def cmd_synth_csbm(args) -> None:
    from heterolab.synth import CsbmParams, RngSeed, sample_csbm

    params = CsbmParams.symmetric(args.n0 + args.n1, args.p, args.q, args.sep, args.l)
    params = CsbmParams(args.n0, args.n1, args.p, args.q, params.mu0, params.mu1)
    g = sample_csbm(params, RngSeed(args.seed))
    save_bundle(g, args.out)
    print(f"csbm: n={g.n} edges={g.num_edges} h={homophily_ratio(g):.4f} -> {args.out}")


def cmd_synth_sbm(args) -> None:
    from heterolab.synth import RngSeed, sample_sbm

    sizes = _ints(args.sizes)
    means = np.zeros((len(sizes), max(args.l, len(sizes))))
    means[np.arange(len(sizes)), np.arange(len(sizes))] = args.sep
    g = sample_sbm(sizes, args.p, args.q, means, RngSeed(args.seed))
    save_bundle(g, args.out)
    print(f"sbm: n={g.n} edges={g.num_edges} h={homophily_ratio(g):.4f} -> {args.out}")


def _load_dists_arg(spec: str, num_classes: int):
    from heterolab.synth import PRESETS, load_dists

    if spec in PRESETS:
        return load_dists(spec, num_classes)
    try:
        data = json.loads(_read(spec))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{spec}: invalid JSON ({exc})") from exc
    dists = load_dists(data)
    if len(dists) != num_classes:
        raise ValidationError(f"{spec} defines {len(dists)} classes, graph has {num_classes}")
    return dists


def cmd_synth_add_edges(args) -> None:
    from heterolab.synth import RngSeed, add_heterophilous_edges_noisy

    g = load_bundle(args.bundle)
    dists = _load_dists_arg(args.dists, g.num_classes)
    h0 = homophily_ratio(g)
    g2 = add_heterophilous_edges_noisy(g, args.k, dists, args.gamma, RngSeed(args.seed))
    save_bundle(g2, args.out)
    print(f"added {args.k} edges (gamma={args.gamma}): h {h0:.4f} -> {homophily_ratio(g2):.4f} -> {args.out}")


def cmd_train(args) -> None:
    from heterolab.nn import TrainConfig, random_split, train

    g = load_bundle(args.bundle)
    reports = []
    for split_id in range(args.splits):
        split = random_split(g.n, args.seed, split_id)
        cfg = TrainConfig(learning_rate=args.lr, weight_decay=args.weight_decay, dropout=args.dropout,
                          epochs=args.epochs, patience=args.patience, hidden=args.hidden,
                          seed=args.seed, alpha=args.alpha)
        rep = train(g, cfg, args.model, split, split_id)
        reports.append(rep.to_json())
        print(f"split {split_id}: best epoch {rep.best_epoch}  test accuracy {rep.test_accuracy:.4f}")
    accs = [r["test_accuracy"] for r in reports]
    print(f"{args.model}: mean {np.mean(accs):.4f} +- {np.std(accs):.4f} over {len(accs)} split(s)")
    if args.out:
        _write(args.out, _dump(reports if len(reports) > 1 else reports[0]))


def cmd_theory_concentration(args) -> None:
    from heterolab.synth import FeatureDistribution, NeighborDistribution, RngSeed
    from heterolab.theory import verify_concentration

    l, C = args.l, args.classes
    rng = RngSeed(args.seed, 5).generator()
    means = rng.uniform(-args.B / 2, args.B / 2, (C, l))
    feats = [FeatureDistribution(m, "uniform", args.B) for m in means]
    dist = NeighborDistribution.from_weights(np.full(C, 1.0 / C))
    W = rng.standard_normal((l, l))
    t_grid = _floats(args.t_grid)
    out = []
    for d in _ints(args.degrees):
        rep = verify_concentration(dist, feats, W, d, t_grid, args.trials, args.seed, check=args.self_check)
        out.append(rep.to_json())
        worst = max(e - b for e, b in zip(rep.empirical, rep.bound))
        print(f"degree {d}: rho(W)={rep.rho:.4f}  max(empirical - bound)={worst:.3e}  violations={len(rep.violations)}")
    if args.out:
        _write(args.out, _dump(out))


def cmd_theory_csbm(args) -> None:
    from heterolab.synth import CsbmParams
    from heterolab.theory import misclassification_curve

    params = CsbmParams.symmetric(2, args.p, args.q, args.sep, args.l)
    curve = misclassification_curve(params, _ints(args.degrees), args.trials, args.seed)
    print(f"degree threshold: {curve.threshold:.6g}   p_x = {curve.p_x:.6f}")
    for d, ph, xh, hh in zip(curve.degrees, curve.p_h, curve.p_x_hat, curve.p_h_hat):
        print(f"  degree {d:5d}: p_h={ph:.6f}  MC p_x={xh:.5f}  MC p_h={hh:.5f}")
    if args.out:
        _write(args.out, _dump(curve.to_json()))


def cmd_render(args) -> None:
    text = _read(args.input)
    if args.what == "heatmap":
        svg = render_heatmap(HeatmapSpec(csv_to_matrix(text)))
    else:
        data = json.loads(text)
        svg = render_misclassification(data) if data.get("kind") == "csbm-misclassification" else render_curve(data)
    _write(args.out, svg)
    print(f"wrote {args.out}")


def cmd_bundle_convert(args) -> None:
    g = convert_csv(args.edges, args.labels, args.out, args.features, args.delimiter)
    print(f"bundle: n={g.n} edges={g.num_edges} classes={g.num_classes} -> {args.out}")


def cmd_experiment_curve(args) -> None:
    from heterolab.experiment import run_curve_experiment
    from heterolab.nn import TrainConfig

    g = load_bundle(args.bundle)
    dists = _load_dists_arg(args.dists, g.num_classes)
    seeds = list(range(args.seed, args.seed + args.seeds))
    res = run_curve_experiment(g, dists, _ints(args.k_grid), args.gamma, seeds, TrainConfig(epochs=args.epochs))
    for p in res.points:
        print(f"K={p['K']:7d}  h={p['h']:.3f}  acc={p['acc_mean']:.4f} +- {p['acc_std']:.4f}")
    _write(args.out, res.dumps())
    print(f"wrote {args.out}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heterolab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(subparsers, name, func, **kw):
        p = subparsers.add_parser(name, **kw)
        p.add_argument("--seed", type=int, default=0, help="master random seed (default 0)")
        p.set_defaults(func=func)
        return p

    p = add(sub, "analyze", cmd_analyze, help="homophily, degrees, CCNS csv+svg for a bundle")
    p.add_argument("bundle")
    p.add_argument("--out", help="output directory (default: the bundle directory)")

    synth = sub.add_parser("synth", help="graph generators").add_subparsers(dest="synth_cmd", required=True)
    p = add(synth, "csbm", cmd_synth_csbm, help="two-class contextual SBM")
    p.add_argument("--n0", type=int, default=300)
    p.add_argument("--n1", type=int, default=300)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--sep", type=float, default=2.0, help="||mu0 - mu1||")
    p.add_argument("--l", type=int, default=8)
    p.add_argument("--out", required=True)
    p = add(synth, "sbm", cmd_synth_sbm, help="multi-class SBM, means sep*e_c")
    p.add_argument("--sizes", required=True, help="comma-separated class sizes")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--sep", type=float, default=1.0)
    p.add_argument("--l", type=int, default=8)
    p.add_argument("--out", required=True)
    p = add(synth, "add-edges", cmd_synth_add_edges, help="heterophilous edge addition")
    p.add_argument("bundle")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--dists", default="circulant-2hop", help="preset name or JSON file")
    p.add_argument("--out", required=True)

    p = add(sub, "train", cmd_train, help="train gcn/mlp/blend on a bundle")
    p.add_argument("bundle")
    p.add_argument("--model", choices=("gcn", "mlp", "blend"), default="gcn")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--splits", type=int, default=1)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--weight-decay", type=float, default=5e-4)
    p.add_argument("--dropout", type=float, default=0.5)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--patience", type=int, default=50)
    p.add_argument("--hidden", type=int, default=64)
    p.add_argument("--out", help="write TrainReport JSON here")

    theory = sub.add_parser("theory", help="Monte Carlo checks").add_subparsers(dest="theory_cmd", required=True)
    p = add(theory, "concentration", cmd_theory_concentration, help="tail of ||h - E h|| vs the bound")
    p.add_argument("--degrees", default="5,20,100")
    p.add_argument("--t-grid", default="0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--l", type=int, default=2)
    p.add_argument("--B", type=float, default=1.0)
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--self-check", action="store_true", help="exit 4 on any bound violation")
    p.add_argument("--out")
    p = add(theory, "csbm", cmd_theory_csbm, help="misclassification of raw vs aggregated features")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--sep", type=float, default=2.0)
    p.add_argument("--l", type=int, default=2)
    p.add_argument("--degrees", default="1,2,4,8,16")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--out")

    p = add(sub, "render", cmd_render, help="render heatmap (CSV) or curve (JSON) to SVG")
    p.add_argument("what", choices=("heatmap", "curve"))
    p.add_argument("input")
    p.add_argument("--out", required=True)

    bundle = sub.add_parser("bundle", help="bundle utilities").add_subparsers(dest="bundle_cmd", required=True)
    p = add(bundle, "convert", cmd_bundle_convert, help="import CSV edge list + labels")
    p.add_argument("--edges", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--features")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--out", required=True)

    exp = sub.add_parser("experiment", help="accuracy vs homophily sweeps").add_subparsers(dest="exp_cmd", required=True)
    p = add(exp, "curve", cmd_experiment_curve, help="K grid x seeds sweep, writes ExperimentResult JSON")
    p.add_argument("bundle")
    p.add_argument("--dists", default="circulant-2hop")
    p.add_argument("--k-grid", required=True)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--seeds", type=int, default=5, help="number of consecutive seeds from --seed")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    print(f"seed: {args.seed}")
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except BundleError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
