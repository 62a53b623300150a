"""Command-line interface: ``gen2out <subcommand> [options]``.

Every output file starts with (CSV: a ``#`` comment line) or contains (JSON:
a ``config`` object) the resolved configuration and seed. The thread count
and output paths are left out of it, since they do not change results.
Exit status is 0 on success, 1 on a runtime error and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import __version__
from ._random import SEED_ENV, default_seed

OUTPUT_KEYS = {"out", "model_out", "report", "xray", "threads", "command", "func"}


def _config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in OUTPUT_KEYS}
    return {"command": args.command, "version": __version__, **cfg}


def _comment(args) -> str:
    return json.dumps(_config(args), sort_keys=True)


def _write_rows(path, header, rows, args) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        fh.write("# " + _comment(args) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_json(path, doc) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def _fmt(v) -> str:
    return repr(float(v))


def _load(args):
    from .data import load_csv

    label = args.label_column
    if label is not None and label.lstrip("-").isdigit():
        label = int(label)
    return load_csv(args.input, label_column=label)


def _detector_kwargs(args) -> dict:
    return dict(
        n_estimators=args.trees,
        depth_limit=args.depth_limit,
        i_min=args.i_min,
        trees_per_size=args.trees_per_size,
        aggregator=args.aggregator,
    )


def _group_kwargs(args) -> dict:
    kw = _detector_kwargs(args)
    kw.update(min_sample_size=args.min_sample_size, max_exponent=args.max_exponent, eps=args.eps, min_pts=args.min_pts)
    return kw


# ---------------------------------------------------------------- commands


def cmd_synth(args) -> int:
    from . import data as d

    labels = None
    if args.kind == "ifs":
        if args.spec:
            spec = d.IfsSpec.from_dict(json.loads(Path(args.spec).read_text(encoding="utf-8")))
        else:
            if args.ifs not in d.NAMED_IFS:
                raise ValueError(f"unknown IFS {args.ifs!r}; choose from {sorted(d.NAMED_IFS)}")
            spec = d.NAMED_IFS[args.ifs]()
        dm = d.gen_ifs(spec, args.n, args.seed)
    elif args.kind == "blobs":
        if not args.spec:
            raise ValueError("--kind blobs needs --spec with centers, stds and counts")
        doc = json.loads(Path(args.spec).read_text(encoding="utf-8"))
        dm = d.gen_gaussian_blobs(doc["centers"], doc["stds"], doc["counts"], args.seed)
    elif args.kind == "two-group":
        dm = d.two_group_fixture(args.seed)
        labels = d.two_group_membership()
    elif args.kind == "balanced":
        dm = d.balanced_blobs(args.seed)
    else:
        dm = d.http_like(args.seed)
        labels = d.http_membership()

    header = [f"x{j}" for j in range(dm.m)]
    rows = [[_fmt(v) for v in row] for row in dm.values]
    if labels is not None:
        header.append("label")
        for row, lab in zip(rows, labels):
            row.append(str(int(lab > 0)))
    _write_rows(args.out, header, rows, args)
    return 0


def cmd_fit(args) -> int:
    from .detector import Gen2Out0, save_model

    dm = _load(args)
    det = Gen2Out0(random_state=args.seed, n_jobs=args.threads, depth_model=args.depth_model, **_detector_kwargs(args))
    det.fit(dm.values)
    save_model(det, args.model_out, config=_config(args))
    return 0


def cmd_score(args) -> int:
    from .detector import load_model

    dm = _load(args)
    det = load_model(args.model)
    det.n_jobs = args.threads
    scores = det.score_samples(dm.values)
    _write_rows(args.out, ["index", "score"], [[i, _fmt(s)] for i, s in enumerate(scores)], args)
    return 0


def cmd_detect(args) -> int:
    from .generalized import Gen2Out

    dm = _load(args)
    model = Gen2Out(random_state=args.seed, n_jobs=args.threads, **_group_kwargs(args)).fit(dm.values)
    doc = {"config": _config(args), "eps": model.eps_, "qrs": model.xray_.qrs.tolist()}
    doc.update(model.report_.to_dict())
    _write_json(args.report, doc)
    if args.xray:
        rows = ([i, _fmt(q), _fmt(s)] for i, q, s in model.xray_.to_rows())
        _write_rows(args.xray, ["point_index", "qr", "score"], rows, args)
    print(f"{len(model.report_.groups)} group(s), {len(model.report_.point_anomalies)} point anomaly(ies)")
    return 0


def cmd_axioms(args) -> int:
    from .axioms import AXIOM_IDS, run_axiom_test
    from ._random import spawn

    ids = args.axiom or list(AXIOM_IDS)
    config = dict(_detector_kwargs(args), n_jobs=args.threads)
    seeds = dict(zip(AXIOM_IDS, spawn(args.seed, len(AXIOM_IDS))))
    results = []
    print(f"{'axiom':<6} {'statistic':>12} {'p-value':>12}  result")
    for axiom_id in ids:
        r = run_axiom_test(axiom_id, config, args.trials, seeds[axiom_id])
        ok = r.passed(args.alpha)
        results.append({"axiom": axiom_id, "statistic": r.statistic, "p_value": r.p_value, "df": r.df, "passed": ok})
        print(f"{axiom_id:<6} {r.statistic:>12.4g} {r.p_value:>12.3g}  {'pass' if ok else 'FAIL'}")
    if args.out:
        _write_json(args.out, {"config": _config(args), "results": results})
    return 0 if all(r["passed"] for r in results) else 1


def cmd_eval(args) -> int:
    from .odds import SMALL_ODDS, analogue, load_odds, mean_comparison

    names = args.datasets or (["wine", "wbc", "optdigits"] if args.analogues else list(SMALL_ODDS))
    rows = []
    print(f"{'dataset':<12} {'AP':>7} {'AUC':>7} {'AP(iF)':>7} {'AUC(iF)':>8}")
    for name in names:
        dm = analogue(name, seed=args.seed) if args.analogues else load_odds(name, args.odds_dir)
        r = mean_comparison(dm, seeds=args.repeats, seed=args.seed, n_jobs=args.threads, **_detector_kwargs(args))
        g, b = r["gen2out0"], r["iforest"]
        rows.append([name, dm.n, dm.m, g.n_pos, _fmt(g.ap), _fmt(g.roc_auc), _fmt(b.ap), _fmt(b.roc_auc)])
        print(f"{name:<12} {g.ap:>7.3f} {g.roc_auc:>7.3f} {b.ap:>7.3f} {b.roc_auc:>8.3f}")
    if args.out:
        _write_rows(args.out, ["dataset", "n", "m", "n_pos", "ap", "roc_auc", "ap_iforest", "roc_auc_iforest"], rows, args)
    return 0


def cmd_bench(args) -> int:
    from .bench import scaling_benchmark

    sizes = args.sizes or [2**k for k in range(12, 19)]
    res = scaling_benchmark(sizes=sizes, detector_config=_detector_kwargs(args), repeats=args.repeats, seed=args.seed)
    for n, t in res.rows():
        print(f"{n:>9} {t:10.4f}s")
    print(f"log-log slope {res.fitted_loglog_slope:.3f}; predicted time at 1M rows {res.extrapolate(10**6):.1f}s")
    if args.out:
        _write_rows(args.out, ["n", "seconds"], [[n, _fmt(t)] for n, t in res.rows()], args)
    return 0


def cmd_tscloud(args) -> int:
    from .data import load_csv
    from .tscloud import MultiSeries, score_windows, windows_to_clouds

    table = load_csv(args.input).values
    series = MultiSeries.from_columns(table, args.sample_interval)
    clouds = windows_to_clouds(series, args.window, args.stride)
    config = _group_kwargs(args)
    config["min_sample_size"] = args.min_sample_size if args.min_sample_size is not None else 16
    scores = score_windows(clouds, config, seed=args.seed, n_jobs=args.threads, pooled=args.pooled)
    rows = [[w.window_index, _fmt(w.start_t), _fmt(w.group_score), " ".join(map(str, w.member_channels))] for w in scores]
    _write_rows(args.out, ["window_index", "start_t", "group_score", "member_channels"], rows, args)
    return 0


# ------------------------------------------------------------------ parser


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=None, help=f"master seed (default: ${SEED_ENV} or 0)")
    common.add_argument("--threads", type=_positive_int, default=1, help="worker threads; results do not depend on it")

    det = argparse.ArgumentParser(add_help=False)
    det.add_argument("--trees", type=_positive_int, default=100)
    det.add_argument("--depth-limit", type=int, default=8)
    det.add_argument("--i-min", type=int, default=8)
    det.add_argument("--trees-per-size", type=_positive_int, default=5)
    det.add_argument("--aggregator", choices=("mean", "mode"), default="mean")

    grp = argparse.ArgumentParser(add_help=False)
    grp.add_argument("--min-sample-size", type=_positive_int, default=256)
    grp.add_argument("--max-exponent", type=int, default=10)
    grp.add_argument("--eps", type=float, default=None, help="DBSCAN radius (default: from the data)")
    grp.add_argument("--min-pts", type=_positive_int, default=4)

    inp = argparse.ArgumentParser(add_help=False)
    inp.add_argument("--input", required=True)
    inp.add_argument("--label-column", default=None, help="name or 0-based index of a 0/1 label column to drop")

    p = argparse.ArgumentParser(prog="gen2out", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", parents=[common], help="generate a synthetic dataset")
    s.add_argument("--kind", choices=("ifs", "blobs", "two-group", "balanced", "http"), required=True)
    s.add_argument("--ifs", default="sierpinski", help="named IFS for --kind ifs")
    s.add_argument("--spec", default=None, help="JSON spec file (IFS maps, or blob centers/stds/counts)")
    s.add_argument("--n", type=_positive_int, default=10000)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("fit", parents=[common, det, inp], help="fit a point detector and save it")
    s.add_argument("--depth-model", choices=("fit", "iforest"), default="fit")
    s.add_argument("--model", dest="model_out", required=True, help="output model file (JSON)")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("score", parents=[common, inp], help="score a CSV with a saved detector")
    s.add_argument("--model", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_score)

    s = sub.add_parser("detect", parents=[common, det, grp, inp], help="find and rank point and group anomalies")
    s.add_argument("--report", required=True, help="output report (JSON)")
    s.add_argument("--xray", default=None, help="output X-ray plot rows (CSV)")
    s.set_defaults(func=cmd_detect)

    s = sub.add_parser("axioms", parents=[common, det], help="run the axiom battery")
    s.add_argument("--trials", type=int, default=30)
    s.add_argument("--axiom", action="append", choices=("A1", "A2", "A3", "A4", "A5"))
    s.add_argument("--alpha", type=float, default=0.01)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_axioms)

    s = sub.add_parser("eval", parents=[common, det], help="AP / ROC-AUC against the isolation-forest baseline")
    s.add_argument("--odds-dir", default=None, help="directory with <name>.mat or <name>.csv files")
    s.add_argument("--datasets", nargs="+", default=None)
    s.add_argument("--analogues", action="store_true", help="use the scikit-learn rebuilt analogues")
    s.add_argument("--repeats", type=_positive_int, default=5, help="seeds averaged per dataset")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("bench", parents=[common, det], help="fit + score wall time against n")
    s.add_argument("--sizes", type=_positive_int, nargs="+", default=None)
    s.add_argument("--repeats", type=_positive_int, default=3)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("tscloud", parents=[common, det], help="score sliding windows of a multichannel series")
    s.add_argument("--input", required=True, help="CSV, one column per channel")
    s.add_argument("--window", type=_positive_int, required=True)
    s.add_argument("--stride", type=_positive_int, required=True)
    s.add_argument("--sample-interval", type=float, default=1.0)
    s.add_argument("--pooled", action="store_true", help="detect on all windows' channels together")
    s.add_argument("--min-sample-size", type=_positive_int, default=None)
    s.add_argument("--max-exponent", type=int, default=10)
    s.add_argument("--eps", type=float, default=None)
    s.add_argument("--min-pts", type=_positive_int, default=4)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_tscloud)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    if args.seed is None:
        args.seed = default_seed()
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError, TypeError) as exc:
        print(f"gen2out {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
