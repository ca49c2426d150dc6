"""``mbmm`` command line.

Exit codes: 0 success, 2 usage or unreadable input, 3 semantic errors such as
dimension mismatches or degenerate data. Machine-readable results go to
stdout as one JSON line; diagnostics go to stderr.
"""

import argparse
import csv
import json
import sys

import numpy as np

from . import datasets, modelfile, svg
from .metrics import adjusted_mutual_information, adjusted_rand_index
from .mixture import FitConfig, FitError, fit, kl_distances, predict, predict_proba

try:
    import tomllib
except ImportError:  # python < 3.11
    import tomli as tomllib


class CommandError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _emit(payload):
    print(json.dumps(payload, separators=(",", ":")))


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {value}")
    return value


def _column_list(text):
    return [c.strip() for c in text.split(",") if c.strip()]


def _read_config(path, dataset_name):
    try:
        with open(path, "rb") as f:
            doc = tomllib.load(f)
    except OSError as exc:
        raise CommandError(f"cannot read config {path}: {exc.strerror}", 2) from exc
    except tomllib.TOMLDecodeError as exc:
        raise CommandError(f"bad config {path}: {exc}", 2) from exc
    section = doc.get(dataset_name)
    if isinstance(section, dict):
        return section
    return {k: v for k, v in doc.items() if not isinstance(v, dict)}


def _header(path):
    try:
        with open(path, newline="", encoding="utf-8") as f:
            return [h.strip() for h in next(csv.reader(f), [])]
    except OSError as exc:
        raise CommandError(f"cannot read {path}: {exc.strerror}", 2) from exc


def _load(path, label_column, drop_columns, require_labels=False):
    """Load a CSV, using ``label_column`` only if the header has it."""
    header = _header(path)
    if label_column and label_column not in header:
        if require_labels:
            raise CommandError(f"{path} has no label column {label_column!r}", 3)
        label_column = None
    try:
        return datasets.load_csv(path, label_column or None, drop_columns)
    except datasets.DataError as exc:
        raise CommandError(str(exc), 2) from exc


def _load_model(path):
    try:
        return modelfile.load(path)
    except (modelfile.ModelFileError, ValueError) as exc:
        raise CommandError(str(exc), 2) from exc


def _scaled_for_model(model, scaling, ds):
    if ds.n_features != model.dim:
        raise CommandError(f"dimension mismatch: model has M={model.dim}, "
                           f"data has M={ds.n_features}", 3)
    if scaling is None:
        return datasets.scale_unit(ds).points
    return scaling.apply(ds.points)


def cmd_generate(args):
    overrides = _read_config(args.config, args.dataset) if args.config else {}
    try:
        ds = datasets.generate(args.dataset, args.seed, **overrides)
    except datasets.DataError as exc:
        raise CommandError(str(exc), 2) from exc
    datasets.write_csv(args.out, ds)
    _emit({"dataset": args.dataset, "seed": args.seed, "n": ds.n_samples,
           "m": ds.n_features, "out": args.out})


def cmd_fit(args):
    ds = _load(args.data, args.label_column, args.drop_columns)
    try:
        scaled = datasets.scale_unit(ds)
    except datasets.DataError as exc:
        raise CommandError(str(exc), 3) from exc
    if scaled.n_samples < args.clusters:
        raise CommandError(f"N={scaled.n_samples} is smaller than C={args.clusters}", 3)
    config = FitConfig(args.clusters, args.max_iter, args.tol, args.n_init, args.seed)
    try:
        model, _, report = fit(scaled.points, config)
    except FitError as exc:
        raise CommandError(str(exc), 3) from exc
    modelfile.save(args.out, model, report, scaled.scaling, ds.feature_names)
    _emit({"log_likelihood": report.log_likelihood, "n_iter": report.n_iter,
           "converged": report.converged, "best_init_index": report.best_init_index,
           "out": args.out})


def cmd_predict(args):
    model, scaling, _ = _load_model(args.model)
    ds = _load(args.data, args.label_column, args.drop_columns)
    X = _scaled_for_model(model, scaling, ds)
    with open(args.out, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        if args.proba:
            w.writerow([f"p{c}" for c in range(model.n_components)])
            w.writerows([[repr(float(v)) for v in row] for row in predict_proba(model, X)])
        else:
            w.writerow(["label"])
            w.writerows([[int(v)] for v in predict(model, X)])
    _emit({"n": int(X.shape[0]), "proba": bool(args.proba), "out": args.out})


def _read_label_file(path):
    try:
        return datasets.read_labels(path)
    except datasets.DataError as exc:
        raise CommandError(str(exc), 2) from exc


def cmd_evaluate(args):
    ds = _load(args.data, args.label_column, args.drop_columns, require_labels=True)
    if args.model:
        model, scaling, _ = _load_model(args.model)
        pred = predict(model, _scaled_for_model(model, scaling, ds))
    else:
        pred = _read_label_file(args.labels)
        if pred.size != ds.n_samples:
            raise CommandError(f"{pred.size} predicted labels for {ds.n_samples} rows", 3)
    _emit({"ari": adjusted_rand_index(ds.labels, pred),
           "ami": adjusted_mutual_information(ds.labels, pred)})


def cmd_plot(args):
    model, scaling, _ = _load_model(args.model)
    if model.dim != 2:
        raise CommandError(f"plots need M=2, model has M={model.dim}", 3)
    ds = _load(args.data, args.label_column, args.drop_columns)
    X = _scaled_for_model(model, scaling, ds)
    info = {"mode": args.mode, "out": args.out}
    if args.mode == "scatter":
        labels = predict(model, X)
        doc = svg.scatter(X, labels)
        info["n_colors"] = len(set(labels.tolist()))
    elif args.mode == "pdf":
        doc = svg.heatmap(model, args.grid)
        info["grid"] = args.grid
    else:
        if args.ref_point is None:
            raise CommandError("--ref-point is required for --mode distance", 2)
        if not 0 <= args.ref_point < X.shape[0]:
            raise CommandError(f"--ref-point {args.ref_point} outside 0..{X.shape[0] - 1}", 2)
        d = kl_distances(predict_proba(model, X), args.ref_point)
        doc = svg.distance_plot(X, d, args.ref_point)
        info["ref_point"] = args.ref_point
        if ds.labels is not None:
            info["median_distance_by_label"] = {
                str(k): float(np.median(d[ds.labels == k])) for k in np.unique(ds.labels)}
    with open(args.out, "w", encoding="utf-8") as f:
        f.write(doc)
    _emit(info)


def build_parser():
    parser = argparse.ArgumentParser(prog="mbmm",
                                     description="Multivariate beta mixture clustering")
    sub = parser.add_subparsers(dest="command", required=True)

    def data_flags(p):
        p.add_argument("--label-column", default="label",
                       help="label column name, ignored if absent (default: label)")
        p.add_argument("--drop-columns", type=_column_list, default=[],
                       help="comma-separated columns to ignore, e.g. id")

    p = sub.add_parser("generate", help="write a synthetic dataset as CSV")
    p.add_argument("dataset", help=f"one of: {', '.join(datasets.GENERATORS)}")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="TOML file overriding generator constants")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("fit", help="fit a mixture to a CSV and save it as JSON")
    p.add_argument("data")
    p.add_argument("--clusters", "-c", type=_positive_int, required=True)
    p.add_argument("--max-iter", type=_positive_int, default=200)
    p.add_argument("--tol", type=_positive_float, default=1e-6)
    p.add_argument("--n-init", type=_positive_int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out", required=True)
    data_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="cluster labels or probabilities for a CSV")
    p.add_argument("model")
    p.add_argument("data")
    p.add_argument("--proba", action="store_true", help="write the full probability matrix")
    p.add_argument("-o", "--out", required=True)
    data_flags(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="ARI and AMI against the CSV's label column")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--model")
    src.add_argument("--labels", help="CSV of predicted labels (as written by predict)")
    p.add_argument("data")
    data_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("plot", help="SVG scatter, density or distance plot (M = 2)")
    p.add_argument("model")
    p.add_argument("data")
    p.add_argument("--mode", choices=["scatter", "pdf", "distance"], default="scatter")
    p.add_argument("--ref-point", type=int)
    p.add_argument("--grid", type=_positive_int, default=200)
    p.add_argument("-o", "--out", required=True)
    data_flags(p)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except CommandError as exc:
        print(f"mbmm {args.command}: {exc}", file=sys.stderr)
        return exc.code
    return 0


if __name__ == "__main__":
    sys.exit(main())
