"""Command line: ``dpda [global flags] {synth,train,audit,eval,sweep} ...``.

Exit codes: 0 success, 2 usage error, 3 invalid input, 4 numerical failure.
Every artifact is a pure function of the arguments and ``--seed``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .data_io import load_benchmark, load_csv, load_idx, make_benchmark, save_benchmark
from .datamodel import AuditVerdict, DifferentialScore, Provenance
from .errors import NumericalError, ValidationError
from .models import FAMILIES, ModelAccess, load_model, save_model, train_model
from .pipeline import (
    AXES,
    ExperimentConfig,
    build_benchmark,
    build_method,
    data_similarity,
    differential_significance,
    evaluate,
    parameter_sweep,
    run_audit,
)
from .pipeline.experiment import SOURCES

log = logging.getLogger("dpda")

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3, 4


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"


def write_rows(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _emit(args, obj, rows=None, header=None) -> None:
    """Print a command summary to stdout as JSON or CSV."""
    if args.format == "csv" and rows is not None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        sys.stdout.write(buf.getvalue())
    else:
        sys.stdout.write(dumps(obj))


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _int_list(text: str) -> list:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _hyper(args) -> dict:
    if args.family == "lssvm":
        return {"C": args.C}
    if args.family == "forest":
        return {"n_trees": args.n_trees, "max_depth": args.max_depth}
    return {"hidden": args.hidden, "epochs": args.epochs, "lr": args.lr, "batch": args.batch,
            "activation": args.activation}


def _mul_params(args) -> dict:
    return {"lr": args.mul_lr, "max_outer_iters": args.mul_iters,
            "inner_grad_steps": args.mul_inner, "init_scale": args.mul_init_scale, "seed": args.seed}


def _experiment(args, **over) -> ExperimentConfig:
    fields = dict(
        source=args.source, n=args.n, dim=args.dim, n_classes=args.n_classes,
        classes=tuple(args.classes) if args.classes else None, sigma=args.sigma,
        separation=args.separation, ratio=args.ratio, group_size=args.group_size, seed=args.seed,
    )
    fields.update(over)
    return ExperimentConfig(**fields)


# -- commands ---------------------------------------------------------------

def cmd_synth(args) -> int:
    if args.source in SOURCES:
        bench = build_benchmark(_experiment(args))
    else:
        if args.source == "csv":
            if not args.path:
                raise ValidationError("--path is required for --source csv")
            data = load_csv(args.path, minmax=args.minmax)
        else:
            if not (args.images and args.labels):
                raise ValidationError("--images and --labels are required for --source idx")
            data = load_idx(args.images, args.labels, args.limit)
        classes = args.classes or None
        bench = make_benchmark(data, classes=classes, ratio=args.ratio, group_size=args.group_size,
                               seed=args.seed, multiclass=bool(classes) and len(classes) > 2,
                               source=args.source)
    out = save_benchmark(bench, _out(args))
    m = bench.manifest
    summary = {"out": str(out), "source": m.source, "dim": m.dim, "classes": m.classes,
               "counts": {str(k): v for k, v in m.counts.items()}, "n_train": m.n_train,
               "n_groups": m.n_groups, "group_size": m.group_size, "seed": m.seed}
    _emit(args, summary)
    return EXIT_OK


def cmd_train(args) -> int:
    bench = load_benchmark(args.bench)
    ts = bench.train_set
    model = train_model(args.family, ts.X, ts.y, seed=args.seed,
                        n_classes=len(bench.manifest.classes), **_hyper(args))
    path = save_model(model, _out(args) / "model.json")
    acc = float(np.mean(model.predict_proba(ts.X).argmax(axis=1) == ts.y))
    summary = {"model": str(path), "family": args.family, "train_accuracy": acc,
               "train_meta": model.train_meta}
    _emit(args, summary)
    return EXIT_OK


def _method_from_args(args):
    cfg = ExperimentConfig(method=args.method, epsilon=args.epsilon, noise_sigma=args.noise_sigma,
                           mul=_mul_params(args))
    return build_method(cfg)


def cmd_audit(args) -> int:
    bench = load_benchmark(args.bench)
    model = load_model(args.model)
    if model.n_features != bench.manifest.dim:
        raise ValidationError(f"model expects d={model.n_features} but the benchmark has d={bench.manifest.dim}")
    access = ModelAccess(args.access, model)  # black-box wraps into a predict-only handle
    method = _method_from_args(args)
    echo = {"bench": str(args.bench), "model": str(args.model), "method": args.method,
            "access": args.access, "metric": args.metric, "epsilon": args.epsilon,
            "noise_sigma": args.noise_sigma, "mul": _mul_params(args), "surrogate_C": args.surrogate_C,
            "seed": args.seed}
    report = run_audit(list(bench.groups), access, method, args.metric, seed=args.seed, jobs=args.jobs,
                       surrogate_C=args.surrogate_C, echo=echo)
    out = _out(args)
    report.extras["curve_ref"] = "curve.csv"
    W = report.extras.get("_W")
    if W is not None:
        report.extras["W_ref"] = "W.json"
        (out / "W.json").write_text(dumps({
            "W": np.asarray(W).tolist(),
            "objective_trace": report.extras.get("objective_trace"),
            "config": method.echo(),
        }))
    (out / "report.json").write_text(dumps(report.to_dict()))
    truth = {g.group_id: (g.truth.value if g.truth else "") for g in bench.groups}
    score_rows = [(v.group_id, truth[v.group_id], repr(v.score.value), v.decided.value) for v in report.verdicts]
    write_rows(out / "scores.csv", ["group_id", "truth", "score", "decided"], score_rows)
    write_rows(out / "curve.csv", ["split_index", "tau"], [(i, repr(t)) for i, t in report.curve])
    summary = {"report": str(out / "report.json"), "threshold": report.threshold,
               "metrics": report.metrics, "significance": report.significance}
    _emit(args, summary, score_rows, ["group_id", "truth", "score", "decided"])
    return EXIT_OK


def cmd_eval(args) -> int:
    doc = json.loads(Path(args.report).read_text())
    bench = load_benchmark(args.bench)
    truth_of = {g.group_id: g.truth for g in bench.groups}
    thr = doc["threshold"]
    verdicts, scores, truth = [], [], []
    for v in doc["verdicts"]:
        if v["group_id"] not in truth_of:
            raise ValidationError(f"group {v['group_id']!r} is not in the benchmark")
        s = DifferentialScore(v["group_id"], v["score"])
        verdicts.append(AuditVerdict(v["group_id"], Provenance(v["decided"]), s, thr))
        scores.append(s)
        truth.append(truth_of[v["group_id"]])
    metrics = evaluate(verdicts, scores, truth).to_dict()
    tr = [s.value for s, t in zip(scores, truth) if t is Provenance.TRAINING]
    nt = [s.value for s, t in zip(scores, truth) if t is Provenance.NON_TRAINING]
    try:
        sig = differential_significance(tr, nt)
    except ValidationError as exc:
        log.warning("no significance test: %s", exc)
        sig = None
    pts_t = np.vstack([g.features() for g in bench.groups if g.truth is Provenance.TRAINING])
    pts_o = np.vstack([g.features() for g in bench.groups if g.truth is Provenance.NON_TRAINING])
    result = {"report": str(args.report), "metrics": metrics, "significance": sig,
              "data_similarity": data_similarity(pts_t, pts_o)}
    (_out(args) / "eval.json").write_text(dumps(result))
    header = ["precision", "recall", "f_measure", "auc"]
    _emit(args, result, [[metrics[k] for k in header]], header)
    return EXIT_OK


def cmd_sweep(args) -> int:
    hyper = _hyper(args)
    if args.axis == "epochs":
        hyper.pop("epochs", None)
    base = _experiment(args, family=args.family, hyper=hyper, method=args.method, epsilon=args.epsilon,
                       noise_sigma=args.noise_sigma, mul=_mul_params(args), access=args.access,
                       metric=args.metric)
    rows = parameter_sweep(args.axis, args.values, base, jobs=args.jobs)
    header = list(rows[0].keys())
    table = [[r[k] if not isinstance(r[k], float) else repr(r[k]) for k in header] for r in rows]
    write_rows(_out(args) / "sweep.csv", header, table)
    _emit(args, rows, table, header)
    return EXIT_OK


# -- parser -----------------------------------------------------------------

def _data_flags(p):
    p.add_argument("--source", default="synth2d", choices=list(SOURCES) + ["csv", "idx"])
    p.add_argument("--n", type=int, default=100, help="points before splitting")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--n-classes", type=int, default=2)
    p.add_argument("--classes", type=_int_list, default=None, help="e.g. 3,8")
    p.add_argument("--sigma", type=float, default=0.5, help="within-class spread")
    p.add_argument("--separation", type=float, default=4.0, help="blobs: typical distance of class means")
    p.add_argument("--ratio", type=float, default=0.5, help="training share of the points")
    p.add_argument("--group-size", type=int, default=10)


def _model_flags(p, family_required=False):
    p.add_argument("--family", choices=FAMILIES, required=family_required, default=None if family_required else "lssvm")
    p.add_argument("--C", type=float, default=1.0, help="lssvm regularization")
    p.add_argument("--n-trees", type=int, default=50)
    p.add_argument("--max-depth", type=int, default=10)
    p.add_argument("--hidden", type=int, default=64)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--activation", choices=("relu", "identity"), default="relu")


def _audit_flags(p):
    p.add_argument("--method", choices=("add", "mul", "rn", "cc"), default="add")
    p.add_argument("--access", choices=("wb", "bb"), default="wb")
    p.add_argument("--metric", choices=("l2", "cosine"), default="l2")
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--noise-sigma", type=float, default=1.0, help="rn: noise scale, multiplied by epsilon")
    p.add_argument("--mul-lr", type=float, default=1e-2)
    p.add_argument("--mul-iters", type=int, default=20)
    p.add_argument("--mul-inner", type=int, default=10)
    p.add_argument("--mul-init-scale", type=float, default=0.01)
    p.add_argument("--surrogate-C", type=float, default=1.0)


def _global_flags(p, with_defaults: bool):
    def d(value):
        return value if with_defaults else argparse.SUPPRESS

    p.add_argument("--seed", type=int, default=d(0))
    p.add_argument("--out", default=d("."), help="output directory")
    p.add_argument("--jobs", type=int, default=d(1), help="worker threads for group scoring")
    p.add_argument("--format", choices=("json", "csv"), default=d("json"), help="stdout summary format")
    p.add_argument("-v", "--verbose", action="store_true", default=d(False))
    return p


def build_parser() -> argparse.ArgumentParser:
    top = _global_flags(argparse.ArgumentParser(add_help=False), with_defaults=True)
    # repeated after the subcommand; suppressed defaults keep values given before it
    common = _global_flags(argparse.ArgumentParser(add_help=False), with_defaults=False)

    parser = argparse.ArgumentParser(prog="dpda", parents=[top],
                                     description="Audit whether data was used to train a model.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="build an audit benchmark directory")
    _data_flags(p)
    p.add_argument("--path", help="csv: input file")
    p.add_argument("--minmax", action="store_true", help="csv: min-max scale features")
    p.add_argument("--images", help="idx: image file")
    p.add_argument("--labels", help="idx: label file")
    p.add_argument("--limit", type=int, default=None, help="idx: read at most this many images")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", parents=[common], help="train a target model on a benchmark")
    p.add_argument("--bench", required=True)
    _model_flags(p, family_required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("audit", parents=[common], help="audit benchmark groups against a model")
    p.add_argument("--bench", required=True)
    p.add_argument("--model", required=True)
    _audit_flags(p)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("eval", parents=[common], help="score a report against ground truth")
    p.add_argument("--report", required=True)
    p.add_argument("--bench", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", parents=[common], help="vary one setting and audit each value")
    p.add_argument("--axis", choices=AXES, required=True)
    p.add_argument("--values", type=_int_list, required=True, help="e.g. 100,200,400")
    _data_flags(p)
    _model_flags(p)
    _audit_flags(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.jobs < 1:
        parser.print_usage(sys.stderr)
        sys.stderr.write("dpda: error: --jobs must be >= 1\n")
        return EXIT_USAGE
    try:
        return args.func(args)
    except NumericalError as exc:
        sys.stderr.write(f"dpda: numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except (ValidationError, OSError) as exc:
        sys.stderr.write(f"dpda: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
