"""Command line entry point: ``ledl train``, ``ledl eval`` and ``ledl blobs``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .data import DataError, HyperParams, l2_normalize_columns, make_blobs
from .experiment import (ExperimentConfig, ExperimentError, confusion_matrix, export_metrics,
                         run_experiment)
from .io import load_dataset, load_model, save_model, write_labels, write_matrix

log = logging.getLogger("ledl")


def _params(args) -> HyperParams:
    return HyperParams(lam=args.lam, omega=args.omega, epsilon=args.epsilon, rho=args.rho,
                       theta0=args.theta0, theta_decay=args.theta_decay, theta_min=args.theta_min,
                       maxiter=args.max_iter, seed=args.seed, early_stop=not args.no_early_stop)


def cmd_train(args) -> int:
    config = ExperimentConfig(
        features_path=args.features, labels_path=args.labels, method=args.method,
        per_class_train=args.per_class, repeats=args.repeats, dict_mult=args.dict_mult,
        n_atoms=args.n_atoms, params=_params(args), alpha=args.alpha, seed=args.seed,
        out_dir=args.out)
    result = run_experiment(config)
    out = Path(args.out)
    export_metrics(result, out, plots=not args.no_plots)
    if config.method == "ledl" and not args.no_models:
        for r in result.repeats:
            save_model(out / f"model_r{r.repeat}", r.model, r.params,
                       extra={"repeat": r.repeat, "accuracy": r.accuracy})
    for r in result.repeats:
        print(f"repeat {r.repeat}: accuracy {r.accuracy:.4f}")
    print(f"mean accuracy ({config.method}): {result.mean_accuracy:.4f}")
    return 0


def cmd_eval(args) -> int:
    from .classifiers import predict_ledl
    import dataclasses

    bundle, params, _ = load_model(args.model)
    if args.epsilon is not None:
        params = dataclasses.replace(params, epsilon=args.epsilon)
    X, labels = load_dataset(args.features, args.labels)
    if labels.max() >= bundle.n_classes:
        raise DataError(f"label {labels.max()} outside the model's {bundle.n_classes} classes")
    pred = predict_ledl(bundle, l2_normalize_columns(X), params)
    cm = confusion_matrix(labels, pred.label, bundle.n_classes)
    acc = float(np.trace(cm) / cm.sum())
    if args.out:
        from .experiment import ExperimentResult, RepeatResult
        result = ExperimentResult([RepeatResult(1, acc, cm)], bundle.n_classes, "ledl")
        export_metrics(result, args.out, plots=not args.no_plots)
        write_labels(Path(args.out) / "predictions.txt", pred.label)
    print(f"accuracy: {acc:.4f}")
    return 0


def cmd_blobs(args) -> int:
    X, labels = make_blobs(args.classes, args.per_class, args.dim, args.separation, seed=args.seed)
    write_matrix(args.features, X)
    write_labels(args.labels, labels)
    print(f"wrote {labels.size} samples of dimension {args.dim} to {args.features}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ledl", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="repeated split train/test experiment")
    t.add_argument("--features", required=True)
    t.add_argument("--labels", required=True)
    t.add_argument("--method", choices=["ledl", "src"], default="ledl")
    t.add_argument("--lambda", dest="lam", type=float, default=2.0**-3)
    t.add_argument("--omega", type=float, default=2.0**-11)
    t.add_argument("--epsilon", type=float, default=2.0**-8)
    t.add_argument("--alpha", type=float, default=None, help="SRC penalty (default: epsilon)")
    t.add_argument("--rho", type=float, default=1.0)
    t.add_argument("--theta0", type=float, default=0.5)
    t.add_argument("--theta-decay", type=float, default=0.99)
    t.add_argument("--theta-min", type=float, default=1e-4)
    t.add_argument("--dict-mult", type=float, default=2.0)
    t.add_argument("--n-atoms", type=int, default=None, help="fixed K (overrides --dict-mult)")
    t.add_argument("--per-class", type=int, default=5)
    t.add_argument("--repeats", type=int, default=8)
    t.add_argument("--max-iter", type=int, default=500)
    t.add_argument("--no-early-stop", action="store_true")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out", required=True)
    t.add_argument("--no-plots", action="store_true")
    t.add_argument("--no-models", action="store_true")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="evaluate a saved model on a labelled dataset")
    e.add_argument("--model", required=True)
    e.add_argument("--features", required=True)
    e.add_argument("--labels", required=True)
    e.add_argument("--epsilon", type=float, default=None, help="override the encoding penalty")
    e.add_argument("--out", default=None)
    e.add_argument("--no-plots", action="store_true")
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("blobs", help="write a synthetic Gaussian-blob dataset")
    b.add_argument("--features", required=True)
    b.add_argument("--labels", required=True)
    b.add_argument("--classes", type=int, default=3)
    b.add_argument("--per-class", type=int, default=20)
    b.add_argument("--dim", type=int, default=16)
    b.add_argument("--separation", type=float, default=5.0)
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_blobs)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, DataError, ExperimentError, ValueError, ArithmeticError) as exc:
        print(f"ledl: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
