"""Repeated random-split classification experiments and their CSV reports."""

from __future__ import annotations

import csv
import dataclasses
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classifiers import predict_ledl, src_classify
from .data import (ConfigError, HyperParams, as_labels, build_discriminative_codes,
                   build_label_matrix, l2_normalize_columns, split_dataset)
from .trainer import fit

log = logging.getLogger(__name__)

METHODS = ("ledl", "src")


class ExperimentError(RuntimeError):
    """A stage failed inside a specific repeat."""

    def __init__(self, repeat, cause):
        super().__init__(f"repeat {repeat}: {type(cause).__name__}: {cause}")
        self.repeat = repeat


@dataclass
class ExperimentConfig:
    """One experiment: dataset, protocol and hyperparameters.

    The dictionary size is ``n_atoms`` when given, otherwise
    ``dict_mult * N_train``. ``alpha`` is the SRC penalty and falls back to
    ``params.epsilon``.
    """

    features_path: str | None = None
    labels_path: str | None = None
    method: str = "ledl"
    per_class_train: int = 5
    repeats: int = 8
    dict_mult: float = 2.0
    n_atoms: int | None = None
    params: HyperParams = field(default_factory=HyperParams)
    alpha: float | None = None
    seed: int = 0
    out_dir: str | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.repeats < 1:
            raise ConfigError("repeats must be at least 1")
        if self.per_class_train < 1:
            raise ConfigError("per_class_train must be at least 1")
        if self.n_atoms is None and not self.dict_mult > 0:
            raise ConfigError("dict_mult must be positive")

    def dictionary_size(self, n_train: int) -> int:
        if self.n_atoms is not None:
            return self.n_atoms
        return max(1, int(round(self.dict_mult * n_train)))


@dataclass
class RepeatResult:
    repeat: int
    accuracy: float
    confusion: np.ndarray
    fit_report: object = None
    model: object = None
    params: HyperParams | None = None


@dataclass
class ExperimentResult:
    repeats: list
    n_classes: int
    method: str

    @property
    def accuracies(self) -> list:
        return [r.accuracy for r in self.repeats]

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def confusion(self) -> np.ndarray:
        return sum(r.confusion for r in self.repeats)

    @property
    def fit_reports(self) -> list:
        return [r.fit_report for r in self.repeats]


def confusion_matrix(true, pred, n_classes) -> np.ndarray:
    """Counts with rows indexed by true class and columns by predicted class."""
    M = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(M, (np.asarray(true), np.asarray(pred)), 1)
    return M


def run_repeat(X, labels, n_classes, config: ExperimentConfig, repeat: int) -> RepeatResult:
    seed = config.seed + repeat
    (X_tr, y_tr), (X_te, y_te) = split_dataset(X, labels, config.per_class_train, seed)
    X_tr = l2_normalize_columns(X_tr)
    X_te = l2_normalize_columns(X_te)
    p = config.params
    if config.method == "src":
        alpha = p.epsilon if config.alpha is None else config.alpha
        pred = src_classify(X_tr, y_tr, X_te, alpha, rho=p.rho, n_classes=n_classes)
        report = model = None
    else:
        K = config.dictionary_size(X_tr.shape[1])
        p = dataclasses.replace(p, n_atoms=K, seed=seed)
        H = build_label_matrix(y_tr, n_classes)
        Q = build_discriminative_codes(y_tr, K, n_classes).Q
        model, _, report = fit(X_tr, H, Q, p)
        pred = predict_ledl(model, X_te, p)
    if not np.all(pred.converged):
        log.warning("repeat %d: encoder did not converge for %d test samples",
                    repeat, int(np.size(pred.converged) - np.count_nonzero(pred.converged)))
    cm = confusion_matrix(y_te, pred.label, n_classes)
    acc = float(np.trace(cm) / cm.sum()) if cm.sum() else float("nan")
    log.info("repeat %d: accuracy %.4f", repeat, acc)
    return RepeatResult(repeat, acc, cm, report, model, p)


def run_experiment(config: ExperimentConfig, X=None, labels=None) -> ExperimentResult:
    """Run ``config.repeats`` random splits; repeat r uses seed ``config.seed + r``.

    Data comes from ``X``/``labels`` if given, else from the configured files.
    """
    if X is None:
        from .io import load_dataset
        X, labels = load_dataset(config.features_path, config.labels_path)
    X = np.asarray(X, dtype=float)
    labels, n_classes = as_labels(labels)
    repeats = []
    for r in range(1, config.repeats + 1):
        try:
            repeats.append(run_repeat(X, labels, n_classes, config, r))
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            raise ExperimentError(r, exc) from exc
    return ExperimentResult(repeats, n_classes, config.method)


def export_metrics(result: ExperimentResult, out_dir, plots=False) -> list:
    """Write ``accuracy.csv``, ``confusion.csv`` and ``convergence_r<k>.csv``.

    With ``plots`` the matching PNG figures are rendered next to the CSVs.
    Returns the written paths.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    path = out / "accuracy.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["repeat", "accuracy"])
        for r in result.repeats:
            w.writerow([r.repeat, repr(r.accuracy)])
        w.writerow(["mean", repr(result.mean_accuracy)])
    written.append(path)

    path = out / "confusion.csv"
    cm = result.confusion
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["true"] + [f"pred_{c}" for c in range(result.n_classes)])
        for c, row in enumerate(cm):
            w.writerow([c] + [int(v) for v in row])
    written.append(path)

    for r in result.repeats:
        if r.fit_report is None:
            continue
        path = out / f"convergence_r{r.repeat}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iteration", "objective", "primal_residual"])
            for i, (f, res) in enumerate(zip(r.fit_report.objective_trace,
                                             r.fit_report.primal_residual_trace), start=1):
                w.writerow([i, repr(f), repr(res)])
        written.append(path)

    if plots:
        from . import plotting
        written += plotting.render_report(result, out)
    return written


def read_accuracy_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    per_repeat = [float(acc) for rep, acc in rows[1:] if rep != "mean"]
    mean = [float(acc) for rep, acc in rows[1:] if rep == "mean"]
    return per_repeat, mean[0] if mean else None


def read_convergence_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))[1:]
    return [float(r[1]) for r in rows], [float(r[2]) for r in rows]
