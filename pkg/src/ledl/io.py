"""Plain-text matrix, dataset and model files.

Matrices are stored one column per line as comma-separated decimals, so a
features file has one sample per line. Labels are one integer per line.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path

import numpy as np

from .data import DataError, HyperParams, ModelBundle

MODEL_FILES = {"B": "B.csv", "W": "W.csv", "A": "A.csv"}
METADATA_FILE = "metadata.txt"


class ParseError(DataError):
    def __init__(self, path, lineno, message):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = path
        self.lineno = lineno


def _lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if line:
                yield lineno, line


def read_matrix(path) -> np.ndarray:
    """Read a column-per-line CSV file into a (dim, n_lines) array."""
    rows = []
    width = None
    for lineno, line in _lines(path):
        try:
            row = [float(tok) for tok in line.split(",")]
        except ValueError:
            raise ParseError(path, lineno, f"non-numeric token in {line[:40]!r}") from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(path, lineno, f"expected {width} values, found {len(row)}")
        if not all(np.isfinite(row)):
            raise ParseError(path, lineno, "non-finite value")
        rows.append(row)
    if not rows:
        raise ParseError(path, 0, "file is empty")
    return np.array(rows, dtype=float).T


def write_matrix(path, M) -> None:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    with open(path, "w", encoding="utf-8") as fh:
        for col in M.T:
            fh.write(",".join(repr(float(v)) for v in col))
            fh.write("\n")


def read_labels(path) -> np.ndarray:
    labels = []
    for lineno, line in _lines(path):
        try:
            value = int(line)
        except ValueError:
            raise ParseError(path, lineno, f"not an integer label: {line[:40]!r}") from None
        if value < 0:
            raise ParseError(path, lineno, f"negative label {value}")
        labels.append(value)
    return np.array(labels, dtype=np.int64)


def write_labels(path, labels) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.writelines(f"{int(v)}\n" for v in labels)


def load_dataset(features_path, labels_path):
    """Load a D x N feature matrix and its length-N label vector."""
    X = read_matrix(features_path)
    labels = read_labels(labels_path)
    if labels.size != X.shape[1]:
        raise ParseError(labels_path, labels.size,
                         f"{labels.size} labels but {X.shape[1]} feature rows in {features_path}")
    return X, labels


def save_model(out_dir, bundle: ModelBundle, params: HyperParams, extra=None) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, fname in MODEL_FILES.items():
        write_matrix(out_dir / fname, getattr(bundle, name))
    meta = {
        "dim": bundle.B.shape[0],
        "n_atoms": bundle.n_atoms,
        "n_classes": bundle.n_classes,
    }
    meta.update({f"param.{k}": v for k, v in dataclasses.asdict(params).items()})
    meta.update(extra or {})
    with open(out_dir / METADATA_FILE, "w", encoding="utf-8") as fh:
        for key, value in meta.items():
            fh.write(f"{key}={value!r}\n" if isinstance(value, float) else f"{key}={value}\n")
    return out_dir


def _parse_value(raw):
    if raw == "None":
        return None
    if raw in ("True", "False"):
        return raw == "True"
    for cast in (int, float):
        try:
            return cast(raw)
        except ValueError:
            pass
    return raw


def load_model(model_dir):
    """Inverse of :func:`save_model`; returns ``(bundle, params, metadata)``."""
    model_dir = Path(model_dir)
    meta = {}
    for lineno, line in _lines(model_dir / METADATA_FILE):
        key, sep, raw = line.partition("=")
        if not sep:
            raise ParseError(model_dir / METADATA_FILE, lineno, "expected key=value")
        meta[key.strip()] = _parse_value(raw.strip())
    bundle = ModelBundle(**{name: read_matrix(model_dir / fname) for name, fname in MODEL_FILES.items()})
    fields = {f.name for f in dataclasses.fields(HyperParams)}
    params = HyperParams(**{k[6:]: v for k, v in meta.items() if k.startswith("param.") and k[6:] in fields})
    expected = {"B": (meta["dim"], meta["n_atoms"]), "W": (meta["n_classes"], meta["n_atoms"]),
                "A": (meta["n_atoms"], meta["n_atoms"])}
    for name, shape in expected.items():
        got = getattr(bundle, name).shape
        if got != tuple(shape):
            raise DataError(f"{name} in {model_dir} has shape {got}, metadata says {tuple(shape)}")
    return bundle, params, meta
