"""Matrices and dataset helpers: supervision targets, normalization, splits."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DataError(ValueError):
    """Raised for malformed labels, features or split requests."""


class ConfigError(ValueError):
    """Raised for inconsistent hyperparameters."""


@dataclass(frozen=True)
class HyperParams:
    """Training hyperparameters.

    ``lam`` weights the classification error, ``omega`` the discriminative
    codes error and ``epsilon`` the l1 penalty. ``rho`` is the ADMM penalty;
    the dual step starts at ``theta0`` and shrinks geometrically by
    ``theta_decay`` each iteration, never below ``theta_min``.
    """

    lam: float = 2.0**-3
    omega: float = 2.0**-11
    epsilon: float = 2.0**-8
    rho: float = 1.0
    theta0: float = 0.5
    theta_decay: float = 0.99
    theta_min: float = 1e-4
    n_atoms: int | None = None
    maxiter: int = 500
    seed: int = 0
    early_stop: bool = True

    def __post_init__(self):
        if self.lam < 0 or self.omega < 0 or self.epsilon < 0:
            raise ConfigError("lam, omega and epsilon must be non-negative")
        if not self.rho > 0:
            raise ConfigError(f"rho must be positive, got {self.rho}")
        if not self.theta0 > 0:
            raise ConfigError(f"theta0 must be positive, got {self.theta0}")
        if not 0 < self.theta_decay <= 1:
            raise ConfigError(f"theta_decay must lie in (0, 1], got {self.theta_decay}")
        if self.theta_min < 0:
            raise ConfigError("theta_min must be non-negative")
        if self.maxiter < 0:
            raise ConfigError("maxiter must be non-negative")
        if self.n_atoms is not None and self.n_atoms < 1:
            raise ConfigError("n_atoms must be positive")


@dataclass
class ModelBundle:
    """Learned dictionary ``B`` (D x K), classifier ``W`` (C x K), transform ``A`` (K x K)."""

    B: np.ndarray
    W: np.ndarray
    A: np.ndarray

    @property
    def n_atoms(self) -> int:
        return self.B.shape[1]

    @property
    def n_classes(self) -> int:
        return self.W.shape[0]

    def copy(self) -> "ModelBundle":
        return ModelBundle(self.B.copy(), self.W.copy(), self.A.copy())


@dataclass
class TrainState:
    """ADMM state: codes, auxiliary copy, multiplier, iteration count and dual step."""

    C: np.ndarray
    Z: np.ndarray
    L: np.ndarray
    iter: int = 0
    theta: float = 0.5


@dataclass
class DiscriminativeCodes:
    Q: np.ndarray
    atom_class: np.ndarray = field(repr=False)


def as_labels(labels, n_classes: int | None = None) -> tuple[np.ndarray, int]:
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise DataError("labels must be one-dimensional")
    if labels.size and not np.issubdtype(labels.dtype, np.integer):
        if not np.all(labels == np.round(labels)):
            raise DataError("labels must be integers")
    labels = labels.astype(np.int64)
    if n_classes is None:
        n_classes = int(labels.max()) + 1 if labels.size else 0
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        bad = labels[(labels < 0) | (labels >= n_classes)][0]
        raise DataError(f"label {bad} outside [0, {n_classes})")
    return labels, n_classes


def build_label_matrix(labels, n_classes: int | None = None) -> np.ndarray:
    """One-hot label matrix ``H`` of shape (n_classes, n_samples)."""
    labels, n_classes = as_labels(labels, n_classes)
    H = np.zeros((n_classes, labels.size))
    H[labels, np.arange(labels.size)] = 1.0
    return H


def assign_atoms(n_atoms: int, n_classes: int) -> np.ndarray:
    """Class owning each atom: contiguous balanced blocks, remainder to low class ids."""
    if n_atoms < n_classes:
        raise ConfigError(f"need at least one atom per class: K={n_atoms} < C={n_classes}")
    base, extra = divmod(n_atoms, n_classes)
    counts = np.full(n_classes, base)
    counts[:extra] += 1
    return np.repeat(np.arange(n_classes), counts)


def build_discriminative_codes(labels, n_atoms: int, n_classes: int | None = None) -> DiscriminativeCodes:
    """Binary target ``Q`` (K x N) with ``Q[k, i] = 1`` iff atom k belongs to sample i's class."""
    labels, n_classes = as_labels(labels, n_classes)
    atom_class = assign_atoms(n_atoms, n_classes)
    Q = (atom_class[:, None] == labels[None, :]).astype(float)
    return DiscriminativeCodes(Q=Q, atom_class=atom_class)


def l2_normalize_columns(M) -> np.ndarray:
    """Scale every column to unit l2 norm; all-zero columns are returned unchanged."""
    M = np.asarray(M, dtype=float)
    out = M.copy()
    # prescale by the max magnitude so tiny or huge columns neither underflow nor overflow
    peak = np.max(np.abs(M), axis=0) if M.size else np.zeros(M.shape[1])
    nz = peak > 0
    scaled = M[:, nz] / peak[nz]
    out[:, nz] = scaled / np.linalg.norm(scaled, axis=0)
    return out


def split_dataset(X, labels, per_class: int, seed: int):
    """Random per-class train/test split.

    Draws ``per_class`` training columns from every class without replacement;
    everything else becomes the test split. Column order within each split
    follows the original order.

    Returns:
        ``(X_train, y_train), (X_test, y_test)``
    """
    X = np.asarray(X, dtype=float)
    labels, n_classes = as_labels(labels)
    if X.shape[1] != labels.size:
        raise DataError(f"{X.shape[1]} feature columns but {labels.size} labels")
    rng = np.random.default_rng(seed)
    train_mask = np.zeros(labels.size, dtype=bool)
    for c in range(n_classes):
        idx = np.flatnonzero(labels == c)
        if idx.size < per_class:
            raise DataError(f"class {c} has {idx.size} samples, need {per_class} for training")
        train_mask[rng.choice(idx, size=per_class, replace=False)] = True
    return ((X[:, train_mask], labels[train_mask]), (X[:, ~train_mask], labels[~train_mask]))


def make_blobs(n_classes, per_class, dim, separation=5.0, sigma=1.0, seed=0):
    """Isotropic Gaussian classes whose centres are ``separation * sigma`` apart pairwise.

    Centres are scaled orthonormal directions (requires ``dim >= n_classes``);
    returns ``(X, labels)`` with samples as columns.
    """
    if dim < n_classes:
        raise DataError("dim must be at least n_classes")
    rng = np.random.default_rng(seed)
    basis, _ = np.linalg.qr(rng.normal(size=(dim, n_classes)))
    centers = basis * (separation * sigma / np.sqrt(2.0))
    labels = np.repeat(np.arange(n_classes), per_class)
    X = centers[:, labels] + sigma * rng.normal(size=(dim, labels.size))
    return X, labels
