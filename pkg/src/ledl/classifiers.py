"""Prediction with a trained LEDL model and the SRC residual classifier."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import as_labels
from .sparse_coding import encode_l1


@dataclass
class Prediction:
    """Predicted label(s) with their decision scores.

    For a single sample ``label`` is an int and ``scores`` has shape (C,);
    for a batch they are arrays of shape (N,) and (C, N).
    """

    label: object
    scores: np.ndarray
    converged: object = True


def argmax_lowest(scores) -> np.ndarray:
    """Column-wise argmax; ties resolve to the lowest index."""
    return np.argmax(scores, axis=0)


def predict_ledl(bundle, y, params, maxiter=20000, tol=1e-10) -> Prediction:
    """Encode ``y`` over the learned dictionary and take ``argmax(W s)``.

    ``y`` may be one sample of length D or a D x N batch.
    """
    y = np.asarray(y, dtype=float)
    D = bundle.B.shape[0]
    if y.shape[0] != D:
        raise ValueError(f"sample dimension {y.shape[0]} does not match dictionary dimension {D}")
    single = y.ndim == 1
    S, converged = encode_l1(bundle.B, y[:, None] if single else y, params.epsilon,
                             rho=params.rho, maxiter=maxiter, tol=tol)
    scores = bundle.W @ S
    labels = argmax_lowest(scores)
    if single:
        return Prediction(int(labels[0]), scores[:, 0], bool(converged[0]))
    return Prediction(labels, scores, converged)


def class_residuals(X_train, labels, y, s, n_classes=None) -> np.ndarray:
    """Squared residuals ``||y - X_c s_c||^2`` per class.

    Returns an array of shape (C,) for one sample or (C, N) for a batch.
    """
    labels, n_classes = as_labels(labels, n_classes)
    y = np.asarray(y, dtype=float)
    s = np.asarray(s, dtype=float)
    single = y.ndim == 1
    Y = y[:, None] if single else y
    S = s[:, None] if s.ndim == 1 else s
    E = np.empty((n_classes, Y.shape[1]))
    for c in range(n_classes):
        idx = labels == c
        R = Y - X_train[:, idx] @ S[idx]
        E[c] = np.sum(R * R, axis=0)
    return E[:, 0] if single else E


def src_classify(X_train, labels, y, alpha, rho=1.0, maxiter=20000, tol=1e-10,
                 n_classes=None) -> Prediction:
    """Sparse representation based classification.

    Codes ``y`` over the (column-normalized) training matrix with an l1
    penalty ``2 alpha ||s||_1`` and picks the class whose own columns
    reconstruct it best. Scores are the negated class residuals.
    """
    X_train = np.asarray(X_train, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.shape[0] != X_train.shape[0]:
        raise ValueError(f"sample dimension {y.shape[0]} does not match training dimension {X_train.shape[0]}")
    labels, n_classes = as_labels(labels, n_classes)
    if labels.size != X_train.shape[1]:
        raise ValueError(f"{labels.size} labels for {X_train.shape[1]} training columns")
    single = y.ndim == 1
    Y = y[:, None] if single else y
    S, converged = encode_l1(X_train, Y, alpha, rho=rho, maxiter=maxiter, tol=tol)
    scores = -class_residuals(X_train, labels, Y, S, n_classes)
    pred = argmax_lowest(scores)
    if single:
        return Prediction(int(pred[0]), scores[:, 0], bool(converged[0]))
    return Prediction(pred, scores, converged)
