"""Blockwise coordinate descent over the columns of B, W and A with codes fixed."""

from __future__ import annotations

import logging

import numpy as np

log = logging.getLogger(__name__)


def offdiag_gram(C) -> np.ndarray:
    """``C C^T`` with its diagonal zeroed."""
    C = np.asarray(C, dtype=float)
    Dg = C @ C.T
    np.fill_diagonal(Dg, 0.0)
    return Dg


def _update_column(M, T, C, Dg, k, name):
    # Target T (rows x N) is fit by M C; column k of M is replaced in place.
    # M @ Dg[:, k] is sum_{p != k} M[:, p] (C_p . C_k), using columns < k
    # already refreshed during this sweep.
    v = T @ C[k] - M @ Dg[:, k]
    norm = np.linalg.norm(v)
    if not norm > 0 or not np.isfinite(norm):
        log.warning("degenerate atom %d in %s: zero update direction, column kept", k, name)
        return M
    M[:, k] = v / norm
    return M


def update_basis_column(B, X, C, Dg, k):
    """Replace column k of ``B`` (in place) by its unit-norm BCD update against ``X``."""
    return _update_column(B, X, C, Dg, k, "B")


def update_classifier_column(W, H, C, Dg, k):
    """Replace column k of ``W`` (in place) by its unit-norm BCD update against ``H``."""
    return _update_column(W, H, C, Dg, k, "W")


def update_transform_column(A, Q, C, Dg, k):
    """Replace column k of ``A`` (in place) by its unit-norm BCD update against ``Q``."""
    return _update_column(A, Q, C, Dg, k, "A")


def sweep(bundle, X, H, Q, C, Dg=None):
    """One Gauss-Seidel pass k = 0..K-1 over B, W and A, modifying ``bundle`` in place."""
    if Dg is None:
        Dg = offdiag_gram(C)
    for k in range(C.shape[0]):
        update_basis_column(bundle.B, X, C, Dg, k)
        update_classifier_column(bundle.W, H, C, Dg, k)
        update_transform_column(bundle.A, Q, C, Dg, k)
    return bundle
