"""ADMM stage for the sparse codes and the test-time l1 encoder.

The splitting keeps ``C`` (smooth part) and ``Z`` (l1 part) tied by ``C = Z``
with multiplier ``L``. The augmented Lagrangian used here carries the
multiplier as ``2 tr(L^T (C - Z)) + rho ||C - Z||_F^2``, which is what makes
the closed-form updates below consistent with each other.
"""

from __future__ import annotations

import numpy as np
from scipy import linalg


class FactorizationError(np.linalg.LinAlgError):
    """The code-update system matrix is not symmetric positive definite."""


class SystemFactorization:
    """Cholesky factor of ``B^T B + lam W^T W + omega A^T A + rho I``.

    Built once per outer iteration and reused for every sample column.
    """

    def __init__(self, G: np.ndarray):
        G = np.asarray(G, dtype=float)
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise ValueError(f"system matrix must be square, got shape {G.shape}")
        try:
            self._factor = linalg.cho_factor(G, lower=True, check_finite=True)
        except linalg.LinAlgError as exc:
            raise FactorizationError(f"matrix is not SPD: {exc}") from exc
        except ValueError as exc:
            raise FactorizationError(f"cannot factor system matrix: {exc}") from exc
        self.size = G.shape[0]

    @classmethod
    def from_bundle(cls, B, W, A, lam, omega, rho) -> "SystemFactorization":
        G = B.T @ B + lam * (W.T @ W) + omega * (A.T @ A)
        G[np.diag_indices_from(G)] += rho
        return cls(G)

    def solve(self, R: np.ndarray) -> np.ndarray:
        R = np.asarray(R, dtype=float)
        if R.shape[0] != self.size:
            raise ValueError(f"right-hand side has {R.shape[0]} rows, expected {self.size}")
        return linalg.cho_solve(self._factor, R, check_finite=False)


def solve_spd(G, R) -> np.ndarray:
    """Solve ``G x = R`` for symmetric positive definite ``G``."""
    return SystemFactorization(G).solve(R)


def _check_shapes(X, H, Q, B, W, A, Z, L):
    D, N = X.shape
    K = B.shape[1]
    expected = {
        "B": (B.shape, (D, K)),
        "W": (W.shape, (H.shape[0], K)),
        "A": (A.shape, (K, K)),
        "H": (H.shape, (H.shape[0], N)),
        "Q": (Q.shape, (K, N)),
        "Z": (Z.shape, (K, N)),
        "L": (L.shape, (K, N)),
    }
    for name, (got, want) in expected.items():
        if got != want:
            raise ValueError(f"{name} has shape {got}, expected {want}")


def update_codes(X, H, Q, B, W, A, Z, L, params, factor: SystemFactorization | None = None):
    """Closed-form minimizer of the augmented Lagrangian in ``C``.

    Solves ``(B^T B + lam W^T W + omega A^T A + rho I) C
    = B^T X + lam W^T H + omega A^T Q + rho Z - L``.
    Pass ``factor`` to reuse an existing factorization for the same bundle.
    """
    _check_shapes(X, H, Q, B, W, A, Z, L)
    lam, omega, rho = params.lam, params.omega, params.rho
    if factor is None:
        factor = SystemFactorization.from_bundle(B, W, A, lam, omega, rho)
    rhs = B.T @ X + lam * (W.T @ H) + omega * (A.T @ Q) + rho * Z - L
    return factor.solve(rhs)


def soft_threshold(v, threshold):
    """Elementwise proximal operator of ``threshold * ||.||_1``."""
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - threshold, 0.0)


def update_auxiliary(C, L, epsilon, rho):
    """``Z = soft_threshold(C + L / rho, epsilon / rho)``."""
    return soft_threshold(C + L / rho, epsilon / rho)


def update_multiplier(L, C, Z, theta):
    """Dual ascent step ``L + theta (C - Z)``."""
    return L + theta * (C - Z)


def lasso_objective(B, Y, S, epsilon):
    """``||Y - B S||_F^2 + 2 epsilon ||S||_1`` (summed over columns)."""
    R = Y - B @ S
    return float(np.sum(R * R) + 2.0 * epsilon * np.abs(S).sum())


def lasso_kkt_residual(B, Y, S, epsilon, *, G=None, BtY=None):
    """Per-column KKT violation of ``min ||y - B s||^2 + 2 epsilon ||s||_1``.

    On the support the gradient ``2 B^T (B s - y)`` must equal
    ``-2 epsilon sign(s)``; off the support its magnitude must not
    exceed ``2 epsilon``.
    """
    if G is None:
        G = B.T @ B
    if BtY is None:
        BtY = B.T @ Y
    grad = 2.0 * (G @ S - BtY)
    on = S != 0
    viol = np.where(on, np.abs(grad + 2.0 * epsilon * np.sign(S)),
                    np.maximum(np.abs(grad) - 2.0 * epsilon, 0.0))
    return viol.max(axis=0) if viol.size else np.zeros(S.shape[1:])


def encode_l1(B, y, epsilon, rho=1.0, theta=None, maxiter=20000, tol=1e-10, check_every=10,
              adaptive=True):
    """Sparse codes of ``y`` over dictionary ``B`` by ADMM.

    Minimizes ``||y - B s||^2 + 2 epsilon ||s||_1`` with the same three
    updates used during training (no label or transform terms). The dual step
    is ``theta`` when given, otherwise it tracks the penalty ``rho``. With
    ``adaptive`` (and no fixed ``theta``) the penalty is rebalanced whenever
    the primal and dual residuals drift more than 10x apart, which matters for
    small ``epsilon`` on overcomplete dictionaries. Iteration stops when the
    KKT violation of every column is at most ``tol``.

    Args:
        B: dictionary, shape (D, K)
        y: one sample (D,) or a batch (D, N)
        epsilon: l1 weight
        rho: initial ADMM penalty
        theta: fixed dual step size
        maxiter: iteration cap
        tol: KKT tolerance used for the stopping test

    Returns:
        ``(s, converged)`` where ``s`` is the soft-thresholded iterate with the
        lowest KKT violation seen, shaped like ``y``, and ``converged`` is a
        bool (or a bool array for a batch).
    """
    B = np.asarray(B, dtype=float)
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    Y = y[:, None] if single else y
    if Y.shape[0] != B.shape[0]:
        raise ValueError(f"sample dimension {Y.shape[0]} does not match dictionary rows {B.shape[0]}")
    adaptive = adaptive and theta is None
    K, N = B.shape[1], Y.shape[1]

    G = B.T @ B
    BtY = B.T @ Y
    eye = np.eye(K)
    factor = SystemFactorization(G + rho * eye)
    Z = np.zeros((K, N))
    L = np.zeros((K, N))
    best = Z.copy()
    best_kkt = lasso_kkt_residual(B, Y, Z, epsilon, G=G, BtY=BtY)
    active = best_kkt > tol
    for it in range(1, maxiter + 1):
        if not active.any():
            break
        Z_prev = Z
        C = factor.solve(BtY + rho * Z - L)
        Z = update_auxiliary(C, L, epsilon, rho)
        L = update_multiplier(L, C, Z, rho if theta is None else theta)
        if it % check_every and it != maxiter:
            continue
        kkt = lasso_kkt_residual(B, Y, Z, epsilon, G=G, BtY=BtY)
        improved = active & (kkt < best_kkt)
        best[:, improved] = Z[:, improved]
        best_kkt[improved] = kkt[improved]
        active = best_kkt > tol
        if adaptive:
            primal = np.linalg.norm((C - Z)[:, active])
            dual = rho * np.linalg.norm((Z - Z_prev)[:, active])
            if primal > 10.0 * dual or dual > 10.0 * primal:
                rho = rho * 2.0 if primal > dual else rho / 2.0
                factor = SystemFactorization(G + rho * eye)
    converged = best_kkt <= tol
    if single:
        return best[:, 0], bool(converged[0])
    return best, converged
