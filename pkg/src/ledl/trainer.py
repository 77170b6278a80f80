"""Alternating ADMM / BCD training loop."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .data import ConfigError, HyperParams, ModelBundle, TrainState, l2_normalize_columns
from .dictionary import offdiag_gram, sweep
from .sparse_coding import SystemFactorization, update_auxiliary, update_codes, update_multiplier

log = logging.getLogger(__name__)

REL_CHANGE_TOL = 1e-7
REL_CHANGE_WINDOW = 10
PRIMAL_TOL = 1e-5


class NumericError(FloatingPointError):
    """A non-finite value appeared during training."""


@dataclass
class FitReport:
    """Per-iteration traces of a training run.

    ``objective_trace`` holds the monitored objective (multiplier term
    ``tr(L^T (C - Z))``); ``lagrangian_trace`` holds the same quantity with the
    factor 2 on the multiplier term, i.e. the function the ADMM updates
    actually minimize. ``admm_objective_trace`` is the monitored objective
    evaluated after the ADMM stage but before the bases are refreshed.
    """

    objective_trace: list = field(default_factory=list)
    primal_residual_trace: list = field(default_factory=list)
    lagrangian_trace: list = field(default_factory=list)
    admm_objective_trace: list = field(default_factory=list)
    iterations_run: int = 0
    converged: bool = False
    wall_time: float = 0.0


def initialize(X, H, Q, params: HyperParams):
    """Random unit-column bases and all-zero ADMM state."""
    D, N = X.shape
    n_classes = H.shape[0]
    K = Q.shape[0]
    if params.n_atoms is not None and params.n_atoms != K:
        raise ConfigError(f"params.n_atoms={params.n_atoms} but Q has {K} rows")
    if K < n_classes:
        raise ConfigError(f"K={K} smaller than number of classes {n_classes}")
    rng = np.random.default_rng(params.seed)
    bundle = ModelBundle(
        B=l2_normalize_columns(rng.random((D, K))),
        W=l2_normalize_columns(rng.random((n_classes, K))),
        A=l2_normalize_columns(rng.random((K, K))),
    )
    zeros = np.zeros((K, N))
    state = TrainState(C=zeros.copy(), Z=zeros.copy(), L=zeros.copy(), iter=0, theta=params.theta0)
    return bundle, state


def _terms(X, H, Q, bundle, state, params):
    C, Z, L = state.C, state.Z, state.L
    diff = C - Z
    return {
        "reconstruction": float(np.sum((X - bundle.B @ C) ** 2)),
        "classification": params.lam * float(np.sum((H - bundle.W @ C) ** 2)),
        "discriminative": params.omega * float(np.sum((Q - bundle.A @ C) ** 2)),
        "sparsity": 2.0 * params.epsilon * float(np.abs(Z).sum()),
        "multiplier": float(np.sum(L * diff)),
        "penalty": params.rho * float(np.sum(diff * diff)),
    }


def objective(X, H, Q, bundle, state, params, multiplier_weight=1.0):
    """Monitored training objective.

    ``||X-BC||^2 + lam ||H-WC||^2 + omega ||Q-AC||^2 + 2 eps ||Z||_1
    + w tr(L^T (C-Z)) + rho ||C-Z||^2`` with ``w = multiplier_weight``.
    """
    terms = _terms(X, H, Q, bundle, state, params)
    for name, value in terms.items():
        if not np.isfinite(value):
            raise NumericError(f"non-finite {name} term in objective: {value}")
    terms["multiplier"] *= multiplier_weight
    return sum(terms.values())


def theta_schedule(theta, params: HyperParams):
    """Geometric decay of the dual step with a floor."""
    return max(theta * params.theta_decay, params.theta_min)


def _check_supervision(X, H, Q):
    N = X.shape[1]
    if H.shape[1] != N or Q.shape[1] != N:
        raise ValueError(f"H {H.shape} and Q {Q.shape} must have {N} columns to match X")


def fit(X, H, Q, params: HyperParams, callback=None):
    """Learn ``B``, ``W`` and ``A`` jointly with the sparse codes.

    Each iteration runs one ADMM pass on the codes (codes, auxiliary,
    multiplier), one Gauss-Seidel BCD sweep over the columns of B, W, A, and
    then records the objective. With ``params.early_stop`` the loop ends once
    the relative objective change stays below 1e-7 for 10 consecutive
    iterations and ``||C - Z||_F < 1e-5``.

    ``callback(m, bundle, state)`` is invoked after every iteration; the
    arguments are live objects and must not be modified.

    Returns:
        ``(bundle, state, report)``
    """
    X = np.asarray(X, dtype=float)
    H = np.asarray(H, dtype=float)
    Q = np.asarray(Q, dtype=float)
    _check_supervision(X, H, Q)
    bundle, state = initialize(X, H, Q, params)
    report = FitReport()
    start = time.perf_counter()
    calm = 0
    with np.errstate(over="raise", invalid="raise"):
        for m in range(1, params.maxiter + 1):
            try:
                factor = SystemFactorization.from_bundle(
                    bundle.B, bundle.W, bundle.A, params.lam, params.omega, params.rho)
                C = update_codes(X, H, Q, bundle.B, bundle.W, bundle.A, state.Z, state.L, params, factor)
                Z = update_auxiliary(C, state.L, params.epsilon, params.rho)
                L = update_multiplier(state.L, C, Z, state.theta)
                state.C, state.Z, state.L = C, Z, L
                report.admm_objective_trace.append(objective(X, H, Q, bundle, state, params))

                sweep(bundle, X, H, Q, C, offdiag_gram(C))

                f = objective(X, H, Q, bundle, state, params)
                f2 = objective(X, H, Q, bundle, state, params, multiplier_weight=2.0)
            except (np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
                raise NumericError(f"iteration {m}: {exc}") from exc
            residual = float(np.linalg.norm(C - Z))
            prev = report.objective_trace[-1] if report.objective_trace else None
            report.objective_trace.append(f)
            report.lagrangian_trace.append(f2)
            report.primal_residual_trace.append(residual)
            report.iterations_run = m
            state.iter = m
            state.theta = theta_schedule(state.theta, params)
            log.debug("iter %d objective %.10g lagrangian %.10g residual %.3e", m, f, f2, residual)
            if callback is not None:
                callback(m, bundle, state)

            if prev is not None and abs(prev - f) <= REL_CHANGE_TOL * max(abs(prev), 1e-300):
                calm += 1
            else:
                calm = 0
            if calm >= REL_CHANGE_WINDOW and residual < PRIMAL_TOL:
                report.converged = True
                if params.early_stop:
                    break
    report.wall_time = time.perf_counter() - start
    return bundle, state, report
