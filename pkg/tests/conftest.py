import numpy as np
import pytest

from ledl.data import (HyperParams, build_discriminative_codes, build_label_matrix,
                       l2_normalize_columns)

TINY = dict(lam=2.0**-3, omega=2.0**-11, epsilon=2.0**-8, rho=1.0, theta0=0.5)


def blob_instance(seed, D=8, K=12, N=20, n_classes=2, noise=1.0):
    """Normalized Gaussian-cluster training set with its supervision matrices."""
    rng = np.random.default_rng(seed)
    labels = np.arange(N) % n_classes
    centers = 3.0 * rng.normal(size=(D, n_classes))
    X = l2_normalize_columns(centers[:, labels] + noise * rng.normal(size=(D, N)))
    H = build_label_matrix(labels, n_classes)
    Q = build_discriminative_codes(labels, K, n_classes).Q
    return X, H, Q, labels


def random_problem(seed, D=6, K=9, N=11, n_classes=3):
    """Random bundle, targets and ADMM state for operator-level tests."""
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, n_classes, N)
    return dict(
        X=rng.normal(size=(D, N)),
        H=build_label_matrix(labels, n_classes),
        Q=build_discriminative_codes(labels, K, n_classes).Q,
        B=l2_normalize_columns(rng.normal(size=(D, K))),
        W=l2_normalize_columns(rng.normal(size=(n_classes, K))),
        A=l2_normalize_columns(rng.normal(size=(K, K))),
        Z=rng.normal(size=(K, N)),
        L=0.3 * rng.normal(size=(K, N)),
        C=rng.normal(size=(K, N)),
    )


@pytest.fixture
def tiny_params():
    return HyperParams(**TINY, maxiter=300, early_stop=False)


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE:
        terminalreporter.write_line(line)
