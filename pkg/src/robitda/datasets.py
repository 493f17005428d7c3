"""Small synthetic problem instances used by the tests, scripts and CLI."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .linalg import Dataset
from .special import t_cdf

# n = 3, p = 1: small enough that the posterior of beta is a 1-D quadrature
STATIONARITY_X = (0.8, -1.2, 1.5)
STATIONARITY_Y = (1, 0, 0)

# n = 2, p = 1 instance for the trace integral
TRACE_X = (0.7, -1.1, 0.4)
TRACE_Y = (1, 1, 0)


def stationarity_instance() -> Dataset:
    return Dataset(np.array(STATIONARITY_X)[:, None], np.array(STATIONARITY_Y), ("x",))


def zero_design() -> Dataset:
    """n = p = 1 with x = 0: the likelihood is flat and every kernel draws from the prior."""
    return Dataset(np.zeros((1, 1)), np.array([1]), ("x",))


def trace_instance(n: int = 2, p: int = 1) -> Dataset:
    """Fixed tiny instance with n <= 3 and p <= 2 for the trace estimator."""
    if not (1 <= n <= 3 and 1 <= p <= 2):
        raise ValueError(f"trace instances need 1 <= n <= 3 and 1 <= p <= 2, got n={n}, p={p}")
    x = np.array(TRACE_X[:n])
    X = x[:, None] if p == 1 else np.column_stack([np.ones(n), x])
    return Dataset(X, np.array(TRACE_Y[:n]), tuple(f"x{j + 1}" for j in range(p)))


def simulate_robit(n: int, p: int, seed: int, nu: float = 3.0, intercept: bool = True, beta=None) -> Dataset:
    """Design with standard normal predictors and responses drawn from a robit link.

    With ``intercept`` the first of the ``p`` columns is all ones.
    """
    gen = np.random.default_rng(seed)
    k = p - 1 if intercept else p
    Z = gen.standard_normal((n, k))
    X = np.column_stack([np.ones(n), Z]) if intercept else Z
    if beta is None:
        beta = gen.uniform(-1.5, 1.5, size=p)
    prob = t_cdf(X @ np.asarray(beta, dtype=float), nu)
    y = (gen.random(n) < prob).astype(int)
    names = (["intercept"] if intercept else []) + [f"x{j + 1}" for j in range(k)]
    return Dataset(X, y, tuple(names))


def write_csv(path, X, y, names=None, response: str = "y") -> Path:
    """Write predictors and a response column with a header row (17 significant digits)."""
    path = Path(path)
    X = np.asarray(X, dtype=float)
    names = list(names) if names is not None else [f"x{j + 1}" for j in range(X.shape[1])]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names + [response])
        for row, yi in zip(X, y):
            w.writerow([f"{v:.17g}" for v in row] + [int(yi)])
    return path


def lupus_shaped_csv(path, seed: int = 0) -> Path:
    """55 rows, two predictors and a binary outcome (same shape as the lupus nephritis data)."""
    gen = np.random.default_rng(seed)
    X = np.column_stack([gen.normal(0.0, 2.0, 55), gen.normal(1.0, 1.0, 55)])
    y = (gen.random(55) < t_cdf(-1.0 + 0.8 * X[:, 0] + 0.5 * X[:, 1], 3.0)).astype(int)
    return write_csv(path, X, y, ["ab_1", "ab_2"])


def prostate_shaped_csv(path, seed: int = 0, genes: int = 200) -> Path:
    """102 arrays with ``genes`` expression columns and a binary outcome."""
    gen = np.random.default_rng(seed)
    X = gen.standard_normal((102, genes))
    y = np.r_[np.zeros(50, int), np.ones(52, int)]
    return write_csv(path, X, y, [f"g{j + 1}" for j in range(genes)])
