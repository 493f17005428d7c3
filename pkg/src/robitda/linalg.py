"""Datasets, priors, posterior precision and the whitened-design matrix identities."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .special import NotPositiveDefiniteError, cholesky

# relative cut-off under which singular values of A = Lambda^1/2 W count as zero
SV_RTOL = 1e-12


class DimensionError(ValueError):
    pass


class SingularPriorError(np.linalg.LinAlgError):
    """X^T X is rank deficient, so the g-prior does not exist."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """Design matrix ``X`` (n x p) and binary response ``y``."""

    X: np.ndarray
    y: np.ndarray
    columns: tuple = ()

    def __post_init__(self):
        X = np.array(self.X, dtype=float, ndmin=2)
        y = np.asarray(self.y)
        if X.ndim != 2:
            raise DimensionError("X must be two-dimensional")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise DimensionError(f"y has shape {y.shape}, expected ({X.shape[0]},)")
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise DimensionError("need n >= 1 and p >= 1")
        if not np.all(np.isfinite(X)):
            raise ValueError("X contains non-finite entries")
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("y must contain only 0/1")
        X.setflags(write=False)
        y = y.astype(np.int64)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "columns", tuple(self.columns))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @cached_property
    def XT(self) -> np.ndarray:
        return np.ascontiguousarray(self.X.T)

    @cached_property
    def sign(self) -> np.ndarray:
        """+1 where y = 1, -1 where y = 0 (the truncation side of each latent)."""
        return np.where(self.y == 1, 1.0, -1.0)


def _sym_sqrt(m: np.ndarray):
    vals, vecs = np.linalg.eigh(m)
    root = (vecs * np.sqrt(vals)) @ vecs.T
    inv_root = (vecs / np.sqrt(vals)) @ vecs.T
    return 0.5 * (root + root.T), 0.5 * (inv_root + inv_root.T)


@dataclass(frozen=True, eq=False)
class Prior:
    """Normal prior N(beta_a, sigma_a^{-1}); ``sigma_a`` is the precision.

    The symmetric square roots of the precision are cached on construction.
    """

    beta_a: np.ndarray
    sigma_a: np.ndarray
    label: str = "custom"
    sigma_a_sqrt: np.ndarray = field(init=False, repr=False)
    sigma_a_inv_sqrt: np.ndarray = field(init=False, repr=False)
    chol: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        beta_a = np.array(self.beta_a, dtype=float, ndmin=1)
        sigma_a = np.array(self.sigma_a, dtype=float, ndmin=2)
        p = beta_a.shape[0]
        if beta_a.ndim != 1 or sigma_a.shape != (p, p):
            raise DimensionError(f"prior mean has length {p} but precision is {sigma_a.shape}")
        if not np.allclose(sigma_a, sigma_a.T, rtol=1e-12, atol=0.0):
            raise ValueError("prior precision must be symmetric")
        sigma_a = 0.5 * (sigma_a + sigma_a.T)
        chol = cholesky(sigma_a)
        root, inv_root = _sym_sqrt(sigma_a)
        for name, arr in (("beta_a", beta_a), ("sigma_a", sigma_a), ("sigma_a_sqrt", root),
                          ("sigma_a_inv_sqrt", inv_root), ("chol", chol)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def p(self) -> int:
        return self.beta_a.shape[0]

    @cached_property
    def logdet(self) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self.chol))))

    @cached_property
    def precision_mean(self) -> np.ndarray:
        """``sigma_a @ beta_a``, the prior's contribution to the posterior rhs."""
        return self.sigma_a @ self.beta_a

    @classmethod
    def identity(cls, p: int) -> "Prior":
        """Independent standard normal prior."""
        return cls(np.zeros(p), np.eye(p), label="identity")


def build_gprior(X, g: float) -> Prior:
    """Zellner g-prior: mean zero, precision X^T X / g.

    Raises
    ------
    SingularPriorError
        If X^T X is singular (in particular whenever n < p).
    """
    X = np.asarray(X, dtype=float)
    if not g > 0:
        raise ValueError(f"g must be positive, got {g}")
    n, p = X.shape
    if n < p or np.linalg.matrix_rank(X) < p:
        raise SingularPriorError(
            f"X^T X is singular (n={n}, p={p}); the g-prior needs a full column rank design"
        )
    try:
        return Prior(np.zeros(p), (X.T @ X) / g, label=f"g{g:g}")
    except NotPositiveDefiniteError as exc:
        raise SingularPriorError(str(exc)) from None


def _as_lambda(lam, n: int) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (n,):
        raise DimensionError(f"lambda has shape {lam.shape}, expected ({n},)")
    if not np.all(lam > 0):
        raise ValueError("lambda entries must be strictly positive")
    return lam


def posterior_precision(X, lam, sigma_a) -> np.ndarray:
    """``X^T diag(lam) X + sigma_a``; lam may contain zeros here."""
    X = np.asarray(X, dtype=float)
    lam = np.asarray(lam, dtype=float)
    sigma_a = np.asarray(sigma_a, dtype=float)
    n, p = X.shape
    if lam.shape != (n,) or sigma_a.shape != (p, p):
        raise DimensionError(f"incompatible shapes X{X.shape}, lambda{lam.shape}, sigma_a{sigma_a.shape}")
    out = (X.T * lam) @ X + sigma_a
    return 0.5 * (out + out.T)


@dataclass(frozen=True, eq=False)
class Whitened:
    """Design and prior mean expressed in prior-whitened coordinates."""

    W: np.ndarray
    c_tilde: np.ndarray


def whiten(dataset: Dataset, prior: Prior) -> Whitened:
    """``W = X sigma_a^{-1/2}`` and ``c_tilde = sigma_a^{1/2} beta_a`` (symmetric roots)."""
    if dataset.p != prior.p:
        raise DimensionError(f"dataset has p={dataset.p}, prior has p={prior.p}")
    return Whitened(dataset.X @ prior.sigma_a_inv_sqrt, prior.sigma_a_sqrt @ prior.beta_a)


def _check_w(W, lam):
    W = np.asarray(W, dtype=float)
    if W.ndim != 2:
        raise DimensionError("W must be two-dimensional")
    return W, _as_lambda(lam, W.shape[0])


def omega_direct(W, lam) -> np.ndarray:
    """``(2 W'LW + I) - 4 W'L (L + LW (W'LW + I)^{-1} W'L)^{-1} LW`` term by term.

    Both inverses are applied through Cholesky solves.
    """
    W, lam = _check_w(W, lam)
    p = W.shape[1]
    LW = lam[:, None] * W
    WLW = W.T @ LW
    inner = WLW + np.eye(p)
    # Lambda + LW inner^{-1} W'L
    middle = np.diag(lam) + LW @ _chol_solve(inner, LW.T)
    out = 2.0 * WLW + np.eye(p) - 4.0 * LW.T @ _chol_solve(middle, LW)
    return 0.5 * (out + out.T)


def _chol_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    L = cholesky(0.5 * (a + a.T))
    return np.linalg.solve(L.T, np.linalg.solve(L, b))


def _spectral_parts(W, lam):
    W, lam = _check_w(W, lam)
    A = np.sqrt(lam)[:, None] * W
    _, d, vh = np.linalg.svd(A, full_matrices=False)
    if d.size and d[0] > 0:
        d = np.where(d < SV_RTOL * d[0], 0.0, d)
    R = vh.T  # p x min(n, p); right singular vectors
    return R, d


def omega_closed_form(W, lam) -> np.ndarray:
    """Spectral form of Omega(Lambda) from the SVD of A = Lambda^{1/2} W.

    ``R diag(1 / (2 d^2 + 1)) R^T + (I - R R^T)`` with ``R`` the right
    singular vectors; the second term vanishes when n >= p.
    """
    R, d = _spectral_parts(W, lam)
    p = R.shape[0]
    out = (R / (2.0 * d**2 + 1.0)) @ R.T + (np.eye(p) - R @ R.T)
    return 0.5 * (out + out.T)


def sigma_lambda(W, lam) -> np.ndarray:
    """Inverse of Omega(Lambda): ``R diag(2 d^2 + 1) R^T + (I - R R^T)``."""
    R, d = _spectral_parts(W, lam)
    p = R.shape[0]
    out = (R * (2.0 * d**2 + 1.0)) @ R.T + (np.eye(p) - R @ R.T)
    return 0.5 * (out + out.T)


def singular_values(W, lam) -> np.ndarray:
    """Singular values of ``Lambda^{1/2} W`` (after the small-value clamp)."""
    return _spectral_parts(W, lam)[1]
