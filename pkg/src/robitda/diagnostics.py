"""Chain diagnostics: autocorrelation, running means, batch-means MCSE, and the
log-likelihood / log-posterior scalar traces."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import Dataset, DimensionError, Prior
from .models import ModelKind

_LOG_2PI = math.log(2.0 * math.pi)


class ConstantSeriesError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class AcfResult:
    lags: np.ndarray
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class RunningMeanSeries:
    iteration: np.ndarray  # 1-based
    values: np.ndarray


def _series(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionError("series must be one-dimensional")
    return x


def autocorrelation(series, max_lag: int = 50) -> AcfResult:
    """Sample ACF ``c(k) / c(0)`` with the biased 1/N autocovariance.

    The mean is an exactly rounded ``math.fsum``; lagged products are
    summed pairwise by numpy.
    """
    x = _series(series)
    n = x.size
    if not 0 <= max_lag < n:
        raise ValueError(f"need 0 <= max_lag < len(series), got max_lag={max_lag}, n={n}")
    dev = x - math.fsum(x) / n
    c0 = float(np.dot(dev, dev))
    if c0 == 0.0:
        raise ConstantSeriesError("autocorrelation of a constant series is undefined")
    vals = np.empty(max_lag + 1)
    vals[0] = 1.0
    for k in range(1, max_lag + 1):
        vals[k] = np.sum(dev[:-k] * dev[k:]) / c0
    return AcfResult(np.arange(max_lag + 1), vals)


def running_mean(series) -> RunningMeanSeries:
    """Cumulative means; the last entry is the exactly rounded overall mean."""
    x = _series(series)
    if x.size == 0:
        raise ValueError("running mean of an empty series")
    mean = math.fsum(x) / x.size
    k = np.arange(1, x.size + 1)
    # centring first keeps the cumulative rounding error at the scale of the spread
    vals = mean + np.cumsum(x - mean) / k
    vals[-1] = mean
    return RunningMeanSeries(k, vals)


def mcse_batch_means(series, batch_count: int | None = None) -> float:
    """Batch-means Monte Carlo standard error of the series mean.

    ``batch_count`` defaults to ``floor(sqrt(N))``; trailing values that do
    not fill a batch are dropped.
    """
    x = _series(series)
    if batch_count is None:
        batch_count = max(2, int(math.isqrt(x.size)))
    if batch_count < 2 or x.size < 2 * batch_count:
        raise ValueError(f"need at least 2 * batch_count = {2 * batch_count} points, got {x.size}")
    size = x.size // batch_count
    means = x[: size * batch_count].reshape(batch_count, size).mean(axis=1)
    return float(np.std(means, ddof=1) / math.sqrt(batch_count))


def _linear_predictor(beta, dataset: Dataset) -> np.ndarray:
    beta = np.asarray(beta, dtype=float)
    if beta.shape[-1] != dataset.p:
        raise DimensionError(f"beta has length {beta.shape[-1]}, dataset has p={dataset.p}")
    return beta @ dataset.XT


def log_likelihood(beta, dataset: Dataset, model: ModelKind):
    """``sum_i y_i log F(x_i'beta) + (1 - y_i) log(1 - F(x_i'beta))``.

    ``beta`` may be a single p-vector or an (m, p) stack of draws.
    """
    eta = _linear_predictor(beta, dataset)
    signed = eta * dataset.sign  # log(1 - F(eta)) = log F(-eta) by symmetry
    out = np.sum(model.log_cdf(signed), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def log_posterior(beta, dataset: Dataset, prior: Prior, model: ModelKind):
    """Un-normalised log posterior: log-likelihood plus the normal prior log density.

    With the identity prior this is ``lik - (p/2) log(2 pi) - beta'beta / 2``.
    """
    beta = np.asarray(beta, dtype=float)
    lik = log_likelihood(beta, dataset, model)
    dev = beta - prior.beta_a
    quad = np.einsum("...i,ij,...j->...", dev, prior.sigma_a, dev)
    out = lik - 0.5 * prior.p * _LOG_2PI + 0.5 * prior.logdet - 0.5 * quad
    return float(out) if np.ndim(out) == 0 else out
