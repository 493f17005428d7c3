"""Data augmentation and sandwich Markov chains for robit and probit regression.

All four kernels share one step: draw the latents (z, lambda) given beta,
optionally rescale z by a scalar h (sandwich move), then draw beta from its
normal full conditional. Probit is the case lambda = 1 with normal latents.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import log_likelihood, log_posterior
from .linalg import Dataset, DimensionError, Prior
from .models import ModelKind
from .special import (
    RngStream,
    cholesky,
    draw_normal_latents,
    draw_t_latents,
    mvn_draw_from_cholesky,
    solve_lower,
)

CHAIN_KINDS = ("da", "sandwich")

# below this the h^2 gamma rate is treated as degenerate and h is set to 1
MIN_H_RATE = 1e-300


class ChainError(RuntimeError):
    def __init__(self, step: int, cause: BaseException):
        super().__init__(f"chain failed at step {step}: {cause}")
        self.step = step


class NonzeroPriorMeanWarning(UserWarning):
    """The sandwich move is only invariant for a zero prior mean."""


@dataclass(frozen=True, eq=False)
class ChainState:
    beta: np.ndarray
    z: np.ndarray
    lam: np.ndarray
    step: int = 0
    degenerate: int = 0  # sandwich steps that fell back to h = 1

    @classmethod
    def initial(cls, dataset: Dataset, beta=None) -> "ChainState":
        if beta is None:
            beta = np.zeros(dataset.p)
        beta = np.array(beta, dtype=float)
        if beta.shape != (dataset.p,):
            raise DimensionError(f"initial beta has shape {beta.shape}, expected ({dataset.p},)")
        return cls(beta, np.zeros(dataset.n), np.ones(dataset.n))


@dataclass(frozen=True)
class ChainConfig:
    model: ModelKind
    chain: str = "da"
    iterations: int = 1000
    burn_in: int | None = None  # None -> 2 * iterations
    thin: int = 1
    seed: int = 0
    stream: int = 0
    init_beta: tuple | None = None

    def __post_init__(self):
        if self.chain not in CHAIN_KINDS:
            raise ValueError(f"chain must be one of {CHAIN_KINDS}, got {self.chain!r}")
        if int(self.iterations) < 1:
            raise ValueError("iterations must be >= 1")
        if int(self.thin) < 1:
            raise ValueError("thin must be >= 1")
        if self.burn_in is not None and int(self.burn_in) < 0:
            raise ValueError("burn_in must be >= 0")
        if self.init_beta is not None:
            object.__setattr__(self, "init_beta", tuple(float(b) for b in self.init_beta))

    @property
    def effective_burn_in(self) -> int:
        return 2 * int(self.iterations) if self.burn_in is None else int(self.burn_in)


@dataclass(frozen=True, eq=False)
class SampleMatrix:
    """Post burn-in, thinned draws of beta with their lik/lpd traces."""

    draws: np.ndarray  # (m, p)
    iteration: np.ndarray  # 1-based index of each kept draw among the retained iterations
    lik: np.ndarray
    lpd: np.ndarray
    config: ChainConfig
    wall_time: float = 0.0
    degenerate: int = 0
    final_state: ChainState | None = field(default=None, repr=False)

    def __post_init__(self):
        for arr in (self.draws, self.iteration, self.lik, self.lpd):
            arr.setflags(write=False)

    def __len__(self):
        return self.draws.shape[0]


def _augmented_step(state, dataset, prior, rng, nu, sandwich, force_h):
    gen = rng.gen
    X, XT = dataset.X, dataset.XT
    beta = state.beta
    eta = X @ beta
    if nu is None:
        z = draw_normal_latents(eta, dataset.sign, gen)
        lam = np.ones(dataset.n)
        XL = XT
    else:
        z = draw_t_latents(eta, dataset.sign, nu, gen)
        r = z - eta
        lam = gen.standard_gamma(0.5 * (nu + 1.0), size=dataset.n) / (0.5 * (nu + r * r))
        XL = XT * lam
    prec = XL @ X + prior.sigma_a
    chol = cholesky(prec)
    xlz = XL @ z
    degenerate = state.degenerate
    if sandwich:
        if force_h is not None:
            h = float(force_h)
        else:
            # z'L^{1/2}(I - Q)L^{1/2}z = z'Lz - (X'Lz)' P^{-1} (X'Lz)
            half = solve_lower(chol, xlz)
            quad = float(np.dot(lam * z, z) - np.dot(half, half))
            rate = 0.5 * quad
            if rate < MIN_H_RATE:
                h = 1.0
                degenerate += 1
            else:
                h = float(np.sqrt(gen.standard_gamma(0.5 * dataset.n) / rate))
        if h != 1.0:
            z = h * z
            xlz = h * xlz
    rhs = xlz + prior.precision_mean
    new_beta = mvn_draw_from_cholesky(rhs, chol, gen.standard_normal(dataset.p))
    return ChainState(new_beta, z, lam, state.step + 1, degenerate)


def robit_da_step(state: ChainState, dataset: Dataset, prior: Prior, nu: float, rng: RngStream) -> ChainState:
    """One iteration of the robit DA chain.

    Draws z_i from t_nu(x_i'beta, 1) truncated to the y_i side of 0, then
    lambda_i ~ Gamma((nu+1)/2, rate (nu + (z_i - x_i'beta)^2)/2), then
    beta ~ N(P^{-1}(X'Lz + sigma_a beta_a), P^{-1}) with P = X'LX + sigma_a.
    """
    return _augmented_step(state, dataset, prior, rng, nu, False, None)


def robit_sandwich_step(state, dataset, prior, nu, rng, force_h=None) -> ChainState:
    """Robit DA iteration with the scalar rescaling move between the two blocks.

    After (z, lambda) are drawn, h^2 ~ Gamma(n/2, rate z'L^{1/2}(I-Q)L^{1/2}z / 2),
    Q = L^{1/2}X P^{-1} X'L^{1/2}, and beta is drawn given (h z, lambda).
    ``force_h`` skips the h draw (``force_h=1`` reproduces :func:`robit_da_step`
    exactly, random stream included). The move leaves the posterior invariant
    when the prior mean is zero.
    """
    return _augmented_step(state, dataset, prior, rng, nu, True, force_h)


def probit_da_step(state, dataset, prior, rng) -> ChainState:
    """Albert-Chib probit DA iteration (normal latents, lambda = 1)."""
    return _augmented_step(state, dataset, prior, rng, None, False, None)


def probit_sandwich_step(state, dataset, prior, rng, force_h=None) -> ChainState:
    """Probit sandwich iteration: the rescaling move with lambda = 1."""
    return _augmented_step(state, dataset, prior, rng, None, True, force_h)


def run_chain(config: ChainConfig, dataset: Dataset, prior: Prior) -> SampleMatrix:
    """Run burn-in, then ``iterations`` steps keeping every ``thin``-th beta.

    Deterministic given ``(config.seed, config.stream)``.
    """
    if dataset.p != prior.p:
        raise DimensionError(f"dataset has p={dataset.p}, prior has p={prior.p}")
    model = config.model
    nu = model.nu if model.is_robit else None
    sandwich = config.chain == "sandwich"
    if sandwich and np.any(prior.beta_a != 0):
        warnings.warn(
            "sandwich move with a nonzero prior mean does not preserve the posterior",
            NonzeroPriorMeanWarning,
            stacklevel=2,
        )
    rng = RngStream(config.seed, config.stream)
    state = ChainState.initial(dataset, config.init_beta)
    burn = config.effective_burn_in
    iters = int(config.iterations)
    thin = int(config.thin)
    kept = np.empty((iters // thin, dataset.p))
    start = time.perf_counter()
    j = 0
    for k in range(burn + iters):
        try:
            state = _augmented_step(state, dataset, prior, rng, nu, sandwich, None)
        except Exception as exc:  # attach the step index
            raise ChainError(k + 1, exc) from exc
        r = k - burn + 1
        if r > 0 and r % thin == 0:
            kept[j] = state.beta
            j += 1
    wall = time.perf_counter() - start
    lik = np.asarray(log_likelihood(kept, dataset, model), dtype=float).reshape(-1)
    lpd = np.asarray(log_posterior(kept, dataset, prior, model), dtype=float).reshape(-1)
    return SampleMatrix(
        draws=kept,
        iteration=np.arange(1, j + 1) * thin,
        lik=lik,
        lpd=lpd,
        config=config,
        wall_time=wall,
        degenerate=state.degenerate,
        final_state=state,
    )
