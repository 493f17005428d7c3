"""Student-t distribution machinery and the primitive random-variate generators.

The CDF and quantile used inside the samplers are the vectorised cephes
routines from :mod:`scipy.special`; the incomplete beta ratio is evaluated
independently here by continued fraction and is what the tests (and the
far-tail log-CDF) rely on.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sc
from scipy.linalg import lapack

# Below this surviving mass the inverse-CDF route is abandoned for a tail sampler.
TAIL_MASS = 1e-12

_CF_EPS = 1e-16
_CF_TINY = 1e-300
_CF_MAXIT = 10_000


class DomainError(ValueError):
    """Argument outside the mathematical domain of a function."""


class TruncationUnderflowError(ArithmeticError):
    """Surviving mass of a truncated distribution is too small to invert."""


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Cholesky factorisation of a supposedly SPD matrix failed."""


class TruncationSide(enum.IntEnum):
    """Half-line a latent variable is truncated to; the value is the sign."""

    NEGATIVE = -1
    POSITIVE = 1

    @classmethod
    def from_response(cls, y: int) -> "TruncationSide":
        return cls.POSITIVE if int(y) == 1 else cls.NEGATIVE


@dataclass(frozen=True)
class TDist:
    """Standard Student-t distribution with ``nu`` degrees of freedom."""

    nu: float

    def __post_init__(self):
        _check_nu(self.nu)

    def cdf(self, t):
        return t_cdf(t, self.nu)

    def logcdf(self, t):
        return t_logcdf(t, self.nu)

    def quantile(self, p):
        return t_quantile(p, self.nu)


class RngStream:
    """Reproducible random stream identified by ``(seed, stream)``.

    Streams with the same pair produce bit-identical sequences; distinct
    stream ids under one seed are statistically independent (they are
    spawned children of the same :class:`numpy.random.SeedSequence`).
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        self.gen = np.random.Generator(np.random.PCG64(ss))

    def spawn(self, stream: int) -> "RngStream":
        """Independent stream under the same seed."""
        return RngStream(self.seed, stream)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream={self.stream})"


def _check_nu(nu):
    if not (np.isfinite(nu) and nu > 0):
        raise DomainError(f"degrees of freedom must be positive, got {nu!r}")


# ---------------------------------------------------------------------------
# incomplete beta ratio


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for I_x(a, b), modified Lentz."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"continued fraction did not converge for a={a}, b={b}, x={x}")


def _log_front(a: float, b: float, x: float) -> float:
    lbeta = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    return a * math.log(x) + b * math.log1p(-x) - lbeta - math.log(a)


def _incbeta_scalar(p: float, a: float, b: float) -> float:
    if p < (a + 1.0) / (a + b + 2.0):
        return math.exp(_log_front(a, b, p)) * _betacf(a, b, p)
    q = 1.0 - p
    return 1.0 - math.exp(_log_front(b, a, q)) * _betacf(b, a, q)


def _check_incbeta_args(p, a, b):
    if not (a > 0 and b > 0):
        raise DomainError(f"shape parameters must be positive, got a={a}, b={b}")
    if not (0.0 < p < 1.0):
        raise DomainError(f"p must lie in (0, 1), got {p}")


def incomplete_beta_ratio(p, a, b):
    """Regularised incomplete beta function ``I_p(a, b)``.

    Evaluated by continued fraction on whichever of ``I_p(a, b)`` and
    ``1 - I_{1-p}(b, a)`` converges faster. Accepts scalars or arrays
    (broadcast); absolute error is below 1e-12 on the domain.

    Raises
    ------
    DomainError
        If ``p`` is outside (0, 1) or ``a``/``b`` are not positive.
    """
    if np.ndim(p) == 0 and np.ndim(a) == 0 and np.ndim(b) == 0:
        p, a, b = float(p), float(a), float(b)
        _check_incbeta_args(p, a, b)
        return _incbeta_scalar(p, a, b)
    p, a, b = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (p, a, b)))
    out = np.empty(p.shape)
    for idx in np.ndindex(p.shape):
        _check_incbeta_args(p[idx], a[idx], b[idx])
        out[idx] = _incbeta_scalar(p[idx], a[idx], b[idx])
    return out


def log_incomplete_beta_ratio(p: float, a: float, b: float) -> float:
    """``log I_p(a, b)``, accurate even when the ratio underflows.

    Only the direct (unreflected) continued fraction keeps full relative
    accuracy, so this is intended for small ``p``.
    """
    p, a, b = float(p), float(a), float(b)
    _check_incbeta_args(p, a, b)
    if p < (a + 1.0) / (a + b + 2.0):
        return _log_front(a, b, p) + math.log(_betacf(a, b, p))
    return math.log(_incbeta_scalar(p, a, b))


# ---------------------------------------------------------------------------
# Student-t CDF / quantile


def t_cdf(t, nu):
    """CDF of the standard t distribution.

    The upper half is ``1 - F(-t)``: cephes' direct value can step down by
    an ulp just below 1.
    """
    _check_nu(nu)
    t = np.asarray(t, dtype=float)
    out = np.where(t > 0, 1.0 - sc.stdtr(nu, -np.abs(t)), sc.stdtr(nu, t))
    return out[()] if out.ndim == 0 else out


def t_cdf_incbeta(t: float, nu: float) -> float:
    """Same CDF through ``1 - I_{nu/(nu+t^2)}(nu/2, 1/2) / 2`` (slow, scalar)."""
    _check_nu(nu)
    t = float(t)
    if t == 0.0:
        return 0.5
    x = nu / (nu + t * t)
    if x >= 1.0:
        return 0.5
    tail = 0.5 * incomplete_beta_ratio(x, 0.5 * nu, 0.5)
    return 1.0 - tail if t > 0 else tail


def _t_logcdf_tail(t: float, nu: float) -> float:
    # t < 0 and far enough out that the cephes value underflowed
    a = 0.5 * nu
    log_x = math.log(nu) - 2.0 * math.log(abs(t)) - math.log1p(nu / (t * t))
    if log_x > -40.0:
        return math.log(0.5) + log_incomplete_beta_ratio(math.exp(log_x), a, 0.5)
    # I_x(a, 1/2) = x^a / (a B(a, 1/2)) (1 + O(x)); the correction is below rounding here
    log_beta = sc.gammaln(a) + sc.gammaln(0.5) - sc.gammaln(a + 0.5)
    return math.log(0.5) + a * log_x - math.log(a) - log_beta


def t_logcdf(t, nu):
    """``log F_nu(t)`` without underflow in the lower tail."""
    _check_nu(nu)
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.log(sc.stdtr(nu, t))
    bad = np.isneginf(out) & np.isfinite(t)
    if np.any(bad):
        out = np.array(out, copy=True)
        it = np.nditer(bad, flags=["multi_index"])
        for flag in it:
            if flag:
                idx = it.multi_index
                out[idx] = _t_logcdf_tail(float(t[idx]), nu)
    return out[()] if out.ndim == 0 else out


def t_quantile(p, nu):
    """Inverse of :func:`t_cdf`.

    Raises
    ------
    DomainError
        If any ``p`` is outside (0, 1).
    """
    _check_nu(nu)
    p_arr = np.asarray(p, dtype=float)
    if np.any(~((p_arr > 0.0) & (p_arr < 1.0))):
        raise DomainError("quantile probabilities must lie in (0, 1)")
    # evaluate in the lower half so that F^{-1}(1/2) = 0 and F^{-1}(1-p) = -F^{-1}(p) exactly
    lower = np.minimum(p_arr, 1.0 - p_arr)
    t = sc.stdtrit(nu, lower)
    # one Newton step on the lower-half value: stdtrit alone is good to ~1e-11
    with np.errstate(over="ignore", invalid="ignore"):
        step = (sc.stdtr(nu, t) - lower) / np.exp(t_logpdf(t, nu))
    t = np.where(np.isfinite(step), t - step, t)
    t = np.where(lower == 0.5, 0.0, t)
    t = np.where(p_arr > 0.5, -t, t)
    return t[()] if t.ndim == 0 else t


def t_logpdf(t, nu):
    """Log density of the standard t distribution."""
    _check_nu(nu)
    t = np.asarray(t, dtype=float)
    const = sc.gammaln(0.5 * (nu + 1)) - sc.gammaln(0.5 * nu) - 0.5 * math.log(nu * math.pi)
    return const - 0.5 * (nu + 1) * np.log1p(t * t / nu)


# ---------------------------------------------------------------------------
# truncated latent samplers


def _signs(side, shape):
    return np.broadcast_to(np.asarray(side, dtype=float), shape)


def _t_tail(a: np.ndarray, nu: float, gen: np.random.Generator) -> np.ndarray:
    """Exact draws of T | T > a for a > 0 by Pareto proposal and rejection.

    The density of log T is log-concave, so a Pareto proposal x^-(k+1) with
    k = (nu+1) a^2 / (nu+a^2) - 1 (the log-slope at a) is a tangent envelope
    and stays efficient for every nu. Where that k is not positive (a <= 1)
    the index k = nu is used, whose acceptance ratio increases to one.
    """
    a_flat = np.asarray(a, dtype=float).ravel()
    k_all = (nu + 1.0) * a_flat * a_flat / (nu + a_flat * a_flat) - 1.0
    tangent_all = k_all > 0
    k_all = np.where(tangent_all, k_all, nu)
    out = np.empty(a_flat.size)
    todo = np.arange(a_flat.size)
    while todo.size:
        aa, k, tangent = a_flat[todo], k_all[todo], tangent_all[todo]
        x = aa * gen.random(todo.size) ** (-1.0 / k)
        log_t = 0.5 * (nu + 1) * (np.log(x * x) - np.log(nu + x * x))  # k = nu envelope
        log_r = (k + 1) * np.log(x / aa) + 0.5 * (nu + 1) * (np.log(nu + aa * aa) - np.log(nu + x * x))
        log_acc = np.where(tangent, log_r, log_t)
        ok = np.log(gen.random(todo.size)) <= log_acc
        out[todo[ok]] = x[ok]
        todo = todo[~ok]
    return out.reshape(np.shape(a))


def _normal_tail(a: np.ndarray, gen: np.random.Generator) -> np.ndarray:
    """Exact draws of N(0,1) | X > a for a > 0 (exponential proposal, optimal rate)."""
    out = np.empty(a.size)
    a_flat = a.ravel()
    todo = np.arange(a.size)
    while todo.size:
        aa = a_flat[todo]
        rate = 0.5 * (aa + np.sqrt(aa * aa + 4.0))
        x = aa + gen.standard_exponential(todo.size) / rate
        ok = gen.random(todo.size) <= np.exp(-0.5 * (x - rate) ** 2)
        out[todo[ok]] = x[ok]
        todo = todo[~ok]
    return out.reshape(a.shape)


def _truncated(loc, sign, gen, cdf, ppf, tail, method):
    # z = loc + e with e symmetric; keep the side where sign * z > 0
    mass = cdf(sign * loc)
    small = mass < TAIL_MASS
    if method == "inverse" and small.any():
        raise TruncationUnderflowError(
            f"surviving mass {float(np.min(mass)):.3g} below {TAIL_MASS:g}; use the tail sampler"
        )
    u = gen.random(loc.shape)
    if not small.any():
        z = loc - sign * ppf(u * mass)
    else:
        z = np.empty(loc.shape)
        big = ~small
        z[big] = loc[big] - sign[big] * ppf(u[big] * mass[big])
        # sign * e > -sign * loc =: a > 0
        a = -sign[small] * loc[small]
        z[small] = loc[small] + sign[small] * tail(a)
    # rounding at u -> 1 can land on 0 or the wrong side
    wrong = sign * z <= 0.0
    if wrong.any():
        z[wrong] = sign[wrong] * np.finfo(float).tiny
    return z


def sample_truncated_t(loc, nu, side, rng: RngStream, method: str = "auto"):
    """Draw from t_nu(loc, 1) conditioned on the given side of zero.

    Inverse-CDF on the surviving mass; where that mass is below
    :data:`TAIL_MASS` an exact tail rejection sampler is used instead
    (``method="inverse"`` raises :class:`TruncationUnderflowError` there).

    ``loc`` and ``side`` broadcast; ``side`` is a :class:`TruncationSide`
    or an array of +1/-1.
    """
    _check_nu(nu)
    loc = np.asarray(loc, dtype=float)
    shape = np.broadcast_shapes(loc.shape, np.shape(side))
    loc = np.broadcast_to(loc, shape).astype(float)
    sign = _signs(side, shape)
    gen = rng.gen
    z = _truncated(
        np.atleast_1d(loc),
        np.atleast_1d(sign),
        gen,
        lambda v: sc.stdtr(nu, v),
        lambda q: sc.stdtrit(nu, q),
        lambda a: _t_tail(a, nu, gen),
        method,
    )
    return z.reshape(shape)[()] if shape == () else z.reshape(shape)


def sample_truncated_normal(loc, side, rng: RngStream, method: str = "auto"):
    """Draw from N(loc, 1) conditioned on the given side of zero."""
    loc = np.asarray(loc, dtype=float)
    shape = np.broadcast_shapes(loc.shape, np.shape(side))
    loc = np.broadcast_to(loc, shape).astype(float)
    sign = _signs(side, shape)
    gen = rng.gen
    z = _truncated(
        np.atleast_1d(loc),
        np.atleast_1d(sign),
        gen,
        sc.ndtr,
        sc.ndtri,
        lambda a: _normal_tail(a, gen),
        method,
    )
    return z.reshape(shape)[()] if shape == () else z.reshape(shape)


def sample_gamma(shape, rate, rng: RngStream, size=None):
    """Gamma draw(s) with density proportional to w^(shape-1) exp(-rate w)."""
    shape_a = np.asarray(shape, dtype=float)
    rate_a = np.asarray(rate, dtype=float)
    if np.any(~(shape_a > 0)) or np.any(~(rate_a > 0)):
        raise DomainError("gamma shape and rate must be positive")
    return rng.gen.standard_gamma(shape_a, size=size) / rate_a


def cholesky(precision: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor; raw LAPACK because the chains call this every step."""
    chol, info = lapack.dpotrf(precision, lower=1, clean=1)
    if info != 0:
        raise NotPositiveDefiniteError(f"matrix is not positive definite (potrf info={info})")
    return chol


def solve_lower(chol: np.ndarray, b: np.ndarray, transpose: bool = False) -> np.ndarray:
    """Solve ``L x = b`` (or ``L^T x = b``) for lower-triangular ``L``."""
    x, info = lapack.dtrtrs(chol, b, lower=1, trans=int(transpose))
    if info != 0:
        raise NotPositiveDefiniteError(f"singular triangular factor (trtrs info={info})")
    return x


def mvn_draw_from_cholesky(rhs: np.ndarray, chol: np.ndarray, noise: np.ndarray) -> np.ndarray:
    """``P^{-1} rhs + L^{-T} noise`` where ``P = L L^T``."""
    return solve_lower(chol, solve_lower(chol, rhs) + noise, transpose=True)


def sample_mvn_from_precision(rhs, precision, rng: RngStream) -> np.ndarray:
    """Draw from N(precision^-1 rhs, precision^-1) by factor and solve.

    Raises
    ------
    NotPositiveDefiniteError
        If ``precision`` has no Cholesky factor.
    """
    rhs = np.asarray(rhs, dtype=float)
    precision = np.asarray(precision, dtype=float)
    chol = cholesky(precision)
    return mvn_draw_from_cholesky(rhs, chol, rng.gen.standard_normal(rhs.shape[0]))


def draw_t_latents(loc: np.ndarray, sign: np.ndarray, nu: float, gen: np.random.Generator):
    """Hot-path version of :func:`sample_truncated_t` for 1-d float arrays."""
    return _truncated(
        loc,
        sign,
        gen,
        lambda v: sc.stdtr(nu, v),
        lambda q: sc.stdtrit(nu, q),
        lambda a: _t_tail(a, nu, gen),
        "auto",
    )


def draw_normal_latents(loc: np.ndarray, sign: np.ndarray, gen: np.random.Generator):
    """Hot-path version of :func:`sample_truncated_normal` for 1-d float arrays."""
    return _truncated(loc, sign, gen, sc.ndtr, sc.ndtri, lambda a: _normal_tail(a, gen), "auto")
