"""Numerical checks of the inequalities and identities behind the trace-class
property, plus Monte Carlo estimates of the kernel diagonal and trace integral.

Every bound check returns a :class:`BoundCheckReport` instead of raising, so a
suite run can collect all failures. Margins are relative: ``1 - quantity/bound``
(computed in log space), so ``pass`` means ``margin >= -MARGIN_TOL``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import special as sc

from .linalg import (
    Dataset,
    DimensionError,
    Prior,
    omega_closed_form,
    omega_direct,
    sigma_lambda,
    singular_values,
)
from .special import DomainError, RngStream, draw_normal_latents, draw_t_latents, t_logcdf

MARGIN_TOL = 1e-12
TRUNCATION = 1e-14  # integrand cut-off relative to its peak
OMEGA_REL_TOL = 1e-8
EIG_UPPER_TOL = 1e-10
UNIT_EIG_TOL = 1e-8
# absolute allowance for quadrature error where the Monte Carlo SE is exactly zero
QUAD_FLOOR = 1e-10

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class BoundCheckReport:
    name: str
    grid: str
    worst_margin: float
    passed: bool
    worst_point: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TraceEstimate:
    estimate: float
    se: float
    outer_nodes: int
    inner_draws: int
    instance: str
    domain: tuple = ()

    def __post_init__(self):
        if not (self.estimate >= 0 and self.se >= 0):
            raise ValueError("trace estimate and its standard error must be nonnegative")

    def to_dict(self) -> dict:
        return asdict(self)


def _rel_margin(log_quantity, log_bound):
    """``1 - quantity / bound`` from logs; negative means the bound is violated."""
    return -np.expm1(np.asarray(log_quantity) - np.asarray(log_bound))


def _log_kappa_m(nu: float, m: float) -> float:
    return (
        sc.gammaln(0.5 * (nu + 1.0))
        + math.log(nu - m)
        + (0.5 * nu - 1.0) * math.log(m)
        - math.log(2.0 * math.sqrt(math.pi))
        - sc.gammaln(0.5 * nu)
    )


def kappa_m(nu: float, m: float) -> float:
    """``Gamma((nu+1)/2) (nu-m) m^(nu/2-1) / (2 sqrt(pi) Gamma(nu/2))`` for ``0 < m < nu``."""
    if not (np.isfinite(nu) and nu > 0):
        raise DomainError(f"nu must be positive, got {nu}")
    if not 0 < m < nu:
        raise DomainError(f"need 0 < m < nu, got m={m}, nu={nu}")
    return math.exp(_log_kappa_m(float(nu), float(m)))


def kappa(nu: float) -> float:
    """``kappa_m(nu, 1)``, the constant of the t survival-function bound (nu > 2)."""
    if not (np.isfinite(nu) and nu > 2):
        raise DomainError(f"kappa needs nu > 2, got {nu}")
    return kappa_m(nu, 1.0)


def _worst(name, grid, margins, points: dict, details=None) -> BoundCheckReport:
    margins = np.asarray(margins, dtype=float)
    k = int(np.argmin(margins))
    worst = float(margins[k])
    return BoundCheckReport(
        name=name,
        grid=grid,
        worst_margin=worst,
        passed=bool(worst >= -MARGIN_TOL),
        worst_point={key: float(np.asarray(val)[k]) for key, val in points.items()},
        details=details or {},
    )


def check_mills_bound(nu: float, m: float, t_grid, kappa_scale: float = 1.0) -> list[BoundCheckReport]:
    """Check both survival-function bounds at every ``t`` of the grid.

    General form: ``1 / ((1 - F(t)) (t^2+nu)^((nu-1)/2)) <= sqrt(t^2+nu-m) / kappa_m``
    Simple form:  ``1 / (1 - F(t)) <= (t^2+nu)^(nu/2) / kappa``

    ``kappa_scale`` multiplies both constants; values above 1 give a
    falsified bound and exist for negative controls.

    Returns two reports (general, simple).
    """
    if not nu > 2:
        raise DomainError(f"nu must exceed 2, got {nu}")
    t = np.asarray(t_grid, dtype=float).ravel()
    if t.size == 0 or np.any(~(t > 0)):
        raise DomainError("t grid must be nonempty and strictly positive")
    log_surv = t_logcdf(-t, nu)  # log(1 - F(t))
    log_t2nu = np.log(t * t + nu)
    scale = math.log(kappa_scale)
    grid = f"{t.size} points in [{t.min():.3g}, {t.max():.3g}], nu={nu:g}, m={m:g}"

    log_q = -log_surv - 0.5 * (nu - 1.0) * log_t2nu
    log_b = 0.5 * np.log(t * t + nu - m) - _log_kappa_m(nu, m) - scale
    general = _worst("mills_general", grid, _rel_margin(log_q, log_b), {"t": t}, {"nu": nu, "m": m, "kappa_scale": kappa_scale})

    log_q = -log_surv
    log_b = 0.5 * nu * log_t2nu - _log_kappa_m(nu, 1.0) - scale
    simple = _worst("mills_simple", grid, _rel_margin(log_q, log_b), {"t": t}, {"nu": nu, "kappa_scale": kappa_scale})
    return [general, simple]


def check_step4_bound(W, c_tilde, theta_samples, nu: float, y=None) -> BoundCheckReport:
    """Check the product bound on reciprocal likelihood factors at each ``theta``.

    With ``a_i = w_i'(theta + c_tilde)`` the left side is
    ``prod_{y_i=0} 1/(1-F(a_i)) * prod_{y_i=1} 1/F(a_i)`` and the bound is
    ``prod_i (2 + (a_i^2 + nu)^(nu/2) / kappa)``. Also checked: the same
    product with every ``a_i^2`` replaced by ``(theta+c)'W'W(theta+c)``,
    which dominates it because ``a_i^2`` never exceeds that quadratic form.

    ``y=None`` takes the larger of the two factors for every i, so the
    check covers all response vectors at once.
    """
    if not nu > 2:
        raise DomainError(f"nu must exceed 2, got {nu}")
    W = np.asarray(W, dtype=float)
    c = np.asarray(c_tilde, dtype=float)
    theta = np.atleast_2d(np.asarray(theta_samples, dtype=float))
    n, p = W.shape
    if c.shape != (p,) or theta.shape[1] != p:
        raise DimensionError(f"W is {W.shape}, c_tilde {c.shape}, theta samples {theta.shape}")
    v = theta + c
    a = v @ W.T  # (m, n)
    if y is None:
        signed = -np.abs(a)
    else:
        y = np.asarray(y)
        if y.shape != (n,):
            raise DimensionError(f"y has shape {y.shape}, expected ({n},)")
        signed = np.where(y == 1, a, -a)  # 1/F(a) for y=1, 1/F(-a) for y=0
    log_lhs = -np.sum(t_logcdf(signed, nu), axis=1)
    log_k = _log_kappa_m(nu, 1.0)

    def log_factor(sq):
        # log(2 + (sq + nu)^(nu/2) / kappa)
        return np.logaddexp(math.log(2.0), 0.5 * nu * np.log(sq + nu) - log_k)

    log_rhs = np.sum(log_factor(a * a), axis=1)
    quad = np.einsum("mi,mi->m", v @ (W.T @ W), v)
    log_rhs_quad = n * log_factor(quad)
    # a_i^2 <= v'W'Wv; the slack is scaled by |v|^2 |W|_F^2, the size of the
    # rounding error in either evaluation (for n = 1 the two sides are equal)
    scale = np.einsum("mi,mi->m", v, v) * np.sum(W * W)
    cs = np.min(quad[:, None] - a * a, axis=1) / np.maximum(scale, np.finfo(float).tiny)

    m_prod = _rel_margin(log_lhs, log_rhs)
    m_quad = _rel_margin(log_rhs, log_rhs_quad)
    margins = np.minimum(np.minimum(m_prod, m_quad), cs)
    rep = _worst(
        "step4_product",
        f"{theta.shape[0]} theta samples, n={n}, p={p}, nu={nu:g}",
        margins,
        {"sample": np.arange(theta.shape[0])},
        {
            "worst_product_margin": float(m_prod.min()),
            "worst_quadratic_margin": float(m_quad.min()),
            "worst_cauchy_schwarz_margin": float(cs.min()),
            "side": "worst" if y is None else "given",
        },
    )
    return rep


def check_omega_spectrum(W, lam) -> BoundCheckReport:
    """Spectral checks on Omega(Lambda) for one (W, lambda) pair.

    * eigenvalues of the directly evaluated matrix lie in ``(0, 1 + 1e-10]``;
    * direct and closed form agree to ``1e-8`` relative Frobenius error;
    * ``det Sigma(Lambda) <= (2 d_max^2 + 1)^min(n, p)``;
    * ``d_max^2 <= eig_max(W W') * lambda_max``;
    * the count of unit eigenvalues (within 1e-8) equals ``p - rank(Lambda^1/2 W)``,
      which is ``p - n`` for a generic wide design.

    The report margin is the smallest of the individual signed slacks.
    """
    W = np.asarray(W, dtype=float)
    lam = np.asarray(lam, dtype=float)
    n, p = W.shape
    direct = omega_direct(W, lam)
    closed = omega_closed_form(W, lam)
    eig = np.linalg.eigvalsh(direct)
    rel = float(np.linalg.norm(direct - closed) / np.linalg.norm(closed))

    d = singular_values(W, lam)
    d_max = float(d.max()) if d.size else 0.0
    sign, logdet_sigma = np.linalg.slogdet(sigma_lambda(W, lam))
    log_det_bound = min(n, p) * math.log1p(2.0 * d_max**2)
    c13 = float(np.linalg.eigvalsh(W @ W.T).max()) * float(lam.max())
    rank = int(np.sum(np.abs(1.0 / (2.0 * d**2 + 1.0) - 1.0) > UNIT_EIG_TOL))
    unit = int(np.sum(np.abs(eig - 1.0) <= UNIT_EIG_TOL))

    slack = {
        "eig_min_positive": float(eig.min()),
        "eig_max_le_1": float(1.0 + EIG_UPPER_TOL - eig.max()),
        "closed_form_agreement": OMEGA_REL_TOL - rel,
        "det_sigma_bound": float(_rel_margin(logdet_sigma, log_det_bound)) if sign > 0 else -1.0,
        "dmax_bound": float(_rel_margin(2.0 * math.log(d_max), math.log(c13))) if d_max > 0 else 1.0,
        "unit_eigenvalues": 0.0 if unit == p - rank else -1.0,
    }
    key = min(slack, key=slack.get)
    return BoundCheckReport(
        name="omega_spectrum",
        grid=f"n={n}, p={p}",
        worst_margin=slack[key],
        passed=bool(slack[key] >= -MARGIN_TOL),
        worst_point={"n": n, "p": p},
        details={
            "worst_check": key,
            "slack": slack,
            "eig_min": float(eig.min()),
            "eig_max": float(eig.max()),
            "relative_frobenius_error": rel,
            "unit_eigenvalues": unit,
            "expected_unit_eigenvalues": p - rank,
            "d_max": d_max,
        },
    )


def _draw_latents(eta, dataset: Dataset, nu, gen, draws):
    """Latent draws given each row of ``eta`` (k, n): arrays of shape (k, draws, n)."""
    loc = np.repeat(eta[:, None, :], draws, axis=1)
    sign = np.broadcast_to(dataset.sign, loc.shape)
    if nu is None:
        return draw_normal_latents(loc, sign, gen), np.ones(loc.shape)
    z = draw_t_latents(loc, sign, nu, gen)
    r = z - loc
    lam = gen.standard_gamma(0.5 * (nu + 1.0), size=loc.shape) / (0.5 * (nu + r * r))
    return z, lam


def _conditional_logpdf(beta, dataset: Dataset, prior: Prior, z, lam):
    """log N(beta_k; P^-1 b, P^-1) for every latent draw; beta is (k, p), z and lam (k, m, n)."""
    X = dataset.X
    prec = np.einsum("ni,kmn,nj->kmij", X, lam, X) + prior.sigma_a
    rhs = (lam * z) @ X + prior.precision_mean
    chol = np.linalg.cholesky(prec)
    # (beta - mu)'P(beta - mu) = |L'beta - L^-1 rhs|^2
    half = np.linalg.solve(chol, rhs[..., None])[..., 0]
    lt_beta = np.einsum("kmij,ki->kmj", chol, beta)
    dev = lt_beta - half
    logdet = np.sum(np.log(np.diagonal(chol, axis1=-2, axis2=-1)), axis=-1)
    return -0.5 * dataset.p * _LOG_2PI + logdet - 0.5 * np.sum(dev * dev, axis=-1)


def _kernel_diag_batch(points, dataset, prior, nu, inner_draws, rng, chunk=None):
    """``kernel_diag_mc`` at each row of ``points``; independent draws per point."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    chunk = chunk or max(1, 200_000 // (inner_draws * dataset.n))
    est = np.empty(len(points))
    se = np.empty(len(points))
    for s in range(0, len(points), chunk):
        b = points[s : s + chunk]
        z, lam = _draw_latents(b @ dataset.XT, dataset, nu, rng.gen, inner_draws)
        dens = np.exp(_conditional_logpdf(b, dataset, prior, z, lam))
        est[s : s + chunk] = dens.mean(axis=1)
        se[s : s + chunk] = dens.std(axis=1, ddof=1) / math.sqrt(inner_draws)
    return est, se


def kernel_diag_mc(beta, dataset: Dataset, prior: Prior, nu, inner_draws: int, rng: RngStream):
    """Rao-Blackwellised Monte Carlo estimate of the DA kernel diagonal ``k(beta, beta)``.

    Draws ``(z, lambda)`` from their conditionals given ``beta`` with the
    chains' own samplers and averages the exact normal density of the beta
    conditional at the same ``beta``. ``nu=None`` gives the probit kernel.

    Returns
    -------
    (estimate, se)
        The average and its standard error ``sd / sqrt(inner_draws)``.
    """
    if int(inner_draws) < 100:
        raise ValueError(f"inner_draws must be at least 100, got {inner_draws}")
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (dataset.p,) or prior.p != dataset.p:
        raise DimensionError(f"beta has shape {beta.shape}, dataset p={dataset.p}, prior p={prior.p}")
    est, se = _kernel_diag_batch(beta[None], dataset, prior, nu, int(inner_draws), rng)
    return float(est[0]), float(se[0])


def _grid_points(lo, hi, k):
    axes = [np.linspace(a, b, k) for a, b in zip(lo, hi)]
    return axes, np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)


def _find_domain(dataset, prior, nu, rng, pilot_draws=200, pilot_nodes=25, max_doublings=12):
    """Box outside which the pilot integrand is below ``TRUNCATION`` of its peak."""
    p = dataset.p
    centre = prior.beta_a
    sd = np.sqrt(np.diag(np.linalg.inv(prior.sigma_a)))
    k = pilot_nodes if p == 1 else max(9, pilot_nodes // 2)
    radius = 8.0
    for _ in range(max_doublings):
        lo, hi = centre - radius * sd, centre + radius * sd
        axes, pts = _grid_points(lo, hi, k)
        g, _ = _kernel_diag_batch(pts, dataset, prior, nu, pilot_draws, rng)
        g = g.reshape((k,) * p)
        peak = g.max()
        edge = max(
            max(np.take(g, 0, axis=a).max(), np.take(g, -1, axis=a).max()) for a in range(p)
        )
        if edge < TRUNCATION * peak:
            break
        radius *= 2.0
    else:
        raise RuntimeError("could not bracket the kernel diagonal; integrand tails too heavy")
    keep = g >= TRUNCATION * peak
    box_lo, box_hi = [], []
    for a in range(p):
        other = tuple(b for b in range(p) if b != a)
        idx = np.flatnonzero(keep.any(axis=other) if other else keep)
        step = axes[a][1] - axes[a][0]
        box_lo.append(axes[a][idx[0]] - step)
        box_hi.append(axes[a][idx[-1]] + step)
    return np.array(box_lo), np.array(box_hi)


def trace_mc(dataset: Dataset, prior: Prior, nu, outer_nodes: int, inner_draws: int, rng: RngStream) -> TraceEstimate:
    """Estimate ``I = integral of k(beta, beta) d beta`` for p <= 2.

    The domain is a box found by a pilot scan (integrand below 1e-14 of its
    peak outside it). Gauss-Legendre nodes are used per axis (a tensor grid
    for p = 2) and each node carries an independent kernel-diagonal
    estimate, so ``se = sqrt(sum w_k^2 se_k^2)``.
    """
    p = dataset.p
    if p > 2:
        raise DimensionError(f"trace_mc is limited to p <= 2, got p={p}")
    if int(outer_nodes) < 2:
        raise ValueError("outer_nodes must be at least 2")
    lo, hi = _find_domain(dataset, prior, nu, rng.spawn(1))
    x, w = np.polynomial.legendre.leggauss(int(outer_nodes))
    axes = [0.5 * (b - a) * x + 0.5 * (a + b) for a, b in zip(lo, hi)]
    weights = [0.5 * (b - a) * w for a, b in zip(lo, hi)]
    pts = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    wts = np.prod(np.stack([g.ravel() for g in np.meshgrid(*weights, indexing="ij")], axis=1), axis=1)
    g, se = _kernel_diag_batch(pts, dataset, prior, nu, int(inner_draws), rng)
    label = "probit" if nu is None else f"robit nu={nu:g}"
    return TraceEstimate(
        estimate=float(np.sum(wts * g)),
        se=float(np.sqrt(np.sum((wts * se) ** 2))),
        outer_nodes=int(outer_nodes),
        inner_draws=int(inner_draws),
        instance=f"n={dataset.n}, p={p}, {label}, prior={prior.label}",
        domain=tuple((float(a), float(b)) for a, b in zip(lo, hi)),
    )


def random_omega_instance(gen: np.random.Generator, wide: bool, max_dim: int = 12):
    """Random ``(W, lambda)`` with ``n >= p`` (``wide=False``) or ``n < p``, dims <= max_dim."""
    if wide:
        p = int(gen.integers(2, max_dim + 1))
        n = int(gen.integers(1, p))
    else:
        p = int(gen.integers(1, max_dim + 1))
        n = int(gen.integers(p, max_dim + 1))
    W = gen.standard_normal((n, p)) * 10.0 ** gen.uniform(-1.0, 1.0)
    lam = gen.gamma(2.0, 1.0, size=n) + 1e-3
    return W, lam


@dataclass(frozen=True)
class TraceInstanceSpec:
    n: int = 2
    p: int = 1
    nu: float = 3.0

    def __post_init__(self):
        if not (1 <= self.n <= 3 and 1 <= self.p <= 2 and self.nu > 2):
            raise ValueError(f"trace instances need 1 <= n <= 3, 1 <= p <= 2, nu > 2; got {self}")

    @classmethod
    def parse(cls, text: str) -> "TraceInstanceSpec":
        """Parse ``"n=2,p=1,nu=3"``."""
        kw = {}
        for part in filter(None, (s.strip() for s in text.split(","))):
            key, sep, val = part.partition("=")
            if not sep or key not in ("n", "p", "nu"):
                raise ValueError(f"bad trace instance field {part!r}; expected n=, p=, nu=")
            kw[key] = float(val) if key == "nu" else int(val)
        return cls(**kw)


@dataclass(frozen=True)
class SuiteConfig:
    nus: tuple = (2.1, 2.5, 3.0, 5.0, 10.0, 30.0)
    grid_points: int = 500
    t_min: float = 1e-3
    t_max: float = 1e2
    omega_instances: int = 100
    step4_instances: int = 20
    theta_samples: int = 1000
    trace_instances: tuple = (TraceInstanceSpec(),)
    seeds: int = 2
    outer_nodes: int = 128
    outer_nodes_2d: int = 32  # per axis, for p = 2 instances
    inner_draws: int = 1000
    seed: int = 0
    falsify: str | None = None  # "mills" multiplies kappa by 10


@dataclass
class VerificationReport:
    checks: list
    traces: list
    config: dict

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks) and all(t["passed"] for t in self.traces)

    def failures(self) -> list:
        return [c for c in self.checks + self.traces if not c["passed"]]

    def to_dict(self) -> dict:
        return {"passed": self.passed, "failures": self.failures(), "checks": self.checks,
                "traces": self.traces, "config": self.config}


def mills_m_values(nu: float) -> tuple:
    """``nu/4``, ``nu/2`` and 1 (the last only when below nu)."""
    return tuple(m for m in (nu / 4.0, nu / 2.0, 1.0) if m < nu)


def _summarise(reports: list[BoundCheckReport], name: str, grid: str) -> dict:
    worst = min(reports, key=lambda r: r.worst_margin)
    return {
        "name": name,
        "grid": grid,
        "count": len(reports),
        "failed": sum(not r.passed for r in reports),
        "worst_margin": worst.worst_margin,
        "passed": all(r.passed for r in reports),
        "worst": worst.to_dict(),
    }


def _agree(a: TraceEstimate, b: TraceEstimate) -> bool:
    return abs(a.estimate - b.estimate) <= 3.0 * math.hypot(a.se, b.se)


def run_suite(cfg: SuiteConfig = SuiteConfig()) -> VerificationReport:
    """Run every bound/identity check and the tiny-instance trace estimates."""
    from .datasets import trace_instance, zero_design  # datasets imports linalg only

    checks = []
    root = np.random.SeedSequence(cfg.seed)
    gen = np.random.default_rng(root.spawn(1)[0])
    scale = 10.0 if cfg.falsify == "mills" else 1.0
    t = np.geomspace(cfg.t_min, cfg.t_max, cfg.grid_points)
    mills = [r for nu in cfg.nus for m in mills_m_values(nu) for r in check_mills_bound(nu, m, t, kappa_scale=scale)]
    checks.append(_summarise(mills, "mills_bounds", f"{cfg.grid_points} t points, nu in {list(cfg.nus)}, m in (nu/4, nu/2, 1)"))

    for wide in (False, True):
        reps = []
        for _ in range(cfg.omega_instances):
            W, lam = random_omega_instance(gen, wide)
            r = check_omega_spectrum(W, lam)
            if wide and r.details["unit_eigenvalues"] != W.shape[1] - W.shape[0]:
                r = BoundCheckReport(r.name, r.grid, -1.0, False, r.worst_point, r.details)
            reps.append(r)
        label = "n<p" if wide else "n>=p"
        checks.append(_summarise(reps, f"omega_spectrum_{'wide' if wide else 'tall'}", f"{cfg.omega_instances} random {label} instances"))

    reps = []
    for k in range(cfg.step4_instances):
        W, _ = random_omega_instance(gen, wide=bool(k % 2))
        c = gen.standard_normal(W.shape[1])
        theta = gen.standard_normal((cfg.theta_samples, W.shape[1])) * 10.0 ** gen.uniform(-1, 1)
        nu = float(cfg.nus[k % len(cfg.nus)])
        reps.append(check_step4_bound(W, c, np.vstack([theta, -c]), nu))
    checks.append(_summarise(reps, "step4_product", f"{cfg.step4_instances} random instances x {cfg.theta_samples + 1} theta"))

    traces = []
    zero = zero_design()
    est = trace_mc(zero, Prior.identity(1), 3.0, cfg.outer_nodes, cfg.inner_draws, RngStream(cfg.seed, 100))
    err = abs(est.estimate - 1.0)
    traces.append({
        "name": "trace_zero_design",
        "estimates": [est.to_dict()],
        "truth": 1.0,
        "abs_error": err,
        "tolerance": 3.0 * est.se + QUAD_FLOOR,
        "passed": bool(err <= 3.0 * est.se + QUAD_FLOOR),
    })
    for k, spec in enumerate(cfg.trace_instances):
        ds = trace_instance(spec.n, spec.p)
        prior = Prior.identity(spec.p)
        nodes = cfg.outer_nodes if spec.p == 1 else cfg.outer_nodes_2d
        ests = [
            trace_mc(ds, prior, spec.nu, nodes, cfg.inner_draws, RngStream(cfg.seed, 200 + 10 * k + s))
            for s in range(cfg.seeds)
        ]
        refined = trace_mc(ds, prior, spec.nu, 2 * nodes, cfg.inner_draws, RngStream(cfg.seed, 300 + k))
        seed_ok = all(_agree(ests[0], e) for e in ests[1:])
        refine_ok = _agree(ests[0], refined)
        traces.append({
            "name": f"trace_n{spec.n}_p{spec.p}_nu{spec.nu:g}",
            "estimates": [e.to_dict() for e in ests],
            "refined": refined.to_dict(),
            "seeds_agree": seed_ok,
            "stable_under_doubling": refine_ok,
            "passed": bool(seed_ok and refine_ok),
        })
    return VerificationReport(checks, traces, {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(cfg).items()})
