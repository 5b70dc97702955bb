"""Loss-of-significance rates, Ljapunov averages, bound checks and sweeps."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from functools import partial
from typing import Iterable, Iterator

import mpmath

from .engine import Mode, OrbitRun, RunConfig, Strategy, find_minimal_mantissa
from .errors import NotConverged, VerorbitError
from .mp import ERR_BITS, MPFloat
from .systems import named_map

LN2 = math.log(2)
DEFAULT_ALPHA = Fraction(1, 1 << 30)
ALPHA_GRID = (Fraction(1, 1 << 10), Fraction(1, 1 << 20), Fraction(1, 1 << 30))

CSV_HEADER = "mu,x0,N,p,mode,m_min,sigma_est,lambda_est,lambda_over_ln2,alpha,status"


@dataclass(frozen=True)
class LossRateEstimate:
    m_min: int
    N: int
    p: int
    mode: Mode

    @property
    def sigma_est(self) -> Fraction:
        return Fraction(self.m_min, self.N)


@dataclass(frozen=True)
class LyapunovEstimate:
    partial_sum: float
    n: int
    lambda_n: float
    alpha: Fraction
    orbit_p: int
    min_summand: float = field(default=math.inf, compare=False)


def loss_rate(run: OrbitRun, cfg: RunConfig) -> LossRateEstimate:
    if not run.converged:
        raise NotConverged(f"loss rate needs a converged run, got {run.status.value}")
    if cfg.N < 1:
        raise ValueError("loss rate needs N >= 1")
    return LossRateEstimate(run.m_min, cfg.N, cfg.p, run.mode)


def verified_orbit(fmap, x0: str, n: int, orbit_p: int = 10, **cfg) -> list[MPFloat]:
    """``x_0 .. x_{n-1}``, each with relative error at most ``10**-orbit_p``."""
    rc = RunConfig(x0, n - 1, orbit_p, mode=Mode.MEAN_VALUE, **cfg)
    run = find_minimal_mantissa(rc, fmap)
    if not run.converged:
        raise NotConverged(f"orbit at p={orbit_p} did not converge ({run.status.value})")
    return [s.fl for s in run.steps]


def _ln(x: MPFloat) -> mpmath.mpf:
    return mpmath.log(mpmath.mpf((x.significand, x.lsb)))


def lyapunov_from_orbit(fmap, orbit: list[MPFloat], alpha=0, orbit_p: int = 10) -> LyapunovEstimate:
    """Average of ``eta_alpha(|f'(x_k)|)`` over the given orbit points.

    ``alpha = 0`` means the untruncated logarithm; a zero derivative then
    yields ``-inf``.
    """
    alpha = Fraction(alpha)
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    n = len(orbit)
    if n < 1:
        raise ValueError("need at least one orbit point")
    with mpmath.workprec(ERR_BITS):
        ln_alpha = mpmath.log(mpmath.mpf(alpha.numerator) / alpha.denominator) if alpha else None
        total = mpmath.mpf(0)
        low = mpmath.inf
        for x in orbit:
            d = abs(fmap.deriv.value(x, ERR_BITS))
            if alpha and d < alpha:
                term = ln_alpha
            elif d.is_zero():
                term = -mpmath.inf
            else:
                term = _ln(d)
            low = min(low, term)
            total += term
        lam = total / n
    return LyapunovEstimate(float(total), n, float(lam), alpha, orbit_p, float(low))


def lyapunov_partial(fmap, x0: str, n: int, alpha=DEFAULT_ALPHA, orbit_p: int = 10, **cfg) -> LyapunovEstimate:
    return lyapunov_from_orbit(fmap, verified_orbit(fmap, x0, n, orbit_p, **cfg), alpha, orbit_p)


def lyapunov_estimates(fmap, x0: str, n: int, alphas: Iterable = ALPHA_GRID + (0,),
                       orbit_p: int = 10, **cfg) -> list[LyapunovEstimate]:
    """One verified orbit, several truncation levels."""
    orbit = verified_orbit(fmap, x0, n, orbit_p, **cfg)
    return [lyapunov_from_orbit(fmap, orbit, a, orbit_p) for a in alphas]


@dataclass(frozen=True)
class BoundReport:
    sigma_est: float
    lambda_over_ln2: float
    difference: float
    slack: float
    passed: bool

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{verdict} sigma_est={self.sigma_est:.6f} lambda/ln2={self.lambda_over_ln2:.6f} "
                f"diff={self.difference:+.6f} slack={self.slack}")


def bound_check(sigma: LossRateEstimate, lam: LyapunovEstimate, slack: float = 0.1) -> BoundReport:
    """Finite-N check of ``sigma >= lambda / ln 2`` with tolerance ``slack``."""
    s = float(sigma.sigma_est)
    lo2 = lam.lambda_n / LN2
    return BoundReport(s, lo2, s - lo2, slack, s >= lo2 - slack)


# -- sweeps -----------------------------------------------------------------


@dataclass(frozen=True)
class SweepGrid:
    mu_from: str
    mu_to: str
    mu_step: str
    x0: str = "0.22"
    N: int = 500
    p: int = 6
    mode: Mode = Mode.MEAN_VALUE
    variant: str = "factored"
    alpha: Fraction = DEFAULT_ALPHA
    orbit_p: int = 10
    m0: int = 24
    m_max: int = 1 << 16
    strategy: Strategy = Strategy.DOUBLE_THEN_BISECT
    shift: str | None = None
    exact_mu: bool = False
    domain_clamp: bool = True
    slack: float = 0.1


@dataclass(frozen=True)
class SweepRow:
    mu: str
    x0: str
    N: int
    p: int
    mode: str
    m_min: int | None
    sigma_est: float | None
    lambda_est: float | None
    lambda_over_ln2: float | None
    alpha: float
    status: str
    bound_ok: bool | None = None

    def as_dict(self) -> dict:
        return {
            "mu": self.mu, "x0": self.x0, "N": self.N, "p": self.p, "mode": self.mode,
            "m_min": self.m_min, "sigma_est": self.sigma_est, "lambda_est": self.lambda_est,
            "lambda_over_ln2": self.lambda_over_ln2, "alpha": self.alpha, "status": self.status,
            "bound_ok": self.bound_ok,
        }


def mu_grid(mu_from: str, mu_to: str, mu_step: str) -> list[str]:
    a, b, h = Decimal(mu_from), Decimal(mu_to), Decimal(mu_step)
    if h <= 0:
        raise ValueError("mu step must be positive")
    out = []
    k = 0
    while a + k * h <= b:
        out.append(format((a + k * h).normalize(), "f"))
        k += 1
    return out


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v) if math.isinf(v) else "%.17g" % v
    return str(v)


def row_to_csv(row: SweepRow) -> str:
    fields = (row.mu, row.x0, row.N, row.p, row.mode, row.m_min, row.sigma_est,
              row.lambda_est, row.lambda_over_ln2, row.alpha, row.status)
    return ",".join(_fmt(v) for v in fields)


def sweep_row(grid: SweepGrid, mu: str) -> SweepRow:
    """One grid point; failures land in ``status`` instead of raising."""
    base = dict(mu=mu, x0=grid.x0, N=grid.N, p=grid.p, mode=grid.mode.value, alpha=float(grid.alpha))
    knobs = dict(m0=grid.m0, m_max=grid.m_max, strategy=grid.strategy, domain_clamp=grid.domain_clamp)
    try:
        fmap = named_map("logistic", grid.variant, mu, exact_mu=grid.exact_mu, shift=grid.shift)
        cfg = RunConfig(grid.x0 if grid.shift is None else shifted_decimal(grid.x0, grid.shift),
                        grid.N, grid.p, mode=grid.mode, **knobs)
        run = find_minimal_mantissa(cfg, fmap)
        if not run.converged:
            return SweepRow(m_min=None, sigma_est=None, lambda_est=None, lambda_over_ln2=None,
                            status=run.status.value, **base)
        sigma = loss_rate(run, cfg)
        lam = lyapunov_partial(fmap, cfg.x0, grid.N, grid.alpha, grid.orbit_p, **knobs)
    except VerorbitError as exc:
        return SweepRow(m_min=None, sigma_est=None, lambda_est=None, lambda_over_ln2=None,
                        status=f"Error:{type(exc).__name__}", **base)
    rep = bound_check(sigma, lam, grid.slack)
    return SweepRow(m_min=sigma.m_min, sigma_est=float(sigma.sigma_est), lambda_est=lam.lambda_n,
                    lambda_over_ln2=rep.lambda_over_ln2, status=run.status.value,
                    bound_ok=rep.passed, **base)


def shifted_decimal(x0: str, M: str) -> str:
    return format((Decimal(x0) + Decimal(M)).normalize(), "f")


def sweep(grid: SweepGrid, jobs: int = 1) -> Iterator[SweepRow]:
    """Rows in increasing ``mu`` order, whatever the completion order."""
    mus = mu_grid(grid.mu_from, grid.mu_to, grid.mu_step)
    work = partial(sweep_row, grid)
    if jobs <= 1 or len(mus) <= 1:
        yield from map(work, mus)
        return
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        yield from ex.map(work, mus)
