"""Verified orbit computation and the search for the minimal mantissa length."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

from . import mp
from .ball import FPRepr, StepBoundParams, apply_feasible_map, initial_repr, prec
from .interval import Interval
from .mp import ERR_BITS, NEAREST, UP, MPFloat


class Mode(enum.Enum):
    MEAN_VALUE = "meanvalue"
    NAIVE_INTERVAL = "naive"


class Strategy(enum.Enum):
    INCREMENT_BY_ONE = "increment"
    DOUBLE_THEN_BISECT = "double"


class Status(enum.Enum):
    CONVERGED = "Converged"
    CAP_EXCEEDED = "PrecisionCapExceeded"


@dataclass(frozen=True)
class RunConfig:
    x0: str
    N: int
    p: int
    m0: int = 24
    m_max: int = 1 << 16
    mode: Mode = Mode.MEAN_VALUE
    strategy: Strategy = Strategy.DOUBLE_THEN_BISECT
    domain_clamp: bool = True
    wilkinson: bool = False

    def __post_init__(self):
        if self.N < 0:
            raise ValueError(f"N must be >= 0, got {self.N}")
        if not 2 <= self.m0 <= self.m_max:
            raise ValueError(f"need 2 <= m0 <= m_max, got m0={self.m0}, m_max={self.m_max}")
        mp.parse_decimal(self.x0)


@dataclass(frozen=True)
class Step:
    n: int
    fl: MPFloat
    err: MPFloat
    enclosure: Interval | None = field(default=None, compare=False, repr=False)

    def record(self) -> dict:
        return {
            "n": self.n,
            "fl_hex": mp.to_hex(self.fl),
            "err_hex": mp.to_hex(self.err),
            "fl_dec": mp.to_decimal(self.fl),
            "err_dec": mp.to_decimal_up(self.err),
        }


@dataclass(frozen=True)
class Pass:
    m: int
    failure: int | None

    @property
    def ok(self) -> bool:
        return self.failure is None


@dataclass
class OrbitRun:
    steps: list
    m_used: int | None
    m_min: int | None
    status: Status
    pass_count: int
    passes: list = field(default_factory=list)
    mode: Mode = Mode.MEAN_VALUE

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    def summary(self) -> dict:
        return {"m_min": self.m_min, "status": self.status.value, "pass_count": self.pass_count}


def run_inner(cfg: RunConfig, m: int, fmap) -> tuple[list, int | None]:
    """Mean value iteration at fixed ``m``; stops at the first failed ``prec``."""
    params = StepBoundParams(fmap.K, m, cfg.wilkinson, cfg.domain_clamp)
    r = initial_repr(cfg.x0, m, params)
    steps = []
    for n in range(cfg.N + 1):
        if not prec(r, cfg.p):
            return steps, n
        steps.append(Step(n, r.fl, r.err))
        if n < cfg.N:
            r = apply_feasible_map(r, fmap, params)
    return steps, None


def midpoint_repr(I: Interval, m: int) -> FPRepr:
    """Nearest ``m``-bit midpoint with an error covering the whole interval."""
    x = mp.scale2(mp.add(I.lo, I.hi, m, NEAREST), -1)
    e = mp.max_mp(mp.sub(x, I.lo, ERR_BITS, UP), mp.sub(I.hi, x, ERR_BITS, UP))
    return FPRepr(x, e)


def run_naive_inner(cfg: RunConfig, m: int, fmap) -> tuple[list, int | None]:
    """Natural interval extension of the map at ``m`` bits, outward rounded."""
    I = Interval.enclose(cfg.x0, m)
    steps = []
    for n in range(cfg.N + 1):
        r = midpoint_repr(I, m)
        if not prec(r, cfg.p):
            return steps, n
        steps.append(Step(n, r.fl, r.err, I))
        if n < cfg.N:
            I = fmap.eval_interval(I, m)
    return steps, None


def trajectory(fmap, x0: str, N: int, m: int, domain_clamp: bool = True) -> list[FPRepr]:
    """Mean value recursion for ``N`` steps with no ``prec`` cut-off."""
    params = StepBoundParams(fmap.K, m, domain_clamp=domain_clamp)
    r = initial_repr(x0, m, params)
    out = [r]
    for _ in range(N):
        r = apply_feasible_map(r, fmap, params)
        out.append(r)
    return out


def _inner_for(cfg: RunConfig):
    return run_naive_inner if cfg.mode is Mode.NAIVE_INTERVAL else run_inner


def find_minimal_mantissa(cfg: RunConfig, fmap, observer=None) -> OrbitRun:
    """Smallest ``m >= m0`` for which every orbit point passes ``prec``.

    ``INCREMENT_BY_ONE`` tries ``m0, m0 + 1, ...``.  ``DOUBLE_THEN_BISECT``
    doubles until a pass succeeds and bisects between the last failure and
    the first success; it relies on success being upward closed in ``m``.
    ``observer(m, steps, failure)`` is called after every pass.
    """
    inner = _inner_for(cfg)
    passes: list[Pass] = []
    partial: list = []

    def attempt(m):
        nonlocal partial
        steps, fail = inner(cfg, m, fmap)
        passes.append(Pass(m, fail))
        if observer is not None:
            observer(m, steps, fail)
        if fail is None:
            return steps
        if len(steps) >= len(partial):
            partial = steps
        return None

    def capped():
        return OrbitRun(partial, None, None, Status.CAP_EXCEEDED, len(passes), passes, cfg.mode)

    m = cfg.m0
    if cfg.strategy is Strategy.INCREMENT_BY_ONE:
        while True:
            steps = attempt(m)
            if steps is not None:
                return OrbitRun(steps, m, m, Status.CONVERGED, len(passes), passes, cfg.mode)
            if m >= cfg.m_max:
                return capped()
            m += 1

    best = attempt(m)
    last_fail = None
    while best is None:
        last_fail = m
        if m >= cfg.m_max:
            return capped()
        m = min(2 * m, cfg.m_max)
        best = attempt(m)
    hi = m
    if last_fail is not None:
        lo = last_fail
        while hi - lo > 1:
            mid = (lo + hi) // 2
            steps = attempt(mid)
            if steps is None:
                lo = mid
            else:
                hi, best = mid, steps
    return OrbitRun(best, hi, hi, Status.CONVERGED, len(passes), passes, cfg.mode)


def run_naive_interval(cfg: RunConfig, fmap) -> OrbitRun:
    return find_minimal_mantissa(replace(cfg, mode=Mode.NAIVE_INTERVAL), fmap)


def run_fixed(cfg: RunConfig, m: int, fmap) -> tuple[list, int | None]:
    """The inner loop of ``cfg.mode`` at a fixed mantissa length."""
    return _inner_for(cfg)(cfg, m, fmap)
