"""Verified floating-point orbits of one-dimensional maps with adaptive precision."""

from .ball import FPRepr, StepBoundParams, apply_feasible_map, initial_repr, prec
from .engine import (Mode, OrbitRun, RunConfig, Status, Strategy, find_minimal_mantissa,
                     run_inner, run_naive_interval, trajectory)
from .errors import (DomainError, DomainEscape, InvalidParameter, InvalidPrecision, InvalidShift,
                     NotConverged, OracleTooLarge, ParseError, PrecisionTooSmall, VerorbitError)
from .interval import Interval, deriv_range_bound, ival_arith
from .mp import DOWN, NEAREST, UP, MPFloat, gl
from .systems import FeasibleMap, LogisticVariant, make_logistic, named_map, shift_system

__version__ = "0.1.0"

__all__ = [
    "DOWN", "NEAREST", "UP", "MPFloat", "gl", "Interval", "deriv_range_bound", "ival_arith",
    "FPRepr", "StepBoundParams", "apply_feasible_map", "initial_repr", "prec",
    "FeasibleMap", "LogisticVariant", "make_logistic", "named_map", "shift_system",
    "Mode", "OrbitRun", "RunConfig", "Status", "Strategy", "find_minimal_mantissa",
    "run_inner", "run_naive_interval", "trajectory",
    "DomainError", "DomainEscape", "InvalidParameter", "InvalidPrecision", "InvalidShift",
    "NotConverged", "OracleTooLarge", "ParseError", "PrecisionTooSmall", "VerorbitError",
]
