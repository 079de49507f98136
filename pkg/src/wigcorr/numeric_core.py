"""Scaled arithmetic and quadrature primitives.

Everything downstream manipulates quantities of order N! * exp(2N) for N
up to a million, far outside double range, so the basic number type here
is a sign plus a natural-log magnitude. The quadrature helpers evaluate
line integrals of analytic, Gaussian-decaying integrands where a uniform
trapezoid rule converges geometrically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, NumericalConsistencyError

__all__ = [
    "ScaledReal",
    "QuadratureSpec",
    "scaled_add",
    "scaled_mul",
    "scaled_div",
    "scaled_from_real",
    "scaled_to_real_checked",
    "trapezoid_line",
    "central_diff",
    "mixed_central_diff",
]


@dataclass(frozen=True)
class ScaledReal:
    """A real number as sign * exp(log_mag).

    sign is -1, 0, or +1; sign 0 represents exactly zero and log_mag is
    ignored in that case (kept at 0.0 by the constructors here).
    """

    sign: int
    log_mag: float

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise DomainError(f"sign must be -1, 0, or +1, got {self.sign!r}")
        if self.sign != 0 and not math.isfinite(self.log_mag):
            raise DomainError(f"log_mag must be finite, got {self.log_mag!r}")

    def is_zero(self) -> bool:
        return self.sign == 0

    def log10_mag(self) -> float:
        """Base-10 log magnitude, for reporting. Requires sign != 0."""
        if self.sign == 0:
            raise DomainError("log10_mag of exact zero is undefined")
        return self.log_mag / math.log(10.0)


ZERO = ScaledReal(0, 0.0)
ONE = ScaledReal(1, 0.0)


def scaled_from_real(x: float) -> ScaledReal:
    if not math.isfinite(x):
        raise DomainError(f"cannot represent non-finite value {x!r}")
    if x == 0.0:
        return ZERO
    return ScaledReal(1 if x > 0 else -1, math.log(abs(x)))


def scaled_from_log(sign: int, log_mag: float) -> ScaledReal:
    """Build a ScaledReal from precomputed sign and log magnitude."""
    if sign == 0:
        return ZERO
    return ScaledReal(1 if sign > 0 else -1, log_mag)


def scaled_to_real_checked(x: ScaledReal) -> float:
    if x.sign == 0:
        return 0.0
    if abs(x.log_mag) >= 700.0:
        raise DomainError(
            f"log magnitude {x.log_mag:.3f} outside double range (|log| < 700)"
        )
    return x.sign * math.exp(x.log_mag)


def scaled_add(x: ScaledReal, y: ScaledReal) -> ScaledReal:
    if x.sign == 0:
        return y
    if y.sign == 0:
        return x
    # Align to the larger exponent; the ratio term never overflows.
    if x.log_mag >= y.log_mag:
        big, small = x, y
    else:
        big, small = y, x
    m = big.sign + small.sign * math.exp(small.log_mag - big.log_mag)
    if m == 0.0:
        return ZERO
    return ScaledReal(1 if m > 0 else -1, big.log_mag + math.log(abs(m)))


def scaled_neg(x: ScaledReal) -> ScaledReal:
    if x.sign == 0:
        return x
    return ScaledReal(-x.sign, x.log_mag)


def scaled_mul(x: ScaledReal, y: ScaledReal) -> ScaledReal:
    s = x.sign * y.sign
    if s == 0:
        return ZERO
    return ScaledReal(s, x.log_mag + y.log_mag)


def scaled_div(x: ScaledReal, y: ScaledReal) -> ScaledReal:
    if y.sign == 0:
        raise DomainError("division by exact zero")
    if x.sign == 0:
        return ZERO
    return ScaledReal(x.sign * y.sign, x.log_mag - y.log_mag)


def scaled_sqrt(x: ScaledReal) -> ScaledReal:
    if x.sign < 0:
        raise DomainError("square root of a negative scaled value")
    if x.sign == 0:
        return ZERO
    return ScaledReal(1, 0.5 * x.log_mag)


@dataclass(frozen=True)
class QuadratureSpec:
    """Uniform trapezoid rule on [-U, U] with a fixed point count."""

    truncation_halfwidth: float
    point_count: int
    kind: str = "uniform-trapezoid"

    def __post_init__(self):
        if not (self.truncation_halfwidth > 0):
            raise DomainError("truncation_halfwidth must be positive")
        if self.point_count < 64:
            raise DomainError("point_count must be at least 64")
        if self.kind != "uniform-trapezoid":
            raise DomainError(f"unknown quadrature kind {self.kind!r}")

    def nodes(self) -> np.ndarray:
        return np.linspace(
            -self.truncation_halfwidth, self.truncation_halfwidth, self.point_count
        )


def trapezoid_line(f: Callable[[np.ndarray], np.ndarray], spec: QuadratureSpec) -> complex:
    """Trapezoid approximation of the integral of f over [-U, U].

    f receives the full node array and must return an array of samples of
    the same length. Every sample must be finite.
    """
    u = spec.nodes()
    vals = np.asarray(f(u))
    if vals.shape != u.shape:
        raise DomainError(
            f"integrand returned shape {vals.shape}, expected {u.shape}"
        )
    finite = np.isfinite(vals.real) & np.isfinite(vals.imag) if np.iscomplexobj(vals) \
        else np.isfinite(vals)
    if not finite.all():
        bad = u[~finite][0]
        raise NumericalConsistencyError(
            f"non-finite integrand sample at u = {bad!r}", at=float(bad)
        )
    h = 2.0 * spec.truncation_halfwidth / (spec.point_count - 1)
    total = vals.sum() - 0.5 * (vals[0] + vals[-1])
    return complex(total * h)


def central_diff(f: Callable[[float], float], x: float, h: float) -> float:
    """Symmetric difference quotient (f(x+h) - f(x-h)) / 2h."""
    if not (h > 0):
        raise DomainError("step h must be positive")
    return (f(x + h) - f(x - h)) / (2.0 * h)


def mixed_central_diff(
    g: Callable[[float, float], float], x: float, y: float, h: float
) -> float:
    """Apply (1/(x-y)) (d/dy - d/dx) to a two-argument function.

    Both partial derivatives use symmetric differences with the same step.
    The caller is responsible for keeping |x - y| large against h.
    """
    if not (h > 0):
        raise DomainError("step h must be positive")
    if x == y:
        raise DomainError("mixed_central_diff requires x != y")
    dg_dy = (g(x, y + h) - g(x, y - h)) / (2.0 * h)
    dg_dx = (g(x + h, y) - g(x - h, y)) / (2.0 * h)
    return (dg_dy - dg_dx) / (x - y)
