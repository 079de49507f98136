"""Airy and Hermite special functions, the mean characteristic polynomial,
and the Gaussian-unitary orthogonal-polynomial kernel.

The Airy pair is served by two independent routes: a library route
(scipy's AMOS-backed implementation) used for production values, and a
vertical-line contour quadrature kept as a cross-check oracle. The two
routes are compared in the self-test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import airy as _scipy_airy, gammaln

from .errors import DomainError
from .numeric_core import (
    ONE,
    ZERO,
    QuadratureSpec,
    ScaledReal,
    scaled_from_log,
    trapezoid_line,
)

__all__ = [
    "AiryPair",
    "HermiteValue",
    "airy",
    "airy_contour",
    "hermite_phys",
    "char_poly_mean",
    "gue_kernel",
]

AIRY_DOMAIN = 30.0
HERMITE_MAX_N = 10 ** 6
GUE_KERNEL_MAX_N = 2000

# Renormalization threshold for the Hermite recurrence; values are scaled
# down before they can overflow, with the scale tracked in log space.
_RENORM_AT = 1e250

DEFAULT_AIRY_QUAD = QuadratureSpec(truncation_halfwidth=20.0, point_count=4000)


@dataclass(frozen=True)
class AiryPair:
    ai: float
    ai_prime: float


@dataclass(frozen=True)
class HermiteValue:
    """Physicists' Hermite polynomial value in scaled form."""

    value: ScaledReal

    @classmethod
    def compute(cls, n: int, x: float) -> "HermiteValue":
        return cls(hermite_phys(n, x))


def _check_airy_domain(x: float) -> None:
    if not math.isfinite(x):
        raise DomainError(f"airy argument must be finite, got {x!r}")
    if abs(x) > AIRY_DOMAIN:
        raise DomainError(f"airy argument {x} outside [-{AIRY_DOMAIN}, {AIRY_DOMAIN}]")


def airy(x: float) -> AiryPair:
    """Ai(x) and Ai'(x) on [-30, 30], absolute error below 1e-12."""
    _check_airy_domain(x)
    ai, aip, _, _ = _scipy_airy(x)
    return AiryPair(float(ai), float(aip))


def airy_contour(x: float, quad: QuadratureSpec = DEFAULT_AIRY_QUAD) -> AiryPair:
    """Independent contour route for the Airy pair.

    Integrates exp(z^3/3 - x z) along the vertical line z = c + it. The
    abscissa c = max(1, sqrt(x)) keeps the integrand peaked for positive
    x; the envelope decays like exp(-c t^2), so the default truncation at
    |t| = 20 is far past any contribution.
    """
    _check_airy_domain(x)
    c = max(1.0, math.sqrt(x)) if x > 1.0 else 1.0

    def integrand(t: np.ndarray) -> np.ndarray:
        z = c + 1j * t
        return np.exp(z ** 3 / 3.0 - x * z)

    def integrand_deriv(t: np.ndarray) -> np.ndarray:
        z = c + 1j * t
        return -z * np.exp(z ** 3 / 3.0 - x * z)

    ai = trapezoid_line(integrand, quad).real / (2.0 * math.pi)
    aip = trapezoid_line(integrand_deriv, quad).real / (2.0 * math.pi)
    return AiryPair(ai, aip)


def _hermite_seq(n: int, x: float):
    """Signs and natural-log magnitudes of H_k(x) for k = 0..n.

    Upward three-term recurrence with renormalization: whenever the
    running pair exceeds the threshold both members are divided down and
    the factor accumulates in a log-space scale.
    """
    signs = np.zeros(n + 1)
    logs = np.full(n + 1, -np.inf)
    signs[0], logs[0] = 1.0, 0.0
    h_prev, h_cur = 1.0, 2.0 * x
    scale = 0.0
    if n >= 1 and h_cur != 0.0:
        signs[1] = math.copysign(1.0, h_cur)
        logs[1] = math.log(abs(h_cur))
    for k in range(1, n):
        h_next = 2.0 * x * h_cur - 2.0 * k * h_prev
        h_prev, h_cur = h_cur, h_next
        m = max(abs(h_prev), abs(h_cur))
        if m > _RENORM_AT:
            h_prev /= m
            h_cur /= m
            scale += math.log(m)
        if h_cur != 0.0:
            signs[k + 1] = math.copysign(1.0, h_cur)
            logs[k + 1] = math.log(abs(h_cur)) + scale
    return signs, logs


def hermite_phys(n: int, x: float) -> ScaledReal:
    """Physicists' Hermite polynomial H_n(x) in scaled form."""
    if n < 0 or n > HERMITE_MAX_N:
        raise DomainError(f"hermite_phys degree {n} outside [0, {HERMITE_MAX_N}]")
    if not math.isfinite(x):
        raise DomainError(f"hermite_phys argument must be finite, got {x!r}")
    if n == 0:
        return ONE
    signs, logs = _hermite_seq(n, x)
    if signs[n] == 0.0:
        return ZERO
    return scaled_from_log(int(signs[n]), float(logs[n]))


def char_poly_mean(n: int, lam: float) -> ScaledReal:
    """Mean characteristic polynomial of an n x n matrix from either
    ensemble: (-1)^n 2^(-n/2) H_n(lam / sqrt(2))."""
    h = hermite_phys(n, lam / math.sqrt(2.0))
    if h.sign == 0:
        return ZERO
    sign = h.sign if n % 2 == 0 else -h.sign
    return ScaledReal(sign, h.log_mag - 0.5 * n * math.log(2.0))


def gue_kernel(n: int, x: float, y: float) -> ScaledReal:
    """Orthogonal-polynomial kernel K_n(x, y) for the Gaussian unitary
    ensemble with weight exp(-x^2/2).

    K_n(x,y) = exp(-(x^2+y^2)/4) * sum_{k=0}^{n-1} p_k(x) p_k(y) /
    (sqrt(2 pi) k!) with monic p_k(x) = 2^(-k/2) H_k(x / sqrt(2)). Terms
    are combined under a running max-exponent shift so no intermediate
    leaves double range.
    """
    if n < 1 or n > GUE_KERNEL_MAX_N:
        raise DomainError(f"gue_kernel order {n} outside [1, {GUE_KERNEL_MAX_N}]")
    rt2 = math.sqrt(2.0)
    sx, lx = _hermite_seq(n - 1, x / rt2)
    sy, ly = _hermite_seq(n - 1, y / rt2)
    ks = np.arange(n)
    term_logs = lx + ly - ks * math.log(2.0) - gammaln(ks + 1) - 0.5 * math.log(2.0 * math.pi)
    term_signs = sx * sy
    live = term_signs != 0.0
    if not live.any():
        return ZERO
    shift = term_logs[live].max()
    total = float((term_signs[live] * np.exp(term_logs[live] - shift)).sum())
    if total == 0.0:
        return ZERO
    log_mag = shift + math.log(abs(total)) - (x * x + y * y) / 4.0
    return scaled_from_log(1 if total > 0 else -1, log_mag)
