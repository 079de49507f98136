"""Exact finite-n expectations by permutation-pair expansion.

E[det(X - mu) det(X - nu)] expands over pairs of permutations into
monomials in the matrix entries; independence factorizes each monomial
over the entry positions, and every factor is a polynomial in the first
four moments of the entry distribution. No sampling, no quadrature: this
module is the ground truth the other routes are checked against at small
n.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .errors import DomainError

__all__ = [
    "EnsembleKind",
    "MomentProfile",
    "gaussian_profile",
    "rademacher_profile",
    "bstar_for",
    "ensemble_alpha",
    "oracle_f",
    "oracle_mean",
]

ORACLE_F_MAX_N = 6
ORACLE_MEAN_MAX_N = 7

_M2_TOL = 1e-12


class EnsembleKind(str, Enum):
    HERMITIAN = "hermitian"
    REAL_SYMMETRIC = "real_symmetric"


@dataclass(frozen=True)
class MomentProfile:
    """First four moments (m1..m4) of the entry distribution.

    The entry law enters every expectation here only through these
    numbers, which is exactly the universality being tested.
    """

    m1: float
    m2: float
    m3: float
    m4: float

    def __post_init__(self):
        if self.m1 != 0.0:
            raise DomainError(f"m1 must be 0, got {self.m1}")
        if not (self.m2 > 0.0):
            raise DomainError(f"m2 must be positive, got {self.m2}")
        if self.m4 < self.m2 ** 2 - 1e-12:
            raise DomainError(
                f"m4 = {self.m4} violates m4 >= m2^2 = {self.m2 ** 2}"
            )


def gaussian_profile(kind: EnsembleKind) -> MomentProfile:
    """Moments of a centered Gaussian at the variance the ensemble fixes."""
    if kind == EnsembleKind.HERMITIAN:
        return MomentProfile(0.0, 0.5, 0.0, 0.75)
    return MomentProfile(0.0, 1.0, 0.0, 3.0)


def rademacher_profile(kind: EnsembleKind) -> MomentProfile:
    """Moments of a symmetric two-point law at the ensemble variance."""
    if kind == EnsembleKind.HERMITIAN:
        return MomentProfile(0.0, 0.5, 0.0, 0.25)
    return MomentProfile(0.0, 1.0, 0.0, 1.0)


def _required_m2(kind: EnsembleKind) -> float:
    return 0.5 if kind == EnsembleKind.HERMITIAN else 1.0


def _check_profile(kind: EnsembleKind, moments: MomentProfile) -> None:
    want = _required_m2(kind)
    if abs(moments.m2 - want) > _M2_TOL:
        raise DomainError(
            f"{kind.value} ensemble requires m2 = {want}, got {moments.m2}"
        )


def bstar_for(kind: EnsembleKind, moments: MomentProfile) -> float:
    """Fourth-moment shift entering the generating function's exp(b* z^2)."""
    _check_profile(kind, moments)
    if kind == EnsembleKind.HERMITIAN:
        return moments.m4 - 0.75
    return (moments.m4 - 3.0) / 2.0


def ensemble_alpha(kind: EnsembleKind) -> float:
    """Order of the generating-function denominator for the ensemble."""
    return 1.0 if kind == EnsembleKind.HERMITIAN else 2.0


@lru_cache(maxsize=8)
def _perm_table(n: int):
    """All permutations of range(n) as an array plus their signatures."""
    perms = list(itertools.permutations(range(n)))
    table = np.array(perms, dtype=np.int64)
    signs = np.empty(len(perms))
    for idx, p in enumerate(perms):
        inv = sum(1 for a in range(n) for b in range(a + 1, n) if p[a] > p[b])
        signs[idx] = -1.0 if inv % 2 else 1.0
    return table, signs


def _hermitian_pair_table(m2: float, m3: float, m4: float) -> np.ndarray:
    """E[(R + iI)^k1 (R - iI)^k2] for independent R, I sharing moments m_k.

    Powers up to 2 per factor occur: a position pair is touched at most
    once by each determinant's product.
    """
    table = np.zeros((3, 3), dtype=complex)
    table[0, 0] = 1.0
    table[1, 1] = 2.0 * m2
    table[2, 1] = m3 * (1.0 + 1.0j)
    table[1, 2] = m3 * (1.0 - 1.0j)
    table[2, 2] = 2.0 * m4 + 2.0 * m2 * m2
    return table


def oracle_f(kind: EnsembleKind, moments: MomentProfile, n: int,
             mu: float, nu: float) -> float:
    """E[det(X - mu I) det(X - nu I)] for an n x n ensemble matrix.

    Sums sgn(sigma) sgn(tau) times the factorized expectation of the
    entry monomial picked out by the permutation pair (sigma, tau). The
    inner sum over tau is vectorized; cost grows like (n!)^2.
    """
    if not (1 <= n <= ORACLE_F_MAX_N):
        raise DomainError(f"oracle_f needs 1 <= n <= {ORACLE_F_MAX_N}, got {n}")
    _check_profile(kind, moments)
    m2, m3, m4 = moments.m2, moments.m3, moments.m4
    table, signs = _perm_table(n)
    hermitian = kind == EnsembleKind.HERMITIAN
    if hermitian:
        pair = _hermitian_pair_table(m2, m3, m4)
    else:
        powers = np.array([1.0, 0.0, m2, m3, m4])
    diag_both = 2.0 * m2 + mu * nu

    total = 0.0 + 0.0j
    for sidx in range(len(signs)):
        s = table[sidx]
        factor = (signs[sidx] * signs).astype(complex)
        for i in range(n):
            on_diag = table[:, i] == i
            if s[i] == i:
                factor *= np.where(on_diag, diag_both, -mu)
            else:
                factor *= np.where(on_diag, -nu, 1.0)
        for i in range(n):
            for j in range(i + 1, n):
                k1 = (1 if s[i] == j else 0) + (table[:, i] == j)
                k2 = (1 if s[j] == i else 0) + (table[:, j] == i)
                if hermitian:
                    factor *= pair[k1, k2]
                else:
                    factor *= powers[k1 + k2]
        total += factor.sum()
    if abs(total.imag) > 1e-9 * max(1.0, abs(total.real)):
        raise DomainError(
            f"oracle accumulation lost realness: imag = {total.imag!r}"
        )
    return float(total.real)


def oracle_mean(kind: EnsembleKind, moments: MomentProfile, n: int,
                lam: float) -> float:
    """E[det(X - lam I)] for an n x n ensemble matrix.

    Only involutions survive: any cycle of length >= 3 touches some
    off-diagonal position exactly once, and its first moment is zero.
    Fixed points contribute -lam; transpositions contribute the pair
    second moment.
    """
    if not (1 <= n <= ORACLE_MEAN_MAX_N):
        raise DomainError(
            f"oracle_mean needs 1 <= n <= {ORACLE_MEAN_MAX_N}, got {n}"
        )
    _check_profile(kind, moments)
    pair_m2 = 2.0 * moments.m2 if kind == EnsembleKind.HERMITIAN else moments.m2
    total = 0.0
    for perm in itertools.permutations(range(n)):
        value = 1.0
        involution = True
        for i in range(n):
            if perm[i] == i:
                value *= -lam
            elif perm[perm[i]] == i:
                if i < perm[i]:
                    value *= pair_m2
            else:
                involution = False
                break
        if not involution:
            continue
        inv = sum(1 for a in range(n) for b in range(a + 1, n) if perm[a] > perm[b])
        total += -value if inv % 2 else value
    return total
