"""Monte Carlo sampling of Wigner ensembles.

Matrices are drawn from counter-mode substreams keyed by sample index,
so estimates are bit-identical for a fixed seed no matter how sampling
is chunked or threaded. Determinant values live in log space from the
moment they are computed; sample means use a running max-exponent shift.

Validation-only at small n by design: the relative spread of the
determinant product grows with matrix size, so convergence claims about
scaled limits are always checked through the deterministic routes.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.random import Generator, Philox

from .errors import DegenerateDenominatorError, DomainError, NumericalConsistencyError
from .exact_oracle import EnsembleKind, MomentProfile
from .numeric_core import (
    ZERO,
    ScaledReal,
    scaled_add,
    scaled_from_log,
    scaled_mul,
    scaled_neg,
)
from .special_fn import char_poly_mean

__all__ = [
    "EntryDist",
    "MCConfig",
    "MCEstimate",
    "dist_for",
    "moments_of",
    "thread_count",
    "sample_rng",
    "sample_matrix",
    "char_poly_value",
    "estimate_f",
    "estimate_sigma",
    "estimate_sigma_detail",
]

MC_MAX_N = 256
MC_MIN_SAMPLES = 100
DET_IMAG_TOL = 1e-7

DIST_KINDS = ("gaussian", "rademacher", "uniform", "two_point")


@dataclass(frozen=True)
class EntryDist:
    """Entry distribution with exactly the requested mean and variance.

    two_point places mass p at a positive value and 1-p at a negative
    one, sized so the mean is 0 and the variance is target_variance; p
    away from 1/2 makes it skewed, which is what the universality checks
    want to stress.
    """

    kind: str
    target_variance: float
    two_point_p: float = 0.5

    def __post_init__(self):
        if self.kind not in DIST_KINDS:
            raise DomainError(f"unknown entry distribution {self.kind!r}")
        if self.target_variance not in (0.5, 1.0):
            raise DomainError(
                f"target_variance must be 0.5 or 1.0, got {self.target_variance}"
            )
        if not (0.0 < self.two_point_p < 1.0):
            raise DomainError(f"two_point_p must be in (0, 1), got {self.two_point_p}")

    def draw(self, rng: Generator, size) -> np.ndarray:
        tv = self.target_variance
        if self.kind == "gaussian":
            return rng.normal(0.0, math.sqrt(tv), size)
        if self.kind == "rademacher":
            root = math.sqrt(tv)
            return np.where(rng.random(size) < 0.5, root, -root)
        if self.kind == "uniform":
            c = math.sqrt(3.0 * tv)
            return rng.uniform(-c, c, size)
        p = self.two_point_p
        hi = math.sqrt(tv) * math.sqrt((1.0 - p) / p)
        lo = -math.sqrt(tv) * math.sqrt(p / (1.0 - p))
        return np.where(rng.random(size) < p, hi, lo)


def moments_of(dist: EntryDist) -> MomentProfile:
    """Exact first four moments realized by an EntryDist."""
    tv = dist.target_variance
    if dist.kind == "gaussian":
        return MomentProfile(0.0, tv, 0.0, 3.0 * tv * tv)
    if dist.kind == "rademacher":
        return MomentProfile(0.0, tv, 0.0, tv * tv)
    if dist.kind == "uniform":
        return MomentProfile(0.0, tv, 0.0, 9.0 * tv * tv / 5.0)
    p = dist.two_point_p
    m3 = tv ** 1.5 * (1.0 - 2.0 * p) / math.sqrt(p * (1.0 - p))
    m4 = tv * tv * (1.0 - 3.0 * p + 3.0 * p * p) / (p * (1.0 - p))
    return MomentProfile(0.0, tv, m3, m4)


def dist_for(kind: str, ensemble: EnsembleKind, two_point_p: float = 0.5) -> EntryDist:
    """EntryDist at the variance the ensemble requires."""
    tv = 0.5 if ensemble == EnsembleKind.HERMITIAN else 1.0
    return EntryDist(kind=kind, target_variance=tv, two_point_p=two_point_p)


@dataclass(frozen=True)
class MCConfig:
    ensemble: EnsembleKind
    dist: EntryDist
    n: int
    samples: int
    seed: int
    points: tuple = field(default=((0.0, 0.0),))

    def __post_init__(self):
        if not (1 <= self.n <= MC_MAX_N):
            raise DomainError(f"matrix size n = {self.n} outside [1, {MC_MAX_N}]")
        if self.samples < MC_MIN_SAMPLES:
            raise DomainError(f"need at least {MC_MIN_SAMPLES} samples")
        want = 0.5 if self.ensemble == EnsembleKind.HERMITIAN else 1.0
        if self.dist.target_variance != want:
            raise DomainError(
                f"{self.ensemble.value} ensemble needs entry variance {want}, "
                f"distribution has {self.dist.target_variance}"
            )
        for pt in self.points:
            if len(pt) != 2 or not all(math.isfinite(v) for v in pt):
                raise DomainError(f"bad evaluation point {pt!r}")


@dataclass(frozen=True)
class MCEstimate:
    mean: ScaledReal
    stderr: ScaledReal
    samples_used: int


def thread_count() -> int:
    """Worker cap from RMT_THREADS; 0 or unset means automatic."""
    raw = os.environ.get("RMT_THREADS", "0").strip() or "0"
    try:
        requested = int(raw)
    except ValueError as exc:
        raise DomainError(f"RMT_THREADS must be an integer, got {raw!r}") from exc
    if requested < 0:
        raise DomainError(f"RMT_THREADS must be >= 0, got {requested}")
    if requested == 0:
        return min(os.cpu_count() or 1, 8)
    return requested


def sample_rng(seed: int, index: int) -> Generator:
    """Counter-mode substream for one sample index."""
    return Generator(Philox(key=seed, counter=[0, 0, 0, index]))


def sample_matrix(cfg: MCConfig, rng: Generator) -> np.ndarray:
    """One ensemble matrix. Draw order is fixed (diagonal, upper real,
    then upper imaginary for the Hermitian case) so streams are stable."""
    n = cfg.n
    diag = cfg.dist.draw(rng, n)
    re = cfg.dist.draw(rng, (n, n))
    if cfg.ensemble == EnsembleKind.HERMITIAN:
        im = cfg.dist.draw(rng, (n, n))
        upper = np.triu(re + 1j * im, 1)
        return upper + upper.conj().T + np.diag(math.sqrt(2.0) * diag)
    upper = np.triu(re, 1)
    return upper + upper.T + np.diag(math.sqrt(2.0) * diag)


def char_poly_value(matrix: np.ndarray, lam: float) -> ScaledReal:
    """det(X - lam I) in scaled form via pivoted factorization.

    For Hermitian input the determinant is real; the unit-circle sign
    factor must have imaginary part within DET_IMAG_TOL or the value is
    refused. An exactly singular matrix gives sign 0.
    """
    if not math.isfinite(lam):
        raise DomainError(f"lambda must be finite, got {lam!r}")
    n = matrix.shape[0]
    sign, logabs = np.linalg.slogdet(matrix - lam * np.eye(n, dtype=matrix.dtype))
    if logabs == -math.inf:
        return ZERO
    if np.iscomplexobj(matrix):
        if abs(sign.imag) > DET_IMAG_TOL:
            raise NumericalConsistencyError(
                f"determinant imaginary residue {abs(sign.imag):.3e} above "
                f"{DET_IMAG_TOL}",
                at=lam,
            )
        real_sign = 1 if sign.real > 0 else -1
    else:
        real_sign = 1 if sign > 0 else -1
    return scaled_from_log(real_sign, float(logabs))


def _chunk_size(n: int) -> int:
    # Keep one chunk of matrices around 64 MB.
    return max(64, min(4096, (1 << 22) // max(1, n * n)))


def _collect_dets(cfg: MCConfig, lambdas: Sequence[float]):
    """Per-sample determinant signs and log magnitudes at each lambda.

    Output arrays are indexed [sample, lambda]; chunk workers write
    disjoint slices, so results do not depend on the worker count.
    """
    n, samples = cfg.n, cfg.samples
    hermitian = cfg.ensemble == EnsembleKind.HERMITIAN
    lam_arr = np.asarray(lambdas, dtype=float)
    signs = np.empty((samples, lam_arr.size), dtype=complex if hermitian else float)
    logs = np.empty((samples, lam_arr.size))
    chunk = _chunk_size(n)
    dtype = complex if hermitian else float
    eye = np.eye(n, dtype=dtype)

    def run_chunk(start: int) -> None:
        count = min(chunk, samples - start)
        mats = np.empty((count, n, n), dtype=dtype)
        for c in range(count):
            mats[c] = sample_matrix(cfg, sample_rng(cfg.seed, start + c))
        for j, lam in enumerate(lam_arr):
            sgn, logabs = np.linalg.slogdet(mats - lam * eye)
            signs[start:start + count, j] = sgn
            logs[start:start + count, j] = logabs

    starts = range(0, samples, chunk)
    workers = thread_count()
    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_chunk, starts))
    else:
        for start in starts:
            run_chunk(start)

    if hermitian:
        worst = float(np.abs(signs.imag).max())
        if worst > DET_IMAG_TOL:
            raise NumericalConsistencyError(
                f"determinant imaginary residue {worst:.3e} above {DET_IMAG_TOL}"
            )
        signs = signs.real
    return np.sign(signs), logs


def _pair_samples(signs, logs, i: int, j: int):
    return signs[:, i] * signs[:, j], logs[:, i] + logs[:, j]


def _mean_scaled(pair_signs: np.ndarray, pair_logs: np.ndarray):
    """Shifted mean and standard error of sign * exp(log) samples."""
    count = pair_logs.shape[0]
    shift = float(pair_logs.max())
    vals = pair_signs * np.exp(pair_logs - shift)
    mean = float(vals.mean())
    sd = float(vals.std(ddof=1)) / math.sqrt(count)
    mean_scaled = ZERO if mean == 0.0 else scaled_from_log(
        1 if mean > 0 else -1, shift + math.log(abs(mean))
    )
    err_scaled = ZERO if sd == 0.0 else scaled_from_log(1, shift + math.log(sd))
    return mean_scaled, err_scaled


def _lambda_index(points) -> tuple:
    lambdas = []
    for mu, nu in points:
        for lam in (mu, nu):
            if lam not in lambdas:
                lambdas.append(lam)
    return tuple(lambdas)


def estimate_f(cfg: MCConfig):
    """MCEstimate of E[det(X - mu) det(X - nu)] at each configured point."""
    lambdas = _lambda_index(cfg.points)
    signs, logs = _collect_dets(cfg, lambdas)
    out = []
    for mu, nu in cfg.points:
        ps, pl = _pair_samples(signs, logs, lambdas.index(mu), lambdas.index(nu))
        mean, err = _mean_scaled(ps, pl)
        out.append(MCEstimate(mean=mean, stderr=err, samples_used=cfg.samples))
    return out


def _sigma_from_arrays(signs, logs, lambdas, mu, nu, n):
    i_mu, i_nu = lambdas.index(mu), lambdas.index(nu)
    f_cross, _ = _mean_scaled(*_pair_samples(signs, logs, i_mu, i_nu))
    f_mumu, _ = _mean_scaled(*_pair_samples(signs, logs, i_mu, i_mu))
    f_nunu, _ = _mean_scaled(*_pair_samples(signs, logs, i_nu, i_nu))
    g_mu = char_poly_mean(n, mu)
    g_nu = char_poly_mean(n, nu)
    numer = scaled_add(f_cross, scaled_neg(scaled_mul(g_mu, g_nu)))
    var_mu = scaled_add(f_mumu, scaled_neg(scaled_mul(g_mu, g_mu)))
    var_nu = scaled_add(f_nunu, scaled_neg(scaled_mul(g_nu, g_nu)))
    if var_mu.sign <= 0 or var_nu.sign <= 0:
        raise DegenerateDenominatorError(
            f"nonpositive variance estimate at point ({mu}, {nu})"
        )
    if numer.sign == 0:
        return 0.0
    return numer.sign * math.exp(
        numer.log_mag - 0.5 * (var_mu.log_mag + var_nu.log_mag)
    )


def estimate_sigma_detail(cfg: MCConfig, batches: int = 20):
    """Plug-in correlation estimate with a batch-means standard error.

    The exact mean polynomial replaces the sample mean inside the
    estimator; the batch-means spread quantifies sampling noise.
    """
    if cfg.samples < batches * 5:
        raise DomainError(
            f"need at least {batches * 5} samples for {batches} batches"
        )
    lambdas = _lambda_index(cfg.points)
    signs, logs = _collect_dets(cfg, lambdas)
    out = []
    edges = np.linspace(0, cfg.samples, batches + 1, dtype=int)
    for mu, nu in cfg.points:
        value = _sigma_from_arrays(signs, logs, lambdas, mu, nu, cfg.n)
        batch_vals = [
            _sigma_from_arrays(
                signs[edges[b]:edges[b + 1]], logs[edges[b]:edges[b + 1]],
                lambdas, mu, nu, cfg.n,
            )
            for b in range(batches)
        ]
        spread = float(np.std(batch_vals, ddof=1)) / math.sqrt(batches)
        out.append((value, spread))
    return out


def estimate_sigma(cfg: MCConfig):
    """Correlation coefficient estimate at each configured point."""
    return [value for value, _ in estimate_sigma_detail(cfg)]
