"""Command-line surface: convergence tables and structured reports.

Every table subcommand produces a RunReport with one row per matrix
size: the raw correlation value as (sign, log10 magnitude), the
normalized dimensionless value, the limit it converges to, the absolute
error, and the extraction condition number. Reports render as CSV (the
header row plus data, LF endings) or as a single JSON object carrying
the same numeric payload together with parameters and diagnostics.

Exit codes: 0 on success, 2 when a numerical consistency check fails,
3 on bad arguments.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .egf_engine import (
    CONDITION_LIMIT,
    ContourJob,
    EgfParams,
    SaddleData,
    bulk_points,
    bulk_radius,
    bulk_scaled_full,
    default_points,
    default_radius,
    edge_points,
    edge_scaled_full,
    extract_f,
    sigma_alpha,
)
from .errors import (
    CancellationError,
    DegenerateDenominatorError,
    DomainError,
    NumericalConsistencyError,
)
from .exact_oracle import (
    ORACLE_F_MAX_N,
    EnsembleKind,
    bstar_for,
    ensemble_alpha,
    oracle_f,
)
from .kernels import (
    DEFAULT_LINE_QUAD,
    airy_kernel,
    airy_product,
    b_kernel,
    i_alpha,
    sine_kernel,
    t_kernel,
)
from .numeric_core import (
    ScaledReal,
    scaled_div,
    scaled_from_real,
    scaled_to_real_checked,
)
from .selftest import run as selftest_run
from .wigner_mc import (
    MCConfig,
    dist_for,
    estimate_f,
    estimate_sigma_detail,
    moments_of,
)

__all__ = ["main", "RunReport", "Row", "render_csv", "render_json"]

COLUMNS = ("N", "log10_f", "sign", "scaled", "limit", "abs_err", "condition")

_ENSEMBLES = {
    "hermitian": EnsembleKind.HERMITIAN,
    "symmetric": EnsembleKind.REAL_SYMMETRIC,
}

# CLI spelling -> distribution kind used by the sampling module.
_DISTS = {
    "gaussian": "gaussian",
    "rademacher": "rademacher",
    "uniform": "uniform",
    "two-point": "two_point",
}


@dataclass
class Row:
    """One report line; columns match COLUMNS in order."""

    n: int
    log10_f: float
    sign: int
    scaled: float
    limit: float
    abs_err: float
    condition: float

    def as_dict(self) -> Dict[str, object]:
        return {
            "N": self.n,
            "log10_f": self.log10_f,
            "sign": self.sign,
            "scaled": self.scaled,
            "limit": self.limit,
            "abs_err": self.abs_err,
            "condition": self.condition,
        }


@dataclass
class RunReport:
    command: str
    params: Dict[str, object]
    rows: List[Row]
    diagnostics: Dict[str, object] = field(default_factory=dict)
    exit_code: int = 0


def _row(n: int, raw: ScaledReal, scaled: float, limit: float,
         condition: float) -> Row:
    if raw.is_zero():
        log10_f, sign = 0.0, 0
    else:
        log10_f, sign = raw.log10_mag(), raw.sign
    return Row(
        n=int(n),
        log10_f=float(log10_f),
        sign=int(sign),
        scaled=float(scaled),
        limit=float(limit),
        abs_err=float(abs(scaled - limit)),
        condition=float(condition),
    )


class LimitCache:
    """Limit-kernel values computed once per (family, alpha, mu, nu)."""

    def __init__(self):
        self._store: Dict[tuple, float] = {}

    def edge_kernel(self, alpha: float, mu: float, nu: float) -> float:
        key = ("edge", alpha, mu, nu)
        if key not in self._store:
            if alpha == 1.0:
                value = airy_kernel(mu, nu)
            elif alpha == 2.0:
                value = b_kernel(mu, nu)
            else:
                value = i_alpha(alpha, mu, nu)
            self._store[key] = value
        return self._store[key]

    def bulk_kernel(self, alpha: float, mu: float, nu: float) -> float:
        key = ("bulk", alpha, mu, nu)
        if key not in self._store:
            value = sine_kernel(mu, nu) if alpha == 1.0 else t_kernel(mu, nu)
            self._store[key] = value
        return self._store[key]

    def corr_limit(self, alpha: float, mu: float, nu: float) -> float:
        off = self.edge_kernel(alpha, mu, nu)
        diag_mu = self.edge_kernel(alpha, mu, mu)
        diag_nu = self.edge_kernel(alpha, nu, nu)
        if diag_mu <= 0.0 or diag_nu <= 0.0:
            raise DegenerateDenominatorError(
                f"limit kernel diagonal not positive at mu={mu}, nu={nu}"
            )
        return off / math.sqrt(diag_mu * diag_nu)


def _error_slope(ns: Sequence[int], errs: Sequence[float]) -> Optional[float]:
    """Least-squares slope of log error against log size."""
    if len(ns) < 2 or any(e <= 0.0 for e in errs):
        return None
    coeffs = np.polyfit(np.log(np.asarray(ns, dtype=float)),
                        np.log(np.asarray(errs, dtype=float)), 1)
    return float(coeffs[0])


def _resolve_n_list(args) -> List[int]:
    if args.n is not None:
        sizes = [args.n]
    elif args.n_list is not None:
        sizes = list(args.n_list)
    else:
        raise DomainError("pass --n or --n-list")
    if any(n <= 0 for n in sizes):
        raise DomainError(f"matrix sizes must be positive, got {sizes}")
    if sizes != sorted(sizes):
        raise DomainError(f"sizes must be ascending, got {sizes}")
    return sizes


def _base_params(args, sizes: Optional[List[int]] = None,
                 **extra) -> Dict[str, object]:
    params: Dict[str, object] = {
        "command": args.command,
        "alpha": float(args.alpha),
        "bstar": float(args.bstar),
        "mu": float(args.mu),
        "nu": float(args.nu),
    }
    if sizes is not None:
        params["n_list"] = [int(n) for n in sizes]
    params.update(extra)
    return params


def cmd_edge(args) -> RunReport:
    sizes = _resolve_n_list(args)
    cache = LimitCache()
    limit = math.exp(args.bstar) * cache.edge_kernel(args.alpha, args.mu, args.nu)
    rows = []
    for n in sizes:
        scaled, raw, diag = edge_scaled_full(
            args.alpha, args.bstar, args.mu, args.nu, n
        )
        rows.append(_row(n, raw, scaled, limit, diag.condition))
    diagnostics: Dict[str, object] = {
        "contour_radius": [default_radius(n) for n in sizes],
        "contour_points": [default_points(n) for n in sizes],
    }
    slope = _error_slope(sizes, [r.abs_err for r in rows])
    if slope is not None:
        diagnostics["error_slope"] = slope
    return RunReport("edge", _base_params(args, sizes), rows, diagnostics)


def cmd_bulk(args) -> RunReport:
    sizes = _resolve_n_list(args)
    cache = LimitCache()
    limit = math.exp(args.bstar) * cache.bulk_kernel(args.alpha, args.mu, args.nu)
    rows: List[Row] = []
    flagged: List[int] = []
    for n in sizes:
        try:
            scaled, raw, diag = bulk_scaled_full(
                args.alpha, args.bstar, args.xi, args.mu, args.nu, n
            )
        except CancellationError as exc:
            # Refused rows stay in the table with a zero value and the
            # condition number that triggered the refusal.
            condition = (exc.at.condition if isinstance(exc.at, SaddleData)
                         else CONDITION_LIMIT)
            rows.append(_row(n, scaled_from_real(0.0), 0.0, limit, condition))
            flagged.append(int(n))
            continue
        rows.append(_row(n, raw, scaled, limit, diag.condition))
    diagnostics: Dict[str, object] = {
        "contour_radius": [bulk_radius(n) for n in sizes],
        "contour_points": [bulk_points(n) for n in sizes],
    }
    if flagged:
        diagnostics["flagged_rows"] = flagged
    report = RunReport("bulk", _base_params(args, sizes, xi=float(args.xi)),
                       rows, diagnostics)
    if flagged:
        report.exit_code = 2
    return report


def cmd_corr(args) -> RunReport:
    sizes = _resolve_n_list(args)
    cache = LimitCache()
    limit = cache.corr_limit(args.alpha, args.mu, args.nu)
    rows = []
    for n in sizes:
        mu_n, nu_n = edge_points(n, args.mu, args.nu)
        _, raw, diag = edge_scaled_full(
            args.alpha, args.bstar, args.mu, args.nu, n
        )
        value = sigma_alpha(args.alpha, args.bstar, mu_n, nu_n, n)
        rows.append(_row(n, raw, value, limit, diag.condition))
    diagnostics: Dict[str, object] = {
        "contour_points": [default_points(n) for n in sizes],
    }
    return RunReport("corr", _base_params(args, sizes), rows, diagnostics)


def cmd_oracle(args) -> RunReport:
    sizes = _resolve_n_list(args)
    kind = _ENSEMBLES[args.ensemble]
    dist = dist_for(_DISTS[args.dist], kind, args.two_point_p)
    moments = moments_of(dist)
    alpha = ensemble_alpha(kind)
    bstar = bstar_for(kind, moments)
    rows = []
    for n in sizes:
        if n > ORACLE_F_MAX_N:
            raise DomainError(
                f"exact expansion supports n <= {ORACLE_F_MAX_N}, got {n}"
            )
        exact = oracle_f(kind, moments, n, args.mu, args.nu)
        job = ContourJob.with_defaults(
            EgfParams(alpha, bstar, args.mu, args.nu), n
        )
        value, diag = extract_f(job)
        rows.append(_row(n, scaled_from_real(exact), exact,
                         scaled_to_real_checked(value), diag.condition))
    params = _base_params(
        args, sizes,
        alpha=alpha,
        bstar=bstar,
        ensemble=args.ensemble,
        dist=args.dist,
        moments={"m2": moments.m2, "m3": moments.m3, "m4": moments.m4},
    )
    if args.dist == "two-point":
        params["two_point_p"] = float(args.two_point_p)
    return RunReport("oracle", params, rows, {})


def cmd_kernel(args) -> RunReport:
    quad_value = i_alpha(args.alpha, args.mu, args.nu)
    if args.alpha == 0.0:
        closed, route = airy_product(args.mu, args.nu), "airy-product"
    elif args.alpha == 1.0:
        closed, route = airy_kernel(args.mu, args.nu), "airy-kernel"
    elif args.alpha == 2.0:
        closed, route = b_kernel(args.mu, args.nu), "b-kernel"
    else:
        closed, route = quad_value, "line-quadrature"
    rows = [_row(0, scaled_from_real(closed), closed, quad_value, 1.0)]
    diagnostics = {
        "closed_form": route,
        "quadrature_halfwidth": DEFAULT_LINE_QUAD.truncation_halfwidth,
        "quadrature_points": DEFAULT_LINE_QUAD.point_count,
    }
    return RunReport("kernel", _base_params(args), rows, diagnostics)


def _mc_reference(kind: EnsembleKind, moments, alpha: float, bstar: float,
                  n: int, mu: float, nu: float):
    """Exact expansion where it reaches, extraction beyond."""
    if n <= ORACLE_F_MAX_N:
        return scaled_from_real(oracle_f(kind, moments, n, mu, nu)), "oracle"
    job = ContourJob.with_defaults(EgfParams(alpha, bstar, mu, nu), n)
    value, _ = extract_f(job)
    return value, "extraction"


def cmd_mc(args) -> RunReport:
    sizes = _resolve_n_list(args)
    kind = _ENSEMBLES[args.ensemble]
    dist = dist_for(_DISTS[args.dist], kind, args.two_point_p)
    moments = moments_of(dist)
    alpha = ensemble_alpha(kind)
    bstar = bstar_for(kind, moments)
    rows = []
    compare = []
    for n in sizes:
        cfg = MCConfig(ensemble=kind, dist=dist, n=n, samples=args.samples,
                       seed=args.seed, points=((args.mu, args.nu),))
        if args.stat == "f":
            est = estimate_f(cfg)[0]
            reference, route = _mc_reference(
                kind, moments, alpha, bstar, n, args.mu, args.nu
            )
            # Values themselves overflow doubles for large n, so the
            # normalized column is the ratio to the reference route.
            if est.mean.is_zero():
                ratio = 0.0
            else:
                ratio = scaled_to_real_checked(scaled_div(est.mean, reference))
            if est.stderr.is_zero():
                rel_err = 0.0
            else:
                rel_err = abs(scaled_to_real_checked(
                    scaled_div(est.stderr, reference)
                ))
            rows.append(_row(n, est.mean, ratio, 1.0, rel_err))
            compare.append({
                "N": int(n),
                "reference_route": route,
                "z_score": 0.0 if rel_err == 0.0 else (ratio - 1.0) / rel_err,
            })
        else:
            value, spread = estimate_sigma_detail(cfg)[0]
            reference = sigma_alpha(alpha, bstar, args.mu, args.nu, n)
            rows.append(_row(n, scaled_from_real(value), value, reference,
                             spread))
            compare.append({"N": int(n), "batch_spread": float(spread)})
    params = _base_params(
        args, sizes,
        alpha=alpha,
        bstar=bstar,
        ensemble=args.ensemble,
        dist=args.dist,
        samples=int(args.samples),
        seed=int(args.seed),
        stat=args.stat,
    )
    if args.dist == "two-point":
        params["two_point_p"] = float(args.two_point_p)
    return RunReport("mc", params, rows, {"comparison": compare})


_HANDLERS = {
    "edge": cmd_edge,
    "bulk": cmd_bulk,
    "corr": cmd_corr,
    "oracle": cmd_oracle,
    "kernel": cmd_kernel,
    "mc": cmd_mc,
}


def _csv_cell(value: object) -> str:
    # repr of a Python float is the shortest round-tripping decimal form,
    # always with a '.' decimal point.
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_csv(report: RunReport) -> str:
    lines = [",".join(COLUMNS)]
    for row in report.rows:
        cells = row.as_dict()
        lines.append(",".join(_csv_cell(cells[name]) for name in COLUMNS))
    return "\n".join(lines) + "\n"


def render_json(report: RunReport) -> str:
    payload = {
        "params": report.params,
        "rows": [row.as_dict() for row in report.rows],
        "diagnostics": report.diagnostics,
        "version": __version__,
    }
    return json.dumps(payload, indent=2) + "\n"


def _emit(text: str, out_path: Optional[str]) -> None:
    if out_path is None:
        sys.stdout.write(text)
        return
    with open(out_path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)


class _Parser(argparse.ArgumentParser):
    """Parser whose usage failures exit with status 3 instead of 2;
    status 2 is reserved for numerical consistency failures."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(3, f"{self.prog}: error: {message}\n")


def _size_list(text: str) -> List[int]:
    try:
        sizes = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}") from None
    if not sizes:
        raise argparse.ArgumentTypeError("empty size list")
    return sizes


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=float, default=1.0,
                        help="kernel family order (default 1)")
    common.add_argument("--bstar", type=float, default=0.0,
                        help="fourth-moment shift in the prefactor exp(bstar)")
    common.add_argument("--mu", type=float, default=0.0,
                        help="first evaluation offset")
    common.add_argument("--nu", type=float, default=0.0,
                        help="second evaluation offset")
    sizes = common.add_mutually_exclusive_group()
    sizes.add_argument("--n", type=int, help="single matrix size")
    sizes.add_argument("--n-list", dest="n_list", type=_size_list,
                       metavar="A,B,C", help="ascending matrix sizes")
    common.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="report format (default csv)")
    common.add_argument("--out", metavar="PATH",
                        help="write the report to a file instead of stdout")
    common.add_argument("--deterministic", action="store_true",
                        help="suppress wall-clock diagnostics for "
                             "byte-reproducible reports")
    common.add_argument("--fast", action="store_true",
                        help="reduced-size variant (selftest only)")
    return common


def _add_mc_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--ensemble", choices=sorted(_ENSEMBLES),
                        default="hermitian")
    parser.add_argument("--dist", choices=tuple(_DISTS), default="gaussian")
    parser.add_argument("--two-point-p", dest="two_point_p", type=float,
                        default=0.5,
                        help="success probability of the two-point entry law")


def _build_parser() -> _Parser:
    common = _common_options()
    parser = _Parser(
        prog="wigcorr",
        description="Correlation functions of Wigner characteristic "
                    "polynomials by mutually checking routes.",
    )
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    sub.add_parser(
        "edge", parents=[common],
        help="edge-scaled values against the limit kernel",
        description="Table of edge-scaled correlation values at offsets "
                    "(mu, nu) from the spectral edge, compared with "
                    "exp(bstar) times the limit kernel.",
    )
    p_bulk = sub.add_parser(
        "bulk", parents=[common],
        help="bulk-scaled values against the sine-type limit",
        description="Table of bulk-scaled correlation values around "
                    "position xi inside the spectrum. Rows whose "
                    "extraction is refused for cancellation are flagged "
                    "and the run exits with status 2.",
    )
    p_bulk.add_argument("--xi", type=float, default=0.0,
                        help="bulk position in (-2, 2), default 0")
    sub.add_parser(
        "corr", parents=[common],
        help="correlation coefficients against the kernel ratio",
        description="Table of correlation coefficients of the two "
                    "characteristic-polynomial values at edge-scaled "
                    "points, compared with the limit kernel ratio.",
    )
    p_oracle = sub.add_parser(
        "oracle", parents=[common],
        help="exact small-n expansion against contour extraction",
        description="Exact moment-expansion values for n <= "
                    f"{ORACLE_F_MAX_N}, compared with the "
                    "generating-function extraction route. The ensemble "
                    "and entry distribution fix alpha and bstar.",
    )
    _add_mc_options(p_oracle)
    p_kernel = sub.add_parser(
        "kernel", parents=[common],
        help="limit kernel values, closed form against quadrature",
        description="Single limit-kernel evaluation; the closed form "
                    "(orders 0, 1, 2) is compared against the defining "
                    "line integral.",
    )
    del p_kernel
    p_mc = sub.add_parser(
        "mc", parents=[common],
        help="Monte Carlo estimates against oracle or extraction",
        description="Monte Carlo estimate at raw points (mu, nu). For "
                    "--stat f the normalized column is the ratio of the "
                    "estimate to the reference route and the condition "
                    "column its relative standard error; for --stat "
                    "sigma the columns hold the estimated and reference "
                    "correlation coefficients and the batch-means spread.",
    )
    _add_mc_options(p_mc)
    p_mc.add_argument("--samples", type=int, default=10000,
                      help="Monte Carlo sample count (default 10000)")
    p_mc.add_argument("--seed", type=int, default=0,
                      help="base seed of the counter-mode generator")
    p_mc.add_argument("--stat", choices=("f", "sigma"), default="f",
                      help="estimate the correlation value or the "
                           "correlation coefficient")
    sub.add_parser(
        "selftest", parents=[common],
        help="run the invariant suite of every module",
        description="Runs every cross-route invariant group and prints "
                    "one pass/fail line per group. --fast skips the "
                    "largest sizes.",
    )
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "selftest":
            return selftest_run(fast=args.fast)
        start = time.perf_counter()
        report = _HANDLERS[args.command](args)
        if not args.deterministic:
            report.diagnostics["elapsed_seconds"] = round(
                time.perf_counter() - start, 6
            )
        text = (render_csv(report) if args.format == "csv"
                else render_json(report))
        _emit(text, args.out)
        return report.exit_code
    except DomainError as exc:
        print(f"wigcorr: {exc}", file=sys.stderr)
        return 3
    except NumericalConsistencyError as exc:
        print(f"wigcorr: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
