"""Command-line front end.

JSON schemas
  potential:        {"fourier": {"cos": [a_1, ...], "sin": [b_1, ...]}}
                    or {"grid": {"values": [q(x_0), ...]}} (midpoint samples)
  spectral vector:  {"kind": "gap_f", "N": N, "entries": [f_1, ..., f_2N]}

Exit status: 0 success, 1 verification failure, 2 malformed input,
3 solver failure (a partial report is still written).

Environment overrides for default tolerances: SLSPECTRA_RESIDUAL_TOL,
SLSPECTRA_MAX_ITER, SLSPECTRA_MIN_STEPS and SLSPECTRA_TOL_<IDENTITY>
(for example SLSPECTRA_TOL_PERIODIC=1e-7).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .eigensolve import boundary_eigenvalues, spectrum_table, table_to_csv
from .equivalence import (
    ALL_ONES,
    DEFAULT_TOLERANCES,
    SignSequence,
    involution,
    smoothness_diagnostic,
    verify_doubling,
    verify_theorem,
)
from .errors import ConvergenceError, SpectralError
from .fundamental import BOUNDARY_TAGS, IntegratorConfig, discriminant_sweep
from .inverse import SolverConfig, reconstruct_from_gap_map
from .jsonio import dumps, fmt
from .oracle import OracleConfig, fd_spectrum
from .parallel import set_threads
from .potential import PotentialError, load_potential, potential_to_dict, random_potential
from .spectral_maps import SpectralVector, estimate_check, gap_map, h_map, map_norm, p_map

log = logging.getLogger("slspectra")

MAX_LEVELS = 256


class UsageError(Exception):
    """Malformed input: exit status 2."""


def _env_float(name, default):
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        raise UsageError(f"environment variable {name}={raw!r} is not a number") from None


def integrator_config() -> IntegratorConfig:
    return IntegratorConfig(min_steps=int(_env_float("SLSPECTRA_MIN_STEPS", 1024)))


def solver_config(N: int, args=None) -> SolverConfig:
    tol = getattr(args, "residual_tol", None) or _env_float("SLSPECTRA_RESIDUAL_TOL", 1e-8)
    max_iter = getattr(args, "max_iter", None) or int(_env_float("SLSPECTRA_MAX_ITER", 60))
    mode = getattr(args, "jacobian", None) or "analytic"
    return SolverConfig(N=N, residual_tol=tol, max_iter=max_iter, jacobian_mode=mode, integrator=integrator_config())


def identity_tolerances() -> dict:
    return {k: _env_float(f"SLSPECTRA_TOL_{k.upper()}", v) for k, v in DEFAULT_TOLERANCES.items()}


def _settings(args, **extra) -> dict:
    out = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",) and not callable(v)}
    out["version"] = __version__
    out.update(extra)
    return out


def _read_potential(path):
    try:
        return load_potential(path)
    except FileNotFoundError:
        raise UsageError(f"no such potential file: {path}") from None
    except (json.JSONDecodeError, KeyError, TypeError, ValueError, PotentialError) as exc:
        raise UsageError(f"malformed potential file {path}: {exc}") from None


def _emit(text: str, path) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _check_paths(inp, *outs):
    for o in outs:
        if o is not None and str(o) != "-" and Path(o).resolve() == Path(inp).resolve():
            raise UsageError(f"output path {o} is the same as the input path")


def _levels(n):
    if not 1 <= n <= MAX_LEVELS:
        raise UsageError(f"--levels must be in 1..{MAX_LEVELS}, got {n}")
    return n


def cmd_spectrum(args) -> int:
    _check_paths(args.potential, args.out, args.maps)
    q = _read_potential(args.potential)
    N = _levels(args.levels)
    t = spectrum_table(q, N, integrator_config())
    _emit(table_to_csv(t), args.out)
    if args.maps:
        maps = {
            "settings": _settings(args),
            "gap_f": gap_map(t).to_dict(),
            "p": p_map(t, "dirichlet").to_dict(),
            "frak_p": p_map(t, "neumann").to_dict(),
            "h": h_map(t, "dirichlet").to_dict(),
            "frak_h": h_map(t, "neumann").to_dict(),
            "norms": {"gap_f": map_norm(gap_map(t)), "p": map_norm(p_map(t)), "h1": map_norm(h_map(t))},
        }
        if N >= 16:
            maps["estimates"] = estimate_check(q, t).to_dict()
        Path(args.maps).write_text(dumps(maps) + "\n")
    return 0


def cmd_discriminant(args) -> int:
    _check_paths(args.potential, args.out, args.markers)
    q = _read_potential(args.potential)
    if not args.lam_max > args.lam_min or args.points < 2:
        raise UsageError("need --lam-max > --lam-min and --points >= 2")
    lams, delta = discriminant_sweep(q, args.lam_min, args.lam_max, args.points, integrator_config())
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["lam", "delta"])
    for lam, d in zip(lams, delta):
        w.writerow([fmt(lam), fmt(d)])
    _emit(buf.getvalue(), args.out)
    if args.markers:
        t = spectrum_table(q, _levels(args.levels), integrator_config())
        Path(args.markers).write_text(table_to_csv(t))
    return 0


def cmd_involve(args) -> int:
    _check_paths(args.potential, args.out)
    q = _read_potential(args.potential)
    sigma = _parse_sigma(args.sigma)
    cfg = solver_config(_levels(args.levels), args)
    try:
        qs, res = involution(sigma, q, cfg)
    except ConvergenceError as exc:
        if args.report:
            part = exc.result.to_dict() if exc.result is not None else {}
            Path(args.report).write_text(dumps({"settings": _settings(args), "converged": False, "error": str(exc), **part}) + "\n")
        print(f"error: {exc}", file=sys.stderr)
        return 3
    _emit(dumps({**potential_to_dict(qs), "settings": _settings(args, sigma_name=sigma.name)}) + "\n", args.out)
    if args.report:
        Path(args.report).write_text(dumps({"settings": _settings(args), **res.to_dict()}) + "\n")
    return 0


def cmd_reconstruct(args) -> int:
    _check_paths(args.vector, args.out, args.report)
    try:
        data = json.loads(Path(args.vector).read_text())
        target = SpectralVector.from_dict(data)
    except FileNotFoundError:
        raise UsageError(f"no such spectral vector file: {args.vector}") from None
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed spectral vector {args.vector}: {exc}") from None
    if target.kind != "gap_f":
        raise UsageError(f"reconstruct takes a gap_f vector, got {target.kind!r}")
    _levels(target.N)
    cfg = solver_config(target.N, args)
    try:
        res = reconstruct_from_gap_map(target, cfg)
    except ConvergenceError as exc:
        part = exc.result.to_dict() if exc.result is not None else {}
        _emit(dumps({"settings": _settings(args), "converged": False, "error": str(exc), **part}) + "\n", args.report)
        print(f"error: {exc}", file=sys.stderr)
        return 3
    report = {"settings": _settings(args, N=target.N), **res.to_dict()}
    if args.out:
        Path(args.out).write_text(dumps(potential_to_dict(res.potential)) + "\n")
    _emit(dumps(report) + "\n", args.report)
    if not res.converged:
        print(f"error: no convergence, residual {res.residual_norm:.3e} after {res.iterations} iterations", file=sys.stderr)
        return 3
    return 0


def _parse_sigma(text):
    try:
        return SignSequence.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_verify(args) -> int:
    _check_paths(args.potential, args.out)
    q = _read_potential(args.potential)
    N = _levels(args.levels)
    which = args.which
    if which == "smoothness":
        rep = smoothness_diagnostic(q, ALL_ONES, solver_config(N, args))
        out = {"which": "smoothness", "settings": _settings(args), **rep.to_dict()}
        ok = True
        if rep.slope_q is not None and rep.slope_u is not None:
            ok = abs(rep.slope_q - rep.slope_u) <= args.slope_tol
        out["passed"] = ok
        _emit(dumps(out) + "\n", args.out)
        return 0 if ok else 1
    if which == "doubling":
        report = verify_doubling(q, N, integrator_config(), identity_tolerances()["doubling"])
    else:
        sigma = None
        if which == "t3":
            if not args.sigma:
                raise UsageError("verify t3 needs --sigma")
            sigma = _parse_sigma(args.sigma)
            if np.any(sigma.bits(2 * N)[0::2] != 1):
                raise UsageError("verify t3 needs sigma_(2j-1) = 1 for all j")
        report = verify_theorem(q, which.upper(), solver_config(N, args), sigma, identity_tolerances())
    out = report.to_dict()
    out["settings"] = _settings(args)
    _emit(dumps(out) + "\n", args.out)
    print(report.format_table(), file=sys.stderr)
    if report.failure is not None:
        return 3
    return 0 if report.passed else 1


def cmd_oracle_compare(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.potential:
        _check_paths(args.potential, args.out)
        potentials = [_read_potential(args.potential)]
    else:
        potentials = [random_potential(rng, args.modes, rng.uniform(0.1, args.max_norm)) for _ in range(args.count)]
    ocfg = OracleConfig(levels=args.levels)
    rows = []
    worst = 0.0
    ok = True
    for i, q in enumerate(potentials):
        for bc in BOUNDARY_TAGS:
            shoot = boundary_eigenvalues(q, bc, args.levels, integrator_config())
            orc = fd_spectrum(q, bc, ocfg)
            rel = np.abs(shoot - orc.values) / np.maximum(1.0, np.abs(orc.values))
            allowed = np.maximum(1e-6, 3.0 * orc.error / np.maximum(1.0, np.abs(orc.values)))
            passed = bool(np.all(rel <= allowed))
            ok &= passed
            worst = max(worst, float(np.max(rel)))
            rows.append({"potential": i, "bc": bc, "max_relative": float(np.max(rel)), "passed": passed,
                         "shooting": shoot, "oracle": orc.values, "oracle_error": orc.error})
    out = {"settings": _settings(args), "passed": ok, "worst_relative": worst, "comparisons": rows}
    _emit(dumps(out) + "\n", args.out)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="slspectra", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
    p.add_argument("--seed", type=int, default=0, help="seed for random batteries")
    p.add_argument("-v", "--verbose", action="count", default=0)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def solver_opts(sp):
        sp.add_argument("--residual-tol", type=float, default=None)
        sp.add_argument("--max-iter", type=int, default=None)
        sp.add_argument("--jacobian", choices=("analytic", "finite_difference"), default=None)

    s = sub.add_parser("spectrum", help="potential JSON -> spectrum CSV (+ maps JSON)")
    s.add_argument("--potential", required=True)
    s.add_argument("--levels", type=int, default=12)
    s.add_argument("--out", default=None, help="CSV path (default stdout)")
    s.add_argument("--maps", default=None, help="maps JSON path")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("discriminant", help="lambda sweep of the discriminant as CSV")
    s.add_argument("--potential", required=True)
    s.add_argument("--lam-min", type=float, default=-10.0)
    s.add_argument("--lam-max", type=float, default=400.0)
    s.add_argument("--points", type=int, default=2001)
    s.add_argument("--levels", type=int, default=6, help="levels written to --markers")
    s.add_argument("--markers", default=None, help="CSV of eigenvalue markers for the plot")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_discriminant)

    s = sub.add_parser("involve", help="apply U_sigma to a potential")
    s.add_argument("--potential", required=True)
    s.add_argument("--sigma", required=True, help="all-ones | odd-ones | comma-separated bits")
    s.add_argument("--levels", type=int, default=16)
    s.add_argument("--out", default=None)
    s.add_argument("--report", default=None)
    solver_opts(s)
    s.set_defaults(func=cmd_involve)

    s = sub.add_parser("reconstruct", help="gap_f spectral vector JSON -> potential JSON")
    s.add_argument("--vector", required=True)
    s.add_argument("--out", default=None, help="potential JSON path")
    s.add_argument("--report", default=None, help="convergence report path (default stdout)")
    solver_opts(s)
    s.set_defaults(func=cmd_reconstruct)

    s = sub.add_parser("verify", help="identity suites; exit 0 iff every check passes")
    s.add_argument("which", choices=("t1", "t2", "t3", "doubling", "smoothness"))
    s.add_argument("--potential", required=True)
    s.add_argument("--levels", type=int, default=12)
    s.add_argument("--sigma", default=None)
    s.add_argument("--slope-tol", type=float, default=0.5)
    s.add_argument("--out", default=None)
    solver_opts(s)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("oracle-compare", help="shooting solver against the finite-difference oracle")
    s.add_argument("--potential", default=None, help="single potential (default: random battery)")
    s.add_argument("--count", type=int, default=20)
    s.add_argument("--modes", type=int, default=6)
    s.add_argument("--max-norm", type=float, default=3.0)
    s.add_argument("--levels", type=int, default=10)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_oracle_compare)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    set_threads(args.threads)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except SpectralError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
