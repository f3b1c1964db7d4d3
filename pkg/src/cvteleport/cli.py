"""
Command-line front end.

Subcommands ``entropy-sweep``, ``gamma``, ``teleport`` and ``verify``. Every
CSV starts with ``# key=value`` lines echoing the parsed configuration, and
a PNG with the same stem is written next to it unless ``--no-plot``.

Exit codes: 0 success, 1 verification failure / non-convergence / grid
coverage failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .entanglement import entropy_closed_form, entropy_sweep
from .epr import (IntegrationConfig, OutcomeGrid, gamma_closed_form, gamma_csv,
                  gamma_integral_oracle, max_deviation, unitarity_residual)
from .errors import ConvergenceError, GridCoverageError, TruncationWarning, ValidationError
from .fock import TruncationConfig, basis_state, coherent_state, random_state
from .report import write_csv
from .teleport import (_resource, covering_grid, distribution_csv, outcome_distribution,
                       run_ideal_discrete, run_samples, runs_csv)
from .verify import REFERENCE_ENTROPY, check_names, run_checks

DEFAULT_R = 0.69
DEFAULT_N = 32
DEFAULT_N_WORK = 256


def _nonneg(s: str) -> float:
    v = float(s)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {s}")
    return v


def _posint(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {s}")
    return v


def _finite(s: str) -> float:
    v = float(s)
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be finite, got {s}")
    return v


def _png(out: Path) -> Path:
    return out.with_suffix(".png")


def _echo(args, *skip) -> dict:
    cfg = {"command": args.command}
    for k, v in vars(args).items():
        if k not in ("command", "func", *skip):
            cfg[k] = v
    return cfg


# --- subcommands ---------------------------------------------------------------

def cmd_entropy_sweep(args) -> int:
    if args.rmin > args.rmax:
        raise ValidationError(f"--rmin {args.rmin} exceeds --rmax {args.rmax}")
    trunc = TruncationConfig(args.n) if args.n is not None else None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore" if trunc is None else "default", TruncationWarning)
        sweep = entropy_sweep(args.rmin, args.rmax, args.steps, trunc)
    out = write_csv(args.out, _echo(args), sweep.to_csv())
    if not args.no_plot:
        from .plotting import plot_entropy_sweep
        plot_entropy_sweep(sweep, _png(out))
    e = entropy_closed_form(DEFAULT_R)
    print(f"E(0.69)={e:.6f} bits "
          f"(deviation from {REFERENCE_ENTROPY}: {e - REFERENCE_ENTROPY:+.6f})")
    if args.rmax - args.rmin >= 1 and args.steps >= 3:
        hi = args.rmax
        print(f"slope over [{max(args.rmin, hi - 1):g}, {hi:g}] = "
              f"{sweep.slope(max(args.rmin, hi - 1), hi):.6f} bits per unit r "
              f"(asymptote 2/ln2 = {2 / math.log(2):.6f})")
    print(f"max |closed - numeric| = {np.abs(sweep.closed - sweep.numeric).max():.3e}; "
          f"wrote {out} ({args.steps} rows)")
    return 0


def cmd_gamma(args) -> int:
    trunc = TruncationConfig(args.n, args.n_work)
    g = gamma_closed_form(args.x, args.p, trunc, args.mode)
    out = write_csv(args.out, _echo(args), gamma_csv(g))
    if not args.no_plot:
        from .plotting import plot_gamma
        plot_gamma(g, _png(out))
    res = unitarity_residual(g)
    wide = gamma_closed_form(args.x, args.p, TruncationConfig(args.n, 2 * trunc.N_work), args.mode)
    print(f"gamma(X={args.x:g}, P={args.p:g}) N={args.n} N_work={trunc.N_work} mode={args.mode}")
    print(f"unitarity residual = {res:.6e}")
    print(f"working-space truncation residual (vs N_work={2 * trunc.N_work}) = "
          f"{max_deviation(g, wide):.6e}")
    print(f"amplitude scale = {g.scale:.10f}")
    status = 0
    if args.check:
        if args.check == "oracle":
            ref = gamma_integral_oracle(args.x, args.p, trunc, IntegrationConfig(tol=args.tol))
        else:
            other = "series" if args.mode == "operator" else "operator"
            ref = gamma_closed_form(args.x, args.p, trunc, other)
        dev = max_deviation(g, ref)
        ok = dev < args.tol
        print(f"max deviation vs {args.check} = {dev:.6e} ({'PASS' if ok else 'FAIL'}, tol {args.tol:g})")
        status = 0 if ok else 1
    print(f"wrote {out}")
    return status


def _input_state(args, trunc: TruncationConfig):
    if args.input == "coherent":
        return coherent_state(args.coherent, trunc)
    if args.input == "vacuum":
        return basis_state(0, trunc)
    return random_state(np.random.default_rng(args.seed), trunc)


def cmd_teleport(args) -> int:
    trunc = TruncationConfig(args.n, args.n_work)
    psi = _input_state(args, trunc)
    cfg = _echo(args)
    if args.ideal:
        runs = run_ideal_discrete(psi, args.samples, args.seed)
        out = write_csv(args.out, cfg, runs_csv(runs))
        fids = np.array([r.fidelity for r in runs])
        print(f"ideal resource, clock-and-shift measurement, {len(runs)} samples")
        print(f"mean fidelity = {fids.mean():.15f}; max |1 - F| = {np.abs(1 - fids).max():.3e}")
        if not args.no_plot:
            from .plotting import plot_sample_fidelities
            plot_sample_fidelities(fids, _png(out))
        print(f"wrote {out}")
        return 0

    resource = _resource(args.r, trunc)
    if args.grid_extent is not None:
        grid = OutcomeGrid(args.grid_step, args.grid_step, args.grid_extent, args.grid_extent)
    else:
        grid = covering_grid(psi, resource, spacing=args.grid_step)
    print(f"r={args.r:g} N={args.n} N_work={trunc.N_work} input={args.input} "
          f"correction={args.correction} gain={args.gain:g}")
    print(f"grid: step {grid.dX:g}, X in [-{grid.LX:g}, {grid.LX:g}], "
          f"P in [-{grid.LP:g}, {grid.LP:g}] ({len(grid)} cells)")
    dist = outcome_distribution(psi, resource, grid, args.correction, args.gain)
    print(f"captured probability mass = {dist.mass:.6f}")
    mean_q = dist.mean_fidelity()
    if args.quadrature:
        out = write_csv(args.out, cfg, distribution_csv(dist))
        print(f"mean fidelity (grid quadrature) = {mean_q:.6f}")
        if dist.residual is not None:
            print(f"unitarity residual: mean {np.average(dist.residual, weights=dist.density):.4e}")
        if not args.no_plot:
            from .plotting import plot_outcome_map
            plot_outcome_map(dist, _png(out))
    else:
        runs = run_samples(psi, args.r, trunc, grid, args.samples, args.correction,
                           args.seed, args.gain)
        fids = np.array([r.fidelity for r in runs])
        res = np.array([r.unitarity_residual for r in runs])
        out = write_csv(args.out, cfg, runs_csv(runs))
        se = fids.std(ddof=1) / math.sqrt(len(fids)) if len(fids) > 1 else math.nan
        print(f"mean fidelity ({len(runs)} samples) = {fids.mean():.6f} +/- {se:.6f}")
        print(f"mean fidelity (grid quadrature) = {mean_q:.6f}")
        print(f"unitarity residual of sampled outcomes: mean {res.mean():.4e}, max {res.max():.4e}")
        if not args.no_plot:
            from .plotting import plot_sample_fidelities
            plot_sample_fidelities(fids, _png(out), reference=mean_q)
    print(f"wrote {out}")
    return 0


def cmd_verify(args) -> int:
    inject = set(args.inject or ())
    unknown = inject - set(check_names(args.fast))
    if unknown:
        raise ValidationError(f"unknown check(s) for --inject: {', '.join(sorted(unknown))}")
    checks = run_checks(args.n, fast=args.fast, inject=inject)
    for c in checks:
        print(c.line())
    failed = [c.name for c in checks if not c.passed]
    total = sum(c.seconds for c in checks)
    if failed:
        print(f"{len(failed)} of {len(checks)} checks FAILED: {', '.join(failed)} ({total:.1f}s)")
        return 1
    print(f"all {len(checks)} checks passed ({total:.1f}s)")
    return 0


# --- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cvteleport",
        description="Fock-space simulation of continuous-variable teleportation.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("entropy-sweep", help="entanglement of the squeezed resource against r")
    s.add_argument("--rmin", type=_nonneg, default=0.0, help="smallest r (default 0)")
    s.add_argument("--rmax", type=_nonneg, default=2.0, help="largest r (default 2)")
    s.add_argument("--steps", type=_posint, default=81, help="number of rows (default 81)")
    s.add_argument("--n", type=int, default=None,
                   help="Fock cutoff for the numeric column (default: per-row automatic)")
    s.add_argument("--out", type=Path, default=Path("entropy_sweep.csv"))
    s.add_argument("--no-plot", action="store_true", help="skip the PNG figure")
    s.set_defaults(func=cmd_entropy_sweep)

    s = sub.add_parser("gamma", help="eigenstate coefficient table for one outcome")
    s.add_argument("--x", type=_finite, default=0.0, help="outcome label X (default 0)")
    s.add_argument("--p", type=_finite, default=0.0, help="outcome label P (default 0)")
    s.add_argument("--n", type=int, default=DEFAULT_N, help=f"Fock cutoff (default {DEFAULT_N})")
    s.add_argument("--n-work", type=int, default=DEFAULT_N_WORK,
                   help=f"working-space cutoff (default {DEFAULT_N_WORK})")
    s.add_argument("--mode", choices=("operator", "series"), default="operator")
    s.add_argument("--check", choices=("oracle", "series", "operator"), default=None,
                   help="compare against an independent route")
    s.add_argument("--tol", type=_nonneg, default=1e-6, help="tolerance for --check (default 1e-6)")
    s.add_argument("--out", type=Path, default=Path("gamma.csv"))
    s.add_argument("--no-plot", action="store_true")
    s.set_defaults(func=cmd_gamma)

    s = sub.add_parser("teleport", help="simulate the protocol")
    s.add_argument("--r", type=_nonneg, default=DEFAULT_R,
                   help=f"squeezing of the resource (default {DEFAULT_R}; inf = maximally entangled)")
    s.add_argument("--ideal", action="store_true",
                   help="maximally entangled resource measured in the clock-and-shift basis")
    s.add_argument("--n", type=int, default=DEFAULT_N)
    s.add_argument("--n-work", type=int, default=DEFAULT_N_WORK)
    s.add_argument("--input", choices=("coherent", "random", "vacuum"), default="coherent")
    s.add_argument("--coherent", type=complex, default=0.3,
                   help="coherent amplitude, python complex syntax e.g. 0.3+0.1j (default 0.3)")
    s.add_argument("--correction", choices=("displacement", "discrete"), default="displacement")
    s.add_argument("--gain", type=_finite, default=1.0)
    s.add_argument("--samples", type=_posint, default=2000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--quadrature", action="store_true",
                   help="write the full outcome grid instead of sampled runs")
    s.add_argument("--grid-step", type=_nonneg, default=0.1)
    s.add_argument("--grid-extent", type=_nonneg, default=None,
                   help="half-width of the outcome grid (default: sized from the states)")
    s.add_argument("--out", type=Path, default=Path("teleport.csv"))
    s.add_argument("--no-plot", action="store_true")
    s.set_defaults(func=cmd_teleport)

    s = sub.add_parser("verify", help="run the invariant checklist")
    s.add_argument("--n", type=int, default=8, help="cutoff for the module invariant suites (default 8)")
    s.add_argument("--fast", action="store_true", help="quick subset")
    s.add_argument("--inject", action="append", metavar="CHECK",
                   help="force the named check to fail (negative control); repeatable")
    s.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        ap.print_usage(sys.stderr)
        print(f"{ap.prog}: error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, GridCoverageError) as exc:
        print(f"{ap.prog}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
