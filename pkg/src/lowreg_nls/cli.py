"""Command-line front end: ``lowreg-nls {converge,conserve,step,oracle-check}``.

Every subcommand writes CSV.  Lines starting with ``#`` carry run metadata
(configuration, package version, wall-clock timestamp); the body below them
depends only on the configuration and is byte-identical between runs.
"""
from __future__ import annotations

import argparse
import csv
import datetime
import io
import logging
import math
import os
import sys

import numpy as np

from . import __version__
from .baselines import integrate
from .experiments import (
    ExperimentConfig,
    run_conservation_study,
    run_convergence_study,
    run_full_error_study,
)
from .integrators import Method, SchemeParams
from .oracles import ORACLE_CAP, oracle_deviations
from .spectral import NormKind, TorusGrid

THREADS_ENV = "LOWREG_NLS_THREADS"
ORACLE_TOL = 1e-12


def _fmt(x) -> str:
    """Shortest round-tripping text for a float (``nan`` stays ``nan``)."""
    x = float(x)
    return "nan" if math.isnan(x) else repr(x)


def parse_ladder(text: str) -> tuple[float, ...]:
    """``start:factor:count`` gives ``start / factor**i``; otherwise a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"ladder must be start:factor:count, got {text!r}")
        try:
            start, factor, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
        if not (start > 0 and factor > 1 and count >= 1):
            raise argparse.ArgumentTypeError("ladder needs start > 0, factor > 1, count >= 1")
        return tuple(start / factor**i for i in range(count))
    try:
        return tuple(float(t) for t in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _methods(text: str) -> tuple[Method, ...]:
    try:
        return tuple(Method.parse(m) for m in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _norm(text: str) -> NormKind:
    try:
        return NormKind.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _workers(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get(THREADS_ENV)
    if env is None:
        return 1
    try:
        n = int(env)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {env!r}") from None
    if n < 1:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
    return n


def _add_problem_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--n", type=int, default=256, help="grid points per axis (even)")
    p.add_argument("--r", type=float, default=2.0, help="regularity of random data")
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--T", type=float, default=1.0, help="final time")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--data", choices=("random", "plane_wave"), default="random")
    p.add_argument("--amplitude", type=complex, default=1.0, help="plane-wave amplitude")
    p.add_argument("--wavevector", type=_int_list, default=None, help="plane-wave k, e.g. 1,2")
    p.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lowreg-nls",
        description="Low-regularity Fourier integrators for the cubic NLS on the torus.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("converge", help="global error against a reference for a step-size ladder")
    _add_problem_args(p)
    p.add_argument("--methods", type=_methods, default=None, help="default: low-reg and strang")
    p.add_argument("--norm", type=_norm, default=NormKind("l2"), help="l2, h1 or sobolev:r")
    p.add_argument("--taus", type=parse_ladder, default=parse_ladder("0.0625:2:5"),
                   help="start:factor:count or a comma list")
    p.add_argument("--reference", choices=("cross", "self", "analytic"), default="cross",
                   help="fine-step solution of the other method, of the same method, or exact")
    p.add_argument("--refinement", type=int, default=128, help="reference step is min(taus) / refinement")
    p.add_argument("--ns", type=_int_list, default=None, help="several N for a space-time study")
    p.add_argument("--workers", type=int, default=None, help=f"threads (default ${THREADS_ENV} or 1)")

    p = sub.add_parser("conserve", help="energy and mass along one trajectory")
    _add_problem_args(p)
    p.add_argument("--method", type=Method.parse, default=Method.LOWREG_1D)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--stride", type=int, default=1, help="record every stride-th step")

    p = sub.add_parser("step", help="integrate once and dump the final Fourier coefficients")
    _add_problem_args(p)
    p.add_argument("--method", type=Method.parse, default=Method.LOWREG_1D)
    p.add_argument("--tau", type=float, required=True)

    p = sub.add_parser("oracle-check", help="closed-form integrals against brute-force sums")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tau", type=float, default=0.1)
    p.add_argument("--out", default="-")
    return parser


def _config(args, **extra) -> ExperimentConfig:
    wavevector = args.wavevector if args.wavevector is not None else (1,) * args.dim
    return ExperimentConfig(
        dim=args.dim,
        n=args.n,
        r=args.r,
        seed=args.seed,
        mu=args.mu,
        T=args.T,
        data=args.data,
        amplitude=args.amplitude,
        wavevector=tuple(wavevector),
        **extra,
    )


def _header(command: str, meta: dict) -> list[str]:
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    lines = [f"# lowreg-nls {__version__} {command}", f"# created: {stamp}"]
    lines += [f"# {k}: {v}" for k, v in meta.items()]
    return lines


def _emit(path: str, header: list[str], columns: list[str], rows) -> None:
    buf = io.StringIO()
    for line in header:
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    if path == "-":
        sys.stdout.write(buf.getvalue())
    else:
        with open(path, "w", newline="") as fh:
            fh.write(buf.getvalue())


def _cmd_converge(args) -> int:
    methods = args.methods
    if methods is None:
        methods = (Method.LOWREG_1D if args.dim == 1 else Method.LOWREG_DD, Method.STRANG)
    cfg = _config(
        args,
        taus=args.taus,
        methods=methods,
        norm=args.norm,
        reference=args.reference,
        refinement=args.refinement,
        workers=_workers(args.workers),
    )
    meta = cfg.describe()
    if args.ns is None:
        result = run_convergence_study(cfg)
        for m, desc in result.reference.items():
            meta[f"reference[{m.value}]"] = desc
        rows = [(m, _fmt(t), _fmt(e), _fmt(o)) for m, t, e, o in result.rows()]
        _emit(args.out, _header("converge", meta), ["method", "tau", "error", "order_fit"], rows)
        return 0
    if cfg.n not in args.ns:
        meta["n"] = "ignored (see ns)"
    meta["ns"] = ",".join(str(n) for n in args.ns)
    results = run_full_error_study(cfg, args.ns)
    rows = [
        (n, m, _fmt(t), _fmt(e), _fmt(o))
        for n, res in results.items()
        for m, t, e, o in res.rows()
    ]
    _emit(args.out, _header("converge", meta), ["n", "method", "tau", "error", "order_fit"], rows)
    return 0


def _cmd_conserve(args) -> int:
    cfg = _config(args, taus=(args.tau,), methods=(args.method,), stride=args.stride)
    series = run_conservation_study(cfg)
    meta = cfg.describe()
    meta["stride"] = args.stride
    meta["energy_max_drift"] = _fmt(series.energy_max_drift)
    meta["mass_max_drift"] = _fmt(series.mass_max_drift)
    meta["energy_growth"] = _fmt(series.energy_growth)
    meta["mass_growth"] = _fmt(series.mass_growth)
    rows = [(_fmt(t), _fmt(e), _fmt(m)) for t, e, m in zip(series.times, series.energy, series.mass)]
    _emit(args.out, _header("conserve", meta), ["t", "energy", "mass"], rows)
    return 0


def _cmd_step(args) -> int:
    cfg = _config(args, taus=(args.tau,), methods=(args.method,))
    u = integrate(cfg.initial_data(), cfg.T, SchemeParams(args.tau, cfg.mu, args.method))
    grid = u.grid
    ks = np.meshgrid(*([grid.wavenumbers] * grid.dim), indexing="ij")
    flat = [k.ravel() for k in ks]
    c = u.coeffs.ravel()
    rows = [
        [int(f[i]) for f in flat] + [_fmt(c[i].real), _fmt(c[i].imag)] for i in range(grid.size)
    ]
    columns = [f"k{j}" for j in range(grid.dim)] + ["re", "im"]
    _emit(args.out, _header("step", cfg.describe()), columns, rows)
    return 0


def _cmd_oracle_check(args) -> int:
    grid = TorusGrid(args.dim, args.n)
    cap = ORACLE_CAP.get(grid.dim)
    if cap is None or grid.n > cap:
        raise ValueError(f"oracle-check needs N <= {cap} for dim = {grid.dim}" if cap else
                         f"no oracle for dim = {grid.dim}")
    dev = oracle_deviations(grid, args.seed, args.tau)
    ok = all(d <= ORACLE_TOL for d in dev.values())
    meta = {"dim": args.dim, "n": args.n, "seed": args.seed, "tau": _fmt(args.tau),
            "tolerance": _fmt(ORACLE_TOL), "status": "pass" if ok else "FAIL"}
    rows = [(name, _fmt(d), "pass" if d <= ORACLE_TOL else "FAIL") for name, d in dev.items()]
    _emit(args.out, _header("oracle-check", meta), ["integral", "max_deviation", "status"], rows)
    return 0 if ok else 1


_COMMANDS = {
    "converge": _cmd_converge,
    "conserve": _cmd_conserve,
    "step": _cmd_step,
    "oracle-check": _cmd_oracle_check,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"lowreg-nls {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
