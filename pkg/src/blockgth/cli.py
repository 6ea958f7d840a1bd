"""Command-line entry point: ``blockgth solve|table1|censor-depth|censor``.

Exit codes: 0 success, 1 solver or numerical failure, 2 unreadable input.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import augment, gth, mg1, models, oracle, rgfact
from .blocklinalg import (BlockMatrix, MatrixFileError, NotStochasticError,
                          SingularPivotError, format_matrix, parse_matrix)

EXIT_FAILURE = 1
EXIT_INPUT = 2


class InputError(Exception):
    """Unreadable input file; reported as ``path:line: message``."""


def fmt(x: float) -> str:
    """Fixed 12 significant digits, used for every number the CLI prints."""
    return f"{float(x):.12g}"


def _read(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None


def load_model(path: str | None) -> mg1.MG1Spec:
    """A queue configuration, or an ``mg1`` spec file; default queue without a path.

    Rate specifications are uniformised with the largest outflow rate.
    """
    if path is None:
        return models.build_spec()
    text = _read(path)
    first = next((ln.split("#", 1)[0].strip() for ln in text.splitlines()
                  if ln.split("#", 1)[0].strip()), "")
    try:
        if first == "mg1":
            spec = mg1.parse_spec(text)
            return models.uniformize(spec) if spec.generator else spec
        return models.build_spec(models.parse_config(text))
    except (MatrixFileError, models.ConfigError) as exc:
        raise InputError(f"{path}: {exc}") from None


def load_matrix(path: str) -> BlockMatrix:
    try:
        return parse_matrix(_read(path), stochastic=True)
    except MatrixFileError as exc:
        raise InputError(f"{path}: {exc}") from None


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_solve(args, out) -> int:
    P = load_matrix(args.matrix)
    if args.method == "gth":
        pi = gth.solve(P)
    elif args.method == "rg":
        pi = rgfact.solve_by_factors(rgfact.factorize(P))
    else:
        # the lazy chain has the same stationary vector and is aperiodic
        lazy = BlockMatrix((P.array + np.eye(P.shape[0])) / 2, P.phase_counts, copy=False)
        pi = oracle.power_iteration(lazy, tol=args.tol, max_iter=args.max_iter)
    for i in range(pi.num_levels):
        out.write(" ".join(fmt(x) for x in pi.level(i)) + "\n")
    return 0


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("levels must be positive")
    return vals


def cmd_table1(args, out) -> int:
    spec = load_model(args.config)
    if max(args.N_list) > args.N_ref:
        raise InputError(f"N_ref={args.N_ref} is below the largest N")
    rows = augment.compare_truncations(spec, args.N_list, M=args.M, N_ref=args.N_ref)
    text = augment.format_comparison_csv(rows)
    if args.out is None or args.out == "-":
        out.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return 0


def cmd_censor_depth(args, out) -> int:
    spec = load_model(args.config)
    try:
        M, rep = mg1.stop_depth(spec, args.N, args.eps, max_depth=args.max_depth, report=True)
    except mg1.DepthCeilingError as exc:
        print(f"error: {exc}; best bound {fmt(exc.best)}", file=sys.stderr)
        return EXIT_FAILURE
    cap = rep.captured
    out.write(f"M {M}\n")
    out.write(f"bound {fmt(rep.bound)}\n")
    out.write("captured_level0 " + " ".join(fmt(x) for x in cap[0]) + "\n")
    out.write(f"captured_min {fmt(cap.min())}\n")
    out.write(f"captured_max {fmt(cap.max())}\n")
    return 0


def cmd_censor(args, out) -> int:
    spec = load_model(args.config)
    C = oracle.dense_censor_oracle(spec, args.N, args.buffer)
    text = format_matrix(C)
    if args.out is None or args.out == "-":
        out.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="blockgth", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="stationary vector of a finite chain in matrix-file format")
    s.add_argument("matrix", help="matrix file ('-' for stdin)")
    s.add_argument("--method", choices=("gth", "rg", "power"), default="gth")
    s.add_argument("--tol", type=float, default=1e-13, help="power-iteration l1 residual")
    s.add_argument("--max-iter", type=int, default=10**6, help="power-iteration sweep limit")
    s.set_defaults(func=cmd_solve)

    t = sub.add_parser("table1", help="l1 truncation errors of natural LBCA and RA-CM as CSV")
    t.add_argument("config", nargs="?", help="queue config or mg1 spec (default queue if omitted)")
    t.add_argument("--N-list", type=_int_list, default=list(augment.DEFAULT_N_LIST),
                   help="truncation levels, comma separated")
    t.add_argument("--M", type=int, default=100, help="censoring depth")
    t.add_argument("--N-ref", type=int, default=3000, help="reference truncation level")
    t.add_argument("--out", help="CSV path (stdout if omitted)")
    t.set_defaults(func=cmd_table1)

    d = sub.add_parser("censor-depth", help="smallest depth meeting an error-bound tolerance")
    d.add_argument("config", nargs="?")
    d.add_argument("--N", type=int, default=10)
    d.add_argument("--eps", type=float, default=1e-6)
    d.add_argument("--max-depth", type=int, default=10**5)
    d.set_defaults(func=cmd_censor_depth)

    c = sub.add_parser("censor", help="dense censored matrix of a long truncation, in matrix-file format")
    c.add_argument("config", nargs="?")
    c.add_argument("--N", type=int, default=10)
    c.add_argument("--buffer", type=int, default=None, help="extra levels (default N + 200)")
    c.add_argument("--out")
    c.set_defaults(func=cmd_censor)
    return p


def main(argv=None, out=None) -> int:
    args = build_parser().parse_args(argv)
    out = sys.stdout if out is None else out
    try:
        return args.func(args, out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NotStochasticError, SingularPivotError, oracle.ConvergenceError,
            augment.ReducibleAugmentationError, MemoryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
