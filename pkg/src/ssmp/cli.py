"""Command line interface: ``ssmp recover | bench | check``.

Exit codes: 0 success, 2 invalid input, 3 not computable at this size.
"""
import argparse
import sys
from pathlib import Path

import numpy as np

from .core import SsmpConfig, ssmp_recover, ssmp_recover_extended
from .exceptions import InvalidInputError, NotComputableError, SsmpError
from .experiments import ExperimentConfig, emit_csv, full_scale, run_sweep
from .verifiers import (
    NOT_COMPUTABLE,
    fundamental_limit,
    krank,
    rip_constant,
    table3_guarantee,
    theorem1_guarantee,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NOT_COMPUTABLE = 3


def read_matrix(path):
    """Plain CSV matrix: one row per line, comma separated, no header."""
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise InvalidInputError(f"cannot read {path}: {err}") from err
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            rows.append([float(tok) for tok in line.split(",")])
        except ValueError as err:
            raise InvalidInputError(f"{path}:{lineno}: not a number ({err})") from err
    if not rows:
        raise InvalidInputError(f"{path}: empty matrix")
    width = len(rows[0])
    for lineno, row in enumerate(rows, 1):
        if len(row) != width:
            raise InvalidInputError(f"{path}: ragged row {lineno} ({len(row)} vs {width} entries)")
    M = np.array(rows)
    if not np.all(np.isfinite(M)):
        raise InvalidInputError(f"{path}: non-finite entries")
    return M


def write_matrix(path, M):
    lines = [",".join(repr(float(v)) for v in row) for row in np.atleast_2d(M)]
    Path(path).write_text("\n".join(lines) + "\n")


def cmd_recover(args):
    A = read_matrix(args.matrix)
    Y = read_matrix(args.obs)
    cfg = SsmpConfig(K=args.sparsity, L=args.L, epsilon=args.eps)
    if args.extended_iters is not None:
        res = ssmp_recover_extended(A, Y, cfg, args.extended_iters)
    else:
        res = ssmp_recover(A, Y, cfg)
    write_matrix(args.out, res.estimate)
    support = " ".join(str(i) for i in res.support)
    Path(args.out).with_suffix(".support").write_text(support + "\n")
    print(f"support={support}")
    print(f"iterations={res.iterations_run}")
    print(f"stop_reason={res.stop_reason}")
    return EXIT_OK


def cmd_bench(args):
    cfg = ExperimentConfig.from_json(Path(args.config).read_text(), metric=args.metric)
    if args.full_scale:
        cfg = full_scale(cfg)
    if args.fixed_matrix:
        cfg.fixed_matrix = True
    result = run_sweep(cfg, workers=args.workers)
    Path(args.out).write_text(emit_csv(result.table))
    return EXIT_OK


def _emit(report, measured):
    # without a matrix only the bound is asked for, so that is a success
    sys.stdout.write(report.to_text())
    if measured and report.status == NOT_COMPUTABLE:
        return EXIT_NOT_COMPUTABLE
    return EXIT_OK


def cmd_check(args):
    if args.what == "krank":
        A = read_matrix(args.matrix)
        k = krank(A)
        print(f"krank={k}")
        return EXIT_OK
    if args.what == "rip":
        A = read_matrix(args.matrix)
        est = rip_constant(A, args.order)
        print(f"order={est.order}")
        print(f"delta={est.delta!r}")
        print(f"exhaustive={str(est.exhaustive).lower()}")
        return EXIT_OK
    A = read_matrix(args.matrix) if args.matrix else None
    if args.c is not None:
        return _emit(table3_guarantee(args.c, args.K, args.L, A), A is not None)
    report = theorem1_guarantee(A, args.K, args.r, args.L)
    report.details["fundamental_limit"] = fundamental_limit(args.K, args.r)
    return _emit(report, A is not None)


def build_parser():
    # argparse itself exits with 2 on bad usage, matching the invalid-input code
    p = argparse.ArgumentParser(prog="ssmp", description="Joint sparse recovery with signal space matching pursuit.")
    sub = p.add_subparsers(dest="command", required=True)

    rec = sub.add_parser("recover", help="run SSMP on a matrix and observation file")
    rec.add_argument("--matrix", required=True, help="CSV file with the m x n sampling matrix")
    rec.add_argument("--obs", required=True, help="CSV file with the m x r observations")
    rec.add_argument("--sparsity", type=int, required=True, help="row sparsity K")
    rec.add_argument("--L", type=int, default=1, help="indices chosen per iteration")
    rec.add_argument("--eps", type=float, default=0.0, help="stopping threshold on the subspace distance")
    rec.add_argument("--extended-iters", type=int, default=None, help="iteration cap overriding min(K, m/L)")
    rec.add_argument("--out", required=True, help="estimate CSV; the support goes to <out>.support")
    rec.set_defaults(func=cmd_recover)

    bench = sub.add_parser("bench", help="run a Monte Carlo sweep")
    bench.add_argument("--metric", choices=("err", "esrr", "mse"), required=True)
    bench.add_argument("--config", required=True, help="JSON sweep configuration")
    bench.add_argument("--out", required=True, help="output CSV")
    bench.add_argument("--workers", type=int, default=1)
    bench.add_argument("--fixed-matrix", action="store_true",
                       help="draw A once per grid point instead of once per trial")
    bench.add_argument("--full-scale", action="store_true",
                       help="use m=64, n=512 and 5000 trials")
    bench.set_defaults(func=cmd_bench)

    check = sub.add_parser("check", help="exhaustive krank / RIP / guarantee checks")
    csub = check.add_subparsers(dest="what", required=True)
    ck = csub.add_parser("krank")
    ck.add_argument("--matrix", required=True)
    cr = csub.add_parser("rip")
    cr.add_argument("--matrix", required=True)
    cr.add_argument("--order", type=int, required=True)
    cg = csub.add_parser("guarantee")
    cg.add_argument("--K", type=int, required=True)
    cg.add_argument("--r", type=int, default=1)
    cg.add_argument("--L", type=int, default=1)
    cg.add_argument("--matrix", default=None)
    cg.add_argument("--c", type=int, default=None, help="report the extended-run guarantee for this c")
    check.set_defaults(func=cmd_check)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NotComputableError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NOT_COMPUTABLE
    except (SsmpError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
