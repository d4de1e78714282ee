"""Command line: solve graph, image, and factorization instances.

Subcommands: maxcut, community, segment, factorize.  Each accepts a
solver pipeline (v, mr1, mrr, sdr), shared numeric knobs, and optional
--trace/--out paths.  Runs with the same seed and flags write
byte-identical trace files.  Exit codes: 0 converged, 1 finished
without converging (outputs still written), 2 input or usage error.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import admm_matrix, admm_vector, sdr
from .admm_vector import QuadraticForm
from .constraints import Free, UnitNormColumn, UnitNormRow
from .fileio import (InputFormatError, parse_graph, parse_observations,
                     parse_ppm, format_result_record, write_result_record)
from .problems import (build_community, build_maxcut, build_partial_ls,
                       build_segmentation, default_rank, relative_error)
from .results import SolverConfig
from .rounding import (cut_value, factor_from_eig, factor_from_svd,
                       hyperplane_round, sign_round)
from .sparse import quad_form

__all__ = ["main", "run", "build_parser"]


def _positive_float(text):
    val = float(text)
    if val <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return val


def _nonneg_float(text):
    val = float(text)
    if val < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {text}")
    return val


def _positive_int(text):
    val = int(text)
    if val <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return val


def _gamma_float(text):
    val = float(text)
    if val < 1.0:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {text}")
    return val


def _unit_interval(text):
    val = float(text)
    if not 0.0 <= val <= 1.0:
        raise argparse.ArgumentTypeError(f"must be in [0, 1], got {text}")
    return val


def build_parser():
    parser = argparse.ArgumentParser(
        prog="factorsdp",
        description="Factored ADMM and splitting solvers for graph cuts, "
                    "community detection, segmentation, and matrix completion.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--solver", choices=("v", "mr1", "mrr", "sdr"),
                        default="mrr", help="solution pipeline (default mrr)")
    common.add_argument("--rho0", type=_positive_float, default=None,
                        help="initial penalty (default: scaled to the "
                             "cost spectral norm)")
    common.add_argument("--gamma", type=_gamma_float, default=1.05,
                        help="penalty growth factor (default 1.05)")
    common.add_argument("--rho-max", type=_positive_float, default=1e4,
                        help="penalty cap (default 10000)")
    common.add_argument("--eps", type=_positive_float, default=1e-3,
                        help="stopping tolerance (default 1e-3)")
    common.add_argument("--max-iters", type=_positive_int, default=5000,
                        help="iteration cap (default 5000)")
    common.add_argument("--seed", type=int, default=0,
                        help="seed for initialization and rounding (default 0)")
    common.add_argument("--trials", type=_positive_int, default=10,
                        help="randomized recovery budget: hyperplane draws "
                             "per column count for mrr/sdr, restarts from "
                             "derived seeds for v/mr1 (default 10)")
    common.add_argument("--r", type=_positive_int, default=None,
                        help="factor rank for mrr (default ceil(sqrt(2n)); "
                             "5 for factorize)")
    common.add_argument("--factor-set", choices=("rows", "free"),
                        default="rows",
                        help="mrr factor constraint: unit rows or free "
                             "(default rows)")
    common.add_argument("--sdr-variant", choices=("reflected", "literal"),
                        default="reflected",
                        help="consensus averaging rule of the sdr pipeline")
    common.add_argument("--trace", metavar="PATH",
                        help="write the per-iteration CSV trace here")
    common.add_argument("--out", metavar="PATH",
                        help="write the result record here (plus a .json "
                             "sidecar)")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("maxcut", parents=[common],
                       help="maximum cut of an edge-list graph")
    p.add_argument("input", help="graph file: 'n m' header then 'i j w' lines")

    p = sub.add_parser("community", parents=[common],
                       help="two-community recovery on an edge-list graph")
    p.add_argument("input", help="graph file: 'n m' header then 'i j w' lines")
    p.add_argument("--p", type=_unit_interval, default=None,
                   help="within-community edge probability, if known")
    p.add_argument("--q", type=_unit_interval, default=None,
                   help="cross-community edge probability, if known")

    p = sub.add_parser("segment", parents=[common],
                       help="two-phase segmentation of a P3/P6 ppm image")
    p.add_argument("input", help="ppm image, maxval 255")
    p.add_argument("--c-weight", type=_nonneg_float, default=1.0,
                   help="weight of pixel coordinates in the feature vector")
    p.add_argument("--kernel", choices=("raw", "gaussian"), default="raw",
                   help="affinity: squared feature distance or gaussian")
    p.add_argument("--sigma", type=_positive_float, default=1.0,
                   help="gaussian kernel width")
    p.add_argument("--formulation", choices=("maxcut", "community"),
                   default="maxcut", help="graph objective to delegate to")
    p.add_argument("--pixel-budget", type=_positive_int, default=4096,
                   help="largest pixel count accepted")

    p = sub.add_parser("factorize", parents=[common],
                       help="nonnegative low-rank fit of observed entries")
    p.add_argument("input", help="observations file: 'n m' header then "
                                 "'i j v' lines, full diagonal required")

    return parser


def _fail(message):
    print(f"error: {message}", file=sys.stderr)
    return 2


def _load_instance(args):
    if args.command == "maxcut":
        with open(args.input) as fh:
            A = parse_graph(fh.read(), name=args.input)
        return build_maxcut(A)
    if args.command == "community":
        if (args.p is None) != (args.q is None):
            raise InputFormatError("give both --p and --q, or neither")
        with open(args.input) as fh:
            A = parse_graph(fh.read(), name=args.input)
        return build_community(A, p=args.p, q=args.q)
    if args.command == "segment":
        with open(args.input, "rb") as fh:
            image = parse_ppm(fh.read(), name=args.input)
        return build_segmentation(image, c_weight=args.c_weight,
                                  kernel=args.kernel, sigma=args.sigma,
                                  formulation=args.formulation,
                                  pixel_budget=args.pixel_budget)
    with open(args.input) as fh:
        C_obs = parse_observations(fh.read(), name=args.input)
    return build_partial_ls(C_obs, r=args.r if args.r else 5)


def _config(args, seed):
    return SolverConfig(rho0=args.rho0, gamma=args.gamma,
                        rho_max=args.rho_max, eps=args.eps,
                        max_iter=args.max_iters, seed=seed)


def _solve(instance, args):
    """Dispatch to the chosen pipeline; returns (result, labels, r).

    The sign-rounded pipelines (v, mr1) have no rounding randomness, so
    their trial budget restarts the solver from seeds seed..seed+trials-1
    and the lowest rounded objective wins; mrr and sdr solve once and
    spend the budget on Gaussian rounding draws.

    The v restarts split across the two vector sets: binary runs explore
    sign basins but miss on some graphs where the spherical relaxation
    (whose fixed point tracks the bottom cost eigenvector) is reliable,
    and vice versa, so the last third of the budget switches to the
    sphere before everything is sign rounded.
    """
    C = instance.objective.C
    if args.solver == "v":
        objective = QuadraticForm(C)
        sphere_trials = args.trials // 3
        best = None
        for t in range(args.trials):
            if t < args.trials - sphere_trials:
                set_ = instance.set_
            else:
                set_ = UnitNormColumn()
            result = admm_vector.solve(objective, set_, instance.n,
                                       _config(args, args.seed + t))
            labels = sign_round(result.x)
            value = quad_form(C, labels)
            if best is None or value < best[0]:
                best = (value, result, labels)
        return best[1], best[2], 1
    if args.solver == "sdr":
        drs_config = sdr.DrsConfig(eps=args.eps, max_iter=args.max_iters,
                                   variant=args.sdr_variant)
        result = sdr.solve(C, instance.lmap, drs_config)
        # factor_from_eig clamps slightly negative eigenvalues; keep the
        # count in the record so rounded output is auditable
        result.flags["clamped_eigenvalues"] = int(
            np.sum(np.linalg.eigvalsh(result.Z) < 0.0))
        F = factor_from_eig(result.Z)
        rounded = hyperplane_round(F, C, trials=args.trials, seed=args.seed)
        return result, rounded.x, instance.n
    if args.solver == "mr1":
        best = None
        for t in range(args.trials):
            result = admm_matrix.solve(instance.objective, instance.lmap,
                                       instance.set_, instance.n, 1,
                                       _config(args, args.seed + t))
            labels = sign_round(result.X[:, 0])
            value = quad_form(C, labels)
            if best is None or value < best[0]:
                best = (value, result, labels)
        return best[1], best[2], 1
    # mrr
    if instance.name == "factorize":
        r = args.r if args.r else instance.r_default
        set_ = instance.set_
    else:
        r = args.r if args.r else default_rank(instance.n)
        set_ = Free() if args.factor_set == "free" else UnitNormRow()
    result = admm_matrix.solve(instance.objective, instance.lmap, set_,
                               instance.n, r, _config(args, args.seed))
    if instance.name == "factorize":
        return result, None, r
    F = factor_from_svd(result.X)
    rounded = hyperplane_round(F, C, trials=args.trials, seed=args.seed)
    return result, rounded.x, r


def run(argv=None):
    """Parse, solve, write outputs; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if args.command == "factorize" and args.solver in ("v", "sdr"):
        return _fail(f"factorize supports the factored pipelines only "
                     f"(mr1, mrr), not {args.solver!r}")

    try:
        instance = _load_instance(args)
    except OSError as exc:
        return _fail(str(exc))
    except (InputFormatError, ValueError) as exc:
        return _fail(str(exc))

    start = time.perf_counter()
    try:
        result, labels, r = _solve(instance, args)
    except ValueError as exc:
        return _fail(str(exc))
    wall = time.perf_counter() - start

    record = {
        "problem": instance.name,
        "solver": args.solver,
        "n": instance.n,
        "r": r,
        "status": "converged" if result.converged else "not_converged",
        "converged": result.converged,
        "iterations": result.iterations,
        "objective": float(result.objective),
        "P": float(result.P),
        "D": float(result.D),
        "rho_final": float(result.rho),
        "seed": args.seed,
        "wall_time_s": wall,
        "flags": {k: (bool(v) if isinstance(v, (bool, np.bool_)) else int(v))
                  for k, v in result.flags.items()},
    }
    sidecar_extra = {}
    if labels is not None:
        record["rounded_objective"] = quad_form(instance.objective.C, labels)
        if instance.adjacency is not None:
            record["cut_value"] = cut_value(instance.adjacency, labels)
        sidecar_extra["labels"] = [int(v) for v in labels]
    if instance.name == "factorize":
        record["relative_error"] = relative_error(result.Z,
                                                  instance.objective.C)

    if args.trace:
        result.trace.write_csv(args.trace)
    if args.out:
        write_result_record(record, args.out, sidecar_extra=sidecar_extra)
    sys.stdout.write(format_result_record(record))
    return 0 if result.converged else 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
