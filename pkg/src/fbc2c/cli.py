"""Command-line entry points.

Subcommands: gen, encode, train, eval, diagnose, sweep.  Exit codes:
0 success, 2 bad configuration (message names the field), 3 missing file,
4 numerical failure.  Errors print one machine-parsable line to stderr.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import datagen
from .basis import ActivationKind, WindowKind, build_rfm, uniform_fem_basis
from .config import load_config
from .container import read_container, write_container
from .encoder import (CutMode, Ridge, TruncatedSvd, diagnostics, encode)
from .errors import (ConfigurationError, DataError, DomainError, NumericalError,
                     RankDeficiencyError, SolverError, TrainingDiverged)
from .experiment import eval_resolutions, run, sweep_cutoff


def _cmd_gen(args) -> int:
    if args.problem == "darcy1d":
        train, test = datagen.make_darcy1d(args.n, args.train, args.test, args.seed,
                                           tol=args.tol)
    elif args.problem == "poisson2d":
        train, test = datagen.make_poisson2d(args.n, args.train, args.test, args.seed)
    elif args.problem == "multi_output_1d":
        train, test = datagen.make_multi_output_1d(args.n, args.train, args.test, args.seed)
    elif args.problem == "highd_poisson":
        train, test, gen2 = datagen.make_highd_poisson(args.dim, args.n, args.seed)
    else:
        raise ConfigurationError(f"problem: unknown problem {args.problem!r}")
    arrays = {
        "input_points": train.input_points,
        "output_points": train.output_points,
        "inputs_train": train.inputs,
        "outputs_train": train.outputs,
        "inputs_test": test.inputs,
        "outputs_test": test.outputs,
    }
    meta = {
        "kind": "function_dataset",
        "problem": args.problem,
        "m_train": train.n_samples,
        "m_test": test.n_samples,
        "provenance_train": train.provenance,
        "provenance_test": test.provenance,
    }
    if args.problem == "highd_poisson":
        arrays["inputs_gen2"] = gen2.inputs
        arrays["outputs_gen2"] = gen2.outputs
        meta["m_gen2"] = gen2.n_samples
        meta["provenance_gen2"] = gen2.provenance
    write_container(args.output, arrays, meta)
    print(f"wrote {args.output}: {train.n_samples} train + {test.n_samples} test samples")
    return 0


def _basis_from_args(args, dim: int):
    if args.basis == "fem":
        return uniform_fem_basis(args.fem_nodes)
    partitions = [int(p) for p in args.partitions.split(",")]
    if len(partitions) != dim:
        raise ConfigurationError(
            f"partitions: got {len(partitions)} counts for a {dim}-dimensional problem"
        )
    bounds = None
    if args.bounds:
        flat = [float(v) for v in args.bounds.split(",")]
        bounds = np.asarray(flat).reshape(dim, 2)
    return build_rfm(dim, partitions, args.features, args.range_bound,
                     WindowKind(args.window), ActivationKind(args.activation),
                     args.basis_seed, bounds)


def _encode_config_from_args(args):
    if args.method == "ridge":
        return Ridge(lam=args.lam)
    return TruncatedSvd(cut=args.cut, cut_mode=CutMode(args.cut_mode))


def _cmd_encode(args) -> int:
    arrays, meta = read_container(args.dataset)
    side = "inputs" if args.side == "input" else "outputs"
    points = arrays[f"{args.side}_points"]
    values = np.concatenate([arrays[f"{side}_train"], arrays[f"{side}_test"]])
    if values.ndim == 3:
        raise ConfigurationError("side: inline encoding covers scalar components only")
    dim = 1 if points.ndim == 1 else points.shape[1]
    basis = _basis_from_args(args, dim)
    coeffs = encode(basis, points, values, _encode_config_from_args(args))
    diag = diagnostics(coeffs)
    write_container(args.output,
                    arrays={"coefficients": coeffs.values,
                            "singular_values": diag.singular_values,
                            "per_basis_variance": diag.per_basis_variance},
                    meta={"kind": "coefficients", "basis_id": coeffs.basis_id,
                          "erank": diag.effective_rank,
                          "variance_entropy": diag.variance_entropy,
                          "source": str(args.dataset)})
    print(f"wrote {args.output}: coefficients {coeffs.values.shape}, "
          f"erank {diag.effective_rank:.3f}")
    return 0


def _cmd_train(args) -> int:
    config = load_config(args.config)
    result = run(config, outdir=args.output)
    print(f"final test relative error {result.report.final_test_error:.6e}")
    print(f"artifacts in {args.output}")
    return 0


def _cmd_eval(args) -> int:
    config = load_config(args.config)
    result = run(config, outdir=args.output)
    for line in result.report.summary_lines():
        print(line)
    if args.resolutions:
        resolutions = [int(r) for r in args.resolutions.split(",")]
        table = eval_resolutions(result, resolutions)
        for r, err in table.items():
            print(f"resolution {r}: test_relative_error = {err!r}")
    return 0


def _cmd_diagnose(args) -> int:
    arrays, meta = read_container(args.container)
    name = "coefficients" if "coefficients" in arrays else next(iter(arrays))
    diag = diagnostics(np.atleast_2d(arrays[name]))
    print(f"array = {name}  shape = {arrays[name].shape}")
    print(f"erank = {diag.effective_rank:.3f}")
    print(f"variance_entropy = {diag.variance_entropy:.3f}")
    print(f"sigma_max = {diag.singular_values.max():.6e}")
    print(f"degenerate = {diag.degenerate}")
    return 0


def _cmd_sweep(args) -> int:
    config = load_config(args.config)
    cuts = [float(c) for c in args.cuts.split(",")]
    table = sweep_cutoff(config, cuts)
    print("cut,erank,variance_entropy,final_test_error")
    for row in table.rows:
        print(f"{row.cut:g},{row.erank:.6f},{row.variance_entropy:.6f},"
              f"{row.final_test_error:.6e}")
    if args.output:
        table.write_csv(args.output)
        print(f"wrote {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fbc2c",
        description="Fixed-basis coefficient-to-coefficient operator learning tools",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a function dataset container")
    p.add_argument("--problem", required=True,
                   choices=["darcy1d", "poisson2d", "highd_poisson", "multi_output_1d"])
    p.add_argument("--n", type=int, required=True,
                   help="grid points (per side for poisson2d, total for highd)")
    p.add_argument("--train", type=int, default=500)
    p.add_argument("--test", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=4, help="dimension for highd_poisson")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("encode", help="encode a dataset against a basis")
    p.add_argument("dataset")
    p.add_argument("--side", choices=["input", "output"], default="input")
    p.add_argument("--basis", choices=["rfm", "fem"], default="rfm")
    p.add_argument("--partitions", default="8", help="comma-separated counts per dim")
    p.add_argument("--features", type=int, default=16)
    p.add_argument("--range-bound", type=float, default=3.0)
    p.add_argument("--window", choices=["smooth", "characteristic"], default="smooth")
    p.add_argument("--activation", choices=["tanh", "sin"], default="tanh")
    p.add_argument("--basis-seed", type=int, default=0)
    p.add_argument("--bounds", default="0,1", help="comma-separated lo,hi per dim")
    p.add_argument("--fem-nodes", type=int, default=33)
    p.add_argument("--method", choices=["ridge", "tsvd"], default="tsvd")
    p.add_argument("--lam", type=float, default=0.0)
    p.add_argument("--cut", type=float, default=1e-2)
    p.add_argument("--cut-mode", choices=["relative", "absolute"], default="relative")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("train", help="run a config and write artifacts")
    p.add_argument("-c", "--config", required=True)
    p.add_argument("-o", "--output", required=True, help="artifact directory")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="run a config and print report metrics")
    p.add_argument("-c", "--config", required=True)
    p.add_argument("-o", "--output", default=None, help="optional artifact directory")
    p.add_argument("--resolutions", default=None,
                   help="comma-separated grid sizes for resolution transfer")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("diagnose", help="effective rank and variance of a container")
    p.add_argument("container")
    p.set_defaults(func=_cmd_diagnose)

    p = sub.add_parser("sweep", help="cutoff sweep table for a config")
    p.add_argument("-c", "--config", required=True)
    p.add_argument("--cuts", required=True, help="comma-separated cutoff values")
    p.add_argument("-o", "--output", default=None, help="optional CSV path")
    p.set_defaults(func=_cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, DomainError, DataError) as exc:
        print(f"error code=2 kind=config msg={exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error code=3 kind=missing-file msg={exc}", file=sys.stderr)
        return 3
    except (RankDeficiencyError, SolverError, NumericalError, TrainingDiverged) as exc:
        print(f"error code=4 kind=numeric msg={exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
