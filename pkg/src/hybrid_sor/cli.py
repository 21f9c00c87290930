"""Command-line entry point: ``hybrid-sor {gen,solve,compare}``."""

import argparse
import logging
import sys

from .adaptation import ConfigurationError
from .evolution import seed_streams
from .harness import ExperimentConfig, load_experiment_config, parse_seeds, run_experiment
from .io import SystemFormatError, save_system
from .problems import TABLE_I, generate_problem, get_spec

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 1, 2

_OVERRIDE_FLAGS = [
    ("--population-size", "population_size", int, "population size N (even)"),
    ("--gamma", "gamma", float, "time-variant exponent"),
    ("--e-x", "e_x", float, "perturbation scale of the worse relaxation factor"),
    ("--e-y", "e_y", float, "perturbation scale of the better relaxation factor"),
    ("--eta", "threshold_error", float, "threshold error"),
    ("--max-generations", "max_generations", int, "generation budget T"),
    ("--norm", "norm", str, "residual norm: euclidean or infinity"),
    ("--omega", "omega", float, "fixed relaxation factor for the classical solver"),
    ("--omega-lower", "omega_lower", float, "lower relaxation bound"),
    ("--omega-upper", "omega_upper", float, "upper relaxation bound"),
    ("--divergence-cutoff", "divergence_cutoff", float, "error above which a run is diverged"),
    ("--clamp-epsilon", "clamp_epsilon", float, "margin kept from the relaxation bounds"),
]


def _add_common(p):
    p.add_argument("--problem", default=None,
                   help=f"problem label ({', '.join(TABLE_I)}) or path to a system file")
    p.add_argument("--dimension", type=int, default=None, help="system size for generated problems")
    p.add_argument("--config", default=None, help="INI experiment file")
    p.add_argument("--output-dir", default=None,
                   help="directory for CSV output (default: $HYBRID_SOR_OUTPUT_DIR or ./results)")
    p.add_argument("--init-domain", nargs=2, type=float, metavar=("LO", "HI"), default=None)
    for flag, dest, typ, text in _OVERRIDE_FLAGS:
        p.add_argument(flag, dest=dest, type=typ, default=None, help=text)


def build_parser():
    parser = argparse.ArgumentParser(prog="hybrid-sor", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write a benchmark system to a file")
    gen.add_argument("problem", help=f"one of {', '.join(TABLE_I)}")
    gen.add_argument("-o", "--output", required=True)
    gen.add_argument("--dimension", type=int, default=None)
    gen.add_argument("--seed", type=int, default=0)

    solve = sub.add_parser("solve", help="run one solver on one problem")
    _add_common(solve)
    solve.add_argument("--solver", default=None, choices=("classical", "ua", "tva"))
    solve.add_argument("--seed", type=int, default=None)

    compare = sub.add_parser("compare", help="paired multi-seed comparison")
    _add_common(compare)
    compare.add_argument("--solvers", default=None, help="comma-separated, e.g. ua,tva")
    compare.add_argument("--seeds", default=None, help="e.g. 0-9 or 1,4,7")
    compare.add_argument("--workers", type=int, default=None)
    return parser


def _experiment_from_args(args):
    overrides = {dest: getattr(args, dest) for _, dest, _, _ in _OVERRIDE_FLAGS
                 if getattr(args, dest) is not None}
    if args.init_domain is not None:
        overrides["init_domain"] = tuple(args.init_domain)
    cli = {"problem": args.problem, "dimension": args.dimension, "output_dir": args.output_dir}
    if args.command == "solve":
        cli["solvers"] = (args.solver,) if args.solver else None
        cli["seeds"] = (args.seed,) if args.seed is not None else None
    else:
        cli["solvers"] = tuple(s for s in args.solvers.split(",") if s) if args.solvers else None
        cli["seeds"] = parse_seeds(args.seeds) if args.seeds else None
        cli["workers"] = args.workers
    if args.config:
        return load_experiment_config(args.config, overrides=overrides, **cli)
    kwargs = {k: v for k, v in cli.items() if v is not None}
    if args.command == "solve":
        kwargs.setdefault("solvers", ("tva",))
        kwargs.setdefault("seeds", (0,))
    return ExperimentConfig(overrides=overrides, **kwargs)


def _print_summary(summary, out=sys.stdout):
    cols = ("solver", "runs", "converged", "diverged", "exhausted",
            "median_generations", "mean_generations", "median_final_error")
    print("  ".join(f"{c:>18}" for c in cols), file=out)
    for row in summary:
        cells = []
        for c in cols:
            v = row[c]
            cells.append(f"{v:>18.6g}" if isinstance(v, float) else f"{v!s:>18}")
        print("  ".join(cells), file=out)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "gen":
            spec = get_spec(args.problem, args.dimension)
            system, redraws = generate_problem(spec, seed_streams(args.seed)[0])
            save_system(system, args.output)
            print(f"wrote {spec.label} (n={system.n}, diagonal re-draws={redraws}) to {args.output}")
            return EXIT_OK
        config = _experiment_from_args(args)
        results, summary = run_experiment(config)
    except (ConfigurationError, SystemFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

    if args.command == "solve":
        (solver, seed), res = next(iter(results.items()))
        print(f"{solver} seed {seed}: {res.status} after {res.generations_used} generations, "
              f"best error {res.best_error:.3e}")
    _print_summary(summary)
    print(f"results written to {config.output_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
