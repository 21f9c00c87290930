"""Experiment runner: single solves and paired multi-seed comparisons.

Every (solver, seed) cell is independent.  The system realization and the
initial population depend only on the seed, so in a comparison all solvers
see identical inputs for a given seed.
"""

import configparser
import csv
import json
import logging
import os
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .adaptation import AdaptationParams, ConfigurationError
from .evolution import CONVERGED, DIVERGED, EXHAUSTED, SolverConfig, seed_streams, solve, solve_classical_sor
from .io import export_history, load_system
from .problems import TABLE_I, generate_problem, get_spec

log = logging.getLogger(__name__)

SOLVERS = ("classical", "ua", "tva")
OUTPUT_DIR_ENV = "HYBRID_SOR_OUTPUT_DIR"

_ADAPT_KEYS = {"omega_lower": float, "omega_upper": float, "e_x": float, "e_y": float,
               "gamma": float, "clamp_epsilon": float}
_SOLVER_KEYS = {"population_size": int, "threshold_error": float, "max_generations": int,
                "divergence_cutoff": float, "norm": str, "init_domain": None, "omega": float}
OVERRIDE_KEYS = {**_ADAPT_KEYS, **_SOLVER_KEYS}


def default_output_dir():
    return os.environ.get(OUTPUT_DIR_ENV, "results")


@dataclass
class ExperimentConfig:
    problem: str = "P1"
    solvers: tuple = ("ua", "tva")
    seeds: tuple = tuple(range(10))
    dimension: int = None
    overrides: dict = field(default_factory=dict)
    solver_overrides: dict = field(default_factory=dict)
    output_dir: str = None
    workers: int = 1

    def __post_init__(self):
        self.solvers = tuple(s.lower() for s in self.solvers)
        self.seeds = tuple(int(s) for s in self.seeds)
        if not self.seeds:
            raise ConfigurationError("at least one seed is required")
        if not self.solvers:
            raise ConfigurationError("at least one solver is required")
        for s in self.solvers:
            if s not in SOLVERS:
                raise ConfigurationError(f"unknown solver {s!r}; choose from {SOLVERS}")
        if len(set(self.solvers)) != len(self.solvers):
            raise ConfigurationError("duplicate solver in solver list")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")
        for key in list(self.overrides) + [k for d in self.solver_overrides.values() for k in d]:
            if key not in OVERRIDE_KEYS:
                raise ConfigurationError(f"unknown parameter {key!r}")
        if self.output_dir is None:
            self.output_dir = default_output_dir()
        if not self.is_file_problem() or (re.fullmatch(r"[Pp]\d+", str(self.problem))
                                          and not os.path.exists(self.problem)):
            get_spec(self.problem)
        # Fail early on invalid parameter combinations.
        for solver in self.solvers:
            params = self.params_for(solver)
            if solver == "classical":
                if not 0.0 < params.get("omega", 1.0) < 2.0:
                    raise ConfigurationError("classical SOR needs 0 < omega < 2")
            else:
                build_solver_config(solver, params, 0)

    def is_file_problem(self):
        return str(self.problem).upper() not in TABLE_I

    @property
    def problem_name(self):
        if self.is_file_problem():
            return os.path.splitext(os.path.basename(self.problem))[0]
        return str(self.problem).upper()

    def params_for(self, solver):
        params = {}
        if not self.is_file_problem():
            spec = get_spec(self.problem)
            params["threshold_error"] = spec.threshold_error
            params["max_generations"] = spec.max_generations
        params.update(self.overrides)
        params.update(self.solver_overrides.get(solver, {}))
        return params

    def system_for(self, seed):
        if self.is_file_problem():
            return load_system(self.problem)
        problem_rng, _ = seed_streams(seed)
        system, redraws = generate_problem(get_spec(self.problem, self.dimension), problem_rng)
        if redraws:
            log.info("%s seed %d: re-drew %d near-zero diagonal entries", self.problem, seed, redraws)
        return system


def build_solver_config(mode, params, seed):
    adapt = {k: v for k, v in params.items() if k in _ADAPT_KEYS}
    rest = {k: v for k, v in params.items() if k in _SOLVER_KEYS and k != "omega"}
    if "init_domain" in rest:
        rest["init_domain"] = tuple(float(v) for v in rest["init_domain"])
    t_max = int(rest.get("max_generations", 2000))
    try:
        adaptation = AdaptationParams(mode=mode, max_generations=t_max, **adapt)
        return SolverConfig(seed=seed, adaptation=adaptation, **rest)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from None


def run_cell(config, solver, seed):
    """Run one (solver, seed) cell; returns ``(result, elapsed_seconds)``."""
    system = config.system_for(seed)
    params = config.params_for(solver)
    start = time.perf_counter()
    if solver == "classical":
        result = solve_classical_sor(system, params.get("omega", 1.0),
                                     params.get("threshold_error", 1e-12),
                                     int(params.get("max_generations", 2000)),
                                     norm=params.get("norm", "euclidean"),
                                     divergence_cutoff=params.get("divergence_cutoff", 1e12))
    else:
        solver_config = build_solver_config(solver, params, seed)
        _, solver_rng = seed_streams(seed)
        result = solve(system, solver_config, rng=solver_rng, label=solver)
    elapsed = time.perf_counter() - start
    result.label = solver
    return result, elapsed


def _run_cell_args(args):
    return run_cell(*args)


def generations_to_threshold(result):
    """Generations used for a converged run, ``inf`` otherwise."""
    return float(result.generations_used) if result.status == CONVERGED else float("inf")


def summarize(results):
    """Per-solver statistics from ``{(solver, seed): RunResult}``."""
    rows = []
    for solver in dict.fromkeys(s for s, _ in results):
        runs = [r for (s, _), r in results.items() if s == solver]
        gens = np.array([generations_to_threshold(r) for r in runs])
        finite = gens[np.isfinite(gens)]
        final = np.array([r.best_error_history[-1] for r in runs])
        rows.append({
            "solver": solver,
            "runs": len(runs),
            "converged": sum(r.status == CONVERGED for r in runs),
            "diverged": sum(r.status == DIVERGED for r in runs),
            "exhausted": sum(r.status == EXHAUSTED for r in runs),
            "median_generations": float(np.median(gens)),
            "mean_generations": float(finite.mean()) if finite.size else float("inf"),
            "median_final_error": float(np.median(final)),
            "mean_final_error": float(final.mean()),
        })
    return rows


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.12e}" if np.isfinite(v) else ("inf" if v > 0 else "nan")
    return str(v)


def _write_csv(path, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(rows[0]))
        for row in rows:
            writer.writerow([_fmt(v) for v in row.values()])


def run_experiment(config, write=True):
    """Execute every (solver, seed) cell and write histories plus summaries.

    Returns ``(results, summary)`` where ``results`` maps ``(solver, seed)``
    to RunResult in solver-then-seed order.  Output files:
    ``<problem>_<solver>_seed<seed>.csv`` per run, ``runs.csv``,
    ``summary.csv`` and ``timings.json`` (wall-clock, informational only).
    """
    cells = [(solver, seed) for solver in config.solvers for seed in config.seeds]
    if config.workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(_run_cell_args, [(config, s, seed) for s, seed in cells]))
    else:
        outcomes = [run_cell(config, s, seed) for s, seed in cells]
    results = {cell: res for cell, (res, _) in zip(cells, outcomes)}
    timings = {f"{s}/seed{seed}": dt for (s, seed), (_, dt) in zip(cells, outcomes)}
    summary = summarize(results)

    if write:
        out = config.output_dir
        try:
            os.makedirs(out, exist_ok=True)
            for (solver, seed), res in results.items():
                export_history(res, os.path.join(out, f"{config.problem_name}_{solver}_seed{seed}.csv"))
            _write_csv(os.path.join(out, "runs.csv"), [
                {"solver": s, "seed": seed, "status": r.status,
                 "generations_used": r.generations_used,
                 "final_error": float(r.best_error_history[-1]),
                 "best_error": float(r.best_error)}
                for (s, seed), r in results.items()])
            _write_csv(os.path.join(out, "summary.csv"), summary)
            with open(os.path.join(out, "timings.json"), "w", encoding="utf-8") as fh:
                json.dump(timings, fh, indent=2, sort_keys=True)
        except OSError as exc:
            raise OSError(f"cannot write results to {out!r}: {exc}") from exc
    return results, summary


def parse_seeds(text):
    """Parse ``"0-9"``, ``"1,3,5"`` or a mix like ``"0-2,7"``."""
    seeds = []
    for part in str(text).replace(" ", "").split(","):
        if not part:
            continue
        try:
            if "-" in part:
                lo, hi = (int(v) for v in part.split("-", 1))
                if hi < lo:
                    raise ValueError
                seeds.extend(range(lo, hi + 1))
            else:
                seeds.append(int(part))
        except ValueError:
            raise ConfigurationError(f"bad seed specification {part!r}") from None
    if not seeds:
        raise ConfigurationError("no seeds given")
    return tuple(seeds)


def _convert(key, value):
    conv = OVERRIDE_KEYS[key]
    if key == "init_domain":
        parts = str(value).replace(",", " ").split()
        if len(parts) != 2:
            raise ConfigurationError("init_domain needs two numbers")
        return (float(parts[0]), float(parts[1]))
    try:
        return conv(value)
    except ValueError:
        raise ConfigurationError(f"bad value {value!r} for {key}") from None


def load_experiment_config(path, **cli):
    """Read an INI-style experiment file.

    ``[experiment]`` holds problem, dimension, solvers, seeds, workers and
    output_dir; ``[solver]`` holds overrides shared by all solvers; a
    section named after a solver (``[ua]``, ``[tva]``, ``[classical]``)
    holds overrides for that solver only.  Keyword arguments that are not
    None take precedence over the file.
    """
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigurationError(f"{path}: {exc}") from None

    exp = parser["experiment"] if parser.has_section("experiment") else {}
    kwargs = {}
    if "problem" in exp:
        kwargs["problem"] = exp["problem"]
    if "dimension" in exp:
        kwargs["dimension"] = int(exp["dimension"])
    if "solvers" in exp:
        kwargs["solvers"] = tuple(s for s in exp["solvers"].replace(",", " ").split())
    if "seeds" in exp:
        kwargs["seeds"] = parse_seeds(exp["seeds"])
    if "workers" in exp:
        kwargs["workers"] = int(exp["workers"])
    if "output_dir" in exp:
        kwargs["output_dir"] = exp["output_dir"]

    def section(name):
        if not parser.has_section(name):
            return {}
        out = {}
        for key, value in parser[name].items():
            if key not in OVERRIDE_KEYS:
                raise ConfigurationError(f"{path}: unknown parameter {key!r} in [{name}]")
            out[key] = _convert(key, value)
        return out

    kwargs["overrides"] = section("solver")
    kwargs["solver_overrides"] = {s: section(s) for s in SOLVERS if parser.has_section(s)}
    unknown = set(parser.sections()) - {"experiment", "solver", *SOLVERS}
    if unknown:
        raise ConfigurationError(f"{path}: unknown section(s) {sorted(unknown)}")

    overrides = cli.pop("overrides", None) or {}
    kwargs["overrides"].update(overrides)
    kwargs.update({k: v for k, v in cli.items() if v is not None})
    return ExperimentConfig(**kwargs)
