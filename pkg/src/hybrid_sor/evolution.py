"""Population loop of the hybrid evolutionary SOR solver.

Each generation recombines the population with a random row-stochastic
matrix, mutates every individual with one SOR sweep at its slot's
relaxation factor, adapts the factors pairwise, and keeps the better half
(each survivor duplicated).  Relaxation factors belong to slots, not to
solution vectors, so selection never copies them.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .adaptation import AdaptationParams, ConfigurationError, adapt_pair, init_omegas
from .linalg import NORMS, DivergenceError, LinearSystem, sor_sweep

CONVERGED = "converged"
DIVERGED = "diverged"
EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class SolverConfig:
    population_size: int = 2
    threshold_error: float = 1e-12
    max_generations: int = 2000
    init_domain: tuple = (-30.0, 30.0)
    divergence_cutoff: float = 1e12
    seed: int = 0
    adaptation: AdaptationParams = field(default_factory=AdaptationParams)
    norm: str = "euclidean"

    def __post_init__(self):
        if not self.threshold_error > 0:
            raise ConfigurationError("threshold_error must be positive")
        if not self.divergence_cutoff > self.threshold_error:
            raise ConfigurationError("divergence_cutoff must exceed threshold_error")
        lo, hi = self.init_domain
        if not lo < hi:
            raise ConfigurationError(f"empty init_domain {self.init_domain}")
        if self.norm not in NORMS:
            raise ConfigurationError(f"norm must be one of {NORMS}")
        n = self.population_size
        if int(n) != n or n < 2 or n % 2:
            raise ConfigurationError("population_size must be an even integer >= 2")
        if int(self.max_generations) != self.max_generations or self.max_generations < 1:
            raise ConfigurationError("max_generations must be a positive integer")
        if self.adaptation.max_generations != self.max_generations:
            # The generation budget is also the time horizon of the adaptation.
            object.__setattr__(self, "adaptation",
                               replace(self.adaptation, max_generations=int(self.max_generations)))

    @classmethod
    def for_mode(cls, mode, **kwargs):
        """Build a config whose adaptation uses ``mode``; adaptation keywords pass through."""
        keys = set(AdaptationParams.__dataclass_fields__) - {"max_generations"}
        adapt_kwargs = {k: kwargs.pop(k) for k in list(kwargs) if k in keys}
        t_max = kwargs.setdefault("max_generations", cls.max_generations)
        return cls(adaptation=AdaptationParams(mode=mode, max_generations=t_max, **adapt_kwargs),
                   **kwargs)


@dataclass
class Population:
    """Slot-aligned solution vectors, cached errors and relaxation factors.

    ``xs`` has shape ``(N, n)``.  ``errors`` is None between recombination
    and the next evaluation.
    """

    xs: np.ndarray
    errors: np.ndarray
    omegas: np.ndarray
    generation: int = 0

    @property
    def size(self):
        return self.xs.shape[0]

    def best_index(self):
        return int(np.argmin(self.errors))


@dataclass
class RunResult:
    status: str
    solution: np.ndarray
    best_error_history: list
    omega_history: list
    generations_used: int
    label: str = ""

    @property
    def best_error(self):
        return min(self.best_error_history)


def evaluate(population, system, norm="euclidean"):
    use_inf = norm == "infinity"
    errors = np.array([_kernels.residual_kernel(system.a, system.b, x, use_inf)
                       for x in population.xs])
    return replace(population, errors=errors)


def init_population(system, config, rng):
    lo, hi = config.init_domain
    xs = rng.uniform(lo, hi, size=(config.population_size, system.n))
    omegas = init_omegas(config.adaptation, config.population_size)
    pop = Population(xs=xs, errors=None, omegas=omegas, generation=0)
    return evaluate(pop, system, config.norm)


def make_stochastic_matrix(size, rng):
    """Uniform(0, 1) entries normalized so each row sums to one."""
    if size < 2:
        raise ConfigurationError("stochastic matrix needs size >= 2")
    raw = rng.uniform(0.0, 1.0, size=(size, size))
    # uniform() is half-open at 0; an all-zero row is practically impossible but fatal.
    raw[raw.sum(axis=1) == 0.0] = 1.0
    return raw / raw.sum(axis=1, keepdims=True)


def recombine(population, r):
    r = np.asarray(r, dtype=np.float64)
    n = population.size
    if r.shape != (n, n):
        raise ValueError(f"recombination matrix must be {n}x{n}")
    return replace(population, xs=r @ population.xs, errors=None)


def mutate(population, system, norm="euclidean"):
    """One SOR sweep per individual, then re-evaluate errors.

    Raises DivergenceError (with the generation attached) on overflow.
    """
    xs = np.array(population.xs, dtype=np.float64, order="C")
    errors = np.empty(population.size)
    with np.errstate(over="ignore", invalid="ignore"):
        _kernels.sweep_population_kernel(system.a, system.b, xs,
                                         np.ascontiguousarray(population.omegas, dtype=np.float64),
                                         errors, norm == "infinity")
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(errors))):
        raise DivergenceError("mutation produced non-finite values", population.generation + 1)
    return replace(population, xs=xs, errors=errors)


def adapt_population(population, t, params, rng):
    """Adapt relaxation factors over one random disjoint pairing of the slots."""
    if population.errors is None:
        raise ValueError("errors must be evaluated before adaptation")
    omegas = population.omegas.copy()
    order = rng.permutation(population.size)
    for k in range(0, population.size, 2):
        i, j = int(order[k]), int(order[k + 1])
        omegas[i], omegas[j] = adapt_pair(omegas[i], omegas[j],
                                          population.errors[i], population.errors[j],
                                          t, params, rng)
    return replace(population, omegas=omegas)


def select_and_reproduce(population):
    if population.errors is None:
        raise ValueError("errors must be evaluated before selection")
    half = population.size // 2
    survivors = np.argsort(population.errors, kind="stable")[:half]
    picks = np.repeat(survivors, 2)
    return replace(population, xs=population.xs[picks].copy(),
                   errors=population.errors[picks].copy(),
                   generation=population.generation + 1)


def seed_streams(seed):
    """Independent ``(problem_rng, solver_rng)`` generators derived from ``seed``.

    The problem stream draws random systems; the solver stream draws the
    initial population and every stochastic choice of the evolution loop.
    """
    problem_ss, solver_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(problem_ss), np.random.default_rng(solver_ss)


def _best_error(errors):
    return float(np.min(errors)) if np.all(np.isfinite(errors)) else float("inf")


def solve(system, config, rng=None, population=None, label=""):
    """Run the hybrid evolutionary SOR solver.

    ``rng`` defaults to the solver stream of ``seed_streams(config.seed)``.
    The initial population is drawn from it first, so runs sharing a seed
    start from the same population regardless of adaptation mode.
    """
    if rng is None:
        rng = seed_streams(config.seed)[1]
    if population is None:
        population = init_population(system, config, rng)
    params = config.adaptation

    best_hist = [_best_error(population.errors)]
    omega_hist = [population.omegas.copy()]
    best_x = population.xs[population.best_index()].copy()
    best_err = best_hist[0]

    status = None
    if best_err < config.threshold_error:
        status = CONVERGED
    while status is None:
        t = population.generation + 1
        r = make_stochastic_matrix(population.size, rng)
        try:
            offspring = mutate(recombine(population, r), system, config.norm)
        except DivergenceError:
            best_hist.append(float("inf"))
            omega_hist.append(population.omegas.copy())
            status = DIVERGED
            break
        offspring = adapt_population(offspring, t, params, rng)
        population = select_and_reproduce(offspring)

        gen_best = float(population.errors[0])
        best_hist.append(gen_best)
        omega_hist.append(population.omegas.copy())
        if gen_best < best_err:
            best_err = gen_best
            best_x = population.xs[0].copy()

        if gen_best < config.threshold_error:
            status = CONVERGED
        elif gen_best > config.divergence_cutoff:
            status = DIVERGED
        elif population.generation >= config.max_generations:
            status = EXHAUSTED

    return RunResult(status=status, solution=best_x, best_error_history=best_hist,
                     omega_history=omega_hist, generations_used=len(best_hist) - 1,
                     label=label)


def solve_classical_sor(system, omega, eta, max_iterations, norm="euclidean",
                        divergence_cutoff=1e12):
    """Fixed-omega SOR from the zero vector with the solver's termination rules."""
    if not 0.0 < omega < 2.0:
        raise ConfigurationError("classical SOR needs 0 < omega < 2")
    x = np.zeros(system.n)
    use_inf = norm == "infinity"
    err = float(_kernels.residual_kernel(system.a, system.b, x, use_inf))
    hist = [err]
    omegas = [np.array([omega])]
    best_x, best_err = x.copy(), err
    status = CONVERGED if err < eta else None
    k = 0
    while status is None:
        k += 1
        try:
            x = sor_sweep(system, x, omega)
        except DivergenceError:
            hist.append(float("inf"))
            omegas.append(np.array([omega]))
            status = DIVERGED
            break
        err = float(_kernels.residual_kernel(system.a, system.b, x, use_inf))
        hist.append(err)
        omegas.append(np.array([omega]))
        if err < best_err:
            best_x, best_err = x.copy(), err
        if err < eta:
            status = CONVERGED
        elif not np.isfinite(err) or err > divergence_cutoff:
            status = DIVERGED
        elif k >= max_iterations:
            status = EXHAUSTED
    return RunResult(status=status, solution=best_x, best_error_history=hist,
                     omega_history=omegas, generations_used=k, label="classical")
