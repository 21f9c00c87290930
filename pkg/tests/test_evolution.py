import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import first_violation, max_error_trajectory, random_dd
from hybrid_sor import (AdaptationParams, ConfigurationError, init_omegas, LinearSystem, SolverConfig, direct_solve,
                        residual_norm, solve, solve_classical_sor)
from hybrid_sor.evolution import (Population, adapt_population, evaluate, init_population,
                                  make_stochastic_matrix, mutate, recombine, select_and_reproduce)
from hybrid_sor.problems import diagonally_dominant_system, generate_problem


def population(xs, errors=None, omegas=None):
    xs = np.asarray(xs, dtype=float)
    if omegas is None:
        omegas = np.linspace(0.5, 1.5, len(xs))
    return Population(xs=xs, errors=None if errors is None else np.asarray(errors, dtype=float),
                      omegas=np.asarray(omegas, dtype=float))


class TestInitPopulation:
    def test_domain_and_omegas(self):
        system, _ = generate_problem("P1")
        pop = init_population(system, SolverConfig(), np.random.default_rng(0))
        assert pop.xs.shape == (2, 100)
        assert np.all((pop.xs > -30) & (pop.xs < 30))
        np.testing.assert_allclose(pop.omegas, [0.5, 1.5])
        assert pop.generation == 0
        np.testing.assert_allclose(pop.errors, [residual_norm(system, x) for x in pop.xs], rtol=1e-12)

    def test_deterministic(self):
        system = random_dd(0)
        a = init_population(system, SolverConfig(population_size=4), np.random.default_rng(5))
        b = init_population(system, SolverConfig(population_size=4), np.random.default_rng(5))
        np.testing.assert_array_equal(a.xs, b.xs)


class TestStochasticMatrix:
    @settings(max_examples=50, deadline=None)
    @given(size=st.integers(2, 12), seed=st.integers(0, 2**32 - 1))
    def test_row_stochastic(self, size, seed):
        r = make_stochastic_matrix(size, np.random.default_rng(seed))
        assert np.all(r >= 0)
        assert np.all(np.abs(r.sum(axis=1) - 1) <= 1e-12)

    def test_normalization_arithmetic(self):
        class Ones:
            def uniform(self, lo, hi, size):
                return np.ones(size)
        np.testing.assert_array_equal(make_stochastic_matrix(2, Ones()), [[0.5, 0.5], [0.5, 0.5]])

    def test_fresh_each_call(self):
        rng = np.random.default_rng(0)
        assert not np.array_equal(make_stochastic_matrix(4, rng), make_stochastic_matrix(4, rng))

    def test_too_small(self):
        with pytest.raises(ConfigurationError):
            make_stochastic_matrix(1, np.random.default_rng(0))


class TestRecombine:
    def test_identity(self):
        pop = population([[1.0, 2.0], [3.0, -4.0]], [1.0, 2.0])
        out = recombine(pop, np.eye(2))
        np.testing.assert_array_equal(out.xs, pop.xs)
        assert out.errors is None
        np.testing.assert_array_equal(out.omegas, pop.omegas)

    def test_averaging(self):
        out = recombine(population([[0.0, 0.0], [2.0, 4.0]]), np.full((2, 2), 0.5))
        np.testing.assert_array_equal(out.xs, [[1.0, 2.0], [1.0, 2.0]])

    def test_equal_parents(self, rng):
        v = rng.normal(size=5)
        out = recombine(population(np.tile(v, (4, 1))), make_stochastic_matrix(4, rng))
        np.testing.assert_allclose(out.xs, np.tile(v, (4, 1)), rtol=1e-14)

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), size=st.sampled_from([2, 4, 6]))
    def test_containment(self, seed, size):
        rng = np.random.default_rng(seed)
        xs = rng.uniform(-30, 30, (size, 7))
        out = recombine(population(xs), make_stochastic_matrix(size, rng)).xs
        slack = 1e-12 * 30
        assert np.all(out >= xs.min(axis=0) - slack)
        assert np.all(out <= xs.max(axis=0) + slack)


class TestMutate:
    def test_fixed_point(self):
        system = random_dd(2)
        xstar = direct_solve(system)
        out = mutate(population(np.tile(xstar, (2, 1))), system)
        np.testing.assert_allclose(out.xs, np.tile(xstar, (2, 1)), atol=1e-10)

    def test_zero_omega_is_identity(self, rng):
        system = random_dd(2)
        xs = rng.normal(size=(2, system.n))
        out = mutate(population(xs, omegas=[0.0, 0.0]), system)
        np.testing.assert_array_equal(out.xs, xs)

    def test_worked_system(self, two_by_two):
        out = mutate(population([[0.0, 0.0], [0.0, 0.0]], omegas=[1.0, 1.0]), two_by_two)
        np.testing.assert_allclose(out.xs, [[1.5, 0.75], [1.5, 0.75]], atol=1e-15)
        np.testing.assert_allclose(out.errors, [residual_norm(two_by_two, [1.5, 0.75])] * 2)


class TestAdaptPopulation:
    def test_single_pair(self):
        pop = population([[0.0], [0.0]], errors=[2.0, 1.0], omegas=[0.5, 1.5])
        p = AdaptationParams(max_generations=10)
        out = adapt_population(pop, 10, p, np.random.default_rng(0))
        np.testing.assert_allclose(out.omegas, [1.0, 1.5])

    def test_equal_errors(self):
        pop = population(np.zeros((4, 2)), errors=[1.0] * 4, omegas=[0.25, 0.75, 1.25, 1.75])
        out = adapt_population(pop, 1, AdaptationParams(), np.random.default_rng(3))
        np.testing.assert_array_equal(out.omegas, pop.omegas)

    def test_deterministic_and_x_untouched(self):
        pop = population(np.arange(12.0).reshape(6, 2), errors=[5, 1, 3, 2, 6, 4],
                         omegas=[0.2, 0.5, 0.8, 1.1, 1.4, 1.7])
        a = adapt_population(pop, 1, AdaptationParams(mode="ua"), np.random.default_rng(4))
        b = adapt_population(pop, 1, AdaptationParams(mode="ua"), np.random.default_rng(4))
        np.testing.assert_array_equal(a.omegas, b.omegas)
        np.testing.assert_array_equal(a.xs, pop.xs)
        assert not np.array_equal(a.omegas, pop.omegas)

    def test_requires_errors(self):
        with pytest.raises(ValueError):
            adapt_population(population([[0.0], [1.0]]), 1, AdaptationParams(), np.random.default_rng())


class TestSelect:
    def test_two_slots(self):
        pop = population([[1.0], [2.0]], errors=[5.0, 3.0], omegas=[0.7, 1.3])
        out = select_and_reproduce(pop)
        np.testing.assert_array_equal(out.xs, [[2.0], [2.0]])
        np.testing.assert_array_equal(out.omegas, [0.7, 1.3])
        assert out.generation == 1

    def test_four_slots(self):
        pop = population([[1.0], [2.0], [3.0], [4.0]], errors=[4.0, 1.0, 3.0, 2.0])
        out = select_and_reproduce(pop)
        np.testing.assert_array_equal(out.xs.ravel(), [2.0, 2.0, 4.0, 4.0])

    def test_ties_prefer_lower_slot(self):
        pop = population([[1.0], [2.0], [3.0], [4.0]], errors=[2.0, 1.0, 1.0, 1.0])
        np.testing.assert_array_equal(select_and_reproduce(pop).xs.ravel(), [2.0, 2.0, 3.0, 3.0])

    def test_identical_population(self):
        pop = population(np.ones((4, 3)), errors=[1.0] * 4)
        out = select_and_reproduce(pop)
        np.testing.assert_array_equal(out.xs, pop.xs)
        assert out.generation == pop.generation + 1

    @settings(max_examples=50, deadline=None)
    @given(errors=st.lists(st.floats(0, 1e6), min_size=2, max_size=10).filter(lambda e: len(e) % 2 == 0))
    def test_best_never_worsens(self, errors):
        pop = population(np.zeros((len(errors), 1)), errors=errors)
        assert min(select_and_reproduce(pop).errors) <= min(errors)


class TestSolve:
    def test_identity_converges_in_one_generation(self):
        system = LinearSystem(np.eye(5), [1.0, -2.0, 3.0, 0.5, 9.0])
        # With A = I a sweep maps x to x + omega (b - x), exact only for omega = 1,
        # so pick bounds whose second slot factor is 1.
        config = SolverConfig.for_mode("tva", omega_upper=4.0 / 3.0, max_generations=10)
        assert init_omegas(config.adaptation, 2)[1] == 1.0
        result = solve(system, config)
        assert result.status == "converged"
        assert result.generations_used == 1
        np.testing.assert_allclose(result.solution, system.b, atol=1e-14)

    def test_history_lengths_and_best(self):
        system = random_dd(4, n=8)
        result = solve(system, SolverConfig.for_mode("ua", threshold_error=1e-10, max_generations=200))
        assert result.status == "converged"
        assert len(result.best_error_history) == result.generations_used + 1
        assert len(result.omega_history) == result.generations_used + 1
        assert result.best_error_history[-1] < 1e-10
        assert residual_norm(system, result.solution) < 1e-10

    def test_exhausted(self):
        system = random_dd(4, n=8, dominance=1.05)
        result = solve(system, SolverConfig.for_mode("tva", threshold_error=1e-14, max_generations=3))
        assert result.status == "exhausted"
        assert result.generations_used == 3

    def test_no_false_convergence(self):
        rng = np.random.default_rng(0)
        a = rng.uniform(1.0, 2.0, (10, 10))
        np.fill_diagonal(a, 0.01)
        system = LinearSystem(a, rng.uniform(-1, 1, 10))
        # Oracle: every relaxation factor the solver can use blows the residual up.
        x = np.ones(10)
        for omega in (0.1, 0.5, 1.0, 1.5):
            from hybrid_sor import sor_sweep
            assert residual_norm(system, sor_sweep(system, x, omega)) > residual_norm(system, x)
        result = solve(system, SolverConfig.for_mode("tva", max_generations=300))
        assert result.status in ("diverged", "exhausted")
        assert result.best_error >= 1e-12

    def test_reproducible(self):
        system = random_dd(6, n=10, dominance=1.1)
        config = SolverConfig.for_mode("tva", population_size=4, max_generations=100, seed=42)
        a, b = solve(system, config), solve(system, config)
        assert a.best_error_history == b.best_error_history
        assert all(np.array_equal(x, y) for x, y in zip(a.omega_history, b.omega_history))

    def test_modes_share_initial_population(self):
        system = random_dd(6, n=10)
        ua = solve(system, SolverConfig.for_mode("ua", max_generations=5, seed=3))
        tva = solve(system, SolverConfig.for_mode("tva", max_generations=5, seed=3))
        assert ua.best_error_history[0] == tva.best_error_history[0]

    def test_config_validation(self):
        with pytest.raises(ConfigurationError):
            SolverConfig(population_size=3)
        with pytest.raises(ConfigurationError):
            SolverConfig(threshold_error=0.0)
        with pytest.raises(ConfigurationError):
            SolverConfig(init_domain=(1.0, 1.0))
        with pytest.raises(ConfigurationError):
            SolverConfig(divergence_cutoff=1e-20, threshold_error=1e-12)

    def test_adaptation_horizon_follows_budget(self):
        config = SolverConfig.for_mode("tva", max_generations=321)
        assert config.adaptation.max_generations == 321
        assert SolverConfig(max_generations=77).adaptation.max_generations == 77

    def test_omegas_change_only_in_adaptation(self):
        system = random_dd(1, n=6)
        pop = init_population(system, SolverConfig(population_size=4), np.random.default_rng(0))
        rng = np.random.default_rng(1)
        after = select_and_reproduce(mutate(recombine(pop, make_stochastic_matrix(4, rng)), system))
        np.testing.assert_array_equal(after.omegas, pop.omegas)


class TestClassicalSor:
    def test_identity(self):
        result = solve_classical_sor(LinearSystem(np.eye(3), [1.0, 2.0, 3.0]), 1.0, 1e-12, 10)
        assert result.status == "converged" and result.generations_used == 1

    def test_worked_system(self, two_by_two):
        result = solve_classical_sor(two_by_two, 1.0, 1e-10, 200)
        assert result.status == "converged"
        np.testing.assert_allclose(result.solution, direct_solve(two_by_two), atol=1e-9)

    def test_honest_exhaustion(self):
        system = random_dd(0, n=8, dominance=1.01)
        result = solve_classical_sor(system, 1.99, 1e-14, 20)
        assert result.status in ("exhausted", "diverged")
        assert result.generations_used <= 20

    def test_rejects_bad_omega(self, two_by_two):
        with pytest.raises(ConfigurationError):
            solve_classical_sor(two_by_two, 2.0, 1e-10, 10)


def test_frozen_omegas_error_monotone_small_sample():
    for seed in range(5):
        system = diagonally_dominant_system(10, np.random.default_rng(seed), dominance=2.0)
        omegas = np.random.default_rng(seed + 100).uniform(0.5, 1.0, 4)
        traj = max_error_trajectory(system, omegas, 80, seed)
        assert first_violation(traj) is None
        assert traj[-1] < 1e-10
