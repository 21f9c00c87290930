import numpy as np
import pytest

from hybrid_sor import ConfigurationError
from hybrid_sor.problems import (MIN_ABS_DIAGONAL, TABLE_I, ProblemSpec, diagonally_dominant_system,
                                 generate_problem, get_spec)


def offdiag(a):
    return a[~np.eye(a.shape[0], dtype=bool)]


def test_p1_entries():
    system, redraws = generate_problem(get_spec("P1"))
    assert redraws == 0
    a, b = system.a, system.b
    assert a[0, 0] == 200 and a[0, 1] == 2 and a[1, 0] == 1 and b[6] == 7
    assert np.all(np.diag(a) == 200)
    j = np.tile(np.arange(1, 101.0), (100, 1))
    assert np.array_equal(offdiag(a), offdiag(j))
    np.testing.assert_array_equal(b, np.arange(1, 101.0))


def test_p1_is_seed_independent():
    one, _ = generate_problem(get_spec("P1"), np.random.default_rng(1))
    two, _ = generate_problem(get_spec("P1"), np.random.default_rng(2))
    np.testing.assert_array_equal(one.a, two.a)


def test_p4_rhs_and_diagonal():
    system, _ = generate_problem(get_spec("P4"), np.random.default_rng(0))
    assert np.all(system.b == 2.0)
    d = np.diag(system.a)
    assert np.all((d > 1) & (d < 100))


@pytest.mark.parametrize("label", sorted(TABLE_I))
def test_domain_containment(label):
    spec = get_spec(label)
    for seed in range(3):
        system, _ = generate_problem(spec, np.random.default_rng(seed))
        for rule, values in ((spec.diagonal_rule, np.diag(system.a)),
                             (spec.offdiagonal_rule, offdiag(system.a)),
                             (spec.rhs_rule, system.b)):
            if isinstance(rule, tuple):
                assert np.all((values > rule[0]) & (values < rule[1]))
        assert np.all(np.abs(np.diag(system.a)) >= MIN_ABS_DIAGONAL)


def test_table_parameters():
    expected = {"P1": (1e-12, 2000), "P2": (1e-12, 500), "P3": (1e-12, 500),
                "P4": (1e-12, 1500), "P5": (1e-11, 700), "P6": (1e-9, 6000)}
    for label, (eta, t) in expected.items():
        spec = get_spec(label)
        assert (spec.threshold_error, spec.max_generations, spec.dimension) == (eta, t, 100)
    assert get_spec("p5").diagonal_rule == 200.0


def test_same_seed_same_system():
    a, _ = generate_problem(get_spec("P2"), np.random.default_rng(7))
    b, _ = generate_problem(get_spec("P2"), np.random.default_rng(7))
    np.testing.assert_array_equal(a.a, b.a)
    np.testing.assert_array_equal(a.b, b.b)


def test_p3_and_p6_share_domains_not_realizations():
    rng = np.random.default_rng(0)
    p3, _ = generate_problem(get_spec("P3"), rng)
    p6, _ = generate_problem(get_spec("P6"), rng)
    assert not np.array_equal(p3.a, p6.a)


def test_tiny_diagonals_are_redrawn():
    spec = ProblemSpec("X", (-1e-6, 1e-6 * 1.01), 1.0, 1.0, 1e-12, 10, dimension=50)
    system, redraws = generate_problem(spec, np.random.default_rng(0))
    assert redraws > 0
    assert np.all(np.abs(np.diag(system.a)) >= MIN_ABS_DIAGONAL)


def test_unknown_label():
    with pytest.raises(ConfigurationError):
        get_spec("P7")


def test_random_problem_needs_rng():
    with pytest.raises(ConfigurationError):
        generate_problem(get_spec("P2"))


def test_custom_dimension():
    system, _ = generate_problem(get_spec("P1", dimension=5))
    assert system.n == 5 and system.a[0, 0] == 10


def test_diagonally_dominant_helper():
    system = diagonally_dominant_system(10, np.random.default_rng(0), dominance=2.0)
    a = np.abs(system.a)
    assert np.all(np.diag(a) >= 2.0 * (a.sum(axis=1) - np.diag(a)) - 1e-12)
