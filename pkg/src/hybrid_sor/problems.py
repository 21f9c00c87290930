"""Benchmark system generators (problems P1 to P6).

A rule is either a fixed formula (``"2n"``, ``"j"``, ``"i"`` or a number)
or a ``(low, high)`` interval sampled uniformly.
"""

from dataclasses import dataclass

import numpy as np

from .adaptation import ConfigurationError
from .linalg import LinearSystem

MIN_ABS_DIAGONAL = 1e-6


@dataclass(frozen=True)
class ProblemSpec:
    label: str
    diagonal_rule: object
    offdiagonal_rule: object
    rhs_rule: object
    threshold_error: float
    max_generations: int
    dimension: int = 100

    def with_dimension(self, n):
        return ProblemSpec(self.label, self.diagonal_rule, self.offdiagonal_rule,
                           self.rhs_rule, self.threshold_error, self.max_generations, int(n))

    @property
    def deterministic(self):
        return not any(isinstance(r, tuple) for r in
                       (self.diagonal_rule, self.offdiagonal_rule, self.rhs_rule))


TABLE_I = {
    "P1": ProblemSpec("P1", "2n", "j", "i", 1e-12, 2000),
    "P2": ProblemSpec("P2", (-70.0, 70.0), (-2.0, 2.0), (-2.0, 2.0), 1e-12, 500),
    "P3": ProblemSpec("P3", (-70.0, 70.0), (0.0, 4.0), (0.0, 70.0), 1e-12, 500),
    "P4": ProblemSpec("P4", (1.0, 100.0), (-2.0, 2.0), 2.0, 1e-12, 1500),
    "P5": ProblemSpec("P5", 200.0, (-30.0, 30.0), (-400.0, 400.0), 1e-11, 700),
    "P6": ProblemSpec("P6", (-70.0, 70.0), (0.0, 4.0), (0.0, 70.0), 1e-9, 6000),
}


def get_spec(label, dimension=None):
    try:
        spec = TABLE_I[str(label).upper()]
    except KeyError:
        raise ConfigurationError(f"unknown problem {label!r}; choose from {sorted(TABLE_I)}") from None
    return spec if dimension is None else spec.with_dimension(dimension)


def _uniform_open(rng, low, high, size):
    # Generator.uniform draws from [low, high); resample the (measure-zero) low end.
    out = rng.uniform(low, high, size)
    bad = out == low
    while np.any(bad):
        out[bad] = rng.uniform(low, high, int(bad.sum()))
        bad = out == low
    return out


def _formula(rule, n, what):
    idx = np.arange(1, n + 1, dtype=np.float64)
    if rule == "2n":
        return np.full(n, 2.0 * n)
    if rule == "i":
        return idx
    if rule == "j":
        return np.tile(idx, (n, 1))
    if isinstance(rule, (int, float)):
        return float(rule)
    raise ConfigurationError(f"unsupported {what} rule {rule!r}")


def generate_problem(spec, rng=None):
    """Build the LinearSystem for ``spec``.

    Returns ``(system, redraws)`` where ``redraws`` counts diagonal entries
    re-sampled because their magnitude fell below ``MIN_ABS_DIAGONAL``.
    Random draws happen in a fixed order: off-diagonals, diagonal, right-hand side.
    """
    if isinstance(spec, str):
        spec = get_spec(spec)
    n = spec.dimension
    if n < 1:
        raise ConfigurationError("dimension must be positive")
    if rng is None:
        if not spec.deterministic:
            raise ConfigurationError(f"{spec.label} is random and needs an rng")
        rng = np.random.default_rng(0)

    off = spec.offdiagonal_rule
    if isinstance(off, tuple):
        a = _uniform_open(rng, off[0], off[1], (n, n))
    else:
        a = np.empty((n, n))
        a[...] = _formula(off, n, "off-diagonal")

    diag_rule = spec.diagonal_rule
    redraws = 0
    if isinstance(diag_rule, tuple):
        diag = _uniform_open(rng, diag_rule[0], diag_rule[1], n)
        small = np.abs(diag) < MIN_ABS_DIAGONAL
        while np.any(small):
            redraws += int(small.sum())
            diag[small] = _uniform_open(rng, diag_rule[0], diag_rule[1], int(small.sum()))
            small = np.abs(diag) < MIN_ABS_DIAGONAL
    else:
        diag = np.empty(n)
        diag[...] = _formula(diag_rule, n, "diagonal")
    np.fill_diagonal(a, diag)

    rhs = spec.rhs_rule
    if isinstance(rhs, tuple):
        b = _uniform_open(rng, rhs[0], rhs[1], n)
    else:
        b = np.empty(n)
        b[...] = _formula(rhs, n, "right-hand side")
    return LinearSystem(a, b), redraws


def diagonally_dominant_system(n, rng, dominance=2.0, symmetric=False):
    """Random system with off-diagonals in (-1, 1) and ``a_ii = dominance * sum_j |a_ij|``.

    Right-hand side entries are uniform in (-1, 1).  With ``dominance > 1``
    every SOR sweep with ``0 < omega <= 1`` is a contraction in the
    infinity norm.
    """
    m = rng.uniform(-1.0, 1.0, (n, n))
    if symmetric:
        m = (m + m.T) / 2
    np.fill_diagonal(m, 0.0)
    diag = dominance * np.abs(m).sum(axis=1)
    diag[diag == 0.0] = 1.0
    np.fill_diagonal(m, diag)
    return LinearSystem(m, rng.uniform(-1.0, 1.0, n))
