"""Relaxation-factor adaptation for the hybrid evolutionary SOR solver.

Two modes share the same update rules and differ only in the time-variant
factor: ``"tva"`` scales perturbations by ``(1 - t/T) ** gamma`` while
``"ua"`` keeps the factor at 1 for the whole run.
"""

from dataclasses import dataclass

import numpy as np

MODES = ("ua", "tva")
PERTURBATION_STD = 0.25


class ConfigurationError(ValueError):
    """Invalid solver or adaptation parameters."""


@dataclass(frozen=True)
class AdaptationParams:
    omega_lower: float = 0.0
    omega_upper: float = 2.0
    e_x: float = 0.1
    e_y: float = 0.01
    gamma: float = 40.0
    max_generations: int = 2500
    mode: str = "tva"
    clamp_epsilon: float = 1e-6

    def __post_init__(self):
        mode = str(self.mode).lower()
        object.__setattr__(self, "mode", mode)
        if mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0.0 <= self.omega_lower < self.omega_upper:
            raise ConfigurationError("need 0 <= omega_lower < omega_upper")
        if not self.gamma > 0:
            raise ConfigurationError("gamma must be positive")
        if int(self.max_generations) != self.max_generations or self.max_generations < 1:
            raise ConfigurationError("max_generations must be a positive integer")
        if self.e_x < 0 or self.e_y < 0:
            raise ConfigurationError("e_x and e_y must be nonnegative")
        width = self.omega_upper - self.omega_lower
        if not 0.0 < self.clamp_epsilon < width / 4:
            raise ConfigurationError("clamp_epsilon must lie in (0, (omega_upper - omega_lower) / 4)")

    def clamp(self, omega):
        lo = self.omega_lower + self.clamp_epsilon
        hi = self.omega_upper - self.clamp_epsilon
        return min(max(omega, lo), hi)


def init_omegas(params, population_size):
    """Evenly spaced cell midpoints of ``[omega_lower, omega_upper]``, one per slot."""
    n = population_size
    if int(n) != n or n < 2 or n % 2:
        raise ConfigurationError(f"population size must be an even integer >= 2, got {n}")
    d = (params.omega_upper - params.omega_lower) / n
    omegas = np.empty(int(n))
    omegas[0] = params.omega_lower + d / 2
    for i in range(1, int(n)):
        omegas[i] = omegas[i - 1] + d
    return omegas


def time_variant_factor(t, params):
    if params.mode == "ua":
        return 1.0
    return (1.0 - t / params.max_generations) ** params.gamma


def adapt_pair(omega_x, omega_y, err_x, err_y, t, params, rng):
    """Adapt the relaxation factors of one pair of offspring.

    The factor belonging to the larger error is pulled to a perturbed
    midpoint of the pair; the other is pushed a random fraction of the way
    toward the bound on its own side.  Returns the new factors in the same
    order as the arguments.  Equal errors leave both unchanged and draw
    nothing from ``rng``; otherwise exactly two normal draws are consumed.

    ``rng`` is a ``numpy.random.Generator`` (anything with ``normal``).
    """
    if err_x == err_y:
        return omega_x, omega_y
    swapped = err_x < err_y
    if swapped:
        omega_x, omega_y = omega_y, omega_x

    scale = time_variant_factor(t, params)
    g_worse = rng.normal(0.0, PERTURBATION_STD)
    g_better = rng.normal(0.0, PERTURBATION_STD)
    p_x = params.e_x * g_worse * scale
    p_y = params.e_y * abs(g_better) * scale

    worse = (0.5 + p_x) * (omega_x + omega_y)
    if omega_y > omega_x:
        better = omega_y + p_y * (params.omega_upper - omega_y)
    elif omega_y < omega_x:
        better = omega_y + p_y * (params.omega_lower - omega_y)
    else:
        better = omega_y
    worse = params.clamp(worse)
    better = params.clamp(better)

    if swapped:
        return better, worse
    return worse, better
