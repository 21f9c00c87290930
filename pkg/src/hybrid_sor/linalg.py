"""Dense linear systems, the SOR sweep, and reference oracles."""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels

NORMS = ("euclidean", "infinity")


class DimensionError(ValueError):
    """Vector or matrix shape does not match the system dimension."""


class SingularSystemError(ArithmeticError):
    """Direct solve hit a numerically zero pivot."""


class DivergenceError(ArithmeticError):
    """An iterate overflowed to a non-finite value."""

    def __init__(self, message, generation=None):
        super().__init__(message)
        self.generation = generation


@dataclass(frozen=True)
class LinearSystem:
    """Dense square system ``a @ x = b``.

    The arrays are copied to contiguous float64 and marked read-only.
    Every diagonal entry must be nonzero since the SOR update divides by it.
    """

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=np.float64, order="C")
        b = np.array(self.b, dtype=np.float64).reshape(-1)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"coefficient matrix must be square, got shape {a.shape}")
        n = a.shape[0]
        if n < 1:
            raise DimensionError("system dimension must be at least 1")
        if b.shape != (n,):
            raise DimensionError(f"right-hand side has {b.size} entries, expected {n}")
        zero = np.flatnonzero(np.diag(a) == 0.0)
        if zero.size:
            raise ValueError(f"zero diagonal entry in row {zero[0] + 1}")
        a.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self):
        return self.b.shape[0]


@dataclass(frozen=True)
class IterationOperator:
    """Affine SOR map ``x -> h @ x + v`` for a fixed relaxation factor."""

    h: np.ndarray
    v: np.ndarray
    omega: float

    def apply(self, x):
        return self.h @ x + self.v


@dataclass
class SpectralEstimate:
    value: float
    converged: bool
    iterations: int
    restarts: int = 0
    history: list = field(default_factory=list, repr=False)

    def __float__(self):
        return self.value


def _check_vector(system, x):
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (system.n,):
        raise DimensionError(f"vector has shape {x.shape}, expected ({system.n},)")
    return x


def sor_sweep(system, x, omega):
    """Return the result of one SOR sweep from ``x``; ``x`` itself is not modified.

    Raises DivergenceError if the sweep produces non-finite components.
    """
    omega = float(omega)
    if not np.isfinite(omega):
        raise ValueError(f"relaxation factor must be finite, got {omega}")
    out = np.array(_check_vector(system, x), dtype=np.float64)
    with np.errstate(over="ignore", invalid="ignore"):
        _kernels.sor_sweep_kernel(system.a, system.b, out, omega)
    if not np.all(np.isfinite(out)):
        raise DivergenceError("SOR sweep produced non-finite values")
    return out


def residual_norm(system, x, norm="euclidean"):
    """Norm of ``a @ x - b``; ``norm`` is ``"euclidean"`` or ``"infinity"``."""
    if norm not in NORMS:
        raise ValueError(f"unknown norm {norm!r}, expected one of {NORMS}")
    x = np.ascontiguousarray(_check_vector(system, x))
    with np.errstate(over="ignore", invalid="ignore"):
        return float(_kernels.residual_kernel(system.a, system.b, x, norm == "infinity"))


def _forward_substitution(lower, rhs):
    # lower is unit-diagonal strictly-lower-plus-identity; rhs may be a matrix.
    n = lower.shape[0]
    out = np.array(rhs, dtype=np.float64)
    for i in range(n):
        if lower[i, i] == 0.0:
            raise SingularSystemError("singular triangular factor")
        out[i] = (out[i] - lower[i, :i] @ out[:i]) / lower[i, i]
    return out


def build_iteration_matrix(system, omega):
    """Materialize the SOR iteration matrix and offset for ``omega``.

    Uses the splitting ``A = D - L - U`` where ``L`` and ``U`` hold the
    *negated* strict lower and upper triangles of ``A``.  Intended for small
    systems in tests and spectral checks; the solvers never call it.
    """
    omega = float(omega)
    a = system.a
    n = system.n
    d_inv = 1.0 / np.diag(a)
    lower = -np.tril(a, -1)
    upper = -np.triu(a, 1)
    identity = np.eye(n)
    m = identity - omega * d_inv[:, None] * lower
    rhs = (1.0 - omega) * identity + omega * d_inv[:, None] * upper
    h = _forward_substitution(m, rhs)
    v = omega * _forward_substitution(m, d_inv * system.b)
    return IterationOperator(h=h, v=v, omega=omega)


def direct_solve(system):
    """Gaussian elimination with partial pivoting."""
    a = np.array(system.a, dtype=np.float64)
    b = np.array(system.b, dtype=np.float64)
    n = system.n
    scale = max(1.0, float(np.max(np.abs(a))))
    tiny = np.finfo(np.float64).eps * scale * n
    for k in range(n - 1):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[p, k]) <= tiny:
            raise SingularSystemError(f"numerically singular pivot in column {k + 1}")
        if p != k:
            a[[k, p]] = a[[p, k]]
            b[[k, p]] = b[[p, k]]
        factors = a[k + 1:, k] / a[k, k]
        a[k + 1:, k:] -= np.outer(factors, a[k, k:])
        b[k + 1:] -= factors * b[k]
    if abs(a[n - 1, n - 1]) <= tiny:
        raise SingularSystemError(f"numerically singular pivot in column {n}")
    x = np.empty(n)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - a[k, k + 1:] @ x[k + 1:]) / a[k, k]
    return x


def _ritz_radius(h, x, depth=6):
    # Rayleigh-Ritz on a small Krylov space started at the power iterate:
    # resolves a dominant complex pair and nearby eigenvalues, which plain
    # power-iteration norm ratios only oscillate around.
    n = h.shape[0]
    m = min(depth, n)
    basis = np.zeros((n, m))
    basis[:, 0] = x / np.linalg.norm(x)
    k = 1
    while k < m:
        w = h @ basis[:, k - 1]
        scale = np.linalg.norm(w)
        for _ in range(2):
            w -= basis[:, :k] @ (basis[:, :k].T @ w)
        norm = np.linalg.norm(w)
        if norm <= 1e-10 * max(scale, 1e-300):
            break  # invariant subspace found
        basis[:, k] = w / norm
        k += 1
    q = basis[:, :k]
    return float(np.max(np.abs(np.linalg.eigvals(q.T @ (h @ q)))))


def estimate_spectral_radius(op, iterations=1000, seed=0, check_every=50):
    """Power-iteration estimate of the spectral radius of ``op.h``.

    ``op`` may be an IterationOperator or a bare square matrix.  The
    estimate is refreshed every ``check_every`` steps; ``converged`` in the
    returned SpectralEstimate is False when the last two refreshes differ by
    more than ``1e-8`` relative.
    """
    if iterations < 100:
        raise ValueError("at least 100 iterations are required")
    h = np.asarray(op.h if isinstance(op, IterationOperator) else op, dtype=np.float64)
    n = h.shape[0]
    rng = np.random.default_rng(seed)

    def fresh():
        v = rng.standard_normal(n)
        return v / np.linalg.norm(v)

    x = fresh()
    restarts = 0
    history = []
    for k in range(1, iterations + 1):
        y = h @ x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            # Start vector in the null space (or h nilpotent): retry, then give up.
            if restarts < 3:
                restarts += 1
                x = fresh()
                continue
            return SpectralEstimate(0.0, True, k, restarts, history)
        x = y / norm
        if k % check_every == 0 or k == iterations:
            history.append(_ritz_radius(h, x))

    value = history[-1]
    converged = (len(history) >= 2
                 and abs(history[-1] - history[-2]) <= 1e-8 * max(value, 1e-300))
    return SpectralEstimate(value, converged, iterations, restarts, history)
