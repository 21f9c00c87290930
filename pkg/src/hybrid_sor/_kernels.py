"""Hot numeric kernels: the SOR sweep and the residual.

Numba-compiled versions are used when numba imports cleanly and the
``HYBRID_SOR_NO_NUMBA`` environment variable is unset (or ``0``).  The
pure-numpy versions below are always importable and are what the
fallback path runs.
"""

import os

import numpy as np


def _numba_requested():
    flag = os.environ.get("HYBRID_SOR_NO_NUMBA", "").strip().lower()
    return flag in ("", "0", "false", "no")


def sor_sweep_numpy(a, b, x, omega):
    """One forward Gauss-Seidel sweep scaled by ``omega``; ``x`` is updated in place."""
    n = b.shape[0]
    for i in range(n):
        x[i] += omega * (b[i] - a[i] @ x) / a[i, i]
    return x


def residual_numpy(a, b, x, use_inf):
    r = a @ x - b
    if use_inf:
        return float(np.max(np.abs(r)))
    return float(np.sqrt(r @ r))


def sweep_population_numpy(a, b, xs, omegas, errors, use_inf):
    for k in range(xs.shape[0]):
        sor_sweep_numpy(a, b, xs[k], omegas[k])
        errors[k] = residual_numpy(a, b, xs[k], use_inf)


BACKEND = "numpy"
sor_sweep_kernel = sor_sweep_numpy
residual_kernel = residual_numpy
sweep_population_kernel = sweep_population_numpy

if _numba_requested():
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is an optional speedup
        njit = None

    if njit is not None:

        @njit(cache=True)
        def sor_sweep_numba(a, b, x, omega):
            n = b.shape[0]
            for i in range(n):
                s = 0.0
                for j in range(n):
                    s += a[i, j] * x[j]
                x[i] += omega * (b[i] - s) / a[i, i]
            return x

        @njit(cache=True)
        def residual_numba(a, b, x, use_inf):
            n = b.shape[0]
            acc = 0.0
            for i in range(n):
                s = -b[i]
                for j in range(n):
                    s += a[i, j] * x[j]
                if use_inf:
                    s = abs(s)
                    if s > acc or s != s:
                        acc = s
                else:
                    acc += s * s
            if use_inf:
                return acc
            return np.sqrt(acc)

        @njit(cache=True)
        def sweep_population_numba(a, b, xs, omegas, errors, use_inf):
            for k in range(xs.shape[0]):
                sor_sweep_numba(a, b, xs[k], omegas[k])
                errors[k] = residual_numba(a, b, xs[k], use_inf)

        BACKEND = "numba"
        sor_sweep_kernel = sor_sweep_numba
        residual_kernel = residual_numba
        sweep_population_kernel = sweep_population_numba
