import logging
from typing import Callable

import numpy as np

from .utils import ComputationError

log = logging.getLogger(__name__)


def _composite_simpson(f: Callable[[np.ndarray], np.ndarray], a: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
    nodes = np.linspace(0.0, 1.0, m + 1)
    x = a[..., None] + (b - a)[..., None] * nodes
    y = f(x)
    odd = y[..., 1:-1:2].sum(axis=-1)
    even = y[..., 2:-1:2].sum(axis=-1)
    return (b - a) / (3 * m) * (y[..., 0] + y[..., -1] + 4 * odd + 2 * even)


def romberg_simpson(
    f: Callable[[np.ndarray], np.ndarray], a, b, tol: float = 1e-12, max_levels: int = 10
) -> np.ndarray:
    """Romberg extrapolation of composite Simpson sums.

    The limits may be arrays (broadcast against each other); ``f`` is evaluated on an array with one
    extra trailing axis holding the abscissae, so every integral in the batch is refined together.

    Args:
        f: vectorized integrand.
        a: lower limit(s).
        b: upper limit(s).
        tol: absolute tolerance on the change between successive diagonal entries.
        max_levels: number of interval halvings before giving up.

    Returns:
        Array of integrals with the broadcast shape of ``a`` and ``b``.
    """
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    prev = [_composite_simpson(f, a, b, 2)]
    for level in range(1, max_levels + 1):
        row = [_composite_simpson(f, a, b, 2 ** (level + 1))]
        for j in range(1, level + 1):
            factor = 4.0 ** (j + 1)
            row.append((factor * row[j - 1] - prev[j - 1]) / (factor - 1))
        err = np.max(np.abs(row[-1] - prev[-1]), initial=0.0)
        if not np.isfinite(err):
            raise ComputationError('Non-finite integrand encountered in Romberg-Simpson quadrature')
        if err <= tol:
            return row[-1]
        prev = row
    log.warning('Romberg-Simpson did not reach tol=%g after %d levels (last change %g)', tol, max_levels, err)
    return prev[-1]


def sin_power_integral(n: int, upper, tol: float = 1e-12) -> np.ndarray:
    """Integral of sin(r)**n over [0, upper], elementwise in ``upper``."""
    return romberg_simpson(lambda r: np.sin(r) ** n, 0.0, upper, tol=tol)
