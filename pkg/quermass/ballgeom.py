# Quermass: Alexandrov-Fenchel type inequalities for hypersurfaces in the sphere
# Copyright 2024 The Quermass Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Geodesic balls in the unit sphere and the comparison functions built from them.

All curvature integrals of a geodesic sphere of radius rho are explicit. Quermassintegrals are strictly increasing
in rho on (0, pi/2] for orders -1, ..., n - 1, which makes them invertible; ``xi`` and ``eta`` compose those
inverses and are what the inequality checks compare against.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Sequence, Tuple

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import comb, gamma

from .quadrature import sin_power_integral
from .utils import ComputationError, DomainError

log = logging.getLogger(__name__)

HALF_PI = 0.5 * math.pi
# Bisection stops once the bracket is this narrow (in rho)
RHO_TOL = 1e-12


@lru_cache(maxsize=None)
def sphere_area(n: int) -> float:
    """Area of the unit n-sphere, 2 pi^((n+1)/2) / Gamma((n+1)/2)."""
    return float(2 * math.pi ** ((n + 1) / 2) / gamma((n + 1) / 2))


def quermass_recursion(n: int, sigma_int: np.ndarray, vol) -> np.ndarray:
    """Quermassintegrals A_{-1}, ..., A_n from curvature integrals and enclosed volume.

    Args:
        n: dimension of the hypersurface.
        sigma_int: array whose first axis holds the integrals of sigma_0, ..., sigma_n.
        vol: enclosed volume (broadcastable against ``sigma_int[0]``); may be NaN when only even orders are used.

    Returns:
        Array whose first axis holds A_k at index k + 1.
    """
    sigma_int = np.asarray(sigma_int, dtype=float)
    out = np.empty((n + 2,) + sigma_int.shape[1:])
    out[0] = vol
    out[1] = sigma_int[0]
    out[2] = sigma_int[1] + n * out[0]
    for k in range(2, n + 1):
        out[k + 1] = sigma_int[k] + (n - k + 1) / (k - 1) * out[k - 1]
    return out


def _ball_sigma_integrals(n: int, rho: np.ndarray) -> np.ndarray:
    sin, cos = np.sin(rho), np.cos(rho)
    k = np.arange(n + 1).reshape((-1,) + (1,) * rho.ndim)
    return comb(n, k) * sphere_area(n) * sin ** (n - k) * cos**k


def _ball_quermass(n: int, rho, need_vol: bool = True) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    vol = sphere_area(n) * sin_power_integral(n, rho, tol=1e-12 / sphere_area(n)) if need_vol else np.nan
    return quermass_recursion(n, _ball_sigma_integrals(n, rho), vol)


@dataclass(frozen=True)
class BallProfile:
    n: int
    rho: float
    area: float
    sigma_int: np.ndarray
    vol: float
    quermass: np.ndarray

    def A(self, k: int) -> float:
        if not -1 <= k <= self.n:
            raise DomainError(f'Quermassintegral order must lie in [-1, {self.n}], got {k}')
        return float(self.quermass[k + 1])

    @property
    def sigma(self) -> np.ndarray:
        """Pointwise sigma_0, ..., sigma_n, each C(n, k) cot(rho)^k."""
        return comb(self.n, np.arange(self.n + 1)) / math.tan(self.rho) ** np.arange(self.n + 1)


def _check_dimension(n: int):
    if int(n) != n or n < 2:
        raise DomainError(f'Dimension n must be an integer >= 2, got {n}')


def ball_table(n: int, rho) -> Tuple[np.ndarray, np.ndarray]:
    """Curvature integrals (orders 0..n) and quermassintegrals (orders -1..n) of geodesic balls, vectorized in rho."""
    _check_dimension(n)
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0) or np.any(rho > HALF_PI):
        raise DomainError('Geodesic radii must lie in (0, pi/2]')
    return _ball_sigma_integrals(n, rho), _ball_quermass(n, rho)


def ball_profile(n: int, rho: float) -> BallProfile:
    _check_dimension(n)
    if not 0 < rho <= HALF_PI:
        raise DomainError(f'Geodesic radius must lie in (0, pi/2], got {rho}')
    quermass = _ball_quermass(n, rho)
    sigma_int = _ball_sigma_integrals(n, np.asarray(rho, dtype=float))
    return BallProfile(
        n=n,
        rho=float(rho),
        area=float(sigma_int[0]),
        sigma_int=sigma_int,
        vol=float(quermass[0]),
        quermass=quermass,
    )


def _check_order(n: int, k: int, lowest: int = -1, highest: int = None):
    _check_dimension(n)
    highest = n - 1 if highest is None else highest
    if not lowest <= k <= highest:
        raise DomainError(f'Order k must lie in [{lowest}, {highest}] for n={n}, got {k}')


@lru_cache(maxsize=None)
def s_bound(n: int, k: int) -> float:
    """A_k of the hemisphere, the supremum of the values ``invert_quermass`` accepts."""
    _check_order(n, k)
    return float(_ball_quermass(n, HALF_PI, need_vol=k % 2 == 1)[k + 1])


@dataclass(frozen=True)
class MonotoneTable:
    """Sampled rho -> A_k(B_rho) on [0, pi/2], used for evaluation and to bracket inversions."""

    n: int
    k: int
    rho: np.ndarray
    values: np.ndarray
    order: int = 1

    def __post_init__(self):
        if self.order not in (1, 3):
            raise DomainError(f'Interpolation order must be 1 or 3, got {self.order}')
        if not np.all(np.diff(self.values) >= 0) or self.values[-1] <= self.values[0]:
            raise ComputationError(f'A_{self.k} is not increasing on the table for n={self.n}')

    @classmethod
    def build(cls, n: int, k: int, size: int = 257, order: int = 1) -> 'MonotoneTable':
        _check_order(n, k)
        rho = np.linspace(0.0, HALF_PI, size)
        values = _ball_quermass(n, rho, need_vol=k % 2 == 1)[k + 1]
        values[0] = 0.0
        # A_{n-1} flattens below rounding near pi/2; the running maximum keeps the bracket ordered
        values = np.minimum(np.maximum.accumulate(values), s_bound(n, k))
        values[-1] = s_bound(n, k)
        return cls(n=n, k=k, rho=rho, values=values, order=order)

    def __call__(self, rho):
        if self.order == 1:
            return np.interp(rho, self.rho, self.values)
        return PchipInterpolator(self.rho, self.values)(rho)

    def bracket(self, s: np.ndarray):
        """Table nodes (lo, hi) with A_k(lo) <= s <= A_k(hi)."""
        idx = np.clip(np.searchsorted(self.values, s), 1, len(self.values) - 1)
        return self.rho[idx - 1], self.rho[idx]


@lru_cache(maxsize=None)
def monotone_table(n: int, k: int) -> MonotoneTable:
    log.debug('Building monotone table for n=%d, k=%d', n, k)
    return MonotoneTable.build(n, k)


def _as_output(x: np.ndarray, like):
    return float(x) if np.ndim(like) == 0 else x


def invert_quermass(n: int, k: int, s):
    """Unique rho in (0, pi/2] with A_k(B_rho) = s, elementwise in ``s``.

    The closed endpoint s = A_k(hemisphere) maps to pi/2.

    Raises:
        DomainError: if k is outside [-1, n - 1] or any s lies outside (0, A_k(hemisphere)].
    """
    _check_order(n, k)
    targets = np.asarray(s, dtype=float)
    upper = s_bound(n, k)
    if not np.all(np.isfinite(targets)) or np.any(targets <= 0) or np.any(targets > upper * (1 + 1e-12)):
        raise DomainError(f'A_{k} value(s) must lie in (0, {upper!r}] for n={n}, got {s}')
    targets = np.minimum(targets, upper)
    lo, hi = monotone_table(n, k).bracket(targets)
    lo, hi = lo.astype(float), hi.astype(float)
    need_vol = k % 2 == 1
    for _ in range(200):
        if np.max(hi - lo, initial=0.0) <= RHO_TOL:
            break
        mid = 0.5 * (lo + hi)
        below = _ball_quermass(n, mid, need_vol=need_vol)[k + 1] < targets
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    rho = np.where(targets >= upper, HALF_PI, 0.5 * (lo + hi))
    return _as_output(rho, s)


def _check_pair(n: int, k: int, l: int):
    _check_dimension(n)
    if not -1 <= l < k <= n - 1:
        raise DomainError(f'Orders must satisfy -1 <= l < k <= n - 1 for n={n}, got k={k}, l={l}')


def xi(n: int, k: int, l: int, s):
    """A_k of the geodesic ball whose A_l equals s."""
    _check_pair(n, k, l)
    rho = np.asarray(invert_quermass(n, l, s))
    return _as_output(_ball_quermass(n, rho, need_vol=k % 2 == 1)[k + 1], s)


def xi_inv(n: int, k: int, l: int, s):
    """A_l of the geodesic ball whose A_k equals s (inverse of ``xi(n, k, l, .)``)."""
    _check_pair(n, k, l)
    rho = np.asarray(invert_quermass(n, k, s))
    return _as_output(_ball_quermass(n, rho, need_vol=l % 2 == 1)[l + 1], s)


def eta(n: int, k: int, s):
    """Squared curvature integral of sigma_k over the geodesic sphere whose A_{k-1} equals s."""
    _check_order(n, k, lowest=0)
    rho = np.asarray(invert_quermass(n, k - 1, s))
    integral = comb(n, k) * sphere_area(n) * np.sin(rho) ** (n - k) * np.cos(rho) ** k
    return _as_output(integral**2, s)


def eta_sqrt(n: int, k: int, s):
    return _as_output(np.sqrt(np.asarray(eta(n, k, s))), s)


def eta1_closed(n: int, s):
    """Closed form of eta for k = 1: n^2 w^(2/n) s^(2(n-1)/n) - n^2 s^2 with w the unit n-sphere area."""
    _check_dimension(n)
    w = sphere_area(n)
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr <= 0) or np.any(s_arr > w * (1 + 1e-12)):
        raise DomainError(f'eta1_closed needs 0 < s <= {w!r} for n={n}, got {s}')
    out = n**2 * w ** (2 / n) * s_arr ** (2 * (n - 1) / n) - n**2 * s_arr**2
    return _as_output(out, s)


def eta1_closed_derivative(n: int, s):
    _check_dimension(n)
    w = sphere_area(n)
    s_arr = np.asarray(s, dtype=float)
    out = 2 * n * (n - 1) * w ** (2 / n) * s_arr ** ((n - 2) / n) - 2 * n**2 * s_arr
    return _as_output(out, s)


def lower_curvature_integral(n: int, k: int, s):
    """Integral of sigma_{k-1} over the geodesic sphere whose A_{k-1} equals s."""
    _check_order(n, k, lowest=1)
    s_arr = np.asarray(s, dtype=float)
    if k == 1:
        out = s_arr
    elif k == 2:
        out = s_arr - n * np.asarray(xi_inv(n, 1, -1, s_arr))
    else:
        out = s_arr - (n - k + 2) / (k - 2) * np.asarray(xi_inv(n, k - 1, k - 3, s_arr))
    return _as_output(out, s)


def eta_ode_rhs(n: int, k: int, s, eta_value):
    """Right-hand side of the first-order ODE satisfied by eta(n, k, .).

    Raises:
        DomainError: for k outside [1, n - 1] or s outside the domain of A_{k-1}.
        ComputationError: if the lower curvature integral is not positive.
    """
    lower = np.asarray(lower_curvature_integral(n, k, s))
    if np.any(lower <= 0):
        raise ComputationError(f'Integral of sigma_{k - 1} is not positive at s={s} (n={n}, k={k})')
    eta_value = np.asarray(eta_value, dtype=float)
    out = (2 * k * (n - k) / (n - k + 1) * eta_value - 2 * (n - k + 1) * lower**2) / (k * lower)
    return _as_output(out, s)


def eta_ode_integrate(
    n: int, k: int, s_start: float, eta_start: float, s_grid: Sequence[float], substeps: int = 1
) -> List[float]:
    """Classical Runge-Kutta integration of the eta ODE from (s_start, eta_start) through ``s_grid``.

    Returns:
        [eta_start, eta(s_grid[0]), eta(s_grid[1]), ...]

    Raises:
        ComputationError: if a grid point leaves the open domain of A_{k-1} or the ODE becomes singular.
    """
    _check_order(n, k, lowest=1)
    upper = s_bound(n, k - 1)
    values = [float(eta_start)]
    s, y = float(s_start), float(eta_start)
    for target in s_grid:
        target = float(target)
        if not 0 < target < upper:
            raise ComputationError(f'Integration left the domain (0, {upper!r}) of A_{k - 1} at s={target}')
        h = (target - s) / substeps
        try:
            for _ in range(substeps):
                k1 = eta_ode_rhs(n, k, s, y)
                k2 = eta_ode_rhs(n, k, s + h / 2, y + h / 2 * k1)
                k3 = eta_ode_rhs(n, k, s + h / 2, y + h / 2 * k2)
                k4 = eta_ode_rhs(n, k, s + h, y + h * k3)
                y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
                s += h
        except DomainError as e:
            raise ComputationError(f'eta ODE integration failed near s={s}: {e}') from e
        s = target
        values.append(y)
    return values
