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

"""Inverse curvature flow with speed sigma_{k-1} / sigma_k for axisymmetric radial graphs.

The graph evolves by d rho / dt = f v with f = sigma_{k-1} / sigma_k, which expands a strictly convex surface in
the northern hemisphere towards the equator. Along the way the weighted deficit
Q_k(t) = exp(-c t) ((int sigma_k)^2 - eta_k(A_{k-1})) is non-increasing.

The explicit schemes need dt of order h^2 for the second-derivative terms of the speed. The default
`semi_implicit` scheme treats the whole speed linearly implicitly, so its step is limited only by how far the
surface may advance towards the equator in one step.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import simpson
from scipy.linalg import solve_banded
from scipy.special import comb
from tqdm import tqdm

from .ballgeom import HALF_PI, eta, quermass_recursion, s_bound
from .hypersurface import (
    AxiSurface,
    GeometryData,
    convexity_check,
    enclosed_volume,
    equator_distance,
    geometry,
    sigma_integrals,
)
from .utils import (
    DegenerateSurfaceError,
    DomainError,
    InsufficientDataError,
    PreconditionError,
    StepRejected,
)

log = logging.getLogger(__name__)

SCHEMES = ('euler', 'heun', 'semi_implicit')
# Relative size of Q_k below which it is indistinguishable from zero
Q_NOISE = 1e-4
# Finite-difference increment for the banded speed Jacobian
JACOBIAN_EPS = 1e-7


@dataclass
class FlowConfig:
    n: int = 3
    k: int = 1
    dt_init: float = 1e-4
    dt_min: float = 1e-12
    cfl: float = 0.4
    stop_rho_tol: float = 1e-3
    t_max: float = 10.0
    record_every: int = 10
    scheme: str = 'semi_implicit'
    adaptive: bool = True
    grow_after: int = 10
    grow_factor: float = 1.2
    max_advance: float = 0.01
    max_steps: int = 5_000_000
    keep_surfaces: bool = True

    def validate(self):
        if self.n < 2 or not 1 <= self.k <= self.n - 1:
            raise DomainError(f'Flow needs n >= 2 and 1 <= k <= n - 1, got n={self.n}, k={self.k}')
        if self.scheme not in SCHEMES:
            raise DomainError(f"Unknown scheme '{self.scheme}' (expected one of {SCHEMES})")
        if not 0 < self.dt_min <= self.dt_init:
            raise DomainError(f'Need 0 < dt_min <= dt_init, got dt_min={self.dt_min}, dt_init={self.dt_init}')
        if not 0 < self.stop_rho_tol < HALF_PI:
            raise DomainError(f'stop_rho_tol must lie in (0, pi/2), got {self.stop_rho_tol}')
        if self.t_max <= 0 or self.cfl <= 0 or self.record_every < 1 or self.grow_factor < 1:
            raise DomainError('t_max and cfl must be positive, record_every >= 1 and grow_factor >= 1')
        if not 0 < self.max_advance < 1:
            raise DomainError(f'max_advance must lie in (0, 1), got {self.max_advance}')


@dataclass
class FlowRecord:
    t: float
    step: int
    dt: float
    rho_min: float
    rho_max: float
    kappa_min: float
    equator_dist: float
    sigma_int: np.ndarray
    quermass: np.ndarray
    q_value: float


@dataclass
class FlowTrace:
    config: FlowConfig
    records: List[FlowRecord] = field(default_factory=list)
    surfaces: List[AxiSurface] = field(default_factory=list)
    stop_reason: str = ''
    failed: bool = False
    steps: int = 0
    rejected: int = 0

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    @property
    def q_values(self) -> np.ndarray:
        return np.array([r.q_value for r in self.records])

    def q_monotone(self, rtol: float = 1e-6, atol: float = 1e-12) -> bool:
        """Q_k non-increasing up to ``rtol |Q_k(0)| + atol``.

        Q_k is a difference of two terms of size (int sigma_k)^2, so on (near) geodesic spheres |Q_k(0)| is replaced
        by the floor ``Q_NOISE (int sigma_k)^2`` at t = 0.
        """
        q = self.q_values
        if len(q) < 2:
            return True
        scale = max(abs(q[0]), Q_NOISE * self.records[0].sigma_int[self.config.k] ** 2)
        return bool(np.all(np.diff(q) <= rtol * scale + atol))

    def to_frame(self, identities: Optional['IdentityReport'] = None) -> pd.DataFrame:
        n = self.config.n
        rows = []
        for i, rec in enumerate(self.records):
            row = {
                't': rec.t,
                'step': rec.step,
                'dt': rec.dt,
                'rho_min': rec.rho_min,
                'rho_max': rec.rho_max,
                'kappa_min': rec.kappa_min,
                'equator_dist': rec.equator_dist,
            }
            row.update({f'sigma_int_{j}': rec.sigma_int[j] for j in range(n + 1)})
            row.update({f'quermass_{j}': rec.quermass[j + 1] for j in range(-1, n + 1)})
            row['q_value'] = rec.q_value
            if identities is not None:
                row['resid_sigma_max'] = identities.resid_sigma[i].max()
                row['resid_A_max'] = identities.resid_A[i].max()
            else:
                row['resid_sigma_max'] = row['resid_A_max'] = np.nan
            rows.append(row)
        return pd.DataFrame(rows)

    def summary(self) -> dict:
        final = self.records[-1] if self.records else None
        return {
            'config': asdict(self.config),
            'stop_reason': self.stop_reason,
            'failed': self.failed,
            'steps': self.steps,
            'rejected_steps': self.rejected,
            'records': len(self.records),
            't_final': final.t if final else None,
            'q_monotone': self.q_monotone(),
            'final_quermass': {str(j - 1): float(a) for j, a in enumerate(final.quermass)} if final else {},
        }


def q_exponent(n: int, k: int) -> float:
    return 2 * k * (n - k) / (n - k + 1)


def q_value(n: int, k: int, t: float, integral_k: float, a_prev: float) -> float:
    """exp(-c t) ((int sigma_k)^2 - eta_k(A_{k-1})) with c = 2 k (n - k) / (n - k + 1)."""
    if not 0 <= k <= n - 1:
        raise DomainError(f'Q_k needs 0 <= k <= n - 1, got n={n}, k={k}')
    return math.exp(-q_exponent(n, k) * t) * (integral_k**2 - eta(n, k, a_prev))


def sphere_speed(n: int, k: int, rho: float) -> float:
    """Radial speed of a centered geodesic sphere, C(n, k-1) / C(n, k) tan(rho)."""
    return comb(n, k - 1) / comb(n, k) * math.tan(rho)


def sphere_time_to(n: int, k: int, rho0: float, rho1: float) -> float:
    """Exact time a centered sphere needs to expand from rho0 to rho1 (sin rho grows like exp(c t))."""
    if not 0 < rho0 <= rho1 <= HALF_PI:
        raise DomainError(f'Need 0 < rho0 <= rho1 <= pi/2, got rho0={rho0}, rho1={rho1}')
    return math.log(math.sin(rho1) / math.sin(rho0)) * comb(n, k) / comb(n, k - 1)


def _speed(surf: AxiSurface, geom: GeometryData, k: int) -> Tuple[np.ndarray, np.ndarray]:
    sigma = geom.sigma(surf.n)
    lower, upper = sigma[k], sigma[k + 1]
    if np.any(upper <= 0):
        raise PreconditionError(f'sigma_{k} is not positive at every node (min {upper.min():.3g})')
    return lower / upper, sigma


def stable_dt(surf: AxiSurface, geom: GeometryData, k: int, cfl: float) -> float:
    """Explicit stability bound cfl h^2 min(F^2 W^2) / (n - k + 1) for F = sigma_k / sigma_{k-1}."""
    f, _ = _speed(surf, geom, k)
    return cfl * surf.h**2 * float(np.min(geom.W**2 / f**2)) / (surf.n - k + 1)


def advance_dt(surf: AxiSurface, geom: GeometryData, k: int, fraction: float, floor: float) -> float:
    """Largest dt for which no node covers more than ``fraction`` of its distance to the equator.

    Near the equator the speed grows like 1 / (pi/2 - rho), so this bounds dt by a multiple of (pi/2 - rho)^2.
    """
    f, _ = _speed(surf, geom, k)
    distance = np.maximum(HALF_PI - surf.rho, floor)
    return fraction * float(np.min(distance / (f * geom.v)))


def _rate(surf: AxiSurface, k: int) -> np.ndarray:
    geom = geometry(surf)
    f, _ = _speed(surf, geom, k)
    return f * geom.v


def _rate_jacobian(surf: AxiSurface, rate: np.ndarray, k: int) -> np.ndarray:
    """d rate_i / d rho_j in the (upper, diagonal, lower) band layout of ``scipy.linalg.solve_banded``.

    The speed at a node depends on that node and its two neighbours only, so three perturbations with
    stride 3 recover the whole tridiagonal Jacobian.
    """
    size = len(surf.rho)
    bands = np.zeros((3, size))
    for color in range(3):
        idx = np.arange(color, size, 3)
        rho = surf.rho.copy()
        rho[idx] += JACOBIAN_EPS
        d = (_rate(AxiSurface(surf.n, rho), k) - rate) / JACOBIAN_EPS
        bands[1, idx] = d[idx]
        upper = idx[idx >= 1]
        bands[0, upper] = d[upper - 1]
        lower = idx[idx <= size - 2]
        bands[2, lower] = d[lower + 1]
    return bands


def _advance(
    surf: AxiSurface, geom: GeometryData, k: int, dt: float, scheme: str
) -> Tuple[AxiSurface, GeometryData]:
    f, _ = _speed(surf, geom, k)
    rate = f * geom.v
    try:
        if scheme == 'semi_implicit':
            # Linearly implicit Euler: (I - dt J) delta = dt rate
            matrix = -dt * _rate_jacobian(surf, rate, k)
            matrix[1] += 1.0
            rate = solve_banded((1, 1), matrix, rate)
        elif scheme == 'heun':
            predictor = AxiSurface(surf.n, surf.rho + dt * rate)
            pred_geom = geometry(predictor)
            pred_f, _ = _speed(predictor, pred_geom, k)
            rate = 0.5 * (rate + pred_f * pred_geom.v)
        new = AxiSurface(surf.n, surf.rho + dt * rate)
        new_geom = geometry(new)
    except (DomainError, DegenerateSurfaceError, PreconditionError, np.linalg.LinAlgError) as e:
        raise StepRejected(f'Step of size {dt:.3g} failed: {e}') from e
    conv = convexity_check(new, new_geom)
    if not conv.convex:
        raise StepRejected(f'Step of size {dt:.3g} lost convexity (margin {conv.margin:.3g})')
    return new, new_geom


def step(surf: AxiSurface, k: int, dt: float, scheme: str = 'euler') -> AxiSurface:
    """One time step of the flow (explicit Euler by default).

    Raises:
        PreconditionError: if sigma_k is not positive before the step.
        StepRejected: if the new surface has non-finite radii or is not strictly convex.
    """
    if not 1 <= k <= surf.n - 1:
        raise DomainError(f'Flow order must lie in [1, {surf.n - 1}], got {k}')
    if scheme not in SCHEMES:
        raise DomainError(f"Unknown scheme '{scheme}' (expected one of {SCHEMES})")
    if dt < 0:
        raise DomainError(f'Time step must be non-negative, got {dt}')
    if dt == 0:
        return surf
    return _advance(surf, geometry(surf), k, dt, scheme)[0]


def run(config: FlowConfig, initial: AxiSurface, progress: bool = False) -> FlowTrace:
    """Evolve ``initial`` until it is within ``stop_rho_tol`` of the equator, or ``t_max`` is reached.

    With ``adaptive`` the step is capped by ``advance_dt`` and, for the explicit schemes, by ``stable_dt``; it is
    halved on rejection and grows by ``grow_factor`` after ``grow_after`` accepted steps.

    Raises:
        PreconditionError: if the initial surface is not strictly convex or leaves the open northern hemisphere.
    """
    config.validate()
    n, k = config.n, config.k
    if initial.n != n:
        raise DomainError(f'Surface dimension {initial.n} does not match flow dimension {n}')
    geom = geometry(initial)
    conv = convexity_check(initial, geom)
    if not conv.convex:
        raise PreconditionError(f'Initial surface is not strictly convex (margin {conv.margin:.3g})')
    if initial.rho.max() >= HALF_PI:
        raise PreconditionError('Initial surface must lie in the open northern hemisphere')

    trace = FlowTrace(config=config)
    s_limit = s_bound(n, k - 1)
    surf, t, dt, streak, last_recorded, last_step = initial, 0.0, config.dt_init, 0, -1, 0.0

    def record() -> bool:
        nonlocal last_recorded
        sigma_int = sigma_integrals(surf, geom)
        qv = quermass_recursion(n, sigma_int, enclosed_volume(surf))
        if qv[k] >= s_limit:
            log.info('A_%d reached its hemisphere value at t=%.6g', k - 1, t)
            return False
        trace.records.append(
            FlowRecord(
                t=t,
                step=trace.steps,
                dt=last_step,
                rho_min=float(surf.rho.min()),
                rho_max=float(surf.rho.max()),
                kappa_min=float(min(geom.kappa_m.min(), geom.kappa_p.min())),
                equator_dist=equator_distance(surf),
                sigma_int=sigma_int,
                quermass=qv,
                q_value=q_value(n, k, t, sigma_int[k], qv[k]),
            )
        )
        if config.keep_surfaces:
            trace.surfaces.append(surf)
        last_recorded = trace.steps
        return True

    with tqdm(desc=f'flow n={n} k={k}', unit='step', disable=not progress) as pbar:
        exhausted = not record()
        while not exhausted:
            if equator_distance(surf) < config.stop_rho_tol:
                trace.stop_reason = 'equator'
                break
            if t >= config.t_max * (1 - 1e-12):
                trace.stop_reason = 't_max'
                break
            if trace.steps >= config.max_steps:
                trace.stop_reason = 'max_steps'
                break
            cap = math.inf
            if config.adaptive:
                cap = advance_dt(surf, geom, k, config.max_advance, config.stop_rho_tol)
                if config.scheme != 'semi_implicit':
                    cap = min(cap, stable_dt(surf, geom, k, config.cfl))
            dt_step = min(dt, cap, config.t_max - t)
            try:
                surf, geom = _advance(surf, geom, k, dt_step, config.scheme)
            except StepRejected as e:
                trace.rejected += 1
                if not config.adaptive:
                    log.warning('Fixed-step run stopped at t=%.6g: %s', t, e)
                    trace.stop_reason, trace.failed = 'rejected', True
                    break
                dt, streak = dt_step / 2, 0
                log.debug('%s; retrying with dt=%.3g', e, dt)
                if dt < config.dt_min:
                    log.warning('Time step fell below dt_min=%g at t=%.6g', config.dt_min, t)
                    trace.stop_reason, trace.failed = 'dt_min', True
                    break
                continue
            t += dt_step
            last_step = dt_step
            trace.steps += 1
            pbar.update()
            if config.adaptive:
                # Growth starts from the bound that was actually in force
                dt = min(dt, cap)
                streak += 1
                if streak >= config.grow_after:
                    dt, streak = dt * config.grow_factor, 0
            if trace.steps % config.record_every == 0:
                exhausted = not record()
        if exhausted:
            trace.stop_reason = 'equator'
        elif trace.steps != last_recorded:
            record()
    log.info(
        'Flow n=%d k=%d stopped (%s) at t=%.6g after %d steps, %d rejected',
        n,
        k,
        trace.stop_reason,
        t,
        trace.steps,
        trace.rejected,
    )
    return trace


@dataclass
class IdentityReport:
    """Relative residuals of the evolution identities at interior trace records.

    ``resid_sigma[i, l]`` compares d/dt int sigma_l with int f ((l+1) sigma_{l+1} - (n-l+1) sigma_{l-1}) and
    ``resid_A[i, l]`` compares d/dt A_l with (l+1) int f sigma_{l+1}, for l = 0, ..., n - 1. Rows of the first
    and last record are NaN.
    """

    times: np.ndarray
    resid_sigma: np.ndarray
    resid_A: np.ndarray
    ratio: Optional[float] = None

    @property
    def max_sigma(self) -> float:
        return float(np.nanmax(self.resid_sigma))

    @property
    def max_A(self) -> float:
        return float(np.nanmax(self.resid_A))

    @property
    def max_residual(self) -> float:
        return max(self.max_sigma, self.max_A)


def _identity_sides(trace: FlowTrace) -> Tuple[np.ndarray, ...]:
    n, k = trace.config.n, trace.config.k
    l = np.arange(n)
    rhs_sigma, rhs_A = [], []
    for surf in trace.surfaces:
        geom = geometry(surf)
        f, sigma = _speed(surf, geom, k)
        # sigma[j] holds sigma_{j-1}
        upper = (l + 1)[:, None] * sigma[l + 2]
        lower = (n - l + 1)[:, None] * sigma[l]
        rhs_sigma.append(simpson(f * (upper - lower) * geom.dA, dx=surf.h, axis=-1))
        rhs_A.append(simpson(f * upper * geom.dA, dx=surf.h, axis=-1))
    lhs_sigma = np.array([r.sigma_int[:n] for r in trace.records])
    lhs_A = np.array([r.quermass[1 : n + 1] for r in trace.records])
    return lhs_sigma, lhs_A, np.array(rhs_sigma), np.array(rhs_A)


def check_evolution_identities(trace: FlowTrace, refined: Optional[FlowTrace] = None) -> IdentityReport:
    """Compare centered time differences of the recorded integrals with quadratures of their evolution laws.

    Args:
        trace: a run recorded with ``keep_surfaces``.
        refined: optional rerun with half the time step; the report's ``ratio`` is then the quotient of the
            maximal residuals.

    Raises:
        InsufficientDataError: with fewer than three records.
    """
    if len(trace.records) < 3:
        raise InsufficientDataError(f'Identity checks need at least 3 records, got {len(trace.records)}')
    if len(trace.surfaces) != len(trace.records):
        raise InsufficientDataError('Trace was recorded without surfaces (keep_surfaces=False)')
    times = trace.times
    lhs_sigma, lhs_A, rhs_sigma, rhs_A = _identity_sides(trace)

    def residual(values, rhs):
        rate = np.gradient(values, times, axis=0, edge_order=2)
        scale = np.max(np.abs(rhs[1:-1]), axis=0)
        out = np.abs(rate - rhs) / np.where(scale > 0, scale, 1.0)
        out[[0, -1]] = np.nan
        return out

    report = IdentityReport(times=times, resid_sigma=residual(lhs_sigma, rhs_sigma), resid_A=residual(lhs_A, rhs_A))
    if refined is not None:
        report.ratio = report.max_residual / check_evolution_identities(refined).max_residual
    return report
