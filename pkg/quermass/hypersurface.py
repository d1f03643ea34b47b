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

"""Rotationally symmetric star-shaped hypersurfaces of the unit sphere.

A surface is the radial graph rho(theta) over the polar angle theta in [0, pi] of the unit n-sphere, sampled on
N + 1 uniformly spaced nodes. Derivatives are second-order central differences with even reflection at the poles;
the principal curvatures are kappa_m (meridian, multiplicity 1) and kappa_p (parallel, multiplicity n - 1).
"""

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.integrate import simpson

from .ballgeom import HALF_PI, quermass_recursion, sphere_area
from .quadrature import sin_power_integral
from .symfunc import sigma_axisymmetric
from .utils import DegenerateSurfaceError, DomainError

# Smallest admissible sin(rho) before the graph is considered to hit a pole
POLE_EPS = 1e-8
# Principal curvatures below this are treated as zero by the convexity test
CONVEXITY_EPS = 1e-12


@dataclass(frozen=True)
class AxiSurface:
    n: int
    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=float)
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f'Dimension n must be an integer >= 2, got {self.n}')
        if rho.ndim != 1 or len(rho) < 5 or (len(rho) - 1) % 2:
            raise DomainError(f'Need an even number N >= 4 of intervals, got {len(rho) - 1}')
        if not np.all(np.isfinite(rho)) or np.any(rho <= 0) or np.any(rho >= math.pi):
            raise DomainError('Radii must be finite and lie in (0, pi)')
        rho.setflags(write=False)
        object.__setattr__(self, 'rho', rho)

    @property
    def N(self) -> int:
        return len(self.rho) - 1

    @property
    def h(self) -> float:
        return math.pi / self.N

    @property
    def theta(self) -> np.ndarray:
        return np.linspace(0.0, math.pi, self.N + 1)

    def subsample(self) -> 'AxiSurface':
        """Every other node, i.e. the same surface on N / 2 intervals."""
        return AxiSurface(self.n, self.rho[::2])

    @classmethod
    def from_function(cls, n: int, N: int, func: Callable[[np.ndarray], np.ndarray]) -> 'AxiSurface':
        theta = np.linspace(0.0, math.pi, N + 1)
        return cls(n, np.broadcast_to(func(theta), theta.shape))


def centered_sphere(n: int, N: int, rho0: float) -> AxiSurface:
    return AxiSurface.from_function(n, N, lambda theta: np.full_like(theta, rho0))


def offcenter_sphere(n: int, N: int, r: float, d: float) -> AxiSurface:
    """Geodesic sphere of radius r whose center sits at distance d from the north pole, toward theta = 0.

    Raises:
        DomainError: unless 0 <= d < r and r + d < pi/2, i.e. the north pole lies inside a ball contained in the
            northern hemisphere.
    """
    if not (0 <= d < r and r + d < HALF_PI):
        raise DomainError(f'Off-center sphere needs 0 <= d < r and r + d < pi/2, got r={r}, d={d}')

    def radius(theta):
        # Solve cos(r) = cos(rho) cos(d) + sin(rho) sin(d) cos(theta) for rho
        a, b = math.cos(d), math.sin(d) * np.cos(theta)
        return np.arctan2(b, a) + np.arccos(math.cos(r) / np.hypot(a, b))

    return AxiSurface.from_function(n, N, radius)


def perturbed_sphere(n: int, N: int, rho0: float, eps: float, mode: int = 2) -> AxiSurface:
    """rho0 + eps cos(mode theta); odd modes are allowed but break the equatorial symmetry."""
    if mode < 0:
        raise DomainError(f'Perturbation mode must be >= 0, got {mode}')
    return AxiSurface.from_function(n, N, lambda theta: rho0 + eps * np.cos(mode * theta))


def make_surface(kind: str, n: int, N: int, **params) -> AxiSurface:
    """Build a 'centered', 'offcenter' or 'perturbed' surface from its keyword parameters."""
    constructors = {'centered': centered_sphere, 'offcenter': offcenter_sphere, 'perturbed': perturbed_sphere}
    try:
        constructor = constructors[kind]
    except KeyError:
        raise DomainError(f"Unknown shape kind '{kind}' (expected one of {sorted(constructors)})") from None
    return constructor(n, N, **params)


class GeometryData(NamedTuple):
    rho_t: np.ndarray
    rho_tt: np.ndarray
    W: np.ndarray
    v: np.ndarray
    u: np.ndarray
    kappa_m: np.ndarray
    kappa_p: np.ndarray
    dA: np.ndarray

    def sigma(self, n: int) -> np.ndarray:
        """Pointwise (sigma_{-1}, sigma_0, ..., sigma_n), shape (n + 2, N + 1)."""
        return sigma_axisymmetric(n, self.kappa_m, self.kappa_p)


def geometry(surf: AxiSurface) -> GeometryData:
    """Support function, principal curvatures and area density at every node.

    Raises:
        DegenerateSurfaceError: if sin(rho) falls below ``POLE_EPS`` anywhere.
    """
    rho, h, n = surf.rho, surf.h, surf.n
    sin, cos = np.sin(rho), np.cos(rho)
    if np.any(sin < POLE_EPS):
        raise DegenerateSurfaceError(f'Surface reaches a pole (min sin(rho) = {sin.min():.3g})')
    padded = np.concatenate(([rho[1]], rho, [rho[-2]]))
    rho_t = (padded[2:] - padded[:-2]) / (2 * h)
    rho_tt = (padded[2:] - 2 * rho + padded[:-2]) / h**2

    theta = surf.theta
    drift = np.empty_like(rho)
    drift[1:-1] = rho_t[1:-1] * np.cos(theta[1:-1]) / np.sin(theta[1:-1])
    # rho' cot(theta) -> rho'' on the axis
    drift[0], drift[-1] = rho_tt[0], rho_tt[-1]

    W2 = rho_t**2 + sin**2
    W = np.sqrt(W2)
    v = W / sin
    kappa_m = (-rho_tt + 2 * cos / sin * rho_t**2 + sin * cos) / (v * W2)
    kappa_p = (sin * cos - drift) / (v * sin**2)
    dA = sphere_area(n - 1) * np.sin(theta) ** (n - 1) * W * sin ** (n - 1)
    return GeometryData(rho_t=rho_t, rho_tt=rho_tt, W=W, v=v, u=sin / v, kappa_m=kappa_m, kappa_p=kappa_p, dA=dA)


def sigma_integrals(surf: AxiSurface, geom: Optional[GeometryData] = None) -> np.ndarray:
    """Integrals of sigma_0, ..., sigma_n over the surface by composite Simpson in theta."""
    geom = geometry(surf) if geom is None else geom
    sigma = geom.sigma(surf.n)[1:]
    return simpson(sigma * geom.dA, dx=surf.h, axis=-1)


def integrate_sigma(surf: AxiSurface, k: int, geom: Optional[GeometryData] = None) -> float:
    if not 0 <= k <= surf.n:
        raise DomainError(f'Curvature order must lie in [0, {surf.n}], got {k}')
    return float(sigma_integrals(surf, geom)[k])


def enclosed_volume(surf: AxiSurface, tol: float = 1e-9) -> float:
    """Volume of the region between the north pole and the graph: outer Simpson over an exact radial integral."""
    n = surf.n
    inner = sin_power_integral(n, surf.rho, tol=tol / sphere_area(n))
    density = sphere_area(n - 1) * np.sin(surf.theta) ** (n - 1) * inner
    return float(simpson(density, dx=surf.h))


def quermass_vector(surf: AxiSurface, geom: Optional[GeometryData] = None) -> np.ndarray:
    """A_{-1}, ..., A_n of the enclosed region (A_k at index k + 1)."""
    return quermass_recursion(surf.n, sigma_integrals(surf, geom), enclosed_volume(surf))


def quermass(surf: AxiSurface, k: int, geom: Optional[GeometryData] = None) -> float:
    if not -1 <= k <= surf.n:
        raise DomainError(f'Quermassintegral order must lie in [-1, {surf.n}], got {k}')
    vol = enclosed_volume(surf) if k % 2 == 1 else np.nan
    return float(quermass_recursion(surf.n, sigma_integrals(surf, geom), vol)[k + 1])


class ConvexityResult(NamedTuple):
    convex: bool
    margin: float


def convexity_check(surf: AxiSurface, geom: Optional[GeometryData] = None) -> ConvexityResult:
    geom = geometry(surf) if geom is None else geom
    margin = float(min(geom.kappa_m.min(), geom.kappa_p.min()))
    return ConvexityResult(convex=margin > CONVEXITY_EPS, margin=margin)


def equator_distance(surf: AxiSurface) -> float:
    return float(np.max(np.abs(HALF_PI - surf.rho)))
