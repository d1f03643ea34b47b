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

"""Elementary symmetric functions of principal curvatures and the Garding cones they define."""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy.special import comb

from .utils import DomainError, PreconditionError


@dataclass(frozen=True)
class CurvatureVector:
    kappa: Tuple[float, ...]

    def __post_init__(self):
        kappa = tuple(float(x) for x in self.kappa)
        if len(kappa) < 1:
            raise DomainError('A curvature vector needs at least one entry')
        if not all(np.isfinite(kappa)):
            raise DomainError(f'Curvature entries must be finite, got {kappa}')
        object.__setattr__(self, 'kappa', kappa)

    @property
    def n(self) -> int:
        return len(self.kappa)

    @classmethod
    def of(cls, kappa: Sequence[float]) -> 'CurvatureVector':
        return cls(tuple(kappa))


@dataclass(frozen=True)
class ConeClass:
    """Largest k with the curvature vector in the Garding cone of order k (0 if none)."""

    n: int
    k_max: int

    def contains(self, k: int) -> bool:
        return 0 <= k <= self.k_max


def sigma_batch(kappa: np.ndarray) -> np.ndarray:
    """Elementary symmetric functions for a batch of vectors of shape (..., n).

    Returns an array of shape (..., n + 2) laid out as (sigma_{-1}, sigma_0, ..., sigma_n) with
    sigma_{-1} = 0 and sigma_0 = 1, so index j holds sigma_{j-1}.
    """
    kappa = np.asarray(kappa, dtype=float)
    n = kappa.shape[-1]
    e = np.zeros(kappa.shape[:-1] + (n + 1,))
    e[..., 0] = 1.0
    for i in range(n):
        x = kappa[..., i : i + 1]
        e[..., 1:] = e[..., 1:] + x * e[..., :-1]
    return np.concatenate([np.zeros(kappa.shape[:-1] + (1,)), e], axis=-1)


def sigma_all(kv: CurvatureVector) -> np.ndarray:
    """(sigma_{-1}, sigma_0, ..., sigma_n) of a single curvature vector; index j holds sigma_{j-1}."""
    return sigma_batch(np.asarray(kv.kappa)[None, :])[0]


def sigma_axisymmetric(n: int, kappa_m: np.ndarray, kappa_p: np.ndarray) -> np.ndarray:
    """Closed-form sigma_k for curvature vectors (kappa_m, kappa_p, ..., kappa_p) with n - 1 copies of kappa_p.

    The inputs are node arrays; the result has shape (n + 2, nodes) in the layout of :func:`sigma_batch`.
    """
    kappa_m = np.asarray(kappa_m, dtype=float)
    kappa_p = np.asarray(kappa_p, dtype=float)
    powers = kappa_p[None, :] ** np.arange(n + 1)[:, None]
    out = np.zeros((n + 2,) + kappa_p.shape)
    out[1] = 1.0
    for k in range(1, n + 1):
        out[k + 1] = comb(n - 1, k) * powers[k] + comb(n - 1, k - 1) * powers[k - 1] * kappa_m
    return out


def c_nk(n: int, k: int) -> float:
    """The constant (n - k) / (k + 1) = sigma_{k+1}(I) / sigma_k(I)."""
    if not 0 <= k < n:
        raise DomainError(f'c_nk needs 0 <= k < n, got n={n}, k={k}')
    return (n - k) / (k + 1)


def cone_class(kv: CurvatureVector) -> ConeClass:
    sigma = sigma_all(kv)[2:]
    positive = sigma > 0
    k_max = int(np.argmin(positive)) if not positive.all() else kv.n
    return ConeClass(n=kv.n, k_max=k_max)


def _maclaurin_bound(n: int, k: int, sigma_k):
    # Maclaurin's inequality (sigma_{k+1}/C(n,k+1))^(1/(k+1)) <= (sigma_k/C(n,k))^(1/k), solved for sigma_{k+1}
    return comb(n, k + 1) * (np.maximum(sigma_k, 0.0) / comb(n, k)) ** ((k + 1) / k)


def newton_maclaurin_gap(kv: CurvatureVector, k: int) -> Tuple[float, float]:
    """Slack in the Newton and Maclaurin inequalities at order k.

    Returns:
        (gap1, gap2) with
        gap1 = k (n - k) sigma_k^2 - (n - k + 1)(k + 1) sigma_{k-1} sigma_{k+1} and
        gap2 = C(n, k+1) (sigma_k / C(n, k))^((k+1)/k) - sigma_{k+1}.
        Both are non-negative on the Garding cone of order k and vanish exactly on multiples of (1, ..., 1).

    Raises:
        DomainError: unless 1 <= k <= n - 1.
        PreconditionError: if the vector is not in the Garding cone of order k.
    """
    n = kv.n
    if not 1 <= k <= n - 1:
        raise DomainError(f'newton_maclaurin_gap needs 1 <= k <= n - 1, got n={n}, k={k}')
    if not cone_class(kv).contains(k):
        raise PreconditionError(f'Curvature vector {kv.kappa} is not in the Garding cone of order {k}')
    sigma = sigma_all(kv)
    s_prev, s_k, s_next = sigma[k], sigma[k + 1], sigma[k + 2]
    gap1 = k * (n - k) * s_k**2 - (n - k + 1) * (k + 1) * s_prev * s_next
    gap2 = _maclaurin_bound(n, k, s_k) - s_next
    return float(gap1), float(gap2)


def newton_maclaurin_gaps(kappa: np.ndarray, k: int) -> np.ndarray:
    """Batched :func:`newton_maclaurin_gap` over rows of ``kappa``; rows outside the cone give NaN.

    Returns:
        Array of shape (m, 3): gap1, gap2 and the magnitude of the largest term entering either gap.
    """
    kappa = np.atleast_2d(np.asarray(kappa, dtype=float))
    n = kappa.shape[-1]
    if not 1 <= k <= n - 1:
        raise DomainError(f'newton_maclaurin_gaps needs 1 <= k <= n - 1, got n={n}, k={k}')
    sigma = sigma_batch(kappa)
    inside = np.all(sigma[:, 2 : k + 2] > 0, axis=1)
    s_prev, s_k, s_next = sigma[:, k], sigma[:, k + 1], sigma[:, k + 2]
    t1 = k * (n - k) * s_k**2
    t2 = (n - k + 1) * (k + 1) * s_prev * s_next
    bound = _maclaurin_bound(n, k, s_k)
    out = np.stack([t1 - t2, bound - s_next, np.max(np.abs([t1, t2, bound, s_next]), axis=0)], axis=1)
    out[~inside, :2] = np.nan
    return out
