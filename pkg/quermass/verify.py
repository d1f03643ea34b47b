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

import itertools
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from .ballgeom import HALF_PI, eta, eta_sqrt, xi
from .hypersurface import (
    AxiSurface,
    convexity_check,
    make_surface,
    quermass_vector,
    sigma_integrals,
)
from .io import write_csv, write_json
from .utils import DegenerateSurfaceError, DomainError, PreconditionError

log = logging.getLogger(__name__)

VERDICT_RTOL = 1e-8
EQUALITY_RTOL = 1e-6

# Row order within a report for equal k
CHECKS = ('isoperimetric', 'ineq1', 'three', 'two_adjacent', 'chen_sun', 'conjecture')


class Measures(NamedTuple):
    n: int
    sigma_int: np.ndarray
    quermass: np.ndarray

    def I(self, k: int) -> float:  # noqa: E743
        return float(self.sigma_int[k])

    def A(self, k: int) -> float:
        return float(self.quermass[k + 1])


class MeasurePair(NamedTuple):
    """Measures of a surface and, when N is divisible by 4, of its every-other-node subsample."""

    fine: Measures
    coarse: Optional[Measures]
    convexity_margin: float


def measure(surf: AxiSurface) -> Measures:
    return Measures(n=surf.n, sigma_int=sigma_integrals(surf), quermass=quermass_vector(surf))


def measure_pair(surf: AxiSurface) -> MeasurePair:
    conv = convexity_check(surf)
    if not conv.convex:
        raise PreconditionError(f'Surface is not strictly convex (margin {conv.margin:.3g})')
    coarse = measure(surf.subsample()) if surf.N % 4 == 0 else None
    return MeasurePair(fine=measure(surf), coarse=coarse, convexity_margin=conv.margin)


@dataclass
class InequalityRow:
    check: str
    k: int
    lhs: float
    rhs: float
    margin: float
    rel_margin: float
    tol: float
    verdict: Optional[str]
    equality: bool
    convention: str = 'sqrt'
    rhs_literal: Optional[float] = None
    margin_literal: Optional[float] = None
    note: str = ''


@dataclass
class InequalityReport:
    shape_id: str
    n: int
    N: int
    convexity_margin: float
    rows: List[InequalityRow] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(row.verdict != 'fail' for row in self.rows)

    def row(self, check: str, k: int) -> InequalityRow:
        for r in self.rows:
            if r.check == check and r.k == k:
                return r
        raise KeyError(f'No {check} row for k={k} in {self.shape_id}')

    def to_dict(self) -> dict:
        return {
            'shape_id': self.shape_id,
            'n': self.n,
            'N': self.N,
            'convexity_margin': self.convexity_margin,
            'passed': self.passed,
            'rows': [asdict(r) for r in self.rows],
        }


Sides = Callable[[Measures], Tuple[float, float]]


def _evaluate(
    check: str, k: int, pair: MeasurePair, sides: Sides, literal: Optional[Sides] = None, verdict_bearing: bool = True
) -> InequalityRow:
    lhs, rhs = sides(pair.fine)
    margin = lhs - rhs
    scale = max(abs(lhs), abs(rhs))
    estimate = 0.0
    if pair.coarse is not None:
        try:
            coarse_lhs, coarse_rhs = sides(pair.coarse)
            # Richardson estimate for an O(h^2) scheme, with a safety factor of 2
            estimate = 2 / 3 * abs(margin - (coarse_lhs - coarse_rhs))
        except DomainError as e:
            log.debug('No discretization estimate for %s (k=%d): %s', check, k, e)
    tol = VERDICT_RTOL * scale + estimate
    row = InequalityRow(
        check=check,
        k=k,
        lhs=lhs,
        rhs=rhs,
        margin=margin,
        rel_margin=margin / scale if scale > 0 else 0.0,
        tol=tol,
        verdict=('pass' if margin >= -tol else 'fail') if verdict_bearing else None,
        equality=abs(margin) <= max(EQUALITY_RTOL * abs(lhs), estimate),
        convention='sqrt' if literal is not None else 'none',
    )
    if literal is not None:
        row.rhs_literal = literal(pair.fine)[1]
        row.margin_literal = lhs - row.rhs_literal
    if not verdict_bearing:
        row.note = 'experimental'
    return row


def _check_k(n: int, k: int, lowest: int, highest: int, name: str):
    if not lowest <= k <= highest:
        raise DomainError(f'{name} needs {lowest} <= k <= {highest} for n={n}, got {k}')


def check_ineq1(surf: AxiSurface, k: int, pair: Optional[MeasurePair] = None) -> InequalityRow:
    """int sigma_k >= sqrt(eta_k(A_{k-1})), with equality exactly on geodesic spheres."""
    n = surf.n
    _check_k(n, k, 0, n - 1, 'check_ineq1')
    pair = measure_pair(surf) if pair is None else pair
    return _evaluate('ineq1', k, pair, lambda m: (m.I(k), eta_sqrt(n, k, m.A(k - 1))))


def _lower_term(n: int, k: int, m: Measures) -> float:
    return n * m.A(-1) if k == 1 else (n - k + 1) / (k - 1) * m.A(k - 2)


def check_three(surf: AxiSurface, k: int, pair: Optional[MeasurePair] = None) -> InequalityRow:
    """A_k >= sqrt(eta_k(A_{k-1})) + c A_{k-2}; the literal form with eta_k is reported alongside."""
    n = surf.n
    _check_k(n, k, 1, n - 1, 'check_three')
    pair = measure_pair(surf) if pair is None else pair
    return _evaluate(
        'three',
        k,
        pair,
        lambda m: (m.A(k), eta_sqrt(n, k, m.A(k - 1)) + _lower_term(n, k, m)),
        literal=lambda m: (m.A(k), eta(n, k, m.A(k - 1)) + _lower_term(n, k, m)),
    )


def check_two_adjacent(surf: AxiSurface, k: int, pair: Optional[MeasurePair] = None) -> InequalityRow:
    n = surf.n
    _check_k(n, k, 1, n - 1, 'check_two_adjacent')
    pair = measure_pair(surf) if pair is None else pair
    return _evaluate(
        'two_adjacent',
        k,
        pair,
        lambda m: (m.A(k), eta_sqrt(n, k, m.A(k - 1))),
        literal=lambda m: (m.A(k), eta(n, k, m.A(k - 1))),
    )


def check_chen_sun(surf: AxiSurface, k: int, pair: Optional[MeasurePair] = None) -> InequalityRow:
    """A_{k-1} >= xi_{k-1,k-3}(A_{k-3}); for k = 2 this compares A_1 with the volume."""
    n = surf.n
    _check_k(n, k, 2, n - 1, 'check_chen_sun')
    pair = measure_pair(surf) if pair is None else pair
    return _evaluate('chen_sun', k, pair, lambda m: (m.A(k - 1), xi(n, k - 1, k - 3, m.A(k - 3))))


def probe_conjecture(surf: AxiSurface, k: int, pair: Optional[MeasurePair] = None) -> InequalityRow:
    """A_k against xi_{k,k-1}(A_{k-1}). Recorded for experiments only, never a pass/fail gate."""
    n = surf.n
    _check_k(n, k, 1, n - 1, 'probe_conjecture')
    pair = measure_pair(surf) if pair is None else pair
    return _evaluate(
        'conjecture', k, pair, lambda m: (m.A(k), xi(n, k, k - 1, m.A(k - 1))), verdict_bearing=False
    )


def check_isoperimetric(surf: AxiSurface, pair: Optional[MeasurePair] = None) -> InequalityRow:
    """Area^2 >= eta_0(Vol), the isoperimetric inequality in the sphere."""
    n = surf.n
    pair = measure_pair(surf) if pair is None else pair
    return _evaluate('isoperimetric', 0, pair, lambda m: (m.A(0) ** 2, eta(n, 0, m.A(-1))))


@dataclass
class FamilySpec:
    kind: str = 'centered'
    n: List[int] = field(default_factory=lambda: [3])
    N: int = 400
    rho0: List[float] = field(default_factory=list)
    r: List[float] = field(default_factory=list)
    d: List[float] = field(default_factory=list)
    eps: List[float] = field(default_factory=list)
    mode: List[int] = field(default_factory=lambda: [2])


class Shape(NamedTuple):
    shape_id: str
    surface: AxiSurface


_FAMILY_PARAMS = {
    'centered': ('rho0',),
    'offcenter': ('r', 'd'),
    'perturbed': ('rho0', 'eps', 'mode'),
}


def shape_family(spec: FamilySpec) -> List[Shape]:
    """Instantiate every parameter combination of a family.

    Members that cannot be built, reach a pole or are not strictly convex are dropped with a log entry.
    """
    try:
        names = _FAMILY_PARAMS[spec.kind]
    except KeyError:
        raise DomainError(f"Unknown family kind '{spec.kind}' (expected one of {sorted(_FAMILY_PARAMS)})") from None
    values = [list(getattr(spec, name)) for name in names]
    if spec.kind == 'perturbed' and any(m % 2 for m in spec.mode):
        raise DomainError(f'Perturbation modes must be even for pole regularity, got {list(spec.mode)}')
    for name, vals in zip(names, values):
        if not vals:
            raise DomainError(f"Family '{spec.kind}' needs at least one value for '{name}'")
    shapes = []
    for n in spec.n:
        for combo in itertools.product(*values):
            params = dict(zip(names, combo))
            label = ','.join(f'{name}={value:g}' for name, value in params.items())
            shape_id = f'{spec.kind}({label})/n={n}/N={spec.N}'
            try:
                surf = make_surface(spec.kind, n, spec.N, **params)
                conv = convexity_check(surf)
            except (DomainError, DegenerateSurfaceError) as e:
                log.info('Excluding %s: %s', shape_id, e)
                continue
            if not conv.convex:
                log.info('Excluding %s: not strictly convex (margin %.3g)', shape_id, conv.margin)
                continue
            if surf.rho.max() >= HALF_PI:
                log.info('Excluding %s: leaves the open northern hemisphere', shape_id)
                continue
            shapes.append(Shape(shape_id, surf))
    return shapes


def evaluate_shape(shape: Shape, probe: bool = True) -> InequalityReport:
    surf, n = shape.surface, shape.surface.n
    pair = measure_pair(surf)
    jobs = [('isoperimetric', 0, lambda: check_isoperimetric(surf, pair))]
    for k in range(n):
        jobs.append(('ineq1', k, lambda k=k: check_ineq1(surf, k, pair)))
    for k in range(1, n):
        jobs.append(('three', k, lambda k=k: check_three(surf, k, pair)))
        jobs.append(('two_adjacent', k, lambda k=k: check_two_adjacent(surf, k, pair)))
        if k >= 2:
            jobs.append(('chen_sun', k, lambda k=k: check_chen_sun(surf, k, pair)))
        if probe:
            jobs.append(('conjecture', k, lambda k=k: probe_conjecture(surf, k, pair)))
    report = InequalityReport(shape_id=shape.shape_id, n=n, N=surf.N, convexity_margin=pair.convexity_margin)
    for check, k, job in jobs:
        try:
            report.rows.append(job())
        except DomainError as e:
            log.warning('Skipping %s k=%d on %s: %s', check, k, shape.shape_id, e)
            nan = float('nan')
            report.rows.append(InequalityRow(check, k, nan, nan, nan, nan, nan, 'skipped', False, note=str(e)))
    report.rows.sort(key=lambda r: (r.k, CHECKS.index(r.check)))
    return report


def run_family(specs: Sequence[FamilySpec], threads: int = -1, probe: bool = True) -> List[InequalityReport]:
    """Evaluate every check on every member of the given families, in parallel across shapes."""
    shapes = [shape for spec in specs for shape in shape_family(spec)]
    log.info('Evaluating %d shapes', len(shapes))
    reports = Parallel(n_jobs=threads)(delayed(evaluate_shape)(shape, probe) for shape in shapes)
    return sorted(reports, key=lambda r: r.shape_id)


def reports_frame(reports: Sequence[InequalityReport]) -> pd.DataFrame:
    rows = [{'shape_id': r.shape_id, 'n': r.n, 'N': r.N, **asdict(row)} for r in reports for row in r.rows]
    return pd.DataFrame(rows)


def write_report(reports: Sequence[InequalityReport], json_path: Union[str, Path], csv_path: Union[str, Path]):
    write_json({'passed': all(r.passed for r in reports), 'reports': [r.to_dict() for r in reports]}, json_path)
    write_csv(reports_frame(reports), csv_path)
