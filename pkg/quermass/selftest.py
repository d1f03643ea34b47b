"""Fast oracle checks that need nothing beyond the runtime dependencies."""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np
from tabulate import tabulate

from .ballgeom import ball_profile, eta, eta1_closed, invert_quermass, s_bound
from .flow import FlowConfig, run, sphere_time_to
from .hypersurface import centered_sphere, geometry, offcenter_sphere, perturbed_sphere, quermass_vector
from .symfunc import CurvatureVector, newton_maclaurin_gap, sigma_all
from .verify import check_ineq1

log = logging.getLogger(__name__)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _sigma_enumeration(rng: np.random.Generator) -> Tuple[bool, str]:
    worst = 0.0
    for n in range(1, 9):
        kappa = rng.normal(size=n)
        sigma = sigma_all(CurvatureVector.of(kappa))
        for k in range(n + 1):
            oracle = sum(math.prod(c) for c in itertools.combinations(kappa, k))
            worst = max(worst, abs(sigma[k + 1] - oracle) / max(1.0, abs(oracle)))
    return worst < 1e-12, f'max rel err {worst:.2e}'


def _newton_maclaurin_diagonal(rng: np.random.Generator) -> Tuple[bool, str]:
    worst = 0.0
    for n in range(2, 9):
        # dyadic entries keep every sigma_k exact
        c = float(rng.choice([0.5, 1.0]))
        for k in range(1, n):
            worst = max(worst, *map(abs, newton_maclaurin_gap(CurvatureVector.of([c] * n), k)))
    return worst < 1e-12, f'max |gap| {worst:.2e}'


def _ball_closed_form(rng: np.random.Generator) -> Tuple[bool, str]:
    profile = ball_profile(2, math.pi / 4)
    err = abs(profile.A(1) - (math.pi**2 + 2 * math.pi))
    return err < 1e-10, f'|A_1 - (pi^2 + 2 pi)| = {err:.2e}'


def _eta1(rng: np.random.Generator) -> Tuple[bool, str]:
    worst = 0.0
    for n in range(2, 7):
        s = np.linspace(0.05, 0.95, 20) * s_bound(n, 0)
        closed = eta1_closed(n, s)
        worst = max(worst, float(np.max(np.abs(eta(n, 1, s) - closed) / closed)))
    return worst < 1e-8, f'max rel diff {worst:.2e}'


def _inversion(rng: np.random.Generator) -> Tuple[bool, str]:
    worst = 0.0
    for n in (2, 3, 5):
        rho = rng.uniform(0.05, 1.5, size=8)
        for k in range(-1, n):
            values = np.array([ball_profile(n, r).A(k) for r in rho])
            worst = max(worst, float(np.max(np.abs(invert_quermass(n, k, values) - rho))))
    return worst < 1e-8, f'max |rho error| {worst:.2e}'


def _sphere_curvature(rng: np.random.Generator) -> Tuple[bool, str]:
    geom = geometry(centered_sphere(3, 64, 0.8))
    err = max(np.abs(geom.kappa_m - 1 / math.tan(0.8)).max(), np.abs(geom.kappa_p - 1 / math.tan(0.8)).max())
    return err < 1e-12, f'max |kappa - cot 0.8| = {err:.2e}'


def _offcenter_quermass(rng: np.random.Generator) -> Tuple[bool, str]:
    values = quermass_vector(offcenter_sphere(3, 200, 0.6, 0.3))
    ball = ball_profile(3, 0.6).quermass
    err = float(np.max(np.abs(values - ball) / ball))
    return err < 1e-3, f'max rel err {err:.2e}'


def _ineq1_perturbed(rng: np.random.Generator) -> Tuple[bool, str]:
    surf = perturbed_sphere(3, 100, 0.9, 0.05, 2)
    margins = [check_ineq1(surf, k).rel_margin for k in range(3)]
    return min(margins) > 0, 'relative margins ' + ', '.join(f'{m:.2e}' for m in margins)


def _sphere_flow(rng: np.random.Generator) -> Tuple[bool, str]:
    config = FlowConfig(n=3, k=1, dt_init=1e-3, t_max=0.05, scheme='euler', adaptive=False, keep_surfaces=False)
    trace = run(config, centered_sphere(3, 16, 0.9))
    final = trace.records[-1]
    rho = invert_quermass(3, 0, final.quermass[1])
    expected = sphere_time_to(3, 1, 0.9, rho)
    q = np.abs(trace.q_values).max() / final.sigma_int[1] ** 2
    ok = abs(expected - final.t) < 1e-3 and q < 1e-9
    return ok, f'time error {abs(expected - final.t):.2e}, max |Q| rel {q:.2e}'


CHECKS: List[Tuple[str, Callable[[np.random.Generator], Tuple[bool, str]]]] = [
    ('sigma recurrence vs subset enumeration', _sigma_enumeration),
    ('Newton-Maclaurin equality on the diagonal', _newton_maclaurin_diagonal),
    ('ball quermassintegral closed form', _ball_closed_form),
    ('eta_1 closed form vs parametric', _eta1),
    ('quermass inversion round trip', _inversion),
    ('centered sphere curvatures', _sphere_curvature),
    ('off-center sphere quermassintegrals', _offcenter_quermass),
    ('perturbed sphere inequality margins', _ineq1_perturbed),
    ('centered sphere flow timing', _sphere_flow),
]


def run_checks(seed: int = 0) -> List[CheckResult]:
    rng = np.random.default_rng(seed)
    results = []
    for name, check in CHECKS:
        try:
            passed, detail = check(rng)
        except Exception as e:  # a crash is reported as a failed check
            log.exception('Self-test check %r crashed', name)
            passed, detail = False, f'{type(e).__name__}: {e}'
        results.append(CheckResult(name, bool(passed), detail))
    return results


def format_results(results: List[CheckResult]) -> str:
    rows = [(r.name, 'pass' if r.passed else 'FAIL', r.detail) for r in results]
    return tabulate(rows, headers=('Check', 'Result', 'Detail'), tablefmt='pipe')
