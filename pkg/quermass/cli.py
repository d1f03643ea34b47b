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

import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd
from omegaconf import MISSING, OmegaConf
from omegaconf.errors import OmegaConfBaseException
from tabulate import tabulate

from .ballgeom import HALF_PI, ball_table, eta, eta1_closed, eta_ode_integrate, s_bound
from .flow import FlowConfig, check_evolution_identities, run
from .hypersurface import convexity_check, make_surface, quermass_vector, sigma_integrals
from .io import dumps_json, read_families, read_surface, write_csv, write_json
from .selftest import format_results, run_checks
from .utils import (
    DegenerateSurfaceError,
    DomainError,
    InsufficientDataError,
    PreconditionError,
    QuermassError,
    get_config,
    num_threads,
    parse_overrides,
    parse_shape,
)
from .verify import FamilySpec, reports_frame, run_family, write_report

log = logging.getLogger(__name__)

COMMANDS = ('profile', 'eta', 'surface', 'flow', 'verify', 'selftest')

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_USAGE = 2


@dataclass
class RunSpec:
    command: str = MISSING
    n: Optional[int] = None
    k: Optional[int] = None
    shape: Optional[str] = None
    shapes: List[str] = field(default_factory=list)
    dims: List[int] = field(default_factory=list)
    N: int = 400
    grid: int = 100
    input: Optional[str] = None
    out: Optional[str] = None
    json: Optional[str] = None
    family: Optional[str] = None
    probe: bool = True
    seed: int = 0
    threads: Optional[int] = None
    flow: FlowConfig = field(default_factory=FlowConfig)

    def validate(self):
        if self.command not in COMMANDS:
            raise DomainError(f"Unknown command '{self.command}' (expected one of {COMMANDS})")
        if self.command in ('profile', 'eta', 'surface') and (self.n is None or self.n < 2):
            raise DomainError(f'{self.command} needs --n >= 2')
        if self.command == 'eta' and (self.k is None or self.grid < 2):
            raise DomainError('eta needs --k and a --grid of at least 2 points')
        if self.command == 'surface' and not self.input:
            raise DomainError('surface needs --input')
        if self.command == 'flow':
            if not self.shape:
                raise DomainError('flow needs --shape (or a preset that defines one)')
            self.flow.validate()
        if self.command == 'verify' and not (self.family or self.shapes):
            raise DomainError('verify needs --family or at least one --shape')
        if self.N < 4 or self.N % 2:
            raise DomainError(f'--N must be an even number >= 4, got {self.N}')


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='JSON or YAML file with RunSpec fields; explicit flags take precedence')
    common.add_argument('--out', help='CSV output path')
    common.add_argument('--json', help='JSON output path')
    common.add_argument('--seed', type=int, help='Seed for randomized checks')
    common.add_argument('--threads', type=int, help='Parallel jobs (0 = all cores; default QUERMASS_THREADS)')

    parser = argparse.ArgumentParser(
        prog='quermass', description='Quermassintegral inequalities for convex hypersurfaces in the sphere'
    )
    parser.add_argument('-v', '--verbose', action='store_true', default=False, help='Debug logging')
    parser.add_argument('-q', '--quiet', action='store_true', default=False, help='No progress bars')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('profile', parents=[common], help='Geodesic ball profile over a grid of radii')
    p.add_argument('--n', type=int)
    p.add_argument('--grid', type=int, help='Number of radii in (0, pi/2]')

    p = sub.add_parser('eta', parents=[common], help='Tabulate eta_k and cross-check it')
    p.add_argument('--n', type=int)
    p.add_argument('--k', type=int)
    p.add_argument('--grid', type=int, help='Number of sample points across the domain')

    p = sub.add_parser('surface', parents=[common], help='Convexity and quermassintegrals of a theta,rho CSV')
    p.add_argument('--n', type=int)
    p.add_argument('--input')

    p = sub.add_parser('flow', parents=[common], help='Run the inverse curvature flow and track Q_k')
    p.add_argument('--n', type=int)
    p.add_argument('--k', type=int)
    p.add_argument('--shape', help="Initial surface, e.g. 'perturbed:0.9,0.05,2'")
    p.add_argument('--N', type=int, help='Number of theta intervals')
    p.add_argument('--preset', help='Flow preset from configs/flow')
    p.add_argument('--scheme', choices=('euler', 'heun', 'semi_implicit'))
    p.add_argument('--dt', type=float, help='Initial (or fixed, with adaptive:bool=false) time step')
    p.add_argument('--t-max', type=float)
    p.add_argument('--record-every', type=int)
    p.add_argument('--stop-tol', type=float, help='Stop once max |pi/2 - rho| falls below this')
    p.add_argument('overrides', nargs='*', help='Further FlowConfig fields as name:type=value')

    p = sub.add_parser('verify', parents=[common], help='Evaluate the inequalities over shape families')
    p.add_argument('--family', help='Family spec file (JSON/YAML) or a name from configs/family')
    p.add_argument('--shape', action='append', dest='shapes', help='Shape string; may be repeated')
    p.add_argument('--n', type=int, action='append', dest='dims', help='Dimension for --shape; may be repeated')
    p.add_argument('--N', type=int)
    p.add_argument('--no-probe', action='store_false', dest='probe', default=None, help='Skip the conjecture probe')

    sub.add_parser('selftest', parents=[common], help='Run the built-in oracle suite')
    return parser


# CLI flag -> FlowConfig field
_FLOW_FLAGS = {
    'scheme': 'scheme',
    'dt': 'dt_init',
    't_max': 't_max',
    'record_every': 'record_every',
    'stop_tol': 'stop_rho_tol',
}
_SPEC_FLAGS = (
    'n', 'k', 'shape', 'shapes', 'dims', 'N', 'grid', 'input', 'out', 'json', 'family', 'probe', 'seed', 'threads',
)


def build_spec(args: argparse.Namespace) -> RunSpec:
    """Merge structured defaults, an optional preset or config file, and explicit flags (highest precedence)."""
    layers = [OmegaConf.structured(RunSpec)]
    if getattr(args, 'preset', None):
        preset = get_config('flow', args.preset)
        preset = {'shape': preset.get('shape'), 'N': preset.get('N', 400), 'flow': preset.get('config', {})}
        layers.append(OmegaConf.create(preset))
    if args.config:
        layers.append(OmegaConf.load(args.config))
    flags = {'command': args.command}
    for name in _SPEC_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            flags[name] = value
    flow = {dest: getattr(args, flag) for flag, dest in _FLOW_FLAGS.items() if getattr(args, flag, None) is not None}
    flow.update(parse_overrides(getattr(args, 'overrides', None) or []))
    if flow:
        flags['flow'] = flow
    layers.append(OmegaConf.create(flags))
    spec: RunSpec = OmegaConf.to_object(OmegaConf.merge(*layers))
    if spec.command == 'flow':
        spec.flow.n = spec.n if spec.n is not None else spec.flow.n
        spec.flow.k = spec.k if spec.k is not None else spec.flow.k
    spec.validate()
    return spec


def cmd_profile(spec: RunSpec, progress: bool) -> int:
    n = spec.n
    rho = np.linspace(0, HALF_PI, spec.grid + 1)[1:]
    sigma_int, quermass = ball_table(n, rho)
    frame = pd.DataFrame({'rho': rho, 'area': sigma_int[0], 'vol': quermass[0]})
    for k in range(n + 1):
        frame[f'sigma_int_{k}'] = sigma_int[k]
    for k in range(-1, n + 1):
        frame[f'quermass_{k}'] = quermass[k + 1]
    out = spec.out or 'profile.csv'
    write_csv(frame, out)
    print(f'profile n={n}: {len(rho)} radii written to {out}')
    return EXIT_OK


def cmd_eta(spec: RunSpec, progress: bool) -> int:
    n, k = spec.n, spec.k
    s = np.linspace(0.05, 0.95, spec.grid) * s_bound(n, k - 1)
    values = np.asarray(eta(n, k, s))
    if k == 1:
        reference, method = np.asarray(eta1_closed(n, s)), 'closed form'
    elif k >= 2:
        reference, method = np.array(eta_ode_integrate(n, k, s[0], values[0], s[1:], substeps=4)), 'ODE'
    else:
        reference, method = np.full_like(values, np.nan), 'none'
    rel = np.abs(values - reference) / np.abs(reference)
    frame = pd.DataFrame({'s': s, 'eta': values, 'eta_reference': reference, 'rel_diff': rel})
    out = spec.out or 'eta.csv'
    write_csv(frame, out)
    worst = np.nanmax(rel) if k >= 1 else float('nan')
    print(f'eta n={n} k={k}: max rel diff vs {method} = {worst:.3e} ({out})')
    return EXIT_OK


def cmd_surface(spec: RunSpec, progress: bool) -> int:
    surf = read_surface(spec.input, spec.n)
    conv = convexity_check(surf)
    report = {
        'n': surf.n,
        'N': surf.N,
        'convex': conv.convex,
        'convexity_margin': conv.margin,
        'sigma_int': {str(k): v for k, v in enumerate(sigma_integrals(surf))},
        'quermass': {str(k - 1): v for k, v in enumerate(quermass_vector(surf))},
    }
    if spec.json:
        write_json(report, spec.json)
    else:
        print(dumps_json(report))
    print(f'surface n={surf.n} N={surf.N}: convex={conv.convex} margin={conv.margin:.6g}')
    return EXIT_OK


def cmd_flow(spec: RunSpec, progress: bool) -> int:
    surf = make_surface(n=spec.flow.n, N=spec.N, **parse_shape(spec.shape))
    trace = run(spec.flow, surf, progress=progress)
    identities = None
    try:
        identities = check_evolution_identities(trace)
    except InsufficientDataError as e:
        log.info('Skipping evolution identity check: %s', e)
    out = Path(spec.out or 'trace.csv')
    write_csv(trace.to_frame(identities), out)
    summary = trace.summary()
    summary['shape'], summary['N'] = spec.shape, spec.N
    if identities is not None:
        summary['identity_residual_max'] = identities.max_residual
    json_path = spec.json or out.with_suffix('.json')
    write_json(summary, json_path)
    print(
        f"flow n={spec.flow.n} k={spec.flow.k}: {trace.stop_reason} after {trace.steps} steps, "
        f"q_monotone={summary['q_monotone']} ({out}, {json_path})"
    )
    return EXIT_OK if summary['q_monotone'] and not trace.failed else EXIT_VERDICT


def cmd_verify(spec: RunSpec, progress: bool) -> int:
    families = []
    if spec.family:
        path = Path(spec.family)
        raw = read_families(path) if path.exists() else get_config('family', spec.family)['members']
        for member in raw:
            member = {'N': spec.N, **member}
            families.append(OmegaConf.to_object(OmegaConf.merge(OmegaConf.structured(FamilySpec), member)))
    dims = spec.dims or [3]
    for text in spec.shapes:
        shape = parse_shape(text)
        kind = shape.pop('kind')
        families.append(FamilySpec(kind=kind, n=list(dims), N=spec.N, **{k: [v] for k, v in shape.items()}))
    threads = spec.threads if spec.threads is not None else num_threads()
    reports = run_family(families, threads=threads or -1, probe=spec.probe)
    out, json_path = spec.out or 'report.csv', spec.json or 'report.json'
    write_report(reports, json_path, out)
    frame = reports_frame(reports)
    failures = frame[frame['verdict'] == 'fail'] if len(frame) else frame
    if len(failures):
        columns = ['shape_id', 'check', 'k', 'margin', 'tol']
        print(tabulate(failures[columns], headers='keys', tablefmt='pipe', showindex=False))
    print(f'verify: {len(reports)} shapes, {len(frame)} rows, {len(failures)} failures ({json_path}, {out})')
    return EXIT_OK if not len(failures) else EXIT_VERDICT


def cmd_selftest(spec: RunSpec, progress: bool) -> int:
    results = run_checks(spec.seed)
    print(format_results(results))
    failed = sum(not r.passed for r in results)
    print(f'selftest: {len(results) - failed}/{len(results)} checks passed')
    return EXIT_OK if not failed else EXIT_VERDICT


_HANDLERS = {
    'profile': cmd_profile,
    'eta': cmd_eta,
    'surface': cmd_surface,
    'flow': cmd_flow,
    'verify': cmd_verify,
    'selftest': cmd_selftest,
}


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format='[%(asctime)s][%(name)s][%(levelname)s] - %(message)s',
    )
    try:
        spec = build_spec(args)
        return _HANDLERS[spec.command](spec, progress=not args.quiet and sys.stderr.isatty())
    except (DomainError, PreconditionError, DegenerateSurfaceError, OmegaConfBaseException) as e:
        print(f'error: {e}', file=sys.stderr)
        return EXIT_USAGE
    except QuermassError as e:
        print(f'error: {e}', file=sys.stderr)
        return EXIT_VERDICT


if __name__ == '__main__':
    sys.exit(main())
