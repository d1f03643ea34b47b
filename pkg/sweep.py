#!/usr/bin/env python3
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
import logging
from pathlib import Path

import hydra
from hydra.core.hydra_config import HydraConfig
from omegaconf import DictConfig, OmegaConf, open_dict

from quermass.flow import FlowConfig, check_evolution_identities, run
from quermass.hypersurface import make_surface
from quermass.io import write_csv, write_json
from quermass.utils import InsufficientDataError, num_threads, parse_shape
from quermass.verify import FamilySpec, run_family, write_report

log = logging.getLogger(__name__)


def run_verification(config: DictConfig, output_dir: Path) -> bool:
    specs = [OmegaConf.to_object(OmegaConf.merge(OmegaConf.structured(FamilySpec), m)) for m in config.family.members]
    reports = run_family(specs, threads=config.threads or num_threads(), probe=config.probe)
    write_report(reports, output_dir / 'report.json', output_dir / 'report.csv')
    failed = [r.shape_id for r in reports if not r.passed]
    for shape_id in failed:
        log.error('Inequality check failed on %s', shape_id)
    log.info('Verified %d shapes of family %s, %d failed', len(reports), config.family.name, len(failed))
    return not failed


def run_flow(config: DictConfig, output_dir: Path) -> bool:
    flow_config: FlowConfig = OmegaConf.to_object(OmegaConf.merge(OmegaConf.structured(FlowConfig), config.flow.config))
    surf = make_surface(n=flow_config.n, N=config.flow.N, **parse_shape(config.flow.shape))
    trace = run(flow_config, surf, progress=True)
    try:
        identities = check_evolution_identities(trace)
    except InsufficientDataError as e:
        log.warning('Skipping evolution identity check: %s', e)
        identities = None
    write_csv(trace.to_frame(identities), output_dir / 'trace.csv')
    summary = trace.summary()
    summary['shape'], summary['N'] = config.flow.shape, config.flow.N
    if identities is not None:
        summary['identity_residual_max'] = identities.max_residual
    write_json(summary, output_dir / 'trace.json')
    log.info('Flow stopped (%s) at t=%.6g, Q monotone: %s', trace.stop_reason, trace.times[-1], summary['q_monotone'])
    return summary['q_monotone'] and not trace.failed


@hydra.main(config_path='configs', config_name='main', version_base='1.2')
def main(config: DictConfig):
    with open_dict(config):
        # Family members without their own grid size use the global one
        for member in config.family.members:
            member.N = member.get('N', config.N)

    output_dir = Path(HydraConfig.get().runtime.output_dir)
    ok = True
    if config.verify:
        ok &= run_verification(config, output_dir)
    if config.flow_run:
        ok &= run_flow(config, output_dir)
    # Multirun sweeps rely on the return value to flag failing jobs
    return 0 if ok else 1


if __name__ == '__main__':
    main()
