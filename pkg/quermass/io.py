import json
import math
from pathlib import Path
from typing import Any, List, Union

import numpy as np
import pandas as pd
from omegaconf import OmegaConf

from .hypersurface import AxiSurface
from .utils import DomainError

PathLike = Union[str, Path]

FLOAT_FORMAT = '%.17g'


def to_builtin(obj: Any) -> Any:
    """Recursively convert numpy values for JSON; NaN and infinities become None."""
    if isinstance(obj, dict):
        return {str(k): to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [to_builtin(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def dumps_json(obj: Any) -> str:
    return json.dumps(to_builtin(obj), indent=2, sort_keys=True)


def write_json(obj: Any, path: PathLike):
    with open(path, 'w') as f:
        f.write(dumps_json(obj) + '\n')


def write_csv(frame: pd.DataFrame, path: PathLike):
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)


def read_surface(path: PathLike, n: int) -> AxiSurface:
    """Load a ``theta,rho`` CSV sampled on the uniform grid from 0 to pi."""
    frame = pd.read_csv(path)
    if list(frame.columns) != ['theta', 'rho']:
        raise DomainError(f'Surface file {path} must have the header theta,rho, got {",".join(frame.columns)}')
    theta = frame['theta'].to_numpy(dtype=float)
    expected = np.linspace(0.0, math.pi, len(theta))
    if len(theta) < 2 or not np.allclose(theta, expected, rtol=0, atol=1e-9):
        raise DomainError(f'Surface file {path} is not sampled on a uniform grid over [0, pi]')
    return AxiSurface(n, frame['rho'].to_numpy(dtype=float))


def write_surface(surf: AxiSurface, path: PathLike):
    write_csv(pd.DataFrame({'theta': surf.theta, 'rho': surf.rho}), path)


def read_families(path: PathLike) -> List[dict]:
    """Family specs from JSON or YAML: a single spec, a list of specs, or a mapping with a 'families' list."""
    config = OmegaConf.to_container(OmegaConf.load(path), resolve=True)
    if isinstance(config, dict) and 'families' in config:
        config = config['families']
    if isinstance(config, dict):
        config = [config]
    if not isinstance(config, list) or not all(isinstance(c, dict) for c in config):
        raise DomainError(f'{path} does not contain family specs')
    return config
