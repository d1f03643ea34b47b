import os
from pathlib import PurePath

import yaml


class QuermassError(RuntimeError):
    """Base class for every error raised by the library."""


class DomainError(QuermassError, ValueError):
    """Argument outside the documented domain of an operation."""


class PreconditionError(QuermassError, ValueError):
    """Input violates a documented precondition (cone membership, convexity, ...)."""


class DegenerateSurfaceError(QuermassError):
    """Surface touches a pole of the ambient sphere."""


class ComputationError(QuermassError, ArithmeticError):
    """A numerical procedure could not produce a meaningful value."""


class StepRejected(QuermassError):
    """A flow step lost convexity or produced non-finite radii."""


class InsufficientDataError(QuermassError):
    """Not enough trace records for a finite-difference check."""


# Parameter names of the shape strings accepted on the command line, e.g. 'perturbed:0.9,0.05,2'
_SHAPE_PARAMS = {
    'centered': (('rho0', float),),
    'offcenter': (('r', float), ('d', float)),
    'perturbed': (('rho0', float), ('eps', float), ('mode', int)),
}


def parse_shape(text: str) -> dict:
    try:
        kind, args = text.split(':', maxsplit=1)
    except ValueError:
        raise DomainError(f"Shape '{text}' must look like '<kind>:<p1>,<p2>,...'") from None
    try:
        params = _SHAPE_PARAMS[kind]
    except KeyError:
        raise DomainError(f"Unknown shape kind '{kind}' (expected one of {sorted(_SHAPE_PARAMS)})") from None
    values = [v for v in args.split(',') if v.strip()]
    if len(values) != len(params):
        names = ','.join(name for name, _ in params)
        raise DomainError(f"Shape '{kind}' takes {len(params)} parameters ({names}), got {len(values)}")
    shape = {'kind': kind}
    for (name, arg_type), value in zip(params, values):
        try:
            shape[name] = arg_type(value)
        except ValueError:
            raise DomainError(f"Invalid value '{value}' for {kind}.{name}") from None
    return shape


def parse_overrides(args) -> dict:
    """Parse trailing ``name:type=value`` arguments, e.g. ``cfl:float=0.3`` or ``adaptive:bool=false``."""
    kwargs = {}
    arg_types = {t.__name__: t for t in [int, float, str]}
    arg_types['bool'] = lambda v: v.lower() == 'true'  # special handling for bool
    for arg in args:
        try:
            name, value = arg.split('=', maxsplit=1)
            name, arg_type = name.split(':', maxsplit=1)
            kwargs[name] = arg_types[arg_type](value)
        except (KeyError, ValueError):
            raise DomainError(f"Override '{arg}' must look like name:type=value") from None
    return kwargs


def get_config(group: str, name: str) -> dict:
    """Emulates hydra config resolution for a single config group entry."""
    root = PurePath(__file__).parents[1]
    try:
        with open(root / f'configs/{group}/{name}.yaml', 'r') as f:
            config = yaml.load(f, yaml.SafeLoader)
    except FileNotFoundError:
        raise DomainError(f"No configuration found for '{group}/{name}'") from None
    config.pop('defaults', None)
    return config


def num_threads(default: int = 0) -> int:
    """Parallelism cap from QUERMASS_THREADS, in joblib convention (-1 = all cores)."""
    value = os.environ.get('QUERMASS_THREADS', '')
    try:
        threads = int(value) if value.strip() else default
    except ValueError:
        raise DomainError(f"QUERMASS_THREADS must be an integer, got '{value}'") from None
    if threads < 0:
        raise DomainError(f'QUERMASS_THREADS must be >= 0, got {threads}')
    return threads or -1
