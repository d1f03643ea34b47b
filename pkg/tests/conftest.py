import math

import pytest
from hypothesis import settings

from quermass.hypersurface import centered_sphere, offcenter_sphere, perturbed_sphere

settings.register_profile('quermass', deadline=None, max_examples=50)
settings.load_profile('quermass')


@pytest.fixture
def sphere():
    return centered_sphere(3, 100, 0.8)


@pytest.fixture
def shifted_sphere():
    return offcenter_sphere(3, 200, 0.6, 0.3)


@pytest.fixture
def perturbed():
    return perturbed_sphere(3, 200, 0.9, 0.05, 2)


@pytest.fixture
def nonconvex():
    # Deep mode-2 dent at the equator: sigma_1 < 0 there
    return perturbed_sphere(3, 64, 0.9, 0.85, 2)


@pytest.fixture
def quarter():
    return math.pi / 4
