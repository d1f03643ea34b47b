import pytest

from quermass.utils import DomainError, get_config, num_threads, parse_overrides, parse_shape


@pytest.mark.parametrize(
    'text,expected',
    [
        ('centered:0.8', {'kind': 'centered', 'rho0': 0.8}),
        ('offcenter:0.6,0.3', {'kind': 'offcenter', 'r': 0.6, 'd': 0.3}),
        ('perturbed:0.9,0.05,2', {'kind': 'perturbed', 'rho0': 0.9, 'eps': 0.05, 'mode': 2}),
    ],
)
def test_parse_shape(text, expected):
    assert parse_shape(text) == expected


@pytest.mark.parametrize('text', ['centered', 'cube:1', 'offcenter:0.6', 'perturbed:0.9,0.05,two'])
def test_parse_shape_errors(text):
    with pytest.raises(DomainError):
        parse_shape(text)


def test_parse_overrides():
    assert parse_overrides(['cfl:float=0.3', 'adaptive:bool=false', 'scheme:str=heun', 'grow_after:int=5']) == {
        'cfl': 0.3,
        'adaptive': False,
        'scheme': 'heun',
        'grow_after': 5,
    }
    with pytest.raises(DomainError):
        parse_overrides(['cfl=0.3'])
    with pytest.raises(DomainError):
        parse_overrides(['cfl:complex=1j'])


def test_get_config():
    preset = get_config('flow', 'perturbed_k2')
    assert preset['shape'] == 'perturbed:0.9,0.05,2'
    assert preset['config']['k'] == 2
    assert get_config('family', 'acceptance')['name'] == 'acceptance'
    with pytest.raises(DomainError):
        get_config('flow', 'missing')


def test_num_threads(monkeypatch):
    monkeypatch.delenv('QUERMASS_THREADS', raising=False)
    assert num_threads() == -1
    monkeypatch.setenv('QUERMASS_THREADS', '4')
    assert num_threads() == 4
    monkeypatch.setenv('QUERMASS_THREADS', '0')
    assert num_threads() == -1
    monkeypatch.setenv('QUERMASS_THREADS', 'many')
    with pytest.raises(DomainError):
        num_threads()
