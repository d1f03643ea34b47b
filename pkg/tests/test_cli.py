import json

import pandas as pd
import pytest

from quermass.cli import EXIT_OK, EXIT_USAGE, main
from quermass.hypersurface import perturbed_sphere
from quermass.io import write_surface


@pytest.fixture(autouse=True)
def single_thread(monkeypatch):
    monkeypatch.setenv('QUERMASS_THREADS', '1')


def test_profile(tmp_path):
    out = tmp_path / 'profile.csv'
    assert main(['profile', '--n', '2', '--grid', '10', '--out', str(out)]) == EXIT_OK
    frame = pd.read_csv(out)
    assert len(frame) == 10
    assert list(frame.columns) == [
        'rho', 'area', 'vol', 'sigma_int_0', 'sigma_int_1', 'sigma_int_2', 'quermass_-1', 'quermass_0', 'quermass_1',
        'quermass_2',
    ]  # fmt: skip


def test_output_is_deterministic(tmp_path):
    first, second = tmp_path / 'a.csv', tmp_path / 'b.csv'
    main(['eta', '--n', '3', '--k', '2', '--grid', '20', '--out', str(first)])
    main(['eta', '--n', '3', '--k', '2', '--grid', '20', '--out', str(second)])
    assert first.read_bytes() == second.read_bytes()


def test_eta_cross_check(tmp_path, capsys):
    out = tmp_path / 'eta.csv'
    assert main(['eta', '--n', '2', '--k', '1', '--grid', '100', '--out', str(out)]) == EXIT_OK
    frame = pd.read_csv(out)
    assert len(frame) == 100
    assert frame['rel_diff'].max() < 1e-8
    assert 'closed form' in capsys.readouterr().out


def test_config_file_and_flag_precedence(tmp_path):
    config, out = tmp_path / 'run.yaml', tmp_path / 'profile.csv'
    config.write_text(f'n: 3\ngrid: 5\nout: {out}\n')
    assert main(['profile', '--config', str(config), '--grid', '7']) == EXIT_OK
    assert len(pd.read_csv(out)) == 7


def test_surface(tmp_path):
    surface, report = tmp_path / 'surface.csv', tmp_path / 'surface.json'
    write_surface(perturbed_sphere(3, 64, 0.9, 0.05, 2), surface)
    assert main(['surface', '--n', '3', '--input', str(surface), '--json', str(report)]) == EXIT_OK
    data = json.loads(report.read_text())
    assert data['convex']
    assert data['N'] == 64
    assert set(data['quermass']) == {'-1', '0', '1', '2', '3'}


def test_flow_preset(tmp_path):
    out = tmp_path / 'trace.csv'
    code = main(['flow', '--preset', 'sphere_heun', '--t-max', '0.01', '--out', str(out)])
    summary = json.loads(out.with_suffix('.json').read_text())
    assert summary['config']['scheme'] == 'heun'
    assert summary['config']['t_max'] == 0.01
    assert summary['N'] == 40
    assert code == (EXIT_OK if summary['q_monotone'] and not summary['failed'] else 1)
    assert len(pd.read_csv(out)) == summary['records']


def test_verify_shapes(tmp_path):
    out, report = tmp_path / 'report.csv', tmp_path / 'report.json'
    args = ['verify', '--shape', 'centered:0.8', '--shape', 'perturbed:0.9,0.05,2', '--n', '3', '--N', '64']
    assert main(args + ['--out', str(out), '--json', str(report)]) == EXIT_OK
    data = json.loads(report.read_text())
    assert data['passed']
    assert len(data['reports']) == 2


def test_verify_named_family(tmp_path):
    out, report = tmp_path / 'report.csv', tmp_path / 'report.json'
    assert main(['verify', '--family', 'smoke', '--no-probe', '--out', str(out), '--json', str(report)]) == EXIT_OK
    frame = pd.read_csv(out)
    assert 'conjecture' not in set(frame['check'])
    assert set(frame['N']) == {100}


def test_selftest(capsys):
    assert main(['selftest']) == EXIT_OK
    assert 'checks passed' in capsys.readouterr().out


@pytest.mark.parametrize(
    'argv',
    [
        ['bogus'],
        ['profile'],
        ['profile', '--n', '3', '--N', '7'],
        ['flow', '--n', '3', '--k', '1'],
        ['flow', '--n', '3', '--k', '1', '--shape', 'cube:1'],
        ['flow', '--n', '3', '--k', '3', '--shape', 'centered:0.8'],
        ['flow', '--n', '3', '--k', '1', '--shape', 'perturbed:0.9,0.85,2', '--N', '64'],
        ['flow', '--preset', 'missing'],
        ['verify'],
    ],
)
def test_usage_errors(argv, capsys):
    assert main(argv) == EXIT_USAGE


def test_help():
    assert main(['--help']) == EXIT_OK
