import json
import logging

import numpy as np
import pandas as pd
import pytest

from quermass.hypersurface import centered_sphere, perturbed_sphere
from quermass.utils import DomainError, PreconditionError, get_config
from quermass.verify import (
    FamilySpec,
    Shape,
    check_chen_sun,
    check_ineq1,
    check_isoperimetric,
    check_three,
    check_two_adjacent,
    evaluate_shape,
    measure_pair,
    probe_conjecture,
    reports_frame,
    run_family,
    shape_family,
    write_report,
)

# Checks that hold with equality on geodesic spheres
SHARP = ('isoperimetric', 'ineq1', 'three', 'chen_sun', 'conjecture')


def test_measure_pair(sphere):
    pair = measure_pair(sphere)
    assert pair.coarse is not None
    assert pair.convexity_margin > 0
    assert measure_pair(centered_sphere(3, 102, 0.8)).coarse is None


def test_measure_pair_requires_convexity(nonconvex):
    with pytest.raises(PreconditionError):
        measure_pair(nonconvex)
    with pytest.raises(PreconditionError):
        check_ineq1(nonconvex, 1)


def test_sphere_is_extremal(sphere):
    report = evaluate_shape(Shape('sphere', sphere))
    assert report.passed
    for row in report.rows:
        if row.check in SHARP:
            assert abs(row.rel_margin) < 1e-5, row
            assert row.equality, row
    two_adjacent = report.row('two_adjacent', 1)
    assert two_adjacent.verdict == 'pass'
    assert not two_adjacent.equality


def test_shifted_sphere_is_extremal(shifted_sphere):
    pair = measure_pair(shifted_sphere)
    for k in range(3):
        row = check_ineq1(shifted_sphere, k, pair)
        assert row.verdict == 'pass'
        assert row.equality


def test_perturbed_margins(perturbed):
    pair = measure_pair(perturbed)
    for k in range(3):
        row = check_ineq1(perturbed, k, pair)
        assert row.verdict == 'pass'
        assert row.rel_margin > 1e-4
        assert not row.equality
    assert check_isoperimetric(perturbed, pair).rel_margin > 1e-4
    for k in (1, 2):
        assert check_three(perturbed, k, pair).verdict == 'pass'
        assert check_two_adjacent(perturbed, k, pair).verdict == 'pass'
    assert check_chen_sun(perturbed, 2, pair).verdict == 'pass'


def test_literal_convention_reported(perturbed):
    row = check_three(perturbed, 1)
    assert row.convention == 'sqrt'
    assert row.rhs_literal is not None
    assert row.margin_literal == pytest.approx(row.lhs - row.rhs_literal)
    assert check_ineq1(perturbed, 1).rhs_literal is None


def test_conjecture_probe_has_no_verdict(perturbed):
    row = probe_conjecture(perturbed, 1)
    assert row.verdict is None
    assert row.note == 'experimental'


def test_order_errors(sphere):
    with pytest.raises(DomainError):
        check_ineq1(sphere, 3)
    with pytest.raises(DomainError):
        check_three(sphere, 0)
    with pytest.raises(DomainError):
        check_chen_sun(sphere, 1)
    with pytest.raises(DomainError):
        probe_conjecture(sphere, 3)


def test_report_layout(sphere):
    report = evaluate_shape(Shape('sphere', sphere))
    assert [(r.check, r.k) for r in report.rows] == [
        ('isoperimetric', 0),
        ('ineq1', 0),
        ('ineq1', 1),
        ('three', 1),
        ('two_adjacent', 1),
        ('conjecture', 1),
        ('ineq1', 2),
        ('three', 2),
        ('two_adjacent', 2),
        ('chen_sun', 2),
        ('conjecture', 2),
    ]
    assert len(evaluate_shape(Shape('sphere', sphere), probe=False).rows) == 9
    with pytest.raises(KeyError):
        report.row('chen_sun', 1)


def test_shape_family_ids_and_exclusions():
    shapes = shape_family(FamilySpec(kind='perturbed', n=[2, 3], N=64, rho0=[0.9], eps=[0.05, 0.85], mode=[2]))
    assert [s.shape_id for s in shapes] == [
        'perturbed(rho0=0.9,eps=0.05,mode=2)/n=2/N=64',
        'perturbed(rho0=0.9,eps=0.05,mode=2)/n=3/N=64',
    ]
    assert [s.shape_id for s in shape_family(FamilySpec(kind='centered', N=16, rho0=[1.6]))] == []


def test_shape_family_skips_invalid_members(caplog):
    caplog.set_level(logging.INFO, logger='quermass.verify')
    shapes = shape_family(FamilySpec(kind='offcenter', n=[3], N=64, r=[0.6], d=[0.3, 0.7]))
    assert [s.shape_id for s in shapes] == ['offcenter(r=0.6,d=0.3)/n=3/N=64']
    shapes = shape_family(FamilySpec(kind='perturbed', n=[2], N=64, rho0=[0.9, 3.12], eps=[0.05], mode=[2]))
    assert [s.shape_id for s in shapes] == ['perturbed(rho0=0.9,eps=0.05,mode=2)/n=2/N=64']
    assert shape_family(FamilySpec(kind='centered', n=[2], N=16, rho0=[np.pi - 1e-9])) == []
    assert 'offcenter(r=0.6,d=0.7)/n=3/N=64' in caplog.text
    assert 'reaches a pole' in caplog.text


def test_shape_family_errors():
    with pytest.raises(DomainError):
        shape_family(FamilySpec(kind='perturbed', rho0=[0.9], eps=[0.05], mode=[3]))
    with pytest.raises(DomainError):
        shape_family(FamilySpec(kind='offcenter', r=[0.6]))
    with pytest.raises(DomainError):
        shape_family(FamilySpec(kind='ellipsoid'))


def test_run_family_and_write_report(tmp_path):
    specs = [FamilySpec(kind='centered', N=64, rho0=[0.8, 0.4]), FamilySpec(kind='offcenter', N=128, r=[0.6], d=[0.3])]
    reports = run_family(specs, threads=1)
    assert [r.shape_id for r in reports] == sorted(r.shape_id for r in reports)
    assert len(reports) == 3
    write_report(reports, tmp_path / 'report.json', tmp_path / 'report.csv')
    data = json.loads((tmp_path / 'report.json').read_text())
    assert data['passed']
    assert len(data['reports']) == 3
    frame = pd.read_csv(tmp_path / 'report.csv')
    assert len(frame) == len(reports_frame(reports)) == 33
    assert set(frame['verdict'].dropna()) == {'pass'}


@pytest.mark.slow
def test_acceptance_family():
    specs = [FamilySpec(**member) for member in get_config('family', 'acceptance')['members']]
    reports = run_family(specs, threads=1)
    assert all(r.passed for r in reports)
    frame = reports_frame(reports)
    assert set(frame['verdict'].dropna()) == {'pass'}
    sharp = frame[frame['check'].isin(SHARP)]
    centered = sharp[sharp['shape_id'].str.startswith('centered')]
    assert (centered['rel_margin'].abs() < 1e-5).all()
    assert centered['equality'].all()
    assert sharp[sharp['shape_id'].str.startswith('offcenter')]['equality'].all()
    bumpy = frame[frame['shape_id'].str.contains('eps=0.05') & frame['check'].isin(['isoperimetric', 'ineq1'])]
    assert len(bumpy) > 0
    assert (bumpy['rel_margin'] > 1e-4).all()
