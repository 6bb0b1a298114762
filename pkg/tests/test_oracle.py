import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from corrdecay.activity import ActivityField
from corrdecay.contraction import certify_neighborhood
from corrdecay.oracle import (OracleError, PartitionPolynomial, density_oracle,
                              hard_rod_partition, kpoint_oracle, logZ_bound_check,
                              mean_density, partition_series, partition_zeros,
                              segment_distance_to_roots, series_tail)
from corrdecay.potential import Potential, critical_activity
from corrdecay.quadrature import Region

UNIT = Region.interval(0.0, 1.0)
RODS = Potential.hard_core(1, 0.5)


def test_zero_activity():
    poly = partition_series(ActivityField.constant(0.0, UNIT, RODS))
    assert poly.value == 1


@pytest.mark.parametrize("lam, length", [(1.0, 1.0), (0.7, 2.0), (1.5 - 0.5j, 1.0)])
def test_ideal_gas_series(lam, length):
    f = ActivityField.constant(lam, Region.interval(0, length), Potential.ideal(1))
    poly = partition_series(f)
    expected = cmath.exp(lam * length)
    assert abs(poly.value - expected) <= poly.tail_estimate + 5 * poly.sampling_error + 1e-12


def test_hard_rod_coefficients(rod_field):
    poly = partition_series(rod_field)
    assert poly.coefficients[:3] == pytest.approx([1, 1, 0.125], abs=1e-14)
    assert all(c == 0 for c in poly.coefficients[3:])
    assert poly.value == pytest.approx(2.125, abs=1e-13)
    assert poly.truncation == 12 and poly.region_volume == 1


def test_hard_rod_partition_examples():
    assert hard_rod_partition(1, 0.5, 1) == pytest.approx(2.125, abs=1e-15)
    assert hard_rod_partition(1, 0.5, 0) == 1
    assert hard_rod_partition(1, 1.3, 1) == pytest.approx(2.0)
    assert hard_rod_partition(0.8, 2.0, 1.0, K=12) == pytest.approx(1.8)


@settings(max_examples=30, deadline=None)
@given(L=st.floats(0.3, 2.0), ratio=st.floats(0.35, 2.0), lam=st.floats(0, 2.5))
def test_hard_rod_closed_form_matches_quadrature(L, ratio, lam):
    r = L * ratio
    if 3 * r < L:  # keep at most three rods
        return
    f = ActivityField.constant(lam, Region.interval(0, L), Potential.hard_core(1, r))
    assert partition_series(f).value == pytest.approx(hard_rod_partition(L, r, lam), abs=1e-8)


def test_density_oracle_examples(rod_field):
    assert density_oracle(rod_field, UNIT, 0.5) == pytest.approx(8 / 17, abs=1e-13)
    assert density_oracle(rod_field, UNIT, 1.5) == 0
    small = rod_field.with_base(1e-7)
    assert density_oracle(small, UNIT, 0.3) == pytest.approx(1e-7, rel=1e-6)


def test_oracle_at_zero_of_Z(rod_field):
    root = -4 + 2 * math.sqrt(2)
    with pytest.raises(OracleError, match="oracle at numerical zero of Z"):
        density_oracle(rod_field.with_base(root), UNIT, 0.3)


def test_kpoint_oracle(rod_field):
    assert kpoint_oracle(rod_field, UNIT, [0.3]) == density_oracle(rod_field, UNIT, 0.3)
    assert kpoint_oracle(rod_field, UNIT, [0.4, 0.6]) == 0
    # rods at 0.1 and 0.9 block every other placement
    assert kpoint_oracle(rod_field, UNIT, [0.1, 0.9]) == pytest.approx(1 / 2.125, abs=1e-13)


def test_mean_density_examples(rod_field, ideal_field):
    zero = mean_density(rod_field.with_base(0.0))
    assert (zero.density, zero.lower_bound, zero.margin) == (0.0, 0.0, 0.0)
    ideal = mean_density(ideal_field.with_base(0.6))
    assert ideal.density == pytest.approx(0.6, abs=1e-9)
    assert ideal.lower_bound == 0.6
    assert abs(ideal.margin) < 1e-9
    rods = mean_density(rod_field)
    assert rods.density == pytest.approx(1.25 / 2.125, abs=1e-13)
    assert rods.lower_bound == 0.5
    assert rods.margin == pytest.approx(1.25 / 2.125 - 0.5, abs=1e-13)


@pytest.mark.parametrize("p, region", [
    (RODS, UNIT),
    (Potential.hard_core(1, 0.3), Region.interval(0, 1.0)),
    (Potential.gaussian(1, 1.0, 0.3), UNIT),
    (Potential.exponential(1, 2.0, 0.2), UNIT),
])
def test_density_lower_bound_grid(p, region):
    lam_c = critical_activity(p)
    for lam in np.linspace(0, lam_c, 8, endpoint=False):
        res = mean_density(ActivityField.constant(lam, region, p), region, samples_per_order=4096)
        assert res.margin >= -1e-12


def test_partition_zeros_examples():
    roots = partition_zeros([1, 1, 0.125])
    assert roots[0] == pytest.approx(-4 + 2 * math.sqrt(2), abs=1e-12)
    assert roots[1] == pytest.approx(-4 - 2 * math.sqrt(2), abs=1e-12)
    assert all(z.imag == 0 for z in roots)
    assert partition_zeros([1, 1]) == [-1]
    assert partition_zeros([1]) == []
    assert partition_zeros([1, 0, 0]) == []


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.01, 3), min_size=2, max_size=9))
def test_roots_are_roots(coeffs):
    coeffs = [1.0] + coeffs
    for z in partition_zeros(coeffs):
        val = sum(c * z ** k for k, c in enumerate(coeffs))
        scale = sum(abs(c) * abs(z) ** k for k, c in enumerate(coeffs))
        assert abs(val) < 1e-9 * scale


@pytest.mark.parametrize("L, r", [(1.0, 0.5), (1.3, 0.5), (1.0, 0.8)])
def test_no_zeros_near_subcritical_segment(L, r):
    p = Potential.hard_core(1, r)
    poly = partition_series(ActivityField.constant(1.0, Region.interval(0, L), p))
    roots = partition_zeros(poly)
    assert segment_distance_to_roots(roots, 0.0, critical_activity(p) * 0.95) > 0.1


def test_logZ_bound(rod_field):
    zero = logZ_bound_check(rod_field.with_base(0.0), UNIT, 12, 1.0)
    assert zero.passed and zero.log_z == 0
    cert = certify_neighborhood(2.0, 1.0)
    rep = logZ_bound_check(rod_field, UNIT, 12, cert.c_bound)
    assert rep.passed
    assert rep.log_z == pytest.approx(math.log(2.125), abs=1e-13)
    with pytest.raises(ValueError):
        logZ_bound_check(rod_field, UNIT, 12, 0.0)


@settings(max_examples=30, deadline=None)
@given(t=st.floats(0, 1), s=st.floats(-0.9, 0.9))
def test_logZ_bound_on_certified_neighborhood(t, s):
    cert = certify_neighborhood(2.0, 1.0, grid_resolution=32)
    lam = complex(2.0 * t, s * cert.eps1)
    f = ActivityField.constant(lam, UNIT, RODS)
    assert logZ_bound_check(f, UNIT, 12, cert.c_bound).passed


def test_coefficient_bounds_and_first_moment():
    p = Potential.gaussian(1, 1.0, 0.3)
    poly = partition_series(ActivityField.constant(1.0, Region.interval(0, 1.5), p))
    assert poly.coefficients[0] == 1
    assert poly.coefficients[1] == pytest.approx(1.5, abs=1e-12)
    for k, c in enumerate(poly.coefficients):
        assert 0 <= c <= 1.5 ** k / math.factorial(k) + 1e-12


def test_sampled_orders_deterministic():
    p = Potential.gaussian(1, 1.0, 0.3)
    f = ActivityField.constant(1.0, UNIT, p)
    a, b = partition_series(f, seed=5), partition_series(f, seed=5)
    assert a.coefficients == b.coefficients
    assert any(e > 0 for e in a.stderr[4:])


def test_two_dimensional_hard_disks():
    p = Potential.hard_core(2, 0.3)
    box = Region.box((0, 0), (1, 1))
    poly = partition_series(ActivityField.constant(1.0, box, p), matrix_order=24)
    # second coefficient: (1 - overlap probability) / 2 for two uniform points
    assert poly.coefficients[1] == pytest.approx(1.0, abs=1e-12)
    assert 0.3 < poly.coefficients[2] < 0.5


def test_series_tail():
    assert series_tail(0.0, 5) == 0
    assert series_tail(1.0, 12) == pytest.approx(math.e - sum(1 / math.factorial(k) for k in range(13)),
                                                 rel=1e-6)
    direct = sum(3.0 ** k / math.factorial(k) for k in range(13, 60))
    assert series_tail(3.0, 12) == pytest.approx(direct, rel=1e-12)
    assert series_tail(2.0, 12) < 1e-5


def test_text_round_trip(rod_field):
    poly = partition_series(rod_field.with_base(1.0 + 0.5j))
    back = PartitionPolynomial.from_text(poly.to_text())
    assert back.coefficients == poly.coefficients
    assert back.truncation == poly.truncation
    assert back.value == pytest.approx(poly.value, rel=1e-15)
