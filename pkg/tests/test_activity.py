import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from corrdecay.activity import (ANNIHILATE, DISCOUNT, ActivityField, Modification,
                                PiecewiseConstant, apply_boundary, discount_at,
                                evaluate_activity, hat_at, restrict_toward)
from corrdecay.potential import Potential
from corrdecay.quadrature import Region

SOFT = Potential.gaussian(1, 1.5, 0.4)
UNIT = Region.interval(0.0, 1.0)
points = st.floats(-0.2, 1.2)


def test_plain_evaluation(rod_field):
    assert evaluate_activity(rod_field, 0.3) == 1
    assert evaluate_activity(rod_field, 1.3) == 0
    assert evaluate_activity(rod_field, -0.01) == 0


def test_discount_inside_core(rod_field):
    g = discount_at(rod_field, 0.5)
    assert evaluate_activity(g, 0.2) == 0
    assert evaluate_activity(g, 0.0) == 1


def test_annihilate_ball(unit_interval):
    f = ActivityField.constant(2.0, Region.box((-1, -1), (1, 1)), Potential.hard_core(2, 0.1))
    g = f.with_mod(Modification((0.0, 0.0), 0.4, ANNIHILATE))
    assert evaluate_activity(g, (0.3, 0.0)) == 0
    assert evaluate_activity(g, (0.3, 0.3)) == 2


def test_hat(rod_field):
    assert evaluate_activity(hat_at(rod_field, 0.0), 0.3) == 1
    g = hat_at(rod_field, 0.5)
    assert evaluate_activity(g, 0.49) == 0
    assert evaluate_activity(g, 0.5) == 1
    assert evaluate_activity(g, 0.9) == 1
    empty = hat_at(rod_field, 2.0)
    assert all(evaluate_activity(empty, x) == 0 for x in np.linspace(0, 1, 11))
    recentered = hat_at(rod_field, 0.9, center=1.0)
    assert evaluate_activity(recentered, 0.95) == 0
    assert evaluate_activity(recentered, 0.5) == 1


def test_restrict_toward(rod_field):
    g = restrict_toward(rod_field, 0.5, 0.8)
    assert evaluate_activity(g, 0.35) == 0
    assert evaluate_activity(g, 0.15) == 1
    # the sphere through w itself is undiscounted
    assert evaluate_activity(g, 0.8) == 1
    with pytest.raises(ValueError, match="degenerate restriction"):
        restrict_toward(rod_field, 0.5, 0.5)


def test_double_discount_squares_factor(unit_interval):
    f = ActivityField.constant(1.0, unit_interval, SOFT)
    g = discount_at(discount_at(f, 0.2), 0.2)
    x = 0.45
    assert evaluate_activity(g, x) == pytest.approx(math.exp(-2 * SOFT.phi_radial(0.25)), rel=1e-14)


def test_ideal_gas_discount_is_identity(ideal_field):
    g = apply_boundary(discount_at(ideal_field, 0.3), [1.5, -2.0])
    assert all(evaluate_activity(g, x) == 1 for x in np.linspace(0, 1, 7))


def test_boundary(rod_field):
    assert apply_boundary(rod_field, []) is rod_field
    g = apply_boundary(rod_field, [1.2])
    assert evaluate_activity(g, 0.8) == 0
    assert evaluate_activity(g, 0.6) == 1
    with pytest.raises(ValueError, match="boundary point inside region"):
        apply_boundary(rod_field, [0.5])


def test_piecewise_base(unit_interval, rods):
    base = PiecewiseConstant((((0.0,), (0.5,), 2.0), ((0.5,), (1.0,), 0.5j)))
    f = ActivityField(base, unit_interval, rods)
    assert evaluate_activity(f, 0.2) == 2.0
    assert evaluate_activity(f, 0.7) == 0.5j
    assert f.sup_abs() == 2.0
    X = np.array([[0.1], [0.6], [1.5]])
    assert np.allclose(f.values(X), [2.0, 0.5j, 0.0])


def test_modification_validation():
    with pytest.raises(ValueError):
        Modification((0.0,), -1.0)
    with pytest.raises(ValueError):
        Modification((0.0,), 1.0, "scale")


mods_strategy = st.lists(
    st.tuples(points, st.one_of(st.floats(0, 1.5), st.just(math.inf)),
              st.sampled_from([DISCOUNT, ANNIHILATE])),
    max_size=5)


@settings(max_examples=150, deadline=None)
@given(mods=mods_strategy, x=points, seed=st.integers(0, 1000))
def test_stack_order_irrelevant(mods, x, seed):
    f = ActivityField.constant(1.3 - 0.4j, UNIT, SOFT)
    ms = [Modification((c,), r, m) for c, r, m in mods]
    perm = np.random.default_rng(seed).permutation(len(ms))
    a, b = f, f
    for m in ms:
        a = a.with_mod(m)
    for i in perm:
        b = b.with_mod(ms[i])
    assert evaluate_activity(a, x) == pytest.approx(evaluate_activity(b, x), rel=1e-13, abs=0)


@settings(max_examples=150, deadline=None)
@given(mods=mods_strategy, extra=st.tuples(points, st.floats(0, 2), st.sampled_from([DISCOUNT, ANNIHILATE])),
       x=points, hard=st.booleans())
def test_modulus_monotone(mods, extra, x, hard):
    p = Potential.hard_core(1, 0.3) if hard else SOFT
    f = ActivityField.constant(0.8 + 0.6j, UNIT, p)
    for c, r, m in mods:
        f = f.with_mod(Modification((c,), r, m))
    g = f.with_mod(Modification((extra[0],), extra[1], extra[2]))
    assert abs(evaluate_activity(g, x)) <= abs(evaluate_activity(f, x))
    assert abs(evaluate_activity(g, x)) <= f.sup_abs()


@settings(max_examples=100, deadline=None)
@given(v=points, x=st.floats(0, 1))
def test_far_restriction_equals_discount(v, x):
    f = ActivityField.constant(1.0, UNIT, SOFT)
    far = restrict_toward(f, v, v + 10.0)
    assert evaluate_activity(far, x) == evaluate_activity(discount_at(f, v), x)


def test_values_match_pointwise(unit_interval):
    f = ActivityField.constant(1.0 + 1j, unit_interval, SOFT)
    f = hat_at(restrict_toward(discount_at(f, 0.3), 0.6, 0.9), 0.2)
    xs = np.linspace(-0.1, 1.1, 50)
    ref = [evaluate_activity(f, x) for x in xs]
    assert np.allclose(f.values(xs[:, None]), ref, rtol=1e-14, atol=0)
