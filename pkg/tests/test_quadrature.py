import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from corrdecay.potential import Potential, temperedness_constant
from corrdecay.quadrature import (QuadratureScheme, Region, integrate_mayer_ball,
                                  integrate_region, region_rule)

Q = QuadratureScheme()


def test_region_basics():
    assert Region.interval(0, 2).volume == 2
    assert Region.box((0, 0), (2, 3)).volume == 6
    assert Region.ball((0, 0), 1).volume == pytest.approx(math.pi)
    assert Region.box((0,), (1,)).kind == "interval"
    with pytest.raises(ValueError):
        Region.interval(1, 1)
    with pytest.raises(ValueError):
        Region("polygon", (0,), (1,))


def test_integrate_region_examples():
    I = Region.interval(0, 1)
    assert integrate_region(lambda x: 1.0, I, Q) == pytest.approx(1.0, abs=1e-14)
    assert integrate_region(lambda x: x[0] ** 2, I, QuadratureScheme(2)) == pytest.approx(1 / 3, abs=1e-15)
    assert integrate_region(lambda x: math.exp(x[0]), I, QuadratureScheme(16)) == pytest.approx(
        math.e - 1, abs=1e-10)


@pytest.mark.parametrize("region", [
    Region.interval(-0.3, 1.7), Region.box((0, 0), (1, 2)), Region.box((0, 0, 0), (1, 1, 0.5)),
    Region.ball((0.0, 0.0), 0.7), Region.ball((0.0, 0.0, 0.0), 1.2),
])
def test_constant_integrand_gives_volume(region):
    nodes = region_rule(region, QuadratureScheme(8))
    assert all(w > 0 for _, w in nodes)
    assert sum(w for _, w in nodes) == pytest.approx(region.volume, abs=1e-12)


def test_midpoint_rule():
    q = QuadratureScheme(64, rule="midpoint")
    val = integrate_region(lambda x: x[0], Region.interval(0, 1), q)
    assert val == pytest.approx(0.5, abs=1e-14)


def test_mayer_ball_hard_core():
    p = Potential.hard_core(1, 0.5)
    big = Region.interval(-5, 5)
    assert integrate_mayer_ball(lambda w: 1.0, p, 0.0, big, Q) == pytest.approx(1.0, abs=1e-14)
    # half the support is clipped at the left edge
    assert integrate_mayer_ball(lambda w: 1.0, p, 0.0, Region.interval(0, 1), Q) == pytest.approx(
        0.5, abs=1e-14)
    # region shrunk away from the support
    assert integrate_mayer_ball(lambda w: 1.0, p, 0.0, Region.interval(2, 3), Q) == 0


@pytest.mark.parametrize("p", [
    Potential.normalized_hard_sphere(2), Potential.normalized_hard_sphere(3),
    Potential.hard_core(2, 0.3),
])
def test_mayer_ball_hard_sphere_volume(p):
    d = p.dimension
    big = Region.box((-3,) * d, (3,) * d)
    val = integrate_mayer_ball(lambda w: 1.0, p, (0.0,) * d, big, QuadratureScheme(8))
    assert val.real == pytest.approx(temperedness_constant(p), abs=1e-12)


@pytest.mark.parametrize("p", [
    Potential.gaussian(1, 1.0, 1.0), Potential.exponential(1, 2.0, 0.3),
    Potential.gaussian(2, 1.0, 0.5), Potential.tabulated(1, [(0, 2.0), (0.5, 1.0), (1.0, 0.0)]),
])
def test_mayer_ball_soft_constant(p):
    d = p.dimension
    big = Region.box((-20,) * d, (20,) * d)
    c = 0.7 - 0.2j
    # in 1D the order counts nodes across the whole support, both sides
    q = QuadratureScheme(32 if d > 1 else 128, radial_layers=4)
    val = integrate_mayer_ball(lambda w: c, p, (0.0,) * d, big, q)
    assert val == pytest.approx(c * temperedness_constant(p), abs=1e-8)


@settings(max_examples=50, deadline=None)
@given(a=st.floats(-3, 3), b=st.floats(-3, 3), v=st.floats(-0.5, 1.5))
def test_linearity(a, b, v):
    p = Potential.gaussian(1, 1.2, 0.3)
    region = Region.interval(0, 1)

    def f(w):
        return math.sin(3 * w[0])

    def g(w):
        return w[0] ** 2

    lhs = integrate_mayer_ball(lambda w: a * f(w) + b * g(w), p, v, region, Q)
    rhs = a * integrate_mayer_ball(f, p, v, region, Q) + b * integrate_mayer_ball(g, p, v, region, Q)
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_refinement_converges():
    p = Potential.gaussian(2, 1.0, 0.5)
    region = Region.box((-0.5, -0.5), (2, 2))

    def f(w):
        return math.cos(w[0]) * math.exp(-w[1] ** 2)

    vals = [integrate_mayer_ball(f, p, (0.2, 0.1), region, QuadratureScheme(n)) for n in (8, 16, 32)]
    assert abs(vals[2] - vals[1]) < abs(vals[1] - vals[0]) + 1e-12


def test_scheme_validation():
    with pytest.raises(ValueError):
        QuadratureScheme(0)
    with pytest.raises(ValueError):
        QuadratureScheme(rule="simpson")
    assert QuadratureScheme.default(1).order_per_dimension == 32
    assert QuadratureScheme.default(2).order_per_dimension == 16
    assert QuadratureScheme(32).child_order(32) == 16
    assert QuadratureScheme(4, min_order=3).child_order(4) == 3
