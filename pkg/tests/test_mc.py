import json

import numpy as np
import pytest

from corrdecay.activity import ActivityField
from corrdecay.mc import (McConfig, birth_acceptance, death_acceptance,
                          detailed_balance_unit_checks, poisson_goodness_of_fit, run_birth_death)
from corrdecay.potential import Potential
from corrdecay.quadrature import Region

UNIT = Region.interval(0.0, 1.0)


def test_config_validation():
    with pytest.raises(ValueError):
        McConfig(steps=10, burn_in=10)
    with pytest.raises(ValueError):
        McConfig(steps=0)
    with pytest.raises(ValueError):
        McConfig(seed=-1)


def test_detailed_balance():
    assert detailed_balance_unit_checks()


def test_acceptance_formulas():
    assert birth_acceptance(1.0, 1.0, 0.0, 1) == 0.0
    assert birth_acceptance(3.0, 1.0, 1.0, 0) == 1.0
    assert death_acceptance(3.0, 1.0, 1.0, 1) == pytest.approx(1 / 3)


def test_zero_activity_never_births():
    f = ActivityField.constant(0.0, UNIT, Potential.ideal(1))
    res = run_birth_death(f, UNIT, McConfig(steps=5000, burn_in=0))
    assert res.mean_count == 0.0


def test_ideal_gas_mean_count():
    f = ActivityField.constant(1.0, UNIT, Potential.ideal(1))
    res = run_birth_death(f, UNIT, McConfig(steps=200_000, seed=11))
    assert abs(res.mean_count - 1.0) < 3 * res.mean_count_stderr + 1e-3


def test_hard_rods_mean_count_and_lower_bound():
    f = ActivityField.constant(1.0, UNIT, Potential.hard_core(1, 0.5))
    res = run_birth_death(f, UNIT, McConfig(steps=300_000, seed=5))
    assert abs(res.mean_count - 1.25 / 2.125) < 3 * res.mean_count_stderr
    assert res.mean_count >= 0.5 - 3 * res.mean_count_stderr


def test_seeds_agree_and_reproduce():
    f = ActivityField.constant(0.8, UNIT, Potential.gaussian(1, 1.0, 0.3))
    cfg = McConfig(steps=100_000, chains=2, seed=9)
    a = run_birth_death(f, UNIT, cfg)
    b = run_birth_death(f, UNIT, cfg)
    assert a.jsonl() == b.jsonl()
    c0, c1 = a.chains
    assert abs(c0.mean_count - c1.mean_count) < 4 * np.hypot(c0.stderr, c1.stderr)
    parallel = run_birth_death(f, UNIT, cfg, workers=2)
    assert parallel.jsonl() == a.jsonl()


def test_jsonl_records():
    f = ActivityField.constant(0.5, UNIT, Potential.ideal(1))
    res = run_birth_death(f, UNIT, McConfig(steps=2000, burn_in=100, chains=3, seed=1))
    recs = [json.loads(line) for line in res.jsonl().splitlines()]
    assert [r["chain"] for r in recs] == [0, 1, 2]
    assert all(set(r) >= {"seed", "steps", "mean_count", "stderr"} for r in recs)


def test_two_dimensional_ball_region():
    ball = Region.ball((0.0, 0.0), 0.6)
    f = ActivityField.constant(1.0, ball, Potential.hard_core(2, 0.2))
    res = run_birth_death(f, ball, McConfig(steps=20_000, seed=2))
    assert 0 < res.mean_count < ball.volume


def test_rejects_complex_activity():
    f = ActivityField.constant(1.0 + 1j, UNIT, Potential.ideal(1))
    with pytest.raises(ValueError):
        run_birth_death(f, UNIT, McConfig(steps=10, burn_in=0))


def test_goodness_of_fit_detects_wrong_mean():
    rng = np.random.default_rng(0)
    samples = rng.poisson(1.0, 20_000)
    assert poisson_goodness_of_fit(samples, 1.0).passed
    assert not poisson_goodness_of_fit(samples, 1.2).passed
