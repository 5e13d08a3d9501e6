import math

import numpy as np
import pytest

import rtp_ldp


def test_rate_families():
    cw = rtp_ldp.SwitchRateFamily.curie_weiss(2.0)
    assert cw(1, 0.5) == pytest.approx(math.exp(-1.0))
    assert cw(-1, 0.5) == pytest.approx(math.exp(1.0))
    assert cw.to_dict() == {"kind": "curie_weiss", "beta": 2.0}
    same = rtp_ldp.SwitchRateFamily.from_dict({"kind": "constant", "value": 2.0})
    assert same(1, 0.3) == 2.0
    with pytest.raises(ValueError):
        cw(1, 1.5)
    with pytest.raises(ValueError):
        rtp_ldp.SwitchRateFamily.from_dict({"kind": "nope"})


def test_fixed_points_and_ode():
    roots = rtp_ldp.curie_weiss_fixed_points(2.0)
    assert len(roots) == 3
    assert abs(roots[-1] - math.tanh(2.0 * roots[-1])) < 1e-9
    ode = rtp_ldp.integrate_magnetization_ode(rtp_ldp.SwitchRateFamily.constant(), 0.5, 1.0, 1e-3)
    assert abs(ode[-1] - 0.5 * math.exp(-2.0)) < 1e-8


def test_simulate_conserves_particles_and_is_deterministic():
    rates = rtp_ldp.SwitchRateFamily.curie_weiss(1.0)
    a = rtp_ldp.simulate(64, 0.5, 7, rates, "sine(1,0.3,+1)", snapshots=[0.0, 0.25, 0.5])
    b = rtp_ldp.simulate(64, 0.5, 7, rates, "sine(1,0.3,+1)", snapshots=[0.0, 0.25, 0.5])
    counts = a["counts"]
    assert counts.shape == (3, 2, 64)
    totals = counts.sum(axis=(1, 2))
    assert np.all(totals == totals[0])
    assert np.array_equal(counts, b["counts"])
    assert a["magnetization"] == b["magnetization"]
    assert a["log_radon_nikodym"] is None


def test_zero_field_gives_zero_log_radon_nikodym():
    rates = rtp_ldp.SwitchRateFamily.constant()
    path = rtp_ldp.simulate(32, 0.3, 1, rates, rn_field={})
    assert path["log_radon_nikodym"] == 0.0


def test_solve_and_rate_round_trip():
    rates = rtp_ldp.SwitchRateFamily.curie_weiss(1.0)
    typical = rtp_ldp.solve(64, 0.5, rates, "sine(1,0.3,+1)")
    values = typical["values"]
    assert values.shape == (33, 2, 64)
    assert typical["mass_drift"] < 1e-12
    report = rtp_ldp.total_rate(values, typical["dt"], values[0], rates)
    assert report["total"] < 1e-5
    assert report["method"] == "exact-formula"

    tilt = {"sigma_plus": [{"k": 1, "cos": [0.4]}]}
    tilted = rtp_ldp.solve(64, 0.5, rates, "sine(1,0.3,+1)", tilt=tilt)
    assert rtp_ldp.total_rate(tilted["values"], tilted["dt"], values[0], rates)["i_tr"] > 0.0
    assert rtp_ldp.static_rate(values[0], values[0]) == 0.0


def test_invalid_arguments_raise():
    rates = rtp_ldp.SwitchRateFamily.constant()
    with pytest.raises(ValueError):
        rtp_ldp.solve(8, 1.0, rates, "uniform(-1,1)")
    with pytest.raises(ValueError):
        rtp_ldp.static_rate(np.ones(3), np.ones(3))


def test_fast_criterion():
    result = rtp_ldp.run_criterion(9)
    assert result["passed"]
    assert result["name"] == "Picard contraction"
