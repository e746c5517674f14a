import math
from dataclasses import replace

import pytest

from repeater.analytics import ProtocolParams, rate_breakdown, total_time
from repeater.common import ConfigError, SimulationError
from repeater.simulation import (
    RetryModel, SimConfig, convergence_report, simulate_basic_link, simulate_model, simulate_nested,
)


def fast_params(**overrides):
    """Short link with high efficiencies so every stage succeeds often."""
    values = dict(eta_p=1.0, eta_s=1.0, eta_e1=0.8, eta_e2=0.95, eta_d=0.95,
                  r=1e6, L_n=40.0, L_att=22.0, n=2, c=2e5)
    values.update(overrides)
    return ProtocolParams(**values)


def test_deterministic_limit():
    """With every probability at one the time is one slot plus one link attempt."""
    model = RetryModel(p_r=1.0, p_b=1.0, p_swap=(1.0, 1.0), slot_time=2e-8, link_time=1e-3)
    outcome = simulate_model(model, trials=50, seed=1)
    assert outcome.mean_total_time == pytest.approx(1e-3 + 2e-8, rel=1e-12)
    assert outcome.std_error == pytest.approx(0.0, abs=1e-15)
    assert outcome.mean_attempts == (1.0, 1.0, 1.0)


@pytest.mark.parametrize("p", [0.1, 0.3, 0.5, 0.9])
def test_max_of_two_geometrics(p):
    """A perfect swap waits for the slower of two geometric links."""
    model = RetryModel(p_r=1.0, p_b=p, p_swap=(1.0,), link_time=1.0)
    outcome = simulate_model(model, trials=20000, seed=7)
    expected = 2 / p - 1 / (2 * p - p * p)
    assert abs(outcome.mean_total_time - expected) <= 3 * outcome.std_error


@pytest.mark.parametrize("time_model", ["attempt-slotted", "continuous"])
def test_basic_link_matches_closed_form(time_model):
    params = fast_params(n=0, L_n=10.0, eta_e1=0.3)
    outcome = simulate_basic_link(SimConfig(params, trials=20000, seed=11, time_model=time_model, workers=2))
    assert abs(outcome.mean_total_time - total_time(params)) <= 3 * outcome.std_error


def test_basic_link_ignores_nesting():
    params = fast_params()
    outcome = simulate_basic_link(SimConfig(params, trials=200, seed=5))
    assert len(outcome.attempts_per_level) == 1


def test_worker_count_does_not_change_result(small_chunks):
    params = fast_params()
    one = simulate_nested(SimConfig(params, trials=1000, seed=99, workers=1))
    many = simulate_nested(SimConfig(params, trials=1000, seed=99, workers=8))
    assert one == many


def test_seed_changes_result():
    params = fast_params()
    a = simulate_nested(SimConfig(params, trials=300, seed=1))
    b = simulate_nested(SimConfig(params, trials=300, seed=2))
    assert a.mean_total_time != b.mean_total_time


def test_attempt_histograms(small_chunks):
    params = fast_params()
    outcome = simulate_nested(SimConfig(params, trials=500, seed=4))
    assert len(outcome.attempts_per_level) == 3
    assert sum(outcome.attempts_per_level[2].values()) == 500
    for hist in outcome.attempts_per_level:
        assert all(bucket & (bucket - 1) == 0 for bucket in hist)
    for rate, attempts in zip(outcome.success_rate_conditional, outcome.mean_attempts):
        assert rate == pytest.approx(1 / attempts)


def test_nested_requires_levels():
    with pytest.raises(ConfigError, match="n >= 1"):
        simulate_nested(SimConfig(fast_params(n=0), trials=10))


def test_zero_probability_is_rejected():
    with pytest.raises(SimulationError, match="p_b"):
        RetryModel(p_r=0.5, p_b=0.0)
    with pytest.raises(SimulationError):
        RetryModel.from_params(fast_params(eta_d=0.0))


def test_sim_config_validation():
    params = fast_params()
    with pytest.raises(ConfigError, match="sim.trials"):
        SimConfig(params, trials=0)
    with pytest.raises(ConfigError, match="sim.seed"):
        SimConfig(params, seed=-1)
    with pytest.raises(ConfigError, match="sim.time_model"):
        SimConfig(params, time_model="poisson")
    with pytest.raises(ConfigError, match="sim.memory_coherence_time"):
        SimConfig(params, memory_coherence_time=0.0)
    with pytest.raises(ConfigError, match="sim.memory_coherence_time"):
        SimConfig(params, memory_coherence_time="1s")


def test_decoherence_slows_the_repeater():
    """Same seed, finite memory lifetime: never faster than perfect memories."""
    params = fast_params()
    ideal = simulate_nested(SimConfig(params, trials=5000, seed=21))
    lossy = simulate_nested(SimConfig(params, trials=5000, seed=21, memory_coherence_time=1e-4))
    assert lossy.mean_total_time > ideal.mean_total_time


def test_long_coherence_changes_little():
    params = fast_params()
    ideal = simulate_nested(SimConfig(params, trials=20000, seed=21))
    stable = simulate_nested(SimConfig(params, trials=20000, seed=21, memory_coherence_time=1e6))
    assert stable.mean_total_time == pytest.approx(ideal.mean_total_time, rel=0.05)


def test_convergence_report_levels():
    params = fast_params()
    rows = convergence_report(SimConfig(params, trials=100_000, seed=8))
    assert [row.level for row in rows] == [0, 1, 2]
    assert [row.L for row in rows] == [10.0, 20.0, 40.0]
    assert not any(row.flagged for row in rows)
    for row in rows:
        assert row.ci_low <= row.ratio <= row.ci_high
        assert row.trials == 100_000
        assert math.isfinite(row.analytic_T_tot)


def test_convergence_report_flags_bad_analytic():
    params = fast_params(n=1)
    rows = convergence_report(SimConfig(params, trials=500, seed=8),
                              analytic=replace(rate_breakdown(params), T_tot=1e-9))
    assert rows[-1].flagged
    assert not rows[0].flagged


def paper_at_level(paper_params, n):
    """Bundled preset with the elementary link kept at its 156.25 km."""
    return replace(paper_params, n=n, L_n=paper_params.L0 * 2 ** n)


@pytest.mark.parametrize("name", ["eta_p", "eta_s", "eta_e1", "eta_e2", "eta_d"])
def test_better_efficiency_is_never_slower(paper_params, name):
    """Same seed, one efficiency raised by 10%: the mean time drops."""
    params = replace(paper_at_level(paper_params, 2), eta_p=0.9)
    base = simulate_nested(SimConfig(params, trials=20000, seed=3))
    better = replace(params, **{name: getattr(params, name) * 1.1})
    improved = simulate_nested(SimConfig(better, trials=20000, seed=3))
    assert improved.mean_total_time < base.mean_total_time


def test_std_error_shrinks_with_trials():
    model = RetryModel(p_r=1.0, p_b=0.3, p_swap=(0.5,), link_time=1.0)
    small = simulate_model(model, trials=2000, seed=13)
    large = simulate_model(model, trials=32000, seed=13)
    assert small.std_error / large.std_error == pytest.approx(4.0, rel=0.2)


def test_convergence_report_paper_params(paper_params):
    rows = convergence_report(SimConfig(paper_at_level(paper_params, 2), trials=100_000, seed=8))
    assert [row.L for row in rows] == [156.25, 312.5, 625.0]
    assert not any(row.flagged for row in rows)
    for row in rows[1:]:
        assert row.band_low <= row.ratio <= row.band_high


def test_convergence_report_paper_smoke(paper_params):
    """Full preset at n = 4 with a handful of trials; the ratio is only reported."""
    rows = convergence_report(SimConfig(paper_params, trials=100, seed=8),
                              analytic=rate_breakdown(paper_params))
    assert [row.level for row in rows] == [0, 1, 2, 3, 4]
    assert rows[-1].L == 2500.0
    assert all(row.ratio > 0 and math.isfinite(row.ratio) for row in rows)
