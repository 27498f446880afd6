import numpy as np
import pytest
from scipy import stats

from levy_ifpt.errors import EmptySample
from levy_ifpt.levy_model import BrownianDriftLevy, MixedExpLevy
from levy_ifpt.mc_engine import (
    BLOCK,
    McParams,
    block_rng,
    ks_distance,
    sample_levy_increment,
    simulate_first_passage,
    survival_grid,
    worker_count,
)


def inverse_gaussian_passage(x, drift):
    # first passage of x + drift*t + W_t below zero, drift < 0
    mean, shape = x / abs(drift), x * x
    return stats.invgauss(mu=mean / shape, scale=shape)


def test_brownian_passage_law():
    m = BrownianDriftLevy(-0.8)
    fp = simulate_first_passage(m, 1.0, McParams(100_000, 200.0, seed=3))
    assert np.all(np.isfinite(fp.tau))
    assert np.all(fp.crossed_by_diffusion)
    law = inverse_gaussian_passage(1.0, -0.8)
    assert ks_distance(fp.tau, law.cdf) < 1.63 / np.sqrt(fp.tau.size)  # 1% level
    np.testing.assert_array_equal(fp.overshoot, 0.0)


def test_uncorrected_coarse_grid_fails_ks():
    m = BrownianDriftLevy(-0.8)
    params = McParams(100_000, 200.0, seed=3, bridge_correction=False, monitor_dt=0.25)
    fp = simulate_first_passage(m, 1.0, params)
    law = inverse_gaussian_passage(1.0, -0.8)
    assert ks_distance(fp.tau, law.cdf) > 1.63 / np.sqrt(fp.tau.size)
    assert np.mean(fp.tau) > law.mean() + 0.05  # crossings are detected late
    np.testing.assert_allclose(fp.tau / 0.25, np.round(fp.tau / 0.25), atol=1e-9)
    assert np.all(fp.overshoot <= 0)


def test_uncorrected_checks_segment_ends_only(kou_model):
    params = McParams(5_000, 3.0, seed=3, bridge_correction=False)
    fp = simulate_first_passage(kou_model, 0.5, params)
    corrected = simulate_first_passage(kou_model, 0.5, McParams(5_000, 3.0, seed=3))
    assert np.mean(np.isfinite(fp.tau)) < np.mean(np.isfinite(corrected.tau))
    assert not np.any(fp.crossed_by_diffusion & (fp.overshoot == 0))


def test_jump_overshoot_is_exponential():
    # memoryless down-jumps: the undershoot of a jump crossing is Exp(rate)
    m = MixedExpLevy(0.1, -0.1, 2.0, 0.3, ((1.0, 6.0),), ((1.0, 4.0),))
    fp = simulate_first_passage(m, 0.5, McParams(40_000, 100.0, seed=9))
    jump = np.isfinite(fp.tau) & ~fp.crossed_by_diffusion
    under = -fp.overshoot[jump]
    assert under.size > 10_000
    assert ks_distance(under, stats.expon(scale=1 / 4.0).cdf) < 1.63 / np.sqrt(under.size)
    np.testing.assert_array_equal(fp.overshoot[fp.crossed_by_diffusion], 0.0)


def test_zero_sigma_creeps_at_drift_speed():
    m = MixedExpLevy(0.0, -0.5, 1e-12, 0.0, (), ((1.0, 4.0),))
    fp = simulate_first_passage(m, 1.0, McParams(100, 10.0))
    np.testing.assert_allclose(fp.tau, 2.0)


def test_worker_count_independence(kou_model):
    params = McParams(3 * BLOCK + 17, 5.0, seed=123)
    a = simulate_first_passage(kou_model, 0.4, params, workers=1)
    b = simulate_first_passage(kou_model, 0.4, params, workers=3)
    np.testing.assert_array_equal(a.tau, b.tau)
    np.testing.assert_array_equal(a.overshoot, b.overshoot)


def test_prefix_stability(kou_model):
    # block streams make the first block independent of the total path count
    a = simulate_first_passage(kou_model, 0.4, McParams(BLOCK, 5.0, seed=1))
    b = simulate_first_passage(kou_model, 0.4, McParams(2 * BLOCK, 5.0, seed=1))
    np.testing.assert_array_equal(a.tau, b.tau[:BLOCK])


def test_seed_changes_output(kou_model):
    a = simulate_first_passage(kou_model, 0.4, McParams(1000, 5.0, seed=1))
    b = simulate_first_passage(kou_model, 0.4, McParams(1000, 5.0, seed=2))
    assert not np.array_equal(a.tau, b.tau)


def test_block_streams_differ():
    assert block_rng(1, 0).random() != block_rng(1, 1).random()


def test_start_variants(kou_model):
    params = McParams(500, 1.0, seed=4)
    per_path = np.linspace(0.1, 2.0, 500)
    fp = simulate_first_passage(kou_model, per_path, params)
    np.testing.assert_array_equal(fp.x_start, per_path)
    fp = simulate_first_passage(kou_model, lambda rng, n: rng.uniform(1, 2, n), params)
    assert np.all((fp.x_start >= 1) & (fp.x_start <= 2))
    fp = simulate_first_passage(kou_model, -0.1, params)
    np.testing.assert_array_equal(fp.tau, 0.0)
    with pytest.raises(ValueError):
        simulate_first_passage(kou_model, np.ones(3), params)


def test_terminal_tracking_matches_increment_law(kou_model):
    params = McParams(60_000, 1.0, seed=8)
    fp = simulate_first_passage(kou_model, 1.0, params, track_terminal=True)
    dx = fp.x_end - fp.x_start
    inc = sample_levy_increment(kou_model, 1.0, 60_000, seed=8)
    assert stats.ks_2samp(dx, inc).pvalue > 0.001
    se = dx.std() / np.sqrt(dx.size)
    assert abs(dx.mean() - kou_model.mean()) < 4 * se


def test_increment_moments(mixed_model):
    t = 2.0
    inc = sample_levy_increment(mixed_model, t, 200_000, seed=2)
    mean, var = mixed_model.dpsi(0.0) * t, mixed_model.d2psi(0.0) * t
    assert abs(inc.mean() - mean) < 4 * np.sqrt(var / inc.size)
    assert inc.var() == pytest.approx(var, rel=0.02)
    mgf = np.exp(0.5 * inc).mean()
    assert mgf == pytest.approx(np.exp(t * mixed_model.psi(0.5)), rel=0.01)


def test_antithetic_mirrors(kou_model):
    a = sample_levy_increment(BrownianDriftLevy(0.0), 1.0, 1000, seed=5, antithetic=True)
    np.testing.assert_allclose(a[:500], -a[500:], atol=1e-12)


def test_survival_grid_counts_censored():
    est = survival_grid([0.5, np.inf, 2.0, np.inf], [0.0, 1.0, 3.0])
    np.testing.assert_allclose(est.survival, [1.0, 0.75, 0.5])
    assert est.se[0] == 0.0
    with pytest.raises(EmptySample):
        survival_grid([], [1.0])
    with pytest.raises(EmptySample):
        ks_distance([], lambda x: x)


def test_worker_env(monkeypatch):
    monkeypatch.setenv("LEVY_IFPT_THREADS", "3")
    assert worker_count() == 3
    assert worker_count(2) == 2
    monkeypatch.delenv("LEVY_IFPT_THREADS")
    assert worker_count() == 1


def test_params_validated():
    with pytest.raises(ValueError):
        McParams(0, 1.0)
    with pytest.raises(ValueError):
        McParams(10, 0.0)
