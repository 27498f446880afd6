import numpy as np
import pytest

from levy_ifpt.errors import ConfigError, InsufficientPaths, LambdaExceedsStar, OutOfRange
from levy_ifpt.ifpt import (
    frailty_from_dict,
    normalized_lambda,
    simulate_frailty,
    solve_frailty,
    solve_rifpt,
    time_change_general,
    time_change_qid,
)
from levy_ifpt.mc_engine import McParams, simulate_time_changed_fp
from levy_ifpt.spectral import lambda_star
from levy_ifpt.survival import ExponentialCurve, WeibullCurve


def test_exponential_curve_needs_no_time_change(kou_model):
    sol = solve_rifpt(kou_model, ExponentialCurve(0.3), lam=0.3)
    t = np.linspace(0, 1, 5)
    np.testing.assert_allclose(sol.time_change(t), t)
    np.testing.assert_allclose(sol.inverse_time_change(t), t)


def test_normalized_rate(kou_model):
    curve = WeibullCurve(2.0, 2.0, horizon=1.0)
    sol = solve_rifpt(kou_model, curve, normalize=1.0)
    assert sol.lam == pytest.approx(normalized_lambda(curve)) == pytest.approx(0.25)
    assert sol.time_change(1.0) == pytest.approx(1.0)


def test_weibull_clock(kou_model):
    sol = solve_rifpt(kou_model, WeibullCurve(2.0, 1.0), lam=0.4)
    t = np.array([0.2, 0.5, 1.0])
    np.testing.assert_allclose(sol.time_change(t), t**2 / 0.4)
    np.testing.assert_allclose(sol.inverse_time_change(sol.time_change(t)), t)


def test_rate_checks(kou_model):
    ls = lambda_star(kou_model)
    with pytest.raises(LambdaExceedsStar):
        solve_rifpt(kou_model, ExponentialCurve(1.0), lam=1.1 * ls)
    with pytest.raises(ConfigError):
        solve_rifpt(kou_model, ExponentialCurve(1.0))
    with pytest.raises(ConfigError):
        solve_rifpt(kou_model, ExponentialCurve(1.0), lam=0.1, normalize=1.0)
    with pytest.raises(OutOfRange):
        time_change_qid(ExponentialCurve(1.0), 2 * ls, ls)
    with pytest.raises(OutOfRange):
        solve_rifpt(kou_model, ExponentialCurve(1.0), lam=-0.1)


def test_to_dict_samples(kou_model):
    d = solve_rifpt(kou_model, WeibullCurve(2.0, 1.0), lam=0.4).to_dict(n_samples=5)
    assert d["time_change"]["I"][-1] == pytest.approx(2.5)
    assert set(d) == {"lambda", "lambda_star", "qid", "time_change"}


def test_exponential_target_gives_exponential_default(kou_model):
    sol = solve_rifpt(kou_model, ExponentialCurve(0.35, horizon=3.0), lam=0.35)
    fp = simulate_time_changed_fp(sol, McParams(50_000, 3.0, seed=21))
    grid = np.linspace(0.3, 3.0, 10)
    est = fp.survival(grid)
    assert np.all(np.abs(est.survival - np.exp(-0.35 * grid)) < 4 * est.se + 1e-12)


def test_general_clock_with_invariant_start_is_linear(kou_model):
    lam = 0.5 * lambda_star(kou_model)
    sol = solve_rifpt(kou_model, WeibullCurve(2.0, 1.0), lam=lam)
    clock = time_change_general(kou_model, sol.dist, sol.curve,
                                McParams(100_000, 2.0 / lam, seed=2))
    t = np.array([0.3, 0.5, 0.8, 1.0])
    np.testing.assert_allclose(clock(t), sol.time_change(t), rtol=0.03)
    assert np.isinf(clock(50.0))


def test_general_clock_point_mass_start(kou_model):
    curve = WeibullCurve(2.0, 1.0)
    clock = time_change_general(kou_model, 0.5, curve, McParams(50_000, 40.0, seed=2))
    t = np.linspace(0.05, 1.0, 8)
    assert np.all(np.diff(clock(t)) > 0)
    assert clock(0.0) == 0.0


def test_general_clock_errors(kou_model):
    curve = WeibullCurve(2.0, 1.0)
    with pytest.raises(OutOfRange):
        time_change_general(kou_model, 5.0, curve, McParams(2_000, 0.5, seed=2))
    with pytest.raises(InsufficientPaths):
        time_change_general(kou_model, 0.1, WeibullCurve(2.0, 0.2), McParams(100, 500.0, seed=2))


FRAILTY = {
    "states": [
        {"prob": 0.3, "names": [
            {"model": {"kind": "brownian", "eta": -1.5},
             "curve": {"kind": "exponential", "rate": 0.5, "horizon": 2.0}, "lambda": 0.5},
            {"model": {"kind": "brownian", "eta": -1.5},
             "curve": {"kind": "weibull", "shape": 2.0, "scale": 1.5, "horizon": 2.0},
             "lambda": 0.3}]},
        {"prob": 0.7, "names": [
            {"model": {"kind": "brownian", "eta": -1.5},
             "curve": {"kind": "exponential", "rate": 0.1, "horizon": 2.0}, "lambda": 0.1},
            {"model": {"kind": "brownian", "eta": -1.5},
             "curve": {"kind": "exponential", "rate": 0.2, "horizon": 2.0}, "lambda": 0.2}]},
    ]
}


def test_frailty_mixture_formula():
    sol = solve_frailty(frailty_from_dict(FRAILTY))
    t1, t2 = 0.7, 1.2
    expected = (0.3 * np.exp(-0.5 * t1) * np.exp(-((t2 / 1.5) ** 2))
                + 0.7 * np.exp(-0.1 * t1) * np.exp(-0.2 * t2))
    assert sol.joint_survival([t1, t2]) == pytest.approx(expected)
    assert sol.joint_survival(np.zeros((3, 2))).shape == (3,)


def test_frailty_simulation_determinism():
    sol = solve_frailty(frailty_from_dict(FRAILTY))
    params = McParams(20_000, 2.0, seed=4)
    a = simulate_frailty(sol, params, workers=1)
    b = simulate_frailty(sol, params, workers=2)
    assert a.shape == (20_000, 2)
    np.testing.assert_array_equal(a, b)
    s = np.mean(np.all(a > [1.0, 1.0], axis=1))
    assert s == pytest.approx(float(sol.joint_survival([1.0, 1.0])), abs=4 * np.sqrt(0.25 / 20_000))


@pytest.mark.parametrize("mutate", [
    lambda d: d["states"][0].update(prob=0.5),
    lambda d: d["states"][0]["names"].pop(),
    lambda d: d.update(extra=1),
    lambda d: d["states"][0]["names"][0].update(rate=1),
])
def test_frailty_spec_rejected(mutate):
    import copy

    d = copy.deepcopy(FRAILTY)
    mutate(d)
    with pytest.raises(ConfigError):
        frailty_from_dict(d)
