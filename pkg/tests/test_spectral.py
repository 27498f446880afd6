import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import admissible_models
from levy_ifpt.errors import OutOfRange
from levy_ifpt.levy_model import BrownianDriftLevy, MixedExpLevy
from levy_ifpt.spectral import (
    cramer_lundberg_roots,
    is_lambda_star,
    lambda_star,
    phi_bar,
    root_counts,
    theta_star,
)


@pytest.mark.parametrize("eta", [-0.5, -1.0, -2.0])
def test_brownian_closed_forms(eta):
    m = BrownianDriftLevy(eta)
    assert theta_star(m) == pytest.approx(-eta, abs=1e-12)
    assert lambda_star(m) == pytest.approx(eta**2 / 2, rel=1e-12)
    for frac in (0.25, 0.5, 0.75):
        lam = frac * eta**2 / 2
        assert phi_bar(m, lam) == pytest.approx(-eta - np.sqrt(eta**2 - 2 * lam), rel=1e-12)


def test_brownian_roots_at_positive_q(brownian):
    rs = cramer_lundberg_roots(brownian, 1.5)
    np.testing.assert_allclose(rs.plus_roots, [3.0], rtol=1e-13)
    np.testing.assert_allclose(rs.minus_roots, [-1.0], rtol=1e-13)


def test_kou_root_counts_and_signs(kou_model):
    assert root_counts(kou_model) == (2, 2)
    rs = cramer_lundberg_roots(kou_model, 0.7)
    assert np.all(rs.plus_roots.real > 0) and np.all(rs.minus_roots.real < 0)
    # interlacing with the jump rates: 0 < rho_1 < 10 < rho_2, rho_2' < -5 < rho_1' < 0
    assert 0 < rs.plus_roots[0].real < 10 < rs.plus_roots[1].real
    assert rs.minus_roots[0].real < -5 < rs.minus_roots[1].real < 0


def test_zero_level_pins_a_root(kou_model):
    rs = cramer_lundberg_roots(kou_model, 0.0)
    assert 0.0 in rs.all_roots


def test_lambda_star_double_root(kou_model):
    ls = lambda_star(kou_model)
    rs = cramer_lundberg_roots(kou_model, -ls)
    ts = theta_star(kou_model)
    assert rs.minus_roots[-1] == ts and rs.plus_roots[0] == ts
    assert is_lambda_star(kou_model, ls * (1 + 1e-14))
    with pytest.raises(OutOfRange):
        cramer_lundberg_roots(kou_model, -1.01 * ls)


def test_phi_bar_outside_range(kou_model):
    with pytest.raises(OutOfRange):
        phi_bar(kou_model, 1.5 * lambda_star(kou_model))


def test_conjugate_levels(kou_model):
    a = cramer_lundberg_roots(kou_model, 0.5 + 2j)
    b = cramer_lundberg_roots(kou_model, 0.5 - 2j)
    np.testing.assert_allclose(b.plus_roots, np.conj(a.plus_roots))
    np.testing.assert_allclose(b.minus_roots, np.conj(a.minus_roots))


def test_zero_sigma_negative_drift_counts():
    m = MixedExpLevy(0.0, -0.3, 1.0, 0.3, ((1.0, 4.0),), ((1.0, 2.0),))
    # negative drift creeps down, so the minus side gains the extra root
    assert root_counts(m) == (1, 2)
    rs = cramer_lundberg_roots(m, 0.8)
    np.testing.assert_allclose(m.psi(rs.all_roots), 0.8, atol=1e-12)


def test_to_dict(brownian):
    d = cramer_lundberg_roots(brownian, -0.25).to_dict()
    assert d["plus_roots"][0] == pytest.approx([1 + np.sqrt(0.5), 0.0])
    assert d["phi_bar"] == pytest.approx(1 - np.sqrt(0.5))


@given(admissible_models(), st.floats(-0.99, 3.0), st.floats(-2.0, 2.0))
def test_roots_solve_equation(model, qr, qi):
    q = complex(qr * (lambda_star(model) if qr < 0 else 1.0), qi if qr > 0 else 0.0)
    rs = cramer_lundberg_roots(model, q)
    n_plus, n_minus = root_counts(model)
    assert len(rs.plus_roots) == n_plus and len(rs.minus_roots) == n_minus
    scale = 1 + abs(q) + np.abs(rs.all_roots) ** 2
    assert np.all(np.abs(model.psi(rs.all_roots) - q) <= 1e-9 * scale)


@given(admissible_models(), st.floats(0.01, 0.99))
def test_phi_bar_inverts_psi(model, frac):
    lam = frac * lambda_star(model)
    r = phi_bar(model, lam)
    assert 0 < r < theta_star(model)
    assert model.psi(r) == pytest.approx(-lam, rel=1e-10, abs=1e-14)
    assert model.dpsi(r) < 0


@given(admissible_models())
def test_theta_star_is_minimum(model):
    ts = theta_star(model)
    assert model.dpsi(ts) == pytest.approx(0.0, abs=1e-9)
    assert lambda_star(model) == pytest.approx(-model.psi(ts))
    assert lambda_star(model) > 0
