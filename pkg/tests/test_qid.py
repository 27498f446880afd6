import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import admissible_models
from levy_ifpt.errors import DegenerateModel, RepeatedRoots
from levy_ifpt.levy_model import BrownianDriftLevy, MixedExpLevy
from levy_ifpt.mc_engine import ks_distance
from levy_ifpt.qid import (
    build_qid,
    invariance_residual_bromwich,
    invariance_residual_residue,
    mu_hat,
    qid_cdf,
    qid_sample,
)
from levy_ifpt.spectral import lambda_star


def brownian_pair(eta, lam):
    disc = np.sqrt(eta**2 - 2 * lam)
    return -eta - disc, -eta + disc


@pytest.mark.parametrize("eta", [-0.5, -1.0, -2.0])
@pytest.mark.parametrize("frac", [0.25, 0.5, 0.75])
def test_brownian_two_exponential_law(eta, frac):
    m = BrownianDriftLevy(eta)
    lam = frac * eta**2 / 2
    a, b = brownian_pair(eta, lam)
    dist = build_qid(m, lam)
    x = np.linspace(0, 10, 41)
    dens = a * b / (b - a) * (np.exp(-a * x) - np.exp(-b * x))
    np.testing.assert_allclose(dist.density(x), dens, atol=1e-12)
    cdf = 1 - (b * np.exp(-a * x) - a * np.exp(-b * x)) / (b - a)
    np.testing.assert_allclose(dist.cdf(x), cdf, atol=1e-12)
    assert dist.mean() == pytest.approx(1 / a + 1 / b, rel=1e-12)
    w = np.array([0.3, 2.0 + 1.0j])
    np.testing.assert_allclose(dist.laplace(w), a * b / ((a + w) * (b + w)), rtol=1e-12)


def test_lambda_star_rejected(kou_model):
    with pytest.raises(RepeatedRoots):
        build_qid(kou_model, lambda_star(kou_model))


def test_atom_at_zero_rejected():
    # no Gaussian part and negative drift: the law would need an atom at 0
    m = MixedExpLevy(0.0, -0.3, 1.0, 0.3, ((1.0, 4.0),), ((1.0, 2.0),))
    with pytest.raises(DegenerateModel):
        build_qid(m, 0.5 * lambda_star(m))


def test_zero_sigma_positive_drift_builds():
    m = MixedExpLevy(0.0, 0.2, 1.0, 0.2, ((1.0, 4.0),), ((1.0, 1.5),))
    dist = build_qid(m, 0.5 * lambda_star(m))
    assert dist.mass() == pytest.approx(1.0)
    assert dist.min_density() >= -1e-12


def test_ppf_and_sampling(kou_model):
    dist = build_qid(kou_model, 0.5 * lambda_star(kou_model))
    u = np.array([1e-6, 0.1, 0.5, 0.9, 0.999])
    np.testing.assert_allclose(qid_cdf(dist, dist.ppf(u)), u, atol=1e-10)
    rng = np.random.default_rng(5)
    x = dist.sample(rng, 50_000)
    assert ks_distance(x, dist.cdf) < 1.63 / np.sqrt(x.size)  # 1% level
    assert qid_sample(dist, rng) >= 0


def test_to_dict(kou_model):
    d = build_qid(kou_model, 0.4).to_dict()
    assert set(d) == {"rates", "weights", "lambda", "lambda_star"}
    assert d["lambda"] == 0.4
    assert len(d["rates"]) == 3


def test_signed_weight_model(mixed_model):
    dist = build_qid(mixed_model, 0.5 * lambda_star(mixed_model))
    assert np.any(dist.rates.imag != 0)  # complex pair from the signed up-density
    assert dist.mass() == pytest.approx(1.0, abs=1e-12)
    assert dist.min_density() > -1e-12
    assert invariance_residual_residue(mixed_model, dist.lam, 0.7, 1.1) < 1e-9


@given(admissible_models(), st.floats(0.05, 0.95))
def test_density_is_a_probability_law(model, frac):
    dist = build_qid(model, frac * lambda_star(model))
    assert dist.mass() == pytest.approx(1.0, abs=1e-10)
    assert dist.min_density() >= -1e-12
    assert dist.density(0.0) == pytest.approx(0.0, abs=1e-9)
    assert dist.cdf(dist.x_max()) == pytest.approx(1.0, abs=1e-10)


@given(admissible_models(), st.floats(0.05, 0.95), st.floats(0.0, 20.0))
def test_transform_methods_agree(model, frac, theta):
    lam = frac * lambda_star(model)
    ref = mu_hat(model, lam, theta)
    assert mu_hat(model, lam, theta, "wh") == pytest.approx(ref, rel=1e-10)
    assert mu_hat(model, lam, theta, "esscher") == pytest.approx(ref, rel=1e-10)
    assert build_qid(model, lam).laplace(theta) == pytest.approx(ref, rel=1e-10)


@given(admissible_models(), st.floats(0.1, 0.9), st.floats(0.1, 5.0), st.floats(0.0, 5.0))
def test_residue_identity(model, frac, q, theta):
    assert invariance_residual_residue(model, frac * lambda_star(model), q, theta) < 1e-9


def test_bromwich_identity(kou_model):
    lam = 0.5 * lambda_star(kou_model)
    assert invariance_residual_bromwich(kou_model, lam, 1.0, 0.5) < 1e-7


def test_unknown_method(kou_model):
    with pytest.raises(ValueError):
        mu_hat(kou_model, 0.3, 1.0, "fourier")
