import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from levy_ifpt.levy_model import BrownianDriftLevy, MixedExpLevy, kou

settings.register_profile(
    "default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# acceptance lines collected by test_acceptance and echoed in the summary
ACCEPTANCE: dict[str, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0])):
            terminalreporter.write_line(ACCEPTANCE[key])


@pytest.fixture
def brownian():
    return BrownianDriftLevy(-1.0)


@pytest.fixture
def kou_model():
    return kou(0.2, -0.3, 1.0, 0.4, 10.0, 5.0)


@pytest.fixture
def mixed_model():
    # two up terms, one with a negative weight (Bartholomew-admissible)
    return MixedExpLevy(0.3, -0.2, 2.0, 0.45, ((1.4, 8.0), (-0.4, 16.0)), ((0.7, 4.0), (0.3, 12.0)))


def random_model(rng: np.random.Generator) -> MixedExpLevy:
    """Admissible mixed-exponential model with positive weights."""
    def side():
        m = int(rng.integers(1, 3))
        rates = np.sort(rng.uniform(3.0, 30.0, m))
        while m > 1 and np.min(np.diff(rates)) < 1.0:
            rates = np.sort(rng.uniform(3.0, 30.0, m))
        w = rng.dirichlet(np.ones(m))
        return tuple(zip(w, rates))

    up, down = side(), side()
    sigma = rng.uniform(0.1, 0.5)
    ell = rng.uniform(0.2, 3.0)
    p = rng.uniform(0.1, 0.9)
    jump_mean = ell * (p * sum(a / r for a, r in up) - (1 - p) * sum(a / r for a, r in down))
    eta = -rng.uniform(0.05, 0.8) - jump_mean
    return MixedExpLevy(sigma, eta, ell, p, up, down)


@st.composite
def admissible_models(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_model(np.random.default_rng(seed))


def cva_spec(rho: float, **overrides):
    """Call on a Kou stock sold by a counterparty with 40% default probability."""
    from levy_ifpt.cva import CvaSpec
    from levy_ifpt.survival import WeibullCurve

    X = MixedExpLevy(0.25, -0.3, 1.0, 0.5, ((1.0, 20.0),), ((1.0, 20.0),))
    Z = kou(0.2, 0.0, 0.5, 0.4, 10.0, 8.0)
    curve = WeibullCurve(1.5, (-np.log(0.6)) ** (-1 / 1.5), 1.0)
    args = dict(S0=100.0, K=90.0, T=1.0, r=0.03, d=0.01, rho=rho, X=X, Z=Z, curve=curve)
    args.update(overrides)
    return CvaSpec(**args)


def gil_pelaez_call(spec):
    """Call price from the characteristic function of log S_T."""
    T, sT = spec.T, float(spec.clock(spec.T))
    drift = np.log(spec.S0) + (spec.r - spec.d) * T - spec.Z.psi(1.0) * T - spec.X.psi(spec.rho) * sT

    def cf(v):
        return np.exp(1j * v * drift + spec.Z.psi(1j * v) * T + spec.X.psi(1j * spec.rho * v) * sT)

    k = np.log(spec.K)
    fwd = cf(-1j)
    p1 = 0.5 + quad(lambda v: (np.exp(-1j * v * k) * cf(v - 1j) / (1j * v * fwd)).real,
                    0, 300, limit=800, epsabs=1e-13)[0] / np.pi
    p2 = 0.5 + quad(lambda v: (np.exp(-1j * v * k) * cf(v) / (1j * v)).real,
                    0, 300, limit=800, epsabs=1e-13)[0] / np.pi
    return np.exp(-spec.r * T) * (fwd.real * p1 - spec.K * p2)
