"""Quasi-invariant initial laws.

Starting X from ``mu_lam`` makes the first passage below zero exactly
Exp(lam), and keeps the law of ``X_t`` on survival equal to ``mu_lam``. For a
mixed-exponential model the Laplace transform of ``mu_lam`` is rational:

    mu_hat(theta) = prod_p p / (p + theta) * prod_k (1 + theta / alpha_k^+)

with ``p`` running over ``phi_bar(-lam)`` and the plus roots of
``psi = -lam``. Partial fractions give a finite exponential mixture.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateModel, QuadratureFailure, RepeatedRoots
from .levy_model import MixedExpLevy
from .spectral import (
    cramer_lundberg_roots,
    is_lambda_star,
    lambda_star,
    phi_bar,
    root_counts,
)
from .wiener_hopf import esscher_params, minus_laplace, plus_laplace

TAIL_MASS = 1e-13
SAMPLE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class QuasiInvariantDist:
    """Exponential mixture ``m(x) = Re sum_p w_p p exp(-p x)`` on ``x >= 0``.

    Rates and weights are complex arrays; conjugate pairs produce damped
    cosine terms and everything is reported through real parts.
    """

    lam: float
    rates: np.ndarray
    weights: np.ndarray
    model: MixedExpLevy | None = None
    lambda_star: float | None = None

    def laplace(self, w):
        w = np.asarray(w, dtype=complex)
        p = self.rates
        val = np.sum(self.weights * p / (p + w[..., None]), axis=-1)
        return val[()] if val.ndim == 0 else val

    def density(self, x):
        x = np.asarray(x, dtype=float)
        p = self.rates
        val = np.sum(self.weights * p * np.exp(-p * x[..., None]), axis=-1).real
        return val[()] if val.ndim == 0 else val

    def tail(self, x):
        x = np.asarray(x, dtype=float)
        val = np.sum(self.weights * np.exp(-self.rates * x[..., None]), axis=-1).real
        val = np.where(x < 0, 1.0, val)
        return val[()] if val.ndim == 0 else val

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        val = np.sum(self.weights * (1 - np.exp(-self.rates * x[..., None])), axis=-1).real
        val = np.clip(np.where(x < 0, 0.0, val), 0.0, 1.0)
        return val[()] if val.ndim == 0 else val

    def mean(self) -> float:
        return float(np.sum(self.weights / self.rates).real)

    def mass(self) -> float:
        return float(np.sum(self.weights).real)

    def x_max(self, tail_mass: float = TAIL_MASS) -> float:
        x = 1.0 / float(np.min(self.rates.real))
        while abs(self.tail(x)) >= tail_mass:
            x *= 2.0
        return x

    def ppf(self, u):
        """Inverse CDF by vectorised bisection."""
        u = np.asarray(u, dtype=float)
        lo = np.zeros_like(u)
        hi = np.full_like(u, self.x_max())
        while True:
            mid = 0.5 * (lo + hi)
            below = self.cdf(mid) < u
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo <= SAMPLE_TOL * np.maximum(1.0, hi)):
                break
        return 0.5 * (lo + hi)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.ppf(rng.random(n))

    def grid(self, n: int = 2048) -> np.ndarray:
        return np.geomspace(1e-4, self.x_max(1e-10), n)

    def min_density(self) -> float:
        return float(np.min(self.density(self.grid())))

    def to_dict(self) -> dict:
        def enc(z):
            return [float(v.real) if v.imag == 0 else [float(v.real), float(v.imag)] for v in z]

        return {
            "rates": enc(self.rates),
            "weights": enc(self.weights),
            "lambda": float(self.lam),
            "lambda_star": None if self.lambda_star is None else float(self.lambda_star),
        }


def qid_poles(model: MixedExpLevy, lam: float) -> np.ndarray:
    """``phi_bar(-lam)`` followed by the plus roots at level ``-lam``."""
    rs = cramer_lundberg_roots(model, -float(lam))
    return np.concatenate([[complex(rs.phi_bar)], rs.plus_roots])


def mu_hat(model: MixedExpLevy, lam: float, theta, method: str = "product"):
    """Laplace transform ``E exp(-theta X_0)`` of the quasi-invariant law.

    ``method="product"`` multiplies out the root factors directly,
    ``method="esscher"`` goes through the plus factor of the process tilted by
    ``phi_bar(-lam)`` at level zero.
    """
    theta = np.asarray(theta, dtype=complex)
    phi = phi_bar(model, lam)
    if method == "product":
        out = np.ones(theta.shape, dtype=complex)
        for p in qid_poles(model, lam):
            out = out * p / (p + theta)
        if model.m_plus:
            for al in model.up_rates:
                out = out * (1 + theta / al)
    elif method == "wh":
        out = phi / (phi + theta) * plus_laplace(model, -float(lam), theta)
    elif method == "esscher":
        ep = esscher_params(model, lam)
        r, shifted = ep.theta_shift, ep.model
        out = (
            phi
            / (phi + theta)
            * plus_laplace(shifted, 0.0, theta + r)
            / plus_laplace(shifted, 0.0, r)
        )
    else:
        raise ValueError(f"unknown method {method!r}")
    return out[()] if out.ndim == 0 else out


def _partial_fraction_weights(model: MixedExpLevy, poles: np.ndarray) -> np.ndarray:
    w = np.empty(len(poles), dtype=complex)
    up = model.up_rates if model.m_plus else np.empty(0)
    for i, p in enumerate(poles):
        others = np.delete(poles, i)
        w[i] = np.prod(others / (others - p)) * np.prod(1 - p / up)
    return w


def build_qid(model: MixedExpLevy, lam: float) -> QuasiInvariantDist:
    lam = float(lam)
    if is_lambda_star(model, lam):
        raise RepeatedRoots("lambda = lambda* gives a confluent (gamma-type) law")
    n_plus, _ = root_counts(model)
    if n_plus != model.m_plus + 1:
        raise DegenerateModel("quasi-invariant law has an atom at zero for this model")
    poles = qid_poles(model, lam)
    real = np.abs(poles.imag) == 0
    poles = np.where(real, poles.real + 0j, poles)
    weights = _partial_fraction_weights(model, poles)
    poles.setflags(write=False)
    weights.setflags(write=False)
    dist = QuasiInvariantDist(lam, poles, weights, model, lambda_star(model))
    if dist.min_density() < -1e-12:
        raise DegenerateModel("partial-fraction density is negative on the grid")
    return dist


def qid_cdf(dist: QuasiInvariantDist, x):
    return dist.cdf(x)


def qid_sample(dist: QuasiInvariantDist, rng: np.random.Generator) -> float:
    return float(dist.ppf(rng.random()))


# -- invariance checks --------------------------------------------------------


def residue_coefficients(model: MixedExpLevy, lam: float, q) -> tuple[np.ndarray, np.ndarray]:
    """Poles ``p`` and coefficients ``A(p)`` of the right-half-plane residues.

    Built term by term from the minus factor at level ``q`` and the root
    products, without reusing the partial-fraction weights of ``build_qid``.
    """
    phi = phi_bar(model, lam)
    plus = cramer_lundberg_roots(model, -float(lam)).plus_roots
    up = model.up_rates if model.m_plus else np.empty(0)
    poles = np.concatenate([[complex(phi)], plus])
    coef = np.empty(len(poles), dtype=complex)
    for i, p in enumerate(poles):
        a = minus_laplace(model, q, p) * np.prod(1 - p / up)
        if i == 0:
            a /= np.prod(1 - p / plus)
        else:
            a *= phi / (phi - p)
            a /= np.prod(1 - p / np.delete(plus, i - 1))
        coef[i] = a
    return poles, coef


def invariance_residual_residue(model: MixedExpLevy, lam: float, q: float, theta: float) -> float:
    poles, coef = residue_coefficients(model, lam, q)
    lhs = plus_laplace(model, q, theta) * np.sum(coef * poles / (poles + theta))
    rhs = q / (q + lam) * mu_hat(model, lam, theta)
    return float(abs(lhs - rhs))


def bromwich_integral(f, a: float, h: float, tol: float = 1e-10, u_max: float = 1e7) -> float:
    """``(1/2 pi i) * integral of f over Re(u) = a`` for ``f(conj u) = conj f(u)``.

    Trapezoid rule on ``(1/pi) int_0^inf Re f(a + i y) dy``; the cut-off is
    doubled until the tail, estimated from the ``y^-4`` decay of ``Re f``,
    falls below ``tol``.
    """
    upper = 1.0
    y = np.arange(0.0, upper + h / 2, h)
    vals = f(a + 1j * y).real
    total = h * (vals.sum() - 0.5 * vals[0])
    upper, last = y[-1], vals[-1]
    while abs(last) * upper / 3.0 >= tol:
        if upper > u_max:
            raise QuadratureFailure("Bromwich tail did not decay")
        y = np.arange(upper + h, 2 * upper + h / 2, h)
        vals = f(a + 1j * y).real
        total += h * vals.sum()
        upper = y[-1]
        last = vals[-1]
    total -= 0.5 * h * last
    return total / np.pi


def invariance_residual_bromwich(model: MixedExpLevy, lam: float, q: float, theta: float) -> float:
    phi = phi_bar(model, lam)
    dist_hat = lambda u: mu_hat(model, lam, u)  # noqa: E731

    def integrand(u):
        return minus_laplace(model, q, u) * dist_hat(-u) / (theta + u)

    h = 0.01 / (1 + abs(theta))
    integral = bromwich_integral(integrand, 0.5 * phi, h)
    lhs = plus_laplace(model, q, theta) * integral
    rhs = q / (q + lam) * mu_hat(model, lam, theta)
    return float(abs(lhs - rhs))
