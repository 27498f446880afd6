"""Wiener-Hopf factors in closed form from the Cramer-Lundberg roots.

``psi_plus(q, theta)`` is the characteristic function of the supremum of X up
to an independent Exp(q) time and ``psi_minus`` that of the infimum. Both are
rational in theta, so they extend to ``q`` in ``[-lambda*, 0)`` by using the
roots at that level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PoleEvaluation
from .levy_model import MixedExpLevy
from .spectral import cramer_lundberg_roots, phi_bar

POLE_TOL = 1e-12


@dataclass(frozen=True)
class WhFactorValue:
    value: complex
    q: complex
    theta: complex

    def __complex__(self):
        return complex(self.value)


@dataclass(frozen=True)
class EsscherParams:
    theta_shift: float
    model: MixedExpLevy


def esscher_params(model: MixedExpLevy, lam: float) -> EsscherParams:
    r = phi_bar(model, lam)
    return EsscherParams(r, model.esscher(r))


def _ratio_product(roots: np.ndarray, s: np.ndarray) -> np.ndarray:
    """``prod rho/(rho - s)`` with a zero root contributing 0 (or 1 at s=0)."""
    out = np.ones(s.shape, dtype=complex)
    for rho in roots:
        den = rho - s
        if np.any(np.abs(den) <= POLE_TOL * max(1.0, abs(rho))):
            raise PoleEvaluation(f"factor evaluated at root {rho}")
        out = out * (rho / den)
    return out


def _laplace_plus(model: MixedExpLevy, roots: np.ndarray, s) -> np.ndarray:
    s = np.asarray(s, dtype=complex)
    out = _ratio_product(roots, -s)
    if model.m_plus:
        for al in model.up_rates:
            out = out * (1 + s / al)
    return out


def _laplace_minus(model: MixedExpLevy, roots: np.ndarray, u) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    out = _ratio_product(roots, u)
    if model.m_minus:
        for al in model.down_rates:
            out = out * (1 + u / al)
    return np.where(u == 0, 1.0 + 0j, out)


def _squeeze(x):
    return x[()] if isinstance(x, np.ndarray) and x.ndim == 0 else x


def plus_laplace(model: MixedExpLevy, q, s):
    """``Psi^+(q, i s) = E[exp(-s * sup X)]`` and its continuation in ``s`` and ``q``."""
    rs = cramer_lundberg_roots(model, q)
    return _squeeze(_laplace_plus(model, rs.plus_roots, s))


def minus_laplace(model: MixedExpLevy, q, u):
    """``Psi^-(q, -i u) = E[exp(u * inf X)]`` and its continuation."""
    rs = cramer_lundberg_roots(model, q)
    return _squeeze(_laplace_minus(model, rs.minus_roots, u))


def psi_plus(model: MixedExpLevy, q, theta):
    return plus_laplace(model, q, -1j * np.asarray(theta, dtype=complex))


def psi_minus(model: MixedExpLevy, q, theta):
    return minus_laplace(model, q, 1j * np.asarray(theta, dtype=complex))


def wh_plus(model: MixedExpLevy, q, theta) -> WhFactorValue:
    return WhFactorValue(complex(psi_plus(model, q, theta)), complex(q), complex(theta))


def wh_minus(model: MixedExpLevy, q, theta) -> WhFactorValue:
    return WhFactorValue(complex(psi_minus(model, q, theta)), complex(q), complex(theta))


def wh_product_residual(model: MixedExpLevy, q, theta) -> float:
    q = complex(q)
    theta = complex(theta)
    lhs = psi_plus(model, q, theta) * psi_minus(model, q, theta)
    rhs = q / (q - model.char_exponent(theta))
    return float(abs(lhs - rhs))


def esscher_factor_identity_residual(model: MixedExpLevy, q: float, lam: float, s) -> float:
    """Residual of the factor identity relating ``X`` at level ``q`` to the
    tilted process at level ``q + lam``, tilt ``r = phi_bar(-lam)``."""
    ep = esscher_params(model, lam)
    r, shifted = ep.theta_shift, ep.model
    qs = complex(q) + lam
    s = complex(s)
    # at qs = 0 the tilted process drifts to -inf and has no finite infimum
    factors = (psi_plus,) if qs == 0 else (psi_plus, psi_minus)
    res = [abs(fac(model, q, s) - fac(shifted, qs, s + 1j * r) / fac(shifted, qs, 1j * r))
           for fac in factors]
    return float(np.max(res))


def k_hat(model: MixedExpLevy, theta, q, u):
    """Double Laplace transform of the killed, discounted exponential moment."""
    theta = np.asarray(theta, dtype=complex)
    u = np.asarray(u, dtype=complex)
    return _squeeze(plus_laplace(model, q, theta) * minus_laplace(model, q, u) / (theta + u))


def _mu_laplace(mu, w):
    if hasattr(mu, "laplace"):
        return mu.laplace(w)
    return np.exp(-np.asarray(w, dtype=complex) * float(mu))


def passage_coefficients(model: MixedExpLevy, q, theta) -> tuple[np.ndarray, np.ndarray]:
    """Roots ``rho_j`` and weights ``C_j`` with
    ``E_x[exp(-q tau + theta X_tau)] = sum_j C_j exp(rho_j x)`` for ``x > 0``."""
    rs = cramer_lundberg_roots(model, q)
    roots = rs.minus_roots
    theta = complex(theta)
    coef = np.empty(len(roots), dtype=complex)
    denom = complex(_laplace_minus(model, roots, theta))
    down = model.down_rates if model.m_minus else np.empty(0)
    for j, rho in enumerate(roots):
        neg_res = rho * np.prod(1 + rho / down)
        others = np.delete(roots, j)
        neg_res /= np.prod(1 - rho / others)
        coef[j] = neg_res / ((rho - theta) * denom)
    return roots, coef


def pecherskii_rogozin(model: MixedExpLevy, mu, q, theta):
    """``E^mu[exp(-q tau_0 + theta (X_tau - X_0))]`` for initial law ``mu``.

    ``mu`` is anything with a ``laplace(w)`` method (``E exp(-w X_0)``) or a
    float starting point.
    """
    roots, coef = passage_coefficients(model, q, theta)
    return complex(np.sum(coef * _mu_laplace(mu, complex(theta) - roots)))


def passage_transform(model: MixedExpLevy, mu, q, w):
    """Same quantity as ``pecherskii_rogozin``, vectorised over ``w``."""
    roots = cramer_lundberg_roots(model, q).minus_roots
    w = np.asarray(w, dtype=complex)
    down = model.down_rates if model.m_minus else np.empty(0)
    denom = _laplace_minus(model, roots, w)
    total = np.zeros(w.shape, dtype=complex)
    for j, rho in enumerate(roots):
        neg_res = rho * np.prod(1 + rho / down) / np.prod(1 - rho / np.delete(roots, j))
        total = total + neg_res * _mu_laplace(mu, w - rho) / (rho - w)
    return _squeeze(total / denom)
