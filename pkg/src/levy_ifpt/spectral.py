"""Spectral quantities of a mixed-exponential exponent.

``theta_star`` minimises psi on the positive half-line and ``lambda_star`` is
minus the minimum. ``phi_bar(model, lam)`` inverts psi on ``(0, theta_star]``.
``cramer_lundberg_roots`` returns every solution of ``psi(rho) = q`` after
clearing the rational denominators, split into a "plus" and a "minus" group
by real part.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import brentq

from .errors import DegenerateModel, NotNegativeDrift, OutOfRange, RepeatedRoots
from .levy_model import MixedExpLevy

THETA_TOL = 1e-12
DISTINCT_RTOL = 1e-7
LAMBDA_STAR_RTOL = 1e-12
NEWTON_STEPS = 20


@dataclass(frozen=True)
class SpectralData:
    theta_star: float
    lambda_star: float
    model: MixedExpLevy


@lru_cache(maxsize=256)
def compute_spectral(model: MixedExpLevy) -> SpectralData:
    if model.dpsi(0.0) >= 0:
        raise NotNegativeDrift(f"psi'(0) = {model.dpsi(0.0):.6g} is not negative")
    _, hi = model.domain()
    if np.isfinite(hi):
        hi = hi - THETA_TOL * max(1.0, hi)
        if model.dpsi(hi) < 0:
            theta = hi
            return SpectralData(theta, -float(model.psi(theta)), model)
    else:
        hi = 1.0
        while model.dpsi(hi) < 0:
            hi *= 2.0
            if hi > 1e12:
                raise DegenerateModel("psi is unbounded below on the positive half-line")
    lo = 0.0
    while hi - lo > THETA_TOL:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if model.dpsi(mid) < 0:
            lo = mid
        else:
            hi = mid
    theta = 0.5 * (lo + hi)
    for _ in range(3):
        # Newton on psi' to reach machine precision inside the final bracket
        cand = theta - model.dpsi(theta) / model.d2psi(theta)
        if not lo - THETA_TOL <= cand <= hi + THETA_TOL:
            break
        theta = float(cand)
    lam = -float(model.psi(theta))
    if not lam > 0:
        raise DegenerateModel("minimum of psi is not negative")
    return SpectralData(theta, lam, model)


def theta_star(model: MixedExpLevy) -> float:
    return compute_spectral(model).theta_star


def lambda_star(model: MixedExpLevy) -> float:
    return compute_spectral(model).lambda_star


def is_lambda_star(model: MixedExpLevy, lam: float) -> bool:
    ls = lambda_star(model)
    return abs(lam - ls) <= LAMBDA_STAR_RTOL * ls


@lru_cache(maxsize=4096)
def phi_bar(model: MixedExpLevy, lam: float) -> float:
    """Root of ``psi(theta) = -lam`` in ``(0, theta_star]``."""
    sd = compute_spectral(model)
    lam = float(lam)
    if is_lambda_star(model, lam):
        return sd.theta_star
    if not 0.0 < lam < sd.lambda_star:
        raise OutOfRange(f"lambda = {lam!r} outside (0, lambda* = {sd.lambda_star!r}]")
    return brentq(
        lambda th: model.psi(th) + lam, 0.0, sd.theta_star, xtol=1e-15, rtol=1e-15, maxiter=500
    )


# -- Cramer-Lundberg roots ----------------------------------------------------


@dataclass(frozen=True)
class RootSet:
    q: complex
    plus_roots: np.ndarray
    minus_roots: np.ndarray
    phi_bar: float | None = None

    @property
    def all_roots(self) -> np.ndarray:
        return np.concatenate([self.minus_roots, self.plus_roots])

    def to_dict(self) -> dict:
        def enc(z):
            return [[float(r.real), float(r.imag)] for r in z]

        out = {
            "q": [float(np.real(self.q)), float(np.imag(self.q))],
            "plus_roots": enc(self.plus_roots),
            "minus_roots": enc(self.minus_roots),
        }
        if self.phi_bar is not None:
            out["phi_bar"] = float(self.phi_bar)
        return out


def root_counts(model: MixedExpLevy) -> tuple[int, int]:
    """Number of plus and minus roots for ``q > 0``."""
    s = model.sigma > 0
    n_plus = model.m_plus + (1 if (s or model.eta > 0) else 0)
    n_minus = model.m_minus + (1 if (s or model.eta < 0) else 0)
    return n_plus, n_minus


def cl_polynomial(model: MixedExpLevy, q: complex) -> np.ndarray:
    """Ascending coefficients of ``N(rho) (psi(rho) - q)`` with ``N`` clearing poles."""
    ups = model.up_rates if model.m_plus else np.empty(0)
    downs = model.down_rates if model.m_minus else np.empty(0)
    up_fac = [np.array([al, -1.0]) for al in ups]
    down_fac = [np.array([al, 1.0]) for al in downs]

    def prod(factors):
        out = np.array([1.0])
        for f in factors:
            out = P.polymul(out, f)
        return out

    N = prod(up_fac + down_fac)
    poly = P.polymul(N, [-q, model.eta, 0.5 * model.sigma**2])
    for k in range(len(ups)):
        rest = prod(up_fac[:k] + up_fac[k + 1 :] + down_fac)
        poly = P.polyadd(poly, model.ell * model.p * model.up_weights[k] * P.polymul(rest, [0.0, 1.0]))
    for k in range(len(downs)):
        rest = prod(up_fac + down_fac[:k] + down_fac[k + 1 :])
        poly = P.polyadd(
            poly, -model.ell * (1 - model.p) * model.down_weights[k] * P.polymul(rest, [0.0, 1.0])
        )
    return np.asarray(poly, dtype=complex)


def _polish(model: MixedExpLevy, q: complex, roots: np.ndarray) -> np.ndarray:
    out = roots.astype(complex).copy()
    for i, r in enumerate(out):
        f = model.psi(r) - q
        for _ in range(NEWTON_STEPS):
            d = model.dpsi(r)
            if d == 0:
                break
            step = f / d
            cand = r - step
            fc = model.psi(cand) - q
            if not abs(fc) < abs(f) and abs(f) > 0:
                break
            r, f = cand, fc
            if abs(step) <= 1e-16 * (1 + abs(r)):
                break
        out[i] = r
    return out


def _check_distinct(roots: np.ndarray, skip: set[tuple[int, int]] = frozenset()) -> None:
    n = len(roots)
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) in skip:
                continue
            scale = max(abs(roots[i]), abs(roots[j]), 1e-8)
            if abs(roots[i] - roots[j]) < DISTINCT_RTOL * scale:
                raise RepeatedRoots(
                    f"roots {roots[i]:.12g} and {roots[j]:.12g} are not distinct"
                )


@lru_cache(maxsize=8192)
def _roots_cached(model: MixedExpLevy, q: complex) -> RootSet:
    n_plus, n_minus = root_counts(model)
    deg = n_plus + n_minus
    poly = cl_polynomial(model, q)
    scale = np.max(np.abs(poly))
    if len(poly) < deg + 1 or abs(poly[deg]) <= 1e-14 * scale:
        raise DegenerateModel("clearing denominators lost degree")
    poly = poly[: deg + 1]
    raw = P.polyroots(poly) if deg > 0 else np.empty(0, dtype=complex)
    roots = _polish(model, q, raw)

    real_q = q.imag == 0
    if real_q:
        tiny = np.abs(roots.imag) <= 1e-10 * (1 + np.abs(roots))
        roots[tiny] = roots[tiny].real

    skip: set[tuple[int, int]] = set()
    phi = None
    order = np.argsort(roots.real, kind="stable")
    roots = roots[order]
    if real_q and q.real == 0:
        k = int(np.argmin(np.abs(roots)))
        roots[k] = 0.0
    if real_q and q.real < 0:
        lam = -q.real
        phi = phi_bar(model, lam)
        if is_lambda_star(model, lam):
            # double root at theta_star: pin both copies, one per group
            ts = theta_star(model)
            near = np.argsort(np.abs(roots - ts), kind="stable")[:2]
            roots[near] = ts
            roots = roots[np.argsort(roots.real, kind="stable")]
            i, j = np.flatnonzero(roots == ts)[:2]
            skip.add((int(i), int(j)))
    _check_distinct(roots, skip)

    minus, plus = roots[:n_minus], roots[n_minus:]
    if q.real > 0:
        # roots within roundoff of the imaginary axis occur only for q near 0
        tol = 1e-12 * (1 + np.abs(roots))
        if np.any(minus.real > tol[:n_minus]) or np.any(plus.real < -tol[n_minus:]):
            raise DegenerateModel("root classification failed the sign check")
    if phi is not None and n_minus > 0:
        if abs(minus[-1] - phi) > 1e-8 * (1 + phi):
            raise DegenerateModel("phi_bar is not the largest minus root")
    minus.setflags(write=False)
    plus.setflags(write=False)
    return RootSet(q, plus, minus, phi)


def cramer_lundberg_roots(model: MixedExpLevy, q) -> RootSet:
    q = complex(q)
    if q.real < 0 and q.real < -lambda_star(model) * (1 + LAMBDA_STAR_RTOL):
        raise OutOfRange(f"Re(q) = {q.real!r} below -lambda*")
    if q.imag < 0:
        rs = _roots_cached(model, q.conjugate())
        plus = np.conj(rs.plus_roots)
        minus = np.conj(rs.minus_roots)
        plus.setflags(write=False)
        minus.setflags(write=False)
        return RootSet(q, plus, minus, rs.phi_bar)
    return _roots_cached(model, q)
