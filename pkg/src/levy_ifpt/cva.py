"""Credit value adjustment of a call sold by a defaultable counterparty.

The counterparty's distance to default is ``Y_t = Y_0 + X(I(t))`` with
``Y_0`` drawn from the quasi-invariant law of X at rate
``lam0 = -log Hbar(T) / T``, so default times follow the curve ``Hbar``. The
stock is

    S_t = S_0 exp((r - d) t + rho X(I(t)) + Z_t - kappa_t)

with Z independent of X and ``kappa_t`` the martingale compensator.

The expected exposure at default ``P_t = E[V_tau | tau = t]`` is a damped
Fourier integral in log-strike. Its only non-standard ingredient is the
conditional moment ``E[exp(w X(I(tau))) | tau = t]``, obtained by Euler
Laplace inversion of the first-passage transform at clock time ``I(t)``.
The CVA is ``Pi = int_0^T P_t h(t) dt``.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InversionFailure, MomentCondition
from .inversion import euler_invert
from .levy_model import MixedExpLevy, model_from_dict
from .mc_engine import McParams, sample_levy_increment, simulate_first_passage, worker_count
from .qid import QuasiInvariantDist, build_qid
from .spectral import lambda_star, phi_bar
from .survival import SurvivalCurve, curve_from_dict
from .wiener_hopf import passage_transform

TAIL_RATIO = 1e-8
NEG_CLIP = 1e-8
PI_RTOL = 1e-6


@dataclass(frozen=True)
class CvaNumerics:
    alpha: float = 0.75
    xi_max: float = 200.0
    xi_points: int = 4096
    laplace_terms: int = 51


@dataclass(frozen=True, eq=False)
class CvaSpec:
    S0: float
    K: float
    T: float
    r: float
    d: float
    rho: float
    X: MixedExpLevy
    Z: MixedExpLevy
    curve: SurvivalCurve
    numerics: CvaNumerics = field(default_factory=CvaNumerics)

    @property
    def lam0(self) -> float:
        return float(self.curve.cum_hazard(self.T)) / self.T

    def clock(self, t):
        """``I(t) = -log Hbar(t) / lam0``, so ``I(T) = T``."""
        return np.asarray(self.curve.cum_hazard(t), dtype=float) / self.lam0

    def to_dict(self) -> dict:
        return {
            "S0": self.S0, "K": self.K, "T": self.T, "r": self.r, "d": self.d,
            "rho": self.rho, "X": self.X.to_dict(), "Z": self.Z.to_dict(),
            "curve": self.curve.to_dict(),
            "numerics": {
                "alpha": self.numerics.alpha,
                "xi_max": self.numerics.xi_max,
                "xi_points": self.numerics.xi_points,
                "laplace_terms": self.numerics.laplace_terms,
            },
        }


_SPEC_KEYS = {"S0", "K", "T", "r", "d", "rho", "X", "Z", "curve", "numerics"}


def spec_from_dict(d: dict) -> CvaSpec:
    extra = set(d) - _SPEC_KEYS
    if extra:
        raise ConfigError(f"unknown keys in cva spec: {sorted(extra)}")
    missing = _SPEC_KEYS - {"numerics"} - set(d)
    if missing:
        raise ConfigError(f"missing keys in cva spec: {sorted(missing)}")
    num = d.get("numerics", {})
    bad = set(num) - {"alpha", "xi_max", "xi_points", "laplace_terms"}
    if bad:
        raise ConfigError(f"unknown keys in cva numerics: {sorted(bad)}")
    curve = curve_from_dict(d["curve"])
    return CvaSpec(
        float(d["S0"]), float(d["K"]), float(d["T"]), float(d["r"]), float(d["d"]),
        float(d["rho"]), model_from_dict(d["X"]), model_from_dict(d["Z"]), curve,
        CvaNumerics(
            float(num.get("alpha", 0.75)),
            float(num.get("xi_max", 200.0)),
            int(num.get("xi_points", 4096)),
            int(num.get("laplace_terms", 51)),
        ),
    )


def load_spec(path) -> CvaSpec:
    with open(path) as fh:
        return spec_from_dict(json.load(fh))


def check_spec(spec: CvaSpec) -> None:
    """Raise if the moment bounds or the rate bound fail."""
    a = spec.numerics.alpha
    if not (spec.S0 > 0 and spec.K > 0 and spec.T > 0 and a > 0):
        raise ConfigError("S0, K, T and alpha must be positive")
    if not -1.0 <= spec.rho <= 1.0:
        raise ConfigError("rho must lie in [-1, 1]")
    if not float(spec.curve.survival(spec.T)) > 0:
        raise ConfigError("survival at maturity must be positive")
    if spec.numerics.laplace_terms < 3 or spec.numerics.laplace_terms % 2 == 0:
        raise ConfigError("laplace_terms must be odd and at least 3")
    ls = lambda_star(spec.X)
    if not spec.lam0 < ls:
        raise MomentCondition(f"lam0 = {spec.lam0:.6g} must stay below lambda* = {ls:.6g}")
    lo, hi = spec.X.domain()
    w = spec.rho * (1 + a)
    if not (lo < min(w, spec.rho) and max(w, spec.rho) < hi):
        raise MomentCondition("psi_X is infinite at rho * (1 + alpha)")
    if w < 0 and not -w < phi_bar(spec.X, spec.lam0):
        raise MomentCondition("|rho| (1 + alpha) must stay below phi_bar(-lam0)")
    if not 1 + a < spec.Z.domain()[1]:
        raise MomentCondition("psi_Z is infinite at 1 + alpha")


def kappa(spec: CvaSpec, t1: float, t2: float, u) -> np.ndarray:
    """``Psi_Z(u) t1 + Psi_X(rho u) t2`` with ``Psi(u) = psi(i u)``."""
    v = 1j * np.asarray(u, dtype=complex)
    return spec.Z.psi(v) * t1 + spec.X.psi(spec.rho * v) * t2


def f_transform(spec: CvaSpec, u, q, dist: QuasiInvariantDist | None = None):
    """``E^mu[exp(-q tau + u (X_tau - X_0))]`` under the quasi-invariant start."""
    dist = dist or build_qid(spec.X, spec.lam0)
    return passage_transform(spec.X, dist, q, u)


def conditional_moment(spec: CvaSpec, w, t: float, dist: QuasiInvariantDist | None = None):
    """``E[exp(w X(I(tau))) | tau = t]`` by Laplace inversion at ``I(t)``."""
    dist = dist or build_qid(spec.X, spec.lam0)
    w = np.asarray(w, dtype=complex)
    s = float(spec.clock(t))
    M = (spec.numerics.laplace_terms - 1) // 2

    def F(qs):
        return np.stack([passage_transform(spec.X, dist, q, w) for q in qs])

    density = euler_invert(F, s, M=M, complex_valued=True)
    return density / (spec.lam0 * float(spec.curve.survival(t)))


@dataclass(frozen=True)
class ExposurePoint:
    t: float
    value: float
    tail_ratio: float


def _log_moment_z_x(spec: CvaSpec, u: np.ndarray, t: float) -> np.ndarray:
    """Log of ``E[exp(u (log S_T - log S_0))]`` without the jump-at-default factor."""
    T = spec.T
    comp_T = spec.Z.psi(1.0) * T + spec.X.psi(spec.rho) * float(spec.clock(T))
    return (
        u * (spec.r - spec.d) * T
        - u * comp_T
        + spec.Z.psi(u) * T
        + spec.X.psi(spec.rho * u) * (float(spec.clock(T)) - float(spec.clock(t)))
    )


def exposure(spec: CvaSpec, t: float, dist: QuasiInvariantDist | None = None) -> ExposurePoint:
    """Expected discounted call value at default, given default at ``t``."""
    if not 0 < t <= spec.T:
        raise ConfigError("exposure time must lie in (0, T]")
    dist = dist or build_qid(spec.X, spec.lam0)
    num = spec.numerics
    xi = np.linspace(0.0, num.xi_max, num.xi_points)
    u = 1 + num.alpha + 1j * xi
    log_a = (
        u * np.log(spec.S0)
        + _log_moment_z_x(spec, u, t)
        + (1 - u) * np.log(spec.K)
        - np.log(u * (u - 1))
    )
    integrand = np.exp(log_a) * conditional_moment(spec, spec.rho * u, t, dist)
    mag = np.abs(integrand)
    tail = float(mag[-1] / mag.max())
    if tail > TAIL_RATIO:
        raise InversionFailure(f"Fourier integrand tail ratio {tail:.3g} exceeds {TAIL_RATIO}")
    h = xi[1] - xi[0]
    re = integrand.real
    val = h * (re.sum() - 0.5 * (re[0] + re[-1])) / np.pi * np.exp(-spec.r * spec.T)
    if val < -NEG_CLIP:
        raise InversionFailure(f"negative exposure {val:.3g} at t = {t}")
    return ExposurePoint(float(t), max(float(val), 0.0), tail)


def call_price(spec: CvaSpec) -> float:
    """Default-free call ``exp(-rT) E[(S_T - K)^+]`` by the same damped Fourier integral."""
    num = spec.numerics
    xi = np.linspace(0.0, num.xi_max, num.xi_points)
    u = 1 + num.alpha + 1j * xi
    log_a = (
        u * np.log(spec.S0)
        + _log_moment_z_x(spec, u, 0.0)
        + (1 - u) * np.log(spec.K)
        - np.log(u * (u - 1))
    )
    re = np.exp(log_a).real
    h = xi[1] - xi[0]
    return float(h * (re.sum() - 0.5 * (re[0] + re[-1])) / np.pi * np.exp(-spec.r * spec.T))


@dataclass(frozen=True, eq=False)
class CvaResult:
    pi: float
    exposure_curve: list[tuple[float, float]]
    diagnostics: dict

    def to_dict(self) -> dict:
        return {
            "pi": self.pi,
            "exposure_curve": [[t, p] for t, p in self.exposure_curve],
            "diagnostics": self.diagnostics,
        }


def _map(fn, items, workers):
    nw = worker_count(workers)
    if nw == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=nw) as pool:
        return list(pool.map(fn, items))


def cva_value(spec: CvaSpec, curve_points: int = 20, workers: int | None = None) -> CvaResult:
    """CVA as an integral over clock time ``s = I(t)``, where
    ``h(t) dt = lam0 exp(-lam0 s) ds``, further substituted ``s = I(T) v^2``
    to absorb the square-root behaviour of the exposure near ``s = 0``.
    Gauss-Legendre nodes are doubled until the relative change drops below
    ``PI_RTOL``."""
    check_spec(spec)
    dist = build_qid(spec.X, spec.lam0)
    lam0 = spec.lam0
    s_T = float(spec.clock(spec.T))

    def point(t):
        return exposure(spec, t, dist)

    prev = None
    n = 8
    tail = 0.0
    while True:
        x, w = np.polynomial.legendre.leggauss(n)
        v = 0.5 * (x + 1)
        ss = s_T * v * v
        ts = np.minimum(spec.curve.inv_cum_hazard(lam0 * ss), spec.T)
        pts = _map(point, ts, workers)
        vals = np.array([p.value for p in pts])
        tail = max(tail, max(p.tail_ratio for p in pts))
        pi = float(0.5 * np.sum(w * vals * lam0 * np.exp(-lam0 * ss) * 2 * s_T * v))
        if prev is not None and abs(pi - prev) <= PI_RTOL * max(abs(pi), 1e-300):
            break
        if n >= 256:
            raise InversionFailure("CVA quadrature did not converge")
        prev, n = pi, 2 * n
    grid = (np.arange(curve_points) + 0.5) * spec.T / curve_points
    curve_pts = _map(point, grid, workers)
    return CvaResult(
        pi,
        [(float(p.t), float(p.value)) for p in curve_pts],
        {
            "lambda0": spec.lam0,
            "lambda_star": lambda_star(spec.X),
            "call_price": call_price(spec),
            "quadrature_nodes": n,
            "max_tail_ratio": max(tail, max(p.tail_ratio for p in curve_pts)),
        },
    )


@dataclass(frozen=True)
class McCvaResult:
    pi: float
    se: float
    call: float
    call_se: float
    paths: int


def mc_cva(spec: CvaSpec, paths: int, seed: int = 42, workers: int | None = None) -> McCvaResult:
    """Joint simulation of default time and terminal stock price."""
    check_spec(spec)
    dist = build_qid(spec.X, spec.lam0)
    x_h = float(spec.clock(spec.T))
    fp = simulate_first_passage(spec.X, dist, McParams(paths, x_h, seed), workers=workers,
                                track_terminal=True)
    tau = np.full(paths, np.inf)
    fin = np.isfinite(fp.tau)
    tau[fin] = spec.curve.inv_cum_hazard(spec.lam0 * fp.tau[fin])
    dx = fp.x_end - fp.x_start
    z = sample_levy_increment(spec.Z, spec.T, paths, seed)
    comp = spec.Z.psi(1.0) * spec.T + spec.X.psi(spec.rho) * x_h
    s_T = spec.S0 * np.exp((spec.r - spec.d) * spec.T + spec.rho * dx + z - comp)
    payoff = np.exp(-spec.r * spec.T) * np.maximum(s_T - spec.K, 0.0)
    loss = payoff * (tau <= spec.T)
    return McCvaResult(
        float(loss.mean()), float(loss.std(ddof=1) / np.sqrt(paths)),
        float(payoff.mean()), float(payoff.std(ddof=1) / np.sqrt(paths)), paths,
    )
