"""Mixed-exponential jump-diffusions and their exponents.

The process is ``X_t = X_0 + eta*t + sigma*W_t + sum_{j<=N_t} U_j`` where N is
Poisson with rate ``ell`` and the jumps have the two-sided density

    f(x) = p * sum_k a_k^+ alpha_k^+ exp(-alpha_k^+ x)         for x > 0
         + (1-p) * sum_k a_k^- alpha_k^- exp(-alpha_k^- |x|)   for x < 0.

Drifting Brownian motion (unit volatility, no jumps) is the special case
``BrownianDriftLevy``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import ConfigError, PoleEvaluation

POLE_RTOL = 1e-12


def _out(val):
    if isinstance(val, np.ndarray) and val.ndim == 0:
        return val[()]
    return val


def _as_terms(terms) -> tuple[tuple[float, float], ...]:
    out = []
    for t in terms:
        if isinstance(t, dict):
            a, alpha = t["a"], t["alpha"]
        else:
            a, alpha = t
        out.append((float(a), float(alpha)))
    return tuple(out)


@dataclass(frozen=True)
class MixedExpLevy:
    """Parameter set of a mixed-exponential Levy process.

    ``up_terms`` and ``down_terms`` hold ``(weight, rate)`` pairs of the
    positive and negative jump densities. Instances are immutable and
    hashable, so they can key caches.
    """

    sigma: float
    eta: float
    ell: float = 0.0
    p: float = 0.0
    up_terms: tuple[tuple[float, float], ...] = ()
    down_terms: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "eta", float(self.eta))
        object.__setattr__(self, "ell", float(self.ell))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "up_terms", _as_terms(self.up_terms))
        object.__setattr__(self, "down_terms", _as_terms(self.down_terms))

    kind = "mixed_exp"

    # -- jump law ---------------------------------------------------------
    @property
    def up_weights(self) -> np.ndarray:
        return np.array([a for a, _ in self.up_terms], dtype=float)

    @property
    def up_rates(self) -> np.ndarray:
        return np.array([al for _, al in self.up_terms], dtype=float)

    @property
    def down_weights(self) -> np.ndarray:
        return np.array([a for a, _ in self.down_terms], dtype=float)

    @property
    def down_rates(self) -> np.ndarray:
        return np.array([al for _, al in self.down_terms], dtype=float)

    @property
    def has_up_jumps(self) -> bool:
        return self.ell > 0 and self.p > 0 and len(self.up_terms) > 0

    @property
    def has_down_jumps(self) -> bool:
        return self.ell > 0 and self.p < 1 and len(self.down_terms) > 0

    @property
    def m_plus(self) -> int:
        """Number of positive exponential terms that actually enter psi."""
        return len(self.up_terms) if self.has_up_jumps else 0

    @property
    def m_minus(self) -> int:
        return len(self.down_terms) if self.has_down_jumps else 0

    def domain(self) -> tuple[float, float]:
        """Closure ``(theta_lo, theta_hi)`` of the domain of psi on the real line."""
        hi = float(self.up_rates.min()) if self.m_plus else np.inf
        lo = -float(self.down_rates.min()) if self.m_minus else -np.inf
        return lo, hi

    def poles(self) -> np.ndarray:
        """Poles of psi in the complex plane (alpha_k^+ and -alpha_k^-)."""
        ups = self.up_rates if self.m_plus else np.empty(0)
        downs = -self.down_rates if self.m_minus else np.empty(0)
        return np.concatenate([ups, downs])

    # -- exponents --------------------------------------------------------
    def _check_poles(self, theta: np.ndarray) -> None:
        poles = self.poles()
        if poles.size == 0:
            return
        gap = np.abs(theta[..., None] - poles)
        if np.any(gap <= POLE_RTOL * np.maximum(1.0, np.abs(poles))):
            raise PoleEvaluation("exponent evaluated at a pole of the jump transform")

    def psi(self, theta):
        """Laplace exponent ``log E[exp(theta X_1)]``, analytically continued."""
        th = np.asarray(theta)
        self._check_poles(np.atleast_1d(th))
        val = 0.5 * self.sigma**2 * th * th + self.eta * th
        if self.m_plus:
            a, al = self.up_weights, self.up_rates
            val = val + self.ell * self.p * np.sum(
                a * th[..., None] / (al - th[..., None]), axis=-1
            )
        if self.m_minus:
            a, al = self.down_weights, self.down_rates
            val = val - self.ell * (1 - self.p) * np.sum(
                a * th[..., None] / (al + th[..., None]), axis=-1
            )
        return _out(val)

    def dpsi(self, theta):
        th = np.asarray(theta)
        val = self.sigma**2 * th + self.eta
        if self.m_plus:
            a, al = self.up_weights, self.up_rates
            val = val + self.ell * self.p * np.sum(a * al / (al - th[..., None]) ** 2, axis=-1)
        if self.m_minus:
            a, al = self.down_weights, self.down_rates
            val = val - self.ell * (1 - self.p) * np.sum(
                a * al / (al + th[..., None]) ** 2, axis=-1
            )
        return _out(val)

    def d2psi(self, theta):
        th = np.asarray(theta)
        val = self.sigma**2 + 0.0 * th
        if self.m_plus:
            a, al = self.up_weights, self.up_rates
            val = val + 2 * self.ell * self.p * np.sum(
                a * al / (al - th[..., None]) ** 3, axis=-1
            )
        if self.m_minus:
            a, al = self.down_weights, self.down_rates
            val = val + 2 * self.ell * (1 - self.p) * np.sum(
                a * al / (al + th[..., None]) ** 3, axis=-1
            )
        return _out(val)

    def char_exponent(self, theta):
        """Characteristic exponent ``Psi(theta) = psi(i*theta)``."""
        return self.psi(1j * np.asarray(theta, dtype=complex))

    def mean(self) -> float:
        return float(self.dpsi(0.0))

    def jump_mgf(self, theta: float) -> float:
        """``E[exp(theta U)]`` for one jump (1 when there are no jumps)."""
        m = 0.0
        if self.m_plus:
            m += self.p * float(np.sum(self.up_weights * self.up_rates / (self.up_rates - theta)))
        if self.m_minus:
            m += (1 - self.p) * float(
                np.sum(self.down_weights * self.down_rates / (self.down_rates + theta))
            )
        if not (self.m_plus or self.m_minus):
            return 1.0
        return m

    def esscher(self, theta: float) -> "MixedExpLevy":
        """Law of ``X`` under the exponential tilt ``exp(theta X_t - t psi(theta))``.

        The tilted process is again mixed-exponential, with exponent
        ``psi(s + theta) - psi(theta)``.
        """
        lo, hi = self.domain()
        if not lo < theta < hi:
            raise PoleEvaluation(f"Esscher parameter {theta} outside ({lo}, {hi})")
        up_mass = down_mass = 0.0
        up, down = (), ()
        if self.m_plus:
            a, al = self.up_weights, self.up_rates
            w = a * al / (al - theta)
            up_mass = float(w.sum())
            up = tuple(zip(w / up_mass, al - theta))
        if self.m_minus:
            a, al = self.down_weights, self.down_rates
            w = a * al / (al + theta)
            down_mass = float(w.sum())
            down = tuple(zip(w / down_mass, al + theta))
        p_up = self.p * up_mass
        p_down = (1 - self.p) * down_mass
        total = p_up + p_down
        if total == 0.0:
            return MixedExpLevy(self.sigma, self.eta + self.sigma**2 * theta)
        up = tuple((float(a_), float(r_)) for a_, r_ in up)
        down = tuple((float(a_), float(r_)) for a_, r_ in down)
        return MixedExpLevy(
            sigma=self.sigma,
            eta=self.eta + self.sigma**2 * theta,
            ell=self.ell * total,
            p=p_up / total,
            up_terms=up,
            down_terms=down,
        )

    # -- serialisation ----------------------------------------------------
    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": "mixed_exp",
            "sigma": self.sigma,
            "eta": self.eta,
            "ell": self.ell,
            "p": self.p,
            "up": [{"a": a, "alpha": al} for a, al in self.up_terms],
            "down": [{"a": a, "alpha": al} for a, al in self.down_terms],
        }


class BrownianDriftLevy(MixedExpLevy):
    """Unit-volatility Brownian motion with drift ``eta``."""

    kind = "brownian"

    def __init__(self, eta: float):
        super().__init__(sigma=1.0, eta=eta)

    def __repr__(self):
        return f"BrownianDriftLevy(eta={self.eta!r})"

    def __reduce__(self):
        return (BrownianDriftLevy, (self.eta,))

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "brownian", "eta": self.eta}


LevyModel = MixedExpLevy


def laplace_exponent(model: MixedExpLevy, theta):
    return model.psi(theta)


def char_exponent(model: MixedExpLevy, theta):
    return model.char_exponent(theta)


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def _bartholomew(side: str, terms) -> list[str]:
    out = []
    if not terms:
        return out
    terms = sorted(terms, key=lambda t: t[1])
    a = np.array([t[0] for t in terms])
    al = np.array([t[1] for t in terms])
    if np.any(al <= 0):
        out.append(f"{side}: rates must be strictly positive")
    if a[0] <= 0:
        out.append(f"{side}: weight of the slowest-decaying term must be positive")
    partial = np.cumsum(a * al)
    if np.any(partial < -1e-14):
        out.append(f"{side}: partial sums of a_k*alpha_k must be nonnegative (Bartholomew)")
    if abs(a.sum() - 1.0) > 1e-10:
        out.append(f"{side}: weights must sum to 1 (got {a.sum():.12g})")
    return out


def validate(model: MixedExpLevy) -> ValidationReport:
    """Check admissibility: jump densities, negative mean, non-degeneracy."""
    v: list[str] = []
    if model.sigma < 0:
        v.append("sigma must be nonnegative")
    if model.ell < 0:
        v.append("ell must be nonnegative")
    if not 0.0 <= model.p <= 1.0:
        v.append("p must lie in [0, 1]")
    v += _bartholomew("up", model.up_terms)
    v += _bartholomew("down", model.down_terms)
    if model.ell > 0 and model.p > 0 and not model.up_terms:
        v.append("p > 0 but no up-jump terms given")
    if model.ell > 0 and model.p < 1 and not model.down_terms:
        v.append("p < 1 but no down-jump terms given")
    if not v:
        if model.mean() >= 0:
            v.append(f"negative-mean condition fails: psi'(0) = {model.mean():.6g} >= 0")
        if not (model.sigma > 0 or model.has_down_jumps):
            v.append("non-degeneracy fails: need sigma > 0 or downward jumps")
    return ValidationReport(v)


# -- JSON -------------------------------------------------------------------
_MIXED_KEYS = {"kind", "sigma", "eta", "ell", "p", "up", "down"}
_TERM_KEYS = {"a", "alpha"}


def model_from_dict(d: dict) -> MixedExpLevy:
    kind = d.get("kind")
    if kind == "brownian":
        extra = set(d) - {"kind", "eta"}
        if extra:
            raise ConfigError(f"unknown keys in brownian model: {sorted(extra)}")
        return BrownianDriftLevy(float(d["eta"]))
    if kind == "mixed_exp":
        extra = set(d) - _MIXED_KEYS
        if extra:
            raise ConfigError(f"unknown keys in mixed_exp model: {sorted(extra)}")
        for side in ("up", "down"):
            for t in d.get(side, []):
                if set(t) != _TERM_KEYS:
                    raise ConfigError(f"{side} terms need exactly keys 'a' and 'alpha'")
        try:
            return MixedExpLevy(
                sigma=d["sigma"],
                eta=d["eta"],
                ell=d.get("ell", 0.0),
                p=d.get("p", 0.0),
                up_terms=d.get("up", []),
                down_terms=d.get("down", []),
            )
        except KeyError as exc:
            raise ConfigError(f"missing model field {exc}") from None
    raise ConfigError(f"unknown model kind {kind!r}")


def load_model(path) -> MixedExpLevy:
    with open(path) as fh:
        return model_from_dict(json.load(fh))


def kou(sigma, eta, ell, p, alpha_up, alpha_down) -> MixedExpLevy:
    """Double-exponential (Kou) jump-diffusion."""
    return MixedExpLevy(sigma, eta, ell, p, ((1.0, alpha_up),), ((1.0, alpha_down),))
