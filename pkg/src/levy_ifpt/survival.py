"""Target survival curves ``Hbar(t) = P(tau > t)``.

Every curve exposes the cumulative hazard ``Lambda(t) = -log Hbar(t)`` and
its inverse, which is what the time change needs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


def _arr(t):
    return np.asarray(t, dtype=float)


def _sq(x):
    return x[()] if isinstance(x, np.ndarray) and x.ndim == 0 else x


class SurvivalCurve:
    kind: str
    horizon: float

    def cum_hazard(self, t):
        raise NotImplementedError

    def inv_cum_hazard(self, y):
        raise NotImplementedError

    def hazard(self, t):
        raise NotImplementedError

    def survival(self, t):
        return _sq(np.exp(-_arr(self.cum_hazard(t))))

    def density(self, t):
        return _sq(_arr(self.hazard(t)) * _arr(self.survival(t)))

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class ExponentialCurve(SurvivalCurve):
    rate: float
    horizon: float = 1.0
    kind = "exponential"

    def cum_hazard(self, t):
        return _sq(self.rate * np.maximum(_arr(t), 0.0))

    def inv_cum_hazard(self, y):
        return _sq(_arr(y) / self.rate)

    def hazard(self, t):
        return _sq(np.full_like(_arr(t), self.rate))

    def to_dict(self):
        return {"kind": self.kind, "rate": self.rate, "horizon": self.horizon}


@dataclass(frozen=True)
class WeibullCurve(SurvivalCurve):
    shape: float
    scale: float
    horizon: float = 1.0
    kind = "weibull"

    def cum_hazard(self, t):
        return _sq((np.maximum(_arr(t), 0.0) / self.scale) ** self.shape)

    def inv_cum_hazard(self, y):
        return _sq(self.scale * _arr(y) ** (1.0 / self.shape))

    def hazard(self, t):
        t = np.maximum(_arr(t), 0.0)
        return _sq(self.shape / self.scale * (t / self.scale) ** (self.shape - 1))

    def to_dict(self):
        return {"kind": self.kind, "shape": self.shape, "scale": self.scale, "horizon": self.horizon}


@dataclass(frozen=True, eq=False)
class PiecewiseHazardCurve(SurvivalCurve):
    """Constant hazard ``rates[i]`` between consecutive ``breakpoints``.

    ``breakpoints`` are the interior switch times, so there is one more rate
    than breakpoints; the last rate applies forever.
    """

    breakpoints: tuple[float, ...]
    rates: tuple[float, ...]
    horizon: float = 1.0
    kind = "piecewise_hazard"

    def __post_init__(self):
        b = tuple(float(v) for v in self.breakpoints)
        r = tuple(float(v) for v in self.rates)
        if len(r) != len(b) + 1:
            raise ConfigError("piecewise_hazard needs len(rates) == len(breakpoints) + 1")
        if any(v < 0 for v in r) or any(np.diff((0.0,) + b) <= 0):
            raise ConfigError("piecewise_hazard needs nonnegative rates and increasing breakpoints")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "rates", r)

    @property
    def _knots(self):
        knots = np.concatenate([[0.0], self.breakpoints])
        rates = np.asarray(self.rates)
        cum = np.concatenate([[0.0], np.cumsum(rates[:-1] * np.diff(knots))])
        return knots, rates, cum

    def cum_hazard(self, t):
        knots, rates, cum = self._knots
        t = np.maximum(_arr(t), 0.0)
        i = np.searchsorted(knots, t, side="right") - 1
        return _sq(cum[i] + rates[i] * (t - knots[i]))

    def inv_cum_hazard(self, y):
        knots, rates, cum = self._knots
        y = _arr(y)
        i = np.searchsorted(cum, y, side="right") - 1
        with np.errstate(divide="ignore", invalid="ignore"):
            t = knots[i] + (y - cum[i]) / rates[i]
        t = np.where(np.isinf(y), np.inf, t)
        return _sq(t)

    def hazard(self, t):
        knots, rates, _ = self._knots
        i = np.searchsorted(knots, np.maximum(_arr(t), 0.0), side="right") - 1
        return _sq(rates[i])

    def to_dict(self):
        return {
            "kind": self.kind,
            "breakpoints": list(self.breakpoints),
            "rates": list(self.rates),
            "horizon": self.horizon,
        }


class TableCurve(PiecewiseHazardCurve):
    """Tabulated ``(t_i, Hbar_i)`` pairs, log-linear in between.

    Log-linear interpolation of the survival is the same as a piecewise
    constant hazard; beyond the last point the last hazard is kept.
    """

    kind = "table"

    def __init__(self, times, survival, horizon: float = 1.0):
        t = np.asarray(times, dtype=float)
        s = np.asarray(survival, dtype=float)
        if t.shape != s.shape or t.ndim != 1 or len(t) < 1:
            raise ConfigError("table curve needs matching 1-d 'times' and 'survival'")
        if t[0] == 0.0:
            if s[0] != 1.0:
                raise ConfigError("table curve must have survival 1 at t = 0")
            t, s = t[1:], s[1:]
        if np.any(np.diff(t) <= 0) or np.any(t <= 0):
            raise ConfigError("table times must be positive and increasing")
        if np.any(s <= 0) or np.any(s > 1) or np.any(np.diff(s) > 0):
            raise ConfigError("table survival must be in (0, 1] and nonincreasing")
        knots = np.concatenate([[0.0], t])
        logs = np.concatenate([[0.0], -np.log(s)])
        rates = np.diff(logs) / np.diff(knots)
        object.__setattr__(self, "times", tuple(t))
        object.__setattr__(self, "values", tuple(s))
        super().__init__(tuple(t[:-1]), tuple(rates), horizon)

    def __repr__(self):
        return f"TableCurve(times={self.times!r}, survival={self.values!r}, horizon={self.horizon!r})"

    def to_dict(self):
        return {
            "kind": self.kind,
            "times": list(self.times),
            "survival": list(self.values),
            "horizon": self.horizon,
        }


_CURVE_KEYS = {
    "exponential": {"rate"},
    "weibull": {"shape", "scale"},
    "piecewise_hazard": {"breakpoints", "rates"},
    "table": {"times", "survival"},
}


def curve_from_dict(d: dict) -> SurvivalCurve:
    kind = d.get("kind")
    if kind not in _CURVE_KEYS:
        raise ConfigError(f"unknown curve kind {kind!r}")
    need = _CURVE_KEYS[kind]
    extra = set(d) - need - {"kind", "horizon"}
    if extra:
        raise ConfigError(f"unknown keys in {kind} curve: {sorted(extra)}")
    missing = need - set(d)
    if missing:
        raise ConfigError(f"missing keys in {kind} curve: {sorted(missing)}")
    horizon = float(d.get("horizon", 1.0))
    if not horizon > 0:
        raise ConfigError("curve horizon must be positive")
    if kind == "exponential":
        return ExponentialCurve(float(d["rate"]), horizon)
    if kind == "weibull":
        return WeibullCurve(float(d["shape"]), float(d["scale"]), horizon)
    if kind == "piecewise_hazard":
        return PiecewiseHazardCurve(tuple(d["breakpoints"]), tuple(d["rates"]), horizon)
    return TableCurve(d["times"], d["survival"], horizon)
