"""Inverse first-passage problem with a zero barrier.

Given a target survival curve ``Hbar``, start X from the quasi-invariant law
``mu_lam`` and run it on the clock ``I(t) = -log Hbar(t) / lam``; the first
passage of ``Y = X(I(t))`` below zero then has survival exactly ``Hbar``.
For a general initial law the clock is ``I = Fbar_mu^{-1}(Hbar)`` with
``Fbar_mu`` the survival of the untimed passage, estimated here by
simulation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InsufficientPaths, LambdaExceedsStar, OutOfRange
from .levy_model import MixedExpLevy, model_from_dict
from .mc_engine import McParams, simulate_first_passage, simulate_time_changed_fp
from .qid import QuasiInvariantDist, build_qid
from .spectral import LAMBDA_STAR_RTOL, lambda_star
from .survival import SurvivalCurve, curve_from_dict

GENERAL_GRID = 512


def time_change_qid(curve: SurvivalCurve, lam: float, lam_star: float | None = None):
    """``t -> -log Hbar(t) / lam`` (``inf`` where ``Hbar`` vanishes)."""
    if not lam > 0 or (lam_star is not None and lam > lam_star * (1 + LAMBDA_STAR_RTOL)):
        raise OutOfRange(f"lambda = {lam!r} outside (0, lambda*]")

    def clock(t):
        return np.asarray(curve.cum_hazard(t)) / lam

    return clock


@dataclass(frozen=True, eq=False)
class RifptSolution:
    dist: QuasiInvariantDist
    lam: float
    curve: SurvivalCurve
    model: MixedExpLevy

    def time_change(self, t):
        return np.asarray(self.curve.cum_hazard(t)) / self.lam

    def inverse_time_change(self, s):
        """Smallest ``t`` with ``I(t) >= s``."""
        return self.curve.inv_cum_hazard(self.lam * np.asarray(s, dtype=float))

    @property
    def lambda_star(self) -> float:
        return lambda_star(self.model)

    def to_dict(self, n_samples: int = 0) -> dict:
        out = {
            "lambda": self.lam,
            "lambda_star": self.lambda_star,
            "qid": self.dist.to_dict(),
        }
        if n_samples:
            t = np.linspace(0.0, self.curve.horizon, n_samples)
            out["time_change"] = {"t": t.tolist(), "I": self.time_change(t).tolist()}
        return out


def normalized_lambda(curve: SurvivalCurve, horizon: float | None = None) -> float:
    """Rate making ``I(T) = T``: ``-log Hbar(T) / T``."""
    T = curve.horizon if horizon is None else float(horizon)
    return float(curve.cum_hazard(T)) / T


def solve_rifpt(model: MixedExpLevy, curve: SurvivalCurve, lam: float | None = None,
                normalize: float | None = None) -> RifptSolution:
    """Pair the quasi-invariant law with its clock.

    Pass ``lam`` explicitly or ``normalize=T`` for the rate with ``I(T) = T``.
    """
    if (lam is None) == (normalize is None):
        raise ConfigError("give exactly one of lam or normalize")
    if lam is None:
        lam = normalized_lambda(curve, normalize)
    lam = float(lam)
    ls = lambda_star(model)
    if lam > ls * (1 + LAMBDA_STAR_RTOL):
        raise LambdaExceedsStar(f"lambda = {lam:.12g} exceeds lambda* = {ls:.12g}")
    if not lam > 0:
        raise OutOfRange("lambda must be positive")
    return RifptSolution(build_qid(model, lam), lam, curve, model)


@dataclass(frozen=True, eq=False)
class GeneralTimeChange:
    """Monotone clock from an estimated passage survival ``Fbar``."""

    times: np.ndarray
    survival: np.ndarray
    curve: SurvivalCurve

    def __call__(self, t):
        target = np.asarray(self.curve.cum_hazard(t), dtype=float)
        neg_log = -np.log(self.survival)
        out = np.interp(target, neg_log, self.times)
        return np.where(target > neg_log[-1], np.inf, out)


def time_change_general(model: MixedExpLevy, mu, curve: SurvivalCurve, params: McParams,
                        workers: int | None = None) -> GeneralTimeChange:
    """Clock ``I = Fbar_mu^{-1}(Hbar)`` with ``Fbar_mu`` from simulation.

    ``params.horizon`` is the X-time horizon and must be long enough for the
    survival of X to fall below ``Hbar(curve.horizon)``.
    """
    fp = simulate_first_passage(model, mu, params, workers=workers)
    H = float(params.horizon)
    grid = np.concatenate([[0.0], np.geomspace(H * 1e-4, H, GENERAL_GRID - 1)])
    est = fp.survival(grid).survival
    target_end = float(curve.survival(curve.horizon))
    if est[-1] > target_end:
        raise OutOfRange(
            f"X horizon {H} too short: simulated survival {est[-1]:.4g} > target {target_end:.4g}"
        )
    floor = 1.0 / params.paths
    if target_end < floor:
        raise InsufficientPaths("target survival below the resolution 1/paths")
    est = np.maximum(est, floor)
    est[0] = 1.0
    # strictly decreasing in log so the inverse is a function
    log_s = np.minimum.accumulate(np.log(est))
    log_s = log_s - 1e-12 * np.arange(len(log_s))
    return GeneralTimeChange(grid, np.exp(log_s), curve)


# -- frailty ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FrailtyName:
    model: MixedExpLevy
    curve: SurvivalCurve
    lam: float


@dataclass(frozen=True, eq=False)
class FrailtyState:
    prob: float
    names: tuple[FrailtyName, ...]


@dataclass(frozen=True, eq=False)
class FrailtySpec:
    states: tuple[FrailtyState, ...]

    def __post_init__(self):
        if not self.states:
            raise ConfigError("frailty needs at least one state")
        d = {len(s.names) for s in self.states}
        if len(d) != 1:
            raise ConfigError("every state must list the same number of names")
        total = sum(s.prob for s in self.states)
        if abs(total - 1.0) > 1e-10 or any(s.prob < 0 for s in self.states):
            raise ConfigError("state probabilities must be nonnegative and sum to 1")

    @property
    def dim(self) -> int:
        return len(self.states[0].names)


@dataclass(frozen=True, eq=False)
class FrailtySolution:
    spec: FrailtySpec
    solutions: tuple[tuple[RifptSolution, ...], ...]

    def joint_survival(self, times) -> np.ndarray:
        """``S(t_1..t_d) = sum_j p_j prod_i Hbar_i(t_i | u_j)``; last axis is ``d``."""
        t = np.asarray(times, dtype=float)
        out = np.zeros(t.shape[:-1])
        for state in self.spec.states:
            term = np.full(t.shape[:-1], state.prob)
            for i, name in enumerate(state.names):
                term = term * name.curve.survival(t[..., i])
            out = out + term
        return out


def solve_frailty(spec: FrailtySpec) -> FrailtySolution:
    sols = tuple(
        tuple(solve_rifpt(n.model, n.curve, lam=n.lam) for n in state.names)
        for state in spec.states
    )
    return FrailtySolution(spec, sols)


def simulate_frailty(sol: FrailtySolution, params: McParams,
                     workers: int | None = None) -> np.ndarray:
    """Default times, shape ``(paths, d)``; a common state is drawn per path
    and names are simulated independently given the state."""
    ss = np.random.SeedSequence(params.seed)
    state_rng = np.random.Generator(np.random.Philox(ss.spawn(1)[0]))
    probs = np.array([s.prob for s in sol.spec.states])
    states = np.minimum(
        np.searchsorted(np.cumsum(probs), state_rng.random(params.paths), side="right"),
        len(probs) - 1,
    )
    out = np.full((params.paths, sol.spec.dim), np.inf)
    for j, row in enumerate(sol.solutions):
        idx = np.flatnonzero(states == j)
        if idx.size == 0:
            continue
        for i, s in enumerate(row):
            sub_seed = int(np.random.SeedSequence(params.seed, spawn_key=(j, i)).generate_state(1)[0])
            p = McParams(int(idx.size), params.horizon, sub_seed, params.bridge_correction,
                         params.antithetic)
            out[idx, i] = simulate_time_changed_fp(s, p, workers=workers).tau
    return out


def frailty_from_dict(d: dict) -> FrailtySpec:
    extra = set(d) - {"states"}
    if extra:
        raise ConfigError(f"unknown keys in frailty spec: {sorted(extra)}")
    states = []
    for st in d["states"]:
        if set(st) - {"prob", "names"}:
            raise ConfigError(f"unknown keys in frailty state: {sorted(set(st) - {'prob', 'names'})}")
        names = []
        for nm in st["names"]:
            if set(nm) != {"model", "curve", "lambda"}:
                raise ConfigError("frailty names need exactly 'model', 'curve', 'lambda'")
            names.append(FrailtyName(model_from_dict(nm["model"]), curve_from_dict(nm["curve"]),
                                     float(nm["lambda"])))
        states.append(FrailtyState(float(st["prob"]), tuple(names)))
    return FrailtySpec(tuple(states))
