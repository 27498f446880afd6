"""Monte Carlo first passage below zero for mixed-exponential jump-diffusions.

Paths move from jump epoch to jump epoch. Between jumps the Gaussian part is
sampled exactly at the segment end, and a crossing inside the segment is
detected with the Brownian-bridge minimum law; the crossing instant is then
drawn from its exact conditional law. Jump crossings record the post-jump
position as overshoot.

Paths are grouped in fixed-size blocks. Block ``k`` draws from a Philox
stream keyed by ``(seed, k)``, so results do not depend on how many worker
threads process the blocks.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import EmptySample
from .levy_model import MixedExpLevy

BLOCK = 8192
N_UNIFORMS = 8
THREADS_ENV = "LEVY_IFPT_THREADS"


@dataclass(frozen=True)
class McParams:
    """With ``bridge_correction`` off, crossings are only checked at segment
    ends (jump epochs, the horizon and multiples of ``monitor_dt``)."""

    paths: int
    horizon: float
    seed: int = 42
    bridge_correction: bool = True
    antithetic: bool = False
    monitor_dt: float | None = None

    def __post_init__(self):
        if self.paths < 1:
            raise ValueError("paths must be at least 1")
        if not np.all(np.asarray(self.horizon) > 0):
            raise ValueError("horizon must be positive")


@dataclass(frozen=True, eq=False)
class FirstPassageSample:
    """``tau`` is ``inf`` for paths still alive at their horizon."""

    tau: np.ndarray
    overshoot: np.ndarray
    crossed_by_diffusion: np.ndarray
    x_end: np.ndarray
    x_start: np.ndarray | None = None

    @property
    def crossed(self) -> np.ndarray:
        return np.isfinite(self.tau)

    def survival(self, grid) -> "SurvivalEstimate":
        return survival_grid(self.tau, grid)


def worker_count(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(THREADS_ENV)
    return max(1, int(env)) if env else 1


def block_rng(seed: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(block,))
    return np.random.Generator(np.random.Philox(ss))


def _uniforms(rng, shape, antithetic: bool) -> np.ndarray:
    """Uniforms in (0, 1) with the last axis of length ``n``; antithetic
    mode mirrors the first half onto the second."""
    n = shape[-1]
    if not antithetic:
        u = rng.random(shape)
    else:
        half = (n + 1) // 2
        base = rng.random(shape[:-1] + (half,))
        u = np.concatenate([base, 1.0 - base[..., : n - half]], axis=-1)
    return np.clip(u, 1e-300, 1.0 - 2**-53)


class _JumpSampler:
    """Inverse transforms for one side of the jump law."""

    def __init__(self, weights: np.ndarray, rates: np.ndarray):
        self.weights = weights
        self.rates = rates
        self.positive = bool(np.all(weights >= 0))
        self.cum = np.cumsum(weights) / np.sum(weights)

    def __call__(self, u_comp: np.ndarray, u_size: np.ndarray) -> np.ndarray:
        if self.positive:
            k = np.minimum(np.searchsorted(self.cum, u_comp, side="right"), len(self.rates) - 1)
            return -np.log(u_size) / self.rates[k]
        # signed weights: invert the mixture tail sum_k a_k exp(-alpha_k y) = u
        lo = np.zeros_like(u_size)
        hi = np.full_like(u_size, 1.0 / self.rates.min())
        while np.any(self._tail(hi) > u_size):
            hi = np.where(self._tail(hi) > u_size, 2 * hi, hi)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            above = self._tail(mid) > u_size
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
            if np.all(hi - lo <= 1e-13 * np.maximum(1.0, hi)):
                break
        return 0.5 * (lo + hi)

    def _tail(self, y):
        return np.sum(self.weights * np.exp(-self.rates * y[..., None]), axis=-1)


def _inverse_gaussian(mean, shape, z, u):
    """Michael-Schucany-Haas transform of a normal ``z`` and uniform ``u``."""
    k = mean * z * z / (2 * shape)
    x = mean / (1 + k + np.sqrt(k * k + 2 * k))
    return np.where(u <= mean / (mean + x), x, mean * mean / x)


def _initial_positions(x0, n, rng, antithetic, start, paths):
    if callable(getattr(x0, "ppf", None)):
        return np.asarray(x0.ppf(_uniforms(rng, (n,), antithetic)), dtype=float)
    if callable(x0):
        return np.asarray(x0(rng, n), dtype=float)
    x0 = np.asarray(x0, dtype=float)
    if x0.ndim == 0:
        return np.full(n, float(x0))
    if x0.shape != (paths,):
        raise ValueError("per-path x0 must have one entry per path")
    return x0[start : start + n].copy()


def _simulate_block(model: MixedExpLevy, x0, horizon, params: McParams, block: int,
                    track_terminal: bool):
    start = block * BLOCK
    n = min(BLOCK, params.paths - start)
    rng = block_rng(params.seed, block)
    x = _initial_positions(x0, n, rng, params.antithetic, start, params.paths)
    x_start = x.copy()
    hz = np.asarray(horizon, dtype=float)
    hz = np.full(n, float(hz)) if hz.ndim == 0 else hz[start : start + n].astype(float)

    sig, eta = model.sigma, model.eta
    ell = model.ell if (model.m_plus or model.m_minus) else 0.0
    p_up, up, down = _jump_sides(model)
    bridge = params.bridge_correction
    grid = params.monitor_dt if not bridge else None

    t = np.zeros(n)
    tau = np.full(n, np.inf)
    over = np.full(n, np.nan)
    by_diff = np.zeros(n, dtype=bool)
    crossed = x < 0
    tau[crossed] = 0.0
    over[crossed] = x[crossed]
    active = ~crossed if not track_terminal else np.ones(n, dtype=bool)

    while np.any(active):
        u = _uniforms(rng, (N_UNIFORMS, n), params.antithetic)
        gap = -np.log(u[0]) / ell if ell > 0 else np.full(n, np.inf)
        dt = np.maximum(np.minimum(gap, hz - t), 0.0)
        if grid is not None:
            next_grid = (np.floor(t / grid + 1e-12) + 1) * grid
            dt = np.minimum(dt, next_grid - t)
        jumps = gap <= dt
        z = ndtri(u[1])
        end = x + eta * dt + sig * np.sqrt(dt) * z

        fresh = active & ~np.isfinite(tau)
        if bridge:
            if sig > 0:
                with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                    prob = np.where(end <= 0, 1.0, np.exp(-2 * x * end / (sig * sig * dt)))
                hit = fresh & (dt > 0) & (u[2] < prob)
                c = -np.abs(end)
                with np.errstate(divide="ignore", invalid="ignore"):
                    m = x / np.abs(c)
                    lam_ig = x * x / (sig * sig * dt)
                    w = _inverse_gaussian(m, lam_ig, ndtri(u[3]), u[4])
                    frac = np.where(c == 0, 1.0, w / (1 + w))
                    t_hit = t + dt * frac
            else:
                hit = fresh & (end < 0)
                with np.errstate(divide="ignore", invalid="ignore"):
                    t_hit = t + x / np.abs(eta) if eta != 0 else t + dt
            tau = np.where(hit, t_hit, tau)
            over = np.where(hit, 0.0, over)
            by_diff |= hit
        else:
            # endpoint monitoring only: segment ends, jump epochs and grid points
            hit = fresh & (end < 0)
            tau = np.where(hit, t + dt, tau)
            over = np.where(hit, end, over)
            by_diff |= hit

        x = np.where(active, end, x)
        t = np.where(active, t + dt, t)

        jumping = active & jumps
        if np.any(jumping):
            size = np.zeros(n)
            is_up = u[5] < p_up
            if up is not None:
                sel = jumping & is_up
                size[sel] = up(u[6][sel], u[7][sel])
            if down is not None:
                sel = jumping & ~is_up
                size[sel] = -down(u[6][sel], u[7][sel])
            x = np.where(jumping, x + size, x)
            jhit = jumping & ~np.isfinite(tau) & (x < 0)
            tau = np.where(jhit, t, tau)
            over = np.where(jhit, x, over)

        done = (t >= hz) | (np.isfinite(tau) & (not track_terminal))
        active = active & ~done
    return tau, over, by_diff, x, x_start


def simulate_first_passage(model: MixedExpLevy, x0, params: McParams, *,
                           workers: int | None = None, track_terminal: bool = False,
                           horizon=None) -> FirstPassageSample:
    """First-passage times below zero for ``params.paths`` independent paths.

    ``x0`` may be a number, an array with one start per path, an object with
    a ``ppf`` method (sampled by inversion), or a callable ``(rng, n)``.
    ``horizon`` overrides ``params.horizon`` and may be per path. With
    ``track_terminal`` every path runs to its horizon so ``x_end`` is the
    terminal value.
    """
    hz = params.horizon if horizon is None else horizon
    n_blocks = -(-params.paths // BLOCK)

    def run(b):
        return _simulate_block(model, x0, hz, params, b, track_terminal)

    nw = worker_count(workers)
    if nw == 1 or n_blocks == 1:
        parts = [run(b) for b in range(n_blocks)]
    else:
        with ThreadPoolExecutor(max_workers=nw) as pool:
            parts = list(pool.map(run, range(n_blocks)))
    tau, over, diff, xe, xs = (np.concatenate(arrs) for arrs in zip(*parts))
    return FirstPassageSample(tau, over, diff, xe, xs)


def simulate_time_changed_fp(solution, params: McParams, *, workers: int | None = None
                             ) -> FirstPassageSample:
    """First passage of ``Y = X(I(t))`` where ``I = Lambda / lam``.

    X is simulated up to ``I(horizon)`` and its passage time is mapped back
    through the inverse cumulative hazard.
    """
    curve, lam = solution.curve, solution.lam
    x_horizon = float(curve.cum_hazard(params.horizon)) / lam
    fp = simulate_first_passage(solution.model, solution.dist, params, workers=workers,
                                horizon=x_horizon)
    tau_y = np.full_like(fp.tau, np.inf)
    fin = np.isfinite(fp.tau)
    tau_y[fin] = np.minimum(curve.inv_cum_hazard(lam * fp.tau[fin]), params.horizon)
    return FirstPassageSample(tau_y, fp.overshoot, fp.crossed_by_diffusion, fp.x_end, fp.x_start)


def _jump_sides(model: MixedExpLevy):
    p_up = model.p if model.m_plus else 0.0
    if not model.m_minus:
        p_up = 1.0 if model.m_plus else 0.0
    up = _JumpSampler(model.up_weights, model.up_rates) if model.m_plus else None
    down = _JumpSampler(model.down_weights, model.down_rates) if model.m_minus else None
    return p_up, up, down


def sample_levy_increment(model: MixedExpLevy, t: float, paths: int, seed: int,
                          antithetic: bool = False) -> np.ndarray:
    """Exact draws of ``X_t - X_0``, blocked like the path simulator but on
    streams disjoint from it."""
    p_up, up, down = _jump_sides(model)
    ell = model.ell if (up is not None or down is not None) else 0.0
    out = []
    for b in range(-(-paths // BLOCK)):
        n = min(BLOCK, paths - b * BLOCK)
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(b, 1))))
        z = ndtri(_uniforms(rng, (n,), antithetic))
        x = model.eta * t + model.sigma * np.sqrt(t) * z
        if ell > 0:
            counts = rng.poisson(ell * t, n)
            total = int(counts.sum())
            u = _uniforms(rng, (3, total), False)
            size = np.zeros(total)
            is_up = u[0] < p_up
            if up is not None:
                size[is_up] = up(u[1][is_up], u[2][is_up])
            if down is not None:
                size[~is_up] = -down(u[1][~is_up], u[2][~is_up])
            np.add.at(x, np.repeat(np.arange(n), counts), size)
        out.append(x)
    return np.concatenate(out)


# -- statistics ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SurvivalEstimate:
    grid: np.ndarray
    survival: np.ndarray
    se: np.ndarray
    n: int


def survival_grid(samples, grid) -> SurvivalEstimate:
    """Empirical ``P(tau > t)`` with binomial standard errors; ``inf`` counts
    as surviving (right-censored beyond the horizon)."""
    s = np.asarray(samples, dtype=float)
    if s.size == 0:
        raise EmptySample("no samples")
    g = np.asarray(grid, dtype=float)
    srt = np.sort(s)
    surv = 1.0 - np.searchsorted(srt, g, side="right") / s.size
    se = np.sqrt(surv * (1 - surv) / s.size)
    return SurvivalEstimate(g, surv, se, s.size)


def ks_distance(samples, cdf) -> float:
    s = np.sort(np.asarray(samples, dtype=float))
    n = s.size
    if n == 0:
        raise EmptySample("no samples")
    f = np.asarray(cdf(s), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))
