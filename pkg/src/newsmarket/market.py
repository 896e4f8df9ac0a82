"""Closed two-component market model with price feedback and daily noise.

Sentiment s relaxes toward tanh(beta1*s + beta2*h); the information flow h
relaxes toward a tanh of the perceived price trend.  In the simplified
mode that trend is gamma*ds/dt + delta (the sentiment drift substituted
analytically, which closes the system); the full mode keeps the separate
couplings beta3*s + beta4*h plus kappa1*(a1*ds/dt + a2*(s - s_star)) with
kappa1 = gamma/a1.  Noise is white on the daily grid only: one standard
normal xi_d per business day, held constant across that day's substeps.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import MarketState, ModelParams, RandomSource, Series, validate
from .pricing import price_from_sentiment

__all__ = [
    "SIMPLIFIED",
    "FULL",
    "SimulationRun",
    "drift",
    "simulate",
    "ensemble",
    "noise_dominance_map",
]

SIMPLIFIED = "simplified"
FULL = "full"

_BOUND_SLACK = 1e-9
_WORKERS_ENV = "NEWSMARKET_WORKERS"


def _drift_pair(s: float, h: float, params: ModelParams, xi: float,
                mode: str, beta1: float):
    """Deterministic drift (ds/dt, dh/dt) at (s, h) with held noise xi."""
    ds = -params.w_s * s + params.w_s * math.tanh(beta1 * s + params.beta2 * h)
    if mode == SIMPLIFIED:
        arg = params.gamma * ds + params.delta + params.kappa * xi
    else:
        kappa1 = params.gamma / params.a1
        arg = (params.beta3 * s + params.beta4 * h
               + kappa1 * (params.a1 * ds + params.a2 * (s - params.s_star))
               + params.kappa * xi)
    dh = -params.w_h * h + params.w_h * math.tanh(arg)
    return ds, dh


def drift(state: MarketState, params: ModelParams, mode: str = SIMPLIFIED):
    """Deterministic drift (ds_dt, dh_dt) of the closed system at a state."""
    if mode not in (SIMPLIFIED, FULL):
        raise ValueError(f"unknown mode {mode!r}")
    return _drift_pair(state.s, state.h, params, 0.0, mode, params.beta1)


@dataclass(frozen=True)
class SimulationRun:
    """One realization on the daily grid.

    s, h, p are daily Series; xi holds the realized daily noise draws
    (zeros when kappa = 0 or no source was supplied).
    """

    s: Series
    h: Series
    p: Series
    params: ModelParams
    seed: int | None
    stream_id: int | None
    mode: str
    theta_profile: Series | None = None
    xi: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def states(self) -> list:
        """The run as MarketState objects (materialized on demand)."""
        return [MarketState(s=float(a), h=float(b), p=float(c))
                for a, b, c in zip(self.s.values, self.h.values, self.p.values)]


def simulate(params: ModelParams, init: MarketState, horizon_days: int,
             substeps: int = 8, rng: RandomSource | None = None,
             theta_profile: Series | None = None, mode: str = SIMPLIFIED,
             beta1_shift: float = 0.0) -> SimulationRun:
    """Integrate the closed system for horizon_days daily samples.

    One noise draw per day, zero-order held over the day's `substeps`
    Runge-Kutta steps.  Day 0 is the initial state; p is accumulated from
    the daily sentiment path with the same trapezoidal rule as the pricing
    module.  theta_profile (length >= horizon) overrides beta1 daily as
    1/theta(day); beta2 is never rescaled.  beta1_shift is added to
    whatever beta1 is in force (a documented variant of the
    temperature-modulated runs).
    """
    validate(params)
    if mode not in (SIMPLIFIED, FULL):
        raise ValueError(f"unknown mode {mode!r}")
    if horizon_days < 1:
        raise ValueError("horizon_days must be >= 1")
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    if theta_profile is not None and len(theta_profile) < horizon_days:
        raise ValueError("theta profile shorter than horizon")
    if params.kappa != 0.0 and rng is None:
        raise ValueError("noisy run (kappa != 0) requires a RandomSource")

    n = horizon_days
    s_out = np.empty(n)
    h_out = np.empty(n)
    xi_seq = np.zeros(max(n - 1, 0))
    s, h = init.s, init.h
    s_out[0] = s
    h_out[0] = h
    dt = 1.0 / substeps
    noisy = params.kappa != 0.0 and rng is not None
    for d in range(n - 1):
        beta1 = (params.beta1 if theta_profile is None
                 else 1.0 / theta_profile.values[d]) + beta1_shift
        xi = rng.standard_normal() if noisy else 0.0
        xi_seq[d] = xi
        for _ in range(substeps):
            k1s, k1h = _drift_pair(s, h, params, xi, mode, beta1)
            k2s, k2h = _drift_pair(s + 0.5 * dt * k1s, h + 0.5 * dt * k1h,
                                   params, xi, mode, beta1)
            k3s, k3h = _drift_pair(s + 0.5 * dt * k2s, h + 0.5 * dt * k2h,
                                   params, xi, mode, beta1)
            k4s, k4h = _drift_pair(s + dt * k3s, h + dt * k3h,
                                   params, xi, mode, beta1)
            s = s + dt * (k1s + 2.0 * k2s + 2.0 * k3s + k4s) / 6.0
            h = h + dt * (k1h + 2.0 * k2h + 2.0 * k3h + k4h) / 6.0
            if abs(s) > 1.0 + _BOUND_SLACK or abs(h) > 1.0 + _BOUND_SLACK:
                raise RuntimeError(
                    f"integrator failure at day {d}: state left [-1, 1] "
                    f"(s = {s}, h = {h})")
        s_out[d + 1] = s
        h_out[d + 1] = h

    s_series = Series(s_out, start_index=0, step=1.0)
    h_series = Series(h_out, start_index=0, step=1.0)
    p_series = price_from_sentiment(s_series, params)
    # p(0) = a1*s(0) + a4 by the pricing convention; add init.p as offset.
    if init.p != 0.0:
        p_series = Series(p_series.values + init.p, 0, 1.0)
    return SimulationRun(
        s=s_series, h=h_series, p=p_series, params=params,
        seed=rng.seed if rng is not None else None,
        stream_id=rng.stream_id if rng is not None else None,
        mode=mode, theta_profile=theta_profile, xi=xi_seq)


def _run_realization(args):
    (params, init, horizon, substeps, seed, stream, theta_profile, mode,
     shift) = args
    return simulate(params, init, horizon, substeps,
                    RandomSource(seed, stream), theta_profile, mode, shift)


def ensemble(params: ModelParams, init: MarketState, horizon: int,
             n_realizations: int, rng: RandomSource,
             theta_profile: Series | None = None, mode: str = SIMPLIFIED,
             substeps: int = 8, beta1_shift: float = 0.0,
             workers: int | None = None):
    """Run n_realizations with independent substreams; realization i uses
    stream_id = rng.stream_id + i.

    Returns (mean sentiment Series, list of SimulationRun).  Worker count
    comes from the NEWSMARKET_WORKERS environment variable unless passed
    explicitly; results are identical for any worker count.
    """
    if n_realizations < 1:
        raise ValueError("n_realizations must be >= 1")
    if workers is None:
        workers = int(os.environ.get(_WORKERS_ENV, "1"))
    jobs = [(params, init, horizon, substeps, rng.seed, rng.stream_id + i,
             theta_profile, mode, beta1_shift)
            for i in range(n_realizations)]
    if workers > 1 and n_realizations > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_run_realization, jobs))
    else:
        runs = [_run_realization(j) for j in jobs]
    mean = np.mean([r.s.values for r in runs], axis=0)
    return Series(mean, start_index=0, step=1.0), runs


def noise_dominance_map(params: ModelParams, s_grid, h_grid) -> np.ndarray:
    """Feedback-to-noise ratio gamma*|ds/dt|/kappa on an (s, h) grid.

    Entry [i, j] corresponds to (s_grid[i], h_grid[j]).  Large values mark
    regions where the deterministic feedback dwarfs the noise; the ratio
    vanishes on the sentiment nullcline, where noise dominates.
    """
    if not (params.kappa > 0):
        raise ValueError("kappa must be positive for the dominance map")
    s = np.asarray(s_grid, dtype=float)[:, None]
    h = np.asarray(h_grid, dtype=float)[None, :]
    ds = -params.w_s * s + params.w_s * np.tanh(
        params.beta1 * s + params.beta2 * h)
    return params.gamma * np.abs(ds) / params.kappa
