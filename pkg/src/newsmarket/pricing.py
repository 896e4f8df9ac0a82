"""Log-price construction and calibration.

Price follows sentiment through a fast channel (a1*s, the immediate
repricing of positions) and a slow channel (the running integral of
a2*(s - s_star), capital flowing while sentiment sits away from the level
investors consider normal).  Calibration inverts this map by ordinary
least squares; the windowed temperature fit re-estimates beta1 per window
through the noise-averaged reference relation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ModelParams, Series
from .reference import solve_sbar
from .sentiment import equilibria_1d, integrate_sentiment

__all__ = [
    "PriceFit",
    "price_from_sentiment",
    "decompose_price",
    "calibrate_price",
    "initial_sentiment",
    "iterative_theta_fit",
]

THETA_GRID_LO = 1.0
THETA_GRID_HI = 1.3
THETA_GRID_STEP = 0.005
MIN_WINDOW = 60


@dataclass(frozen=True)
class PriceFit:
    """Calibrated price coefficients with residual diagnostics."""

    a1: float
    a2: float
    a4: float
    s_star: float
    residual_rms: float
    correlation: float


def _cumtrapz0(y: np.ndarray, step: float) -> np.ndarray:
    """Running trapezoidal integral with I[0] = 0."""
    out = np.empty_like(y)
    out[0] = 0.0
    np.cumsum(0.5 * step * (y[1:] + y[:-1]), out=out[1:])
    return out


def decompose_price(s: Series, params: ModelParams):
    """Split price into its fast and slow components.

    fast = a1*s; slow = trapezoidal integral of a2*(s - s_star) plus a4.
    The two sum exactly (bitwise) to the price_from_sentiment output.
    """
    fast = params.a1 * s.values
    slow = _cumtrapz0(params.a2 * (s.values - params.s_star), s.step) + params.a4
    return (Series(fast, s.start_index, s.step),
            Series(slow, s.start_index, s.step))


def price_from_sentiment(s: Series, params: ModelParams) -> Series:
    """Log price from a sentiment series; p(0) = a1*s(0) + a4."""
    fast, slow = decompose_price(s, params)
    return Series(fast.values + slow.values, s.start_index, s.step)


def calibrate_price(s: Series, p_obs: Series) -> PriceFit:
    """Least-squares fit of (a1, a2, a4, s_star) to an observed log price.

    Regressors are {s, running integral of s, t} plus an intercept; the
    time coefficient is -a2*s_star, which recovers s_star.  Raises
    "degenerate sentiment series" when the design is rank-deficient
    (constant s, for instance).
    """
    if len(s) != len(p_obs):
        raise ValueError("sentiment and price series must have equal length")
    n = len(s)
    if n < 30:
        raise ValueError("need at least 30 samples to calibrate")
    t = s.step * np.arange(n)
    integ = _cumtrapz0(s.values, s.step)
    design = np.column_stack([s.values, integ, t, np.ones(n)])
    coef, _, rank, _ = np.linalg.lstsq(design, p_obs.values, rcond=None)
    if rank < 4:
        raise ValueError("degenerate sentiment series")
    a1, a2, ct, a4 = (float(v) for v in coef)
    s_star = -ct / a2
    fitted = design @ coef
    resid = fitted - p_obs.values
    rms = float(np.sqrt(np.mean(resid**2)))
    corr = float(np.corrcoef(fitted, p_obs.values)[0, 1])
    return PriceFit(a1=a1, a2=a2, a4=a4, s_star=s_star,
                    residual_rms=rms, correlation=corr)


def _fit_window_fixed_sstar(s_vals, p_vals, s_star, step):
    """OLS of p on {s, integral of (s - s_star)} + intercept.

    Returns ((a1, a2, a4), residual sum of squares, fitted values).
    Raises on a rank-deficient window design.
    """
    n = len(s_vals)
    t = step * np.arange(n)
    reg2 = _cumtrapz0(s_vals, step) - s_star * t
    design = np.column_stack([s_vals, reg2, np.ones(n)])
    coef, _, rank, _ = np.linalg.lstsq(design, p_vals, rcond=None)
    if rank < 3:
        raise ValueError("degenerate sentiment series")
    resid = design @ coef - p_vals
    return coef, float(resid @ resid), design @ coef


def initial_sentiment(beta1: float, beta2: float, h0: float) -> float:
    """Most positive stable equilibrium of sentiment under drive h0.

    The standard starting point for integrations: the optimistic branch
    when it exists, the single root otherwise.
    """
    roots = equilibria_1d(beta1, beta2 * h0)
    stable = [r for r, kind in roots if kind == "stable"]
    return max(stable) if stable else roots[-1][0]


def iterative_theta_fit(H: Series, p_obs: Series, params: ModelParams,
                        window: int = 250, sigma: float = 0.3,
                        substeps: int = 8):
    """Windowed temperature fit: piecewise-constant beta1(t) = 1/theta(t).

    For each consecutive window, every candidate beta1 on the grid
    [1.0, 1.3] (step 0.005) gets: a reference level from solve_sbar, a
    sentiment path re-integrated from H with that beta1, and a restricted
    price refit of (a1, a2, a4).  The candidate with the smallest window
    residual wins; theta = 1/beta1.  Windows are non-overlapping; a
    trailing remainder is fitted as a shorter final window when it spans
    at least 60 days, else dropped.

    Returns (theta, p_fit) covering exactly the fitted days.
    """
    if window < MIN_WINDOW:
        raise ValueError(f"window must be >= {MIN_WINDOW} days")
    if not (0.0 < sigma < 1.0):
        raise ValueError("sigma must lie in (0, 1)")
    if len(H) != len(p_obs):
        raise ValueError("H and price series must have equal length")
    n = len(H)
    if n < window:
        raise ValueError("series shorter than one window")

    n_grid = int(round((THETA_GRID_HI - THETA_GRID_LO) / THETA_GRID_STEP)) + 1
    grid = np.linspace(THETA_GRID_LO, THETA_GRID_HI, n_grid)

    # One full-series integration per candidate; windows slice into it.
    paths = []
    stars = []
    for b1 in grid:
        pars = params.replace(beta1=float(b1))
        s0 = initial_sentiment(b1, params.beta2, H.values[0])
        paths.append(integrate_sentiment(H, s0, pars, substeps=substeps).values)
        stars.append(solve_sbar(float(b1), sigma))

    edges = list(range(0, n - window + 1, window))
    ends = [e + window for e in edges]
    if n - ends[-1] >= MIN_WINDOW:
        edges.append(ends[-1])
        ends.append(n)

    theta_vals = np.empty(ends[-1])
    fit_vals = np.empty(ends[-1])
    for lo, hi in zip(edges, ends):
        best = None
        for k, b1 in enumerate(grid):
            _, rss, fitted = _fit_window_fixed_sstar(
                paths[k][lo:hi], p_obs.values[lo:hi], stars[k], H.step)
            if best is None or rss < best[0]:
                best = (rss, float(b1), fitted)
        _, b1_win, fitted = best
        theta_vals[lo:hi] = 1.0 / b1_win
        fit_vals[lo:hi] = fitted
    return (Series(theta_vals, H.start_index, H.step),
            Series(fit_vals, H.start_index, H.step))
