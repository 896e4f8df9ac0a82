"""One-component sentiment dynamics driven by a daily information series.

The sentiment s relaxes at rate w_s toward tanh(beta1*s + beta2*H) where
H is the measured direct-information flow.  The same right-hand side is
the negative gradient of a potential that is single-welled for beta1 < 1
and double-welled for beta1 > 1; a nonzero information mean tilts the
well.  All of the module is pure computation on scalars and Series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ModelParams, Series

__all__ = [
    "STABLE",
    "UNSTABLE",
    "PotentialCurve",
    "sentiment_rhs",
    "integrate_sentiment",
    "potential_u0",
    "potential_uc",
    "equilibria_1d",
]

STABLE = "stable"
UNSTABLE = "unstable"

_SCAN_POINTS = 10_000
_BISECT_TOL = 1e-12
_BOUND_SLACK = 1e-9


@dataclass(frozen=True)
class PotentialCurve:
    """Sampled potential with its interior extrema.

    extrema is a list of (s, kind) with kind "min" or "max"; minima and
    maxima alternate along s.
    """

    s_grid: np.ndarray
    u_values: np.ndarray
    extrema: list


def sentiment_rhs(s: float, H: float, params: ModelParams) -> float:
    """Drift of sentiment at (s, H): -w_s*s + w_s*tanh(beta1*s + beta2*H)."""
    return -params.w_s * s + params.w_s * math.tanh(
        params.beta1 * s + params.beta2 * H)


def integrate_sentiment(H: Series, s0: float, params: ModelParams,
                        substeps: int = 8) -> Series:
    """Integrate sentiment over the daily grid of H.

    Classical 4-stage Runge-Kutta with `substeps` steps per day; H is held
    constant within each day (zero-order hold).  The drift points inward
    at s = +-1 for any finite H, so the integrator asserts |s| <= 1 + 1e-9
    and raises rather than clipping: a bound violation means an integrator
    bug, not a modeling outcome.
    """
    if H.step != 1.0:
        raise ValueError("H must be sampled daily (step = 1)")
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    if abs(s0) > 1:
        raise ValueError("s0 must lie in [-1, 1]")
    w_s = params.w_s
    b1 = params.beta1
    b2 = params.beta2
    hvals = H.values
    n = len(hvals)
    out = np.empty(n)
    out[0] = s = float(s0)
    dt = 1.0 / substeps
    tanh = math.tanh
    for d in range(n - 1):
        drive = b2 * hvals[d]
        for _ in range(substeps):
            k1 = w_s * (tanh(b1 * s + drive) - s)
            y = s + 0.5 * dt * k1
            k2 = w_s * (tanh(b1 * y + drive) - y)
            y = s + 0.5 * dt * k2
            k3 = w_s * (tanh(b1 * y + drive) - y)
            y = s + dt * k3
            k4 = w_s * (tanh(b1 * y + drive) - y)
            s = s + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
            if abs(s) > 1.0 + _BOUND_SLACK:
                raise RuntimeError(
                    f"integrator failure: |s| = {abs(s)} beyond 1 at day {d}")
        out[d + 1] = s
    return Series(out, start_index=H.start_index, step=1.0)


def _log_cosh(x: float) -> float:
    ax = abs(x)
    return ax + math.log1p(math.exp(-2.0 * ax)) - math.log(2.0)


def potential_u0(params: ModelParams, grid_size: int = 1001) -> PotentialCurve:
    """Symmetric sentiment potential w_s*(s^2/2 - ln cosh(beta1*s)/beta1)."""
    return potential_uc(params, 0.0, grid_size)


def potential_uc(params: ModelParams, c: float,
                 grid_size: int = 1001) -> PotentialCurve:
    """Tilted sentiment potential w_s*(s^2/2 - ln cosh(beta1*s + c)/beta1).

    A positive tilt c deepens the positive well; above a critical tilt the
    negative minimum disappears.  Extrema are located exactly (roots of
    s = tanh(beta1*s + c)), not from the sampled grid.
    """
    if grid_size < 3:
        raise ValueError("grid_size must be >= 3")
    b1 = params.beta1
    grid = np.linspace(-1.0, 1.0, grid_size)
    if b1 > 0:
        u = params.w_s * (0.5 * grid**2
                          - np.array([_log_cosh(b1 * s + c) for s in grid]) / b1)
    else:
        # beta1 -> 0 limit: ln cosh(beta1*s + c)/beta1 -> s*tanh(c) + const.
        u = params.w_s * (0.5 * grid**2 - grid * math.tanh(c))
    extrema = [(s, "min" if kind == STABLE else "max")
               for s, kind in equilibria_1d(b1, c)]
    return PotentialCurve(s_grid=grid, u_values=u, extrema=extrema)


def equilibria_1d(beta1: float, c: float) -> list:
    """All roots of s = tanh(beta1*s + c) in [-1, 1] with their stability.

    Sign-change bracketing on a 10^4-point grid, refined by bisection to
    1e-12.  A root is stable when d/ds[tanh(beta1*s + c) - s] < 0 there.
    Returns (s_root, "stable"|"unstable") sorted by s.
    """
    if beta1 < 0:
        raise ValueError("beta1 must be non-negative")

    def g(s):
        return math.tanh(beta1 * s + c) - s

    grid = np.linspace(-1.0, 1.0, _SCAN_POINTS)
    vals = np.array([g(s) for s in grid])
    roots = []
    for i in range(len(grid) - 1):
        a, b = grid[i], grid[i + 1]
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            roots.append(a)
            continue
        if fa * fb < 0.0:
            while b - a > _BISECT_TOL:
                m = 0.5 * (a + b)
                fm = g(m)
                if fm == 0.0:
                    a = b = m
                    break
                if fa * fm < 0.0:
                    b = m
                else:
                    a, fa = m, fm
            roots.append(0.5 * (a + b))
    if vals[-1] == 0.0:
        roots.append(grid[-1])
    # Merge duplicates from roots landing on grid nodes.
    merged = []
    for r in sorted(roots):
        if not merged or r - merged[-1] > 10 * _BISECT_TOL:
            merged.append(r)
    out = []
    for r in merged:
        slope = beta1 / math.cosh(beta1 * r + c) ** 2 - 1.0
        out.append((r, STABLE if slope < 0 else UNSTABLE))
    return out
