"""Time-series diagnostics: returns, moments, correlation, volatility,
Fourier smoothing, and multichannel singular spectrum reconstruction."""

from __future__ import annotations

import math

import numpy as np
from scipy import stats

from .core import Series

__all__ = [
    "log_returns",
    "distribution_stats",
    "autocorrelation",
    "cross_correlation",
    "rolling_volatility",
    "fourier_lowpass",
    "mssa_leading",
]


def _lag_samples(series: Series, days: float, what: str) -> int:
    lag = days / series.step
    if abs(lag - round(lag)) > 1e-9 or round(lag) < 1:
        raise ValueError(f"{what} of {days} days is not a positive "
                         f"multiple of the {series.step}-day step")
    return int(round(lag))


def log_returns(p: Series, horizon_days: int) -> Series:
    """Differences p_t - p_(t-horizon); p is already a log price.

    The output keeps p's grid, starting `horizon_days` later.
    """
    lag = _lag_samples(p, horizon_days, "return horizon")
    if len(p) <= lag:
        raise ValueError(f"series length {len(p)} cannot support a "
                         f"{horizon_days}-day return")
    vals = p.values[lag:] - p.values[:-lag]
    return Series(vals, start_index=p.start_index + horizon_days,
                  step=p.step)


def distribution_stats(returns: Series, normalize: bool = False):
    """(mean, variance, skewness, excess_kurtosis) of a sample.

    Variance uses the n-1 convention; skewness and excess kurtosis are
    the plain moment-ratio estimators.  normalize first rescales the
    sample to zero mean and unit variance (affecting only the first two
    outputs; the shape moments are scale-free).
    """
    if len(returns) < 30:
        raise ValueError("need at least 30 samples for stable moments")
    x = returns.values
    var = float(np.var(x, ddof=1))
    if var == 0.0:
        raise ValueError("zero variance: shape moments undefined")
    if normalize:
        x = (x - np.mean(x)) / math.sqrt(var)
    mean = float(np.mean(x))
    variance = float(np.var(x, ddof=1))
    skewness = float(stats.skew(x, bias=True))
    kurt = float(stats.kurtosis(x, fisher=True, bias=True))
    return mean, variance, skewness, kurt


def autocorrelation(x: Series, max_lag: int) -> list:
    """Sample ACF with biased normalization, as (lag, acf, band) rows.

    band is the white-noise 95% half-width 1.96/sqrt(n), identical for
    every lag.  acf at lag 0 is exactly 1.
    """
    if max_lag < 0:
        raise ValueError("max_lag must be >= 0")
    n = len(x)
    if max_lag >= n:
        raise ValueError("max_lag must be below the series length")
    d = x.values - np.mean(x.values)
    c0 = float(np.dot(d, d))
    if c0 == 0.0:
        raise ValueError("zero variance: autocorrelation undefined")
    band = 1.96 / math.sqrt(n)
    out = [(0, 1.0, band)]
    for k in range(1, max_lag + 1):
        out.append((k, float(np.dot(d[:-k], d[k:])) / c0, band))
    return out


def cross_correlation(x: Series, y: Series, lags) -> list:
    """Pearson correlation of x_t with y_(t+lag) for each requested lag."""
    if len(x) != len(y):
        raise ValueError("series lengths differ")
    n = len(x)
    xv, yv = x.values, y.values
    out = []
    for lag in lags:
        k = int(lag)
        if abs(k) >= n - 1:
            raise ValueError(f"lag {k} leaves fewer than two pairs")
        if k >= 0:
            a, b = xv[:n - k], yv[k:]
        else:
            a, b = xv[-k:], yv[:n + k]
        sa, sb = np.std(a), np.std(b)
        if sa == 0.0 or sb == 0.0:
            raise ValueError(f"zero variance in the lag-{k} overlap")
        out.append((k, float(np.corrcoef(a, b)[0, 1])))
    return out


def rolling_volatility(x: Series, increment_days: int,
                       window_days: int) -> Series:
    """Stdev of non-overlapping increment-day differences in a trailing
    window, evaluated at every date with a full window behind it.

    The window holds m = floor(window/increment) increments; the output
    starts m*increment days after the input (shortened head).
    """
    inc = _lag_samples(x, increment_days, "increment")
    win = _lag_samples(x, window_days, "window")
    if win <= inc:
        raise ValueError("window must exceed the increment")
    m = win // inc
    if m < 2:
        raise ValueError("window must contain at least two increments")
    n = len(x)
    if n <= m * inc:
        raise ValueError(f"series too short: need more than {m * inc} "
                         "samples")
    diffs = x.values[inc:] - x.values[:-inc]          # diffs[t-inc] = x_t - x_(t-inc)
    anchors = np.arange(m * inc, n)
    cols = anchors[:, None] - inc * np.arange(m)[None, :] - inc
    vols = np.std(diffs[cols], axis=1, ddof=1)
    return Series(vols, start_index=x.start_index + m * inc * x.step,
                  step=x.step)


def fourier_lowpass(x: Series, min_period_days: float) -> Series:
    """Zero every Fourier bin with period below min_period, keep the rest.

    The mean (zero-frequency bin) always survives.  Endpoint behavior
    reflects the transform's periodic extension, so the first and last
    half-periods are smoothed toward each other; treat them as edge
    artifacts.  The operation is a projection: applying it twice changes
    nothing.
    """
    n = len(x)
    if n < 2:
        raise ValueError("need at least two samples")
    spec = np.fft.rfft(x.values)
    k = np.arange(len(spec))
    period = np.empty(len(spec))
    period[0] = np.inf
    period[1:] = n * x.step / k[1:]
    spec[period < min_period_days] = 0.0
    return Series(np.fft.irfft(spec, n=n), start_index=x.start_index,
                  step=x.step)


def _hankel_average(block: np.ndarray, n: int) -> np.ndarray:
    """Average a (window x K) matrix over its anti-diagonals."""
    w, k = block.shape
    sums = np.zeros(n)
    counts = np.zeros(n)
    for i in range(w):
        sums[i:i + k] += block[i]
        counts[i:i + k] += 1.0
    return sums / counts


def mssa_leading(x: Series, y: Series, window: int = 250,
                 n_components: int = 2):
    """Joint singular-spectrum reconstruction of two series from their
    leading components.

    Both series are standardized, embedded as lagged trajectory matrices,
    and stacked; the eigenvectors of the joint lag-covariance with the
    n_components largest eigenvalues define the reconstruction subspace.
    Each output is diagonal-averaged back to full length and returned on
    the original scale.  An oscillatory mode occupies a pair of
    components, so n_components = 2 isolates the leading quasiperiodic
    cycle shared by the two channels.
    """
    if len(x) != len(y):
        raise ValueError("series lengths differ")
    n = len(x)
    if not 2 <= window <= n // 2:
        raise ValueError(f"window must lie in [2, {n // 2}] for length {n}")
    if n_components < 1:
        raise ValueError("n_components must be >= 1")
    if n_components > 2 * window:
        raise ValueError("n_components exceeds the number of channels")

    mx, my = float(np.mean(x.values)), float(np.mean(y.values))
    sx, sy = float(np.std(x.values)), float(np.std(y.values))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("constant input has no spectral structure")
    zx = (x.values - mx) / sx
    zy = (y.values - my) / sy

    k = n - window + 1
    idx = np.arange(window)[:, None] + np.arange(k)[None, :]
    traj = np.vstack([zx[idx], zy[idx]])          # (2*window, K)
    cov = traj @ traj.T / k
    eigvals, eigvecs = np.linalg.eigh(cov)        # ascending order
    lead = eigvecs[:, -n_components:]
    rec = lead @ (lead.T @ traj)

    x_rec = _hankel_average(rec[:window], n) * sx + mx
    y_rec = _hankel_average(rec[window:], n) * sy + my
    return (Series(x_rec, start_index=x.start_index, step=x.step),
            Series(y_rec, start_index=y.start_index, step=y.step))
