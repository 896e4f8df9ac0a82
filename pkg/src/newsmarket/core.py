"""Shared domain types: parameters, states, series, and the random source.

Everything downstream (sentiment integration, the closed market model,
phase analysis, the spin-kinetics oracle) shares these carriers.  Time is
measured in business days throughout; rates are per business day.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.special import ndtri

__all__ = [
    "ModelParams",
    "MarketState",
    "Series",
    "RandomSource",
    "validate",
    "parse_kv_file",
    "load_params",
    "read_series",
    "write_series",
]


@dataclass(frozen=True)
class ModelParams:
    """All rate, coupling, and noise constants of the sentiment/price model.

    One record carries both the empirical-mode fields (driven by a measured
    information series) and the theory-mode fields (closed feedback loop);
    fields a given mode does not use default to zero.

    Units: w_s, w_h, a2 are 1/business-day; gamma is day-valued (it
    multiplies a rate); everything else is dimensionless.
    """

    w_s: float
    w_h: float
    beta1: float
    beta2: float
    a1: float
    a2: float
    beta3: float = 0.0
    beta4: float = 0.0
    gamma: float = 0.0
    delta: float = 0.0
    kappa: float = 0.0
    a4: float = 0.0
    s_star: float = 0.0
    h_bar: float = 0.0

    @property
    def eta(self) -> float:
        """Relaxation-rate ratio w_h / w_s."""
        return self.w_h / self.w_s

    @property
    def gamma_bar(self) -> float:
        """Feedback gain in rescaled time, w_s * gamma."""
        return self.w_s * self.gamma

    @property
    def c(self) -> float:
        """Potential-tilt constant beta2 * h_bar (empirical mode)."""
        return self.beta2 * self.h_bar

    def validate(self) -> list[str]:
        """Return one message per violated invariant (empty when valid)."""
        bad = []
        if not (self.w_s > 0):
            bad.append("w_s must be positive")
        if not (self.w_h > 0):
            bad.append("w_h must be positive")
        for name in ("beta1", "beta2", "beta3", "beta4"):
            if getattr(self, name) < 0:
                bad.append(f"{name} must be non-negative")
        if self.gamma < 0:
            bad.append("gamma must be non-negative")
        if self.delta < 0:
            bad.append("delta must be non-negative")
        if self.kappa < 0:
            bad.append("kappa must be non-negative")
        if not (self.a1 > 0):
            bad.append("a1 must be positive")
        if not (self.a2 > 0):
            bad.append("a2 must be positive")
        if abs(self.s_star) > 1:
            bad.append("s_star must lie in [-1, 1]")
        for name in ("w_s", "w_h", "beta1", "beta2", "beta3", "beta4",
                     "gamma", "delta", "kappa", "a1", "a2", "a4",
                     "s_star", "h_bar"):
            if not math.isfinite(getattr(self, name)):
                bad.append(f"{name} must be finite")
        return bad

    def replace(self, **changes) -> "ModelParams":
        return replace(self, **changes)


def validate(params: ModelParams) -> ModelParams:
    """Return params unchanged iff every invariant holds; raise otherwise.

    The error message lists every violated invariant by field name.
    """
    bad = params.validate()
    if bad:
        raise ValueError("invalid parameters: " + "; ".join(bad))
    return params


@dataclass(frozen=True)
class MarketState:
    """Instantaneous (s, h, p): sentiment, information flow, log price."""

    s: float
    h: float
    p: float = 0.0

    def __post_init__(self):
        bad = []
        if not (abs(self.s) <= 1):
            bad.append("s must lie in [-1, 1]")
        if not (abs(self.h) <= 1):
            bad.append("h must lie in [-1, 1]")
        if not math.isfinite(self.p):
            bad.append("p must be finite")
        if bad:
            raise ValueError("invalid state: " + "; ".join(bad))


class Series:
    """Uniformly sampled business-day series.

    start_index is the integer day index of the first sample, step the
    spacing in days (1.0 for daily series).  values is a 1-D float array.
    """

    __slots__ = ("start_index", "step", "values")

    def __init__(self, values, start_index: int = 0, step: float = 1.0):
        values = np.asarray(values, dtype=float)
        if values.ndim != 1:
            raise ValueError("series values must be one-dimensional")
        if len(values) < 1:
            raise ValueError("series must contain at least one sample")
        if not np.all(np.isfinite(values)):
            i = int(np.flatnonzero(~np.isfinite(values))[0])
            raise ValueError(f"non-finite sample at position {i}")
        if not (step > 0):
            raise ValueError("step must be positive")
        self.values = values
        self.start_index = int(start_index)
        self.step = float(step)

    def __len__(self) -> int:
        return len(self.values)

    def times(self) -> np.ndarray:
        """Sample times in business days."""
        return self.start_index + self.step * np.arange(len(self.values))

    def __repr__(self) -> str:
        return (f"Series(n={len(self.values)}, start_index={self.start_index}, "
                f"step={self.step})")


class RandomSource:
    """Deterministic random stream addressed by (seed, stream_id).

    Identical (seed, stream_id) produce bitwise-identical draw sequences
    across runs and thread schedules: the underlying bit generator is
    PCG64 keyed by SeedSequence(entropy=seed, spawn_key=(stream_id,)),
    and Gaussian draws use the inverse-CDF transform (scipy ndtri) of the
    generator's uniforms rather than a rejection method, so the mapping
    from bit stream to normal deviates is a fixed pure function.
    """

    __slots__ = ("seed", "stream_id", "_gen")

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(entropy=self.seed,
                                    spawn_key=(self.stream_id,))
        self._gen = np.random.Generator(np.random.PCG64(ss))

    def substream(self, offset: int) -> "RandomSource":
        """Independent stream at stream_id + offset (one per realization)."""
        return RandomSource(self.seed, self.stream_id + int(offset))

    def uniform(self, size=None):
        """Uniform draws on [0, 1)."""
        return self._gen.random(size)

    def standard_normal(self, size=None):
        """Standard normal via inverse CDF of the uniform stream."""
        u = self._gen.random(size)
        # Guard the measure-zero u == 0 (ndtri(0) = -inf).
        tiny = np.finfo(float).tiny
        if size is None:
            return float(ndtri(u if u > 0.0 else tiny))
        u = np.where(u > 0.0, u, tiny)
        return ndtri(u)

    def exponential(self, size=None):
        """Unit-mean exponential draws, -log(1 - U) with U in [0, 1)."""
        u = self._gen.random(size)
        return -np.log1p(-u)

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed}, stream_id={self.stream_id})"


# ---------------------------------------------------------------------------
# plain-text interfaces


def parse_kv_file(path) -> dict[str, float]:
    """Parse a `name = value` config file; `#` starts a comment.

    Returns the raw name -> float mapping.  Malformed lines raise with the
    line number.
    """
    out: dict[str, float] = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}: line {lineno}: expected 'name = value'")
        name, _, value = line.partition("=")
        name = name.strip()
        try:
            out[name] = float(value.strip())
        except ValueError:
            raise ValueError(
                f"{path}: line {lineno}: cannot parse value for {name!r}"
            ) from None
    return out


_PARAM_FIELDS = ("w_s", "w_h", "beta1", "beta2", "beta3", "beta4", "gamma",
                 "delta", "kappa", "a1", "a2", "a4", "s_star", "h_bar")


def load_params(path, **overrides) -> ModelParams:
    """Load ModelParams from a key/value file.  Unknown keys are errors."""
    raw = parse_kv_file(path)
    raw.update(overrides)
    unknown = sorted(set(raw) - set(_PARAM_FIELDS))
    if unknown:
        raise ValueError(f"{path}: unknown parameter keys: {', '.join(unknown)}")
    return validate(ModelParams(**raw))


def read_series(path, column=None) -> Series:
    """Read one value column of a `date_index,...` CSV into a Series.

    `#` lines are comments; an optional non-numeric first row names the
    columns.  column picks the value column by name or 0-based position
    (default: the first column after the index).  Malformed or
    non-finite rows raise with the line number; indices must be
    uniformly spaced.
    """
    indices: list[float] = []
    values: list[float] = []
    names: list[str] | None = None
    col = column if isinstance(column, int) else None
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if names is None and not values:
            try:
                float(parts[0])
            except ValueError:
                names = parts
                if isinstance(column, str):
                    if column not in names:
                        raise ValueError(
                            f"{path}: no column named {column!r}; "
                            f"have {', '.join(names)}") from None
                    col = names.index(column)
                continue
        if col is None:
            if isinstance(column, str):
                raise ValueError(f"{path}: column {column!r} requested but "
                                 "the file has no header row")
            col = 1
        if len(parts) <= max(col, 1):
            raise ValueError(f"{path}: line {lineno}: expected at least "
                             f"{max(col, 1) + 1} columns")
        try:
            idx = float(parts[0])
            val = float(parts[col])
        except ValueError:
            raise ValueError(f"{path}: line {lineno}: malformed row") from None
        if not math.isfinite(val):
            raise ValueError(f"{path}: line {lineno}: non-finite value")
        indices.append(idx)
        values.append(val)
    if not values:
        raise ValueError(f"{path}: no data rows")
    if len(values) == 1:
        return Series(values, start_index=int(indices[0]), step=1.0)
    steps = np.diff(indices)
    step = steps[0]
    if step <= 0 or not np.allclose(steps, step, rtol=0, atol=1e-9):
        raise ValueError(f"{path}: indices are not uniformly increasing")
    return Series(values, start_index=int(round(indices[0])), step=float(step))


def write_series(path, series: Series, label: str = "value",
                 header: list[str] | None = None) -> None:
    """Write a Series as `date_index,<label>` CSV with `#` header lines."""
    lines = [f"# {h}" for h in (header or [])]
    lines.append(f"date_index,{label}")
    t = series.times()
    for ti, vi in zip(t, series.values):
        ts = f"{int(ti)}" if series.step == int(series.step) else repr(float(ti))
        lines.append(f"{ts},{repr(float(vi))}")
    Path(path).write_text("\n".join(lines) + "\n")
