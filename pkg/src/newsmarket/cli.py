"""Command-line front end: reproducible runs of every pipeline.

Every output file starts with comment lines recording the package
version, the command, the parameters, and the seed, so a file is enough
to rerun the computation that produced it.  Identical invocations give
byte-identical files; nothing time- or host-dependent is written.

Worker count for ensembles comes from the NEWSMARKET_WORKERS environment
variable (default 1); results do not depend on it.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, analytics, market, phase, sentiment
from .core import (MarketState, ModelParams, RandomSource, Series,
                   _PARAM_FIELDS, load_params, parse_kv_file, read_series,
                   write_series)
from .glauber import (SpinMacroState, SpinSystemConfig, meanfield_compare,
                      simulate_glauber)
from .pricing import initial_sentiment, price_from_sentiment

__all__ = ["main"]

_SPIN_FIELDS = ("N_s", "N_h", "J11", "J12", "J21", "J22", "mu_s", "mu_h",
                "theta", "w_s", "w_h", "b_s", "b_h")


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    # repr of a float is the shortest exact round-trip form.
    return repr(float(v))


def _params_line(params: ModelParams) -> str:
    return "params: " + " ".join(
        f"{k}={_fmt(getattr(params, k))}" for k in _PARAM_FIELDS)


def _config_line(config: SpinSystemConfig) -> str:
    return "config: " + " ".join(
        f"{k}={_fmt(getattr(config, k))}" for k in _SPIN_FIELDS)


def _header(command: str, *extra: str) -> list:
    return [f"newsmarket {__version__}", f"command: {command}", *extra]


def _write_table(path, header: list, columns: list) -> None:
    """columns is a list of (name, values); all values equal length."""
    names = [c[0] for c in columns]
    cols = [c[1] for c in columns]
    lines = [f"# {h}" for h in header]
    lines.append(",".join(names))
    for row in zip(*cols):
        lines.append(",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def _write_report(path, header: list, items: list) -> None:
    lines = [f"# {h}" for h in header]
    lines += [f"{k} = {_fmt(v)}" for k, v in items]
    Path(path).write_text("\n".join(lines) + "\n")


def _load_spin_config(path) -> SpinSystemConfig:
    raw = parse_kv_file(path)
    unknown = sorted(set(raw) - set(_SPIN_FIELDS))
    if unknown:
        raise ValueError(f"{path}: unknown config keys: {', '.join(unknown)}")
    kwargs = dict(raw)
    for key in ("N_s", "N_h"):
        if key not in kwargs:
            raise ValueError(f"{path}: missing required key {key}")
        if kwargs[key] != int(kwargs[key]):
            raise ValueError(f"{path}: {key} must be an integer")
        kwargs[key] = int(kwargs[key])
    return SpinSystemConfig(**kwargs)


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate_empirical(args) -> int:
    params = load_params(args.params)
    h_series = read_series(args.input)
    s0 = (args.init_s if args.init_s is not None
          else initial_sentiment(params.beta1, params.beta2,
                                 float(h_series.values[0])))
    s = sentiment.integrate_sentiment(h_series, s0, params,
                                      substeps=args.substeps)
    p = price_from_sentiment(s, params)
    head = _header("simulate-empirical", _params_line(params),
                   f"input: {Path(args.input).name}",
                   f"init_s: {_fmt(s0)}")
    _write_table(args.out, head, [
        ("date_index", s.times().astype(int)),
        ("H", h_series.values),
        ("s", s.values),
        ("p", p.values),
    ])
    return 0


def _default_theory_init(params: ModelParams) -> MarketState:
    pts = phase.find_equilibria(params)
    pick = None
    for pt in pts:
        if pt.branch in ("s_plus", "paramagnetic"):
            pick = pt
    if pick is None:
        pick = pts[-1]
    return MarketState(s=pick.s_star_pt, h=pick.h_star_pt)


def cmd_simulate_theory(args) -> int:
    params = load_params(args.params)
    theta = read_series(args.theta) if args.theta else None
    if args.init_s is not None or args.init_h is not None:
        init = MarketState(
            s=args.init_s if args.init_s is not None else 0.0,
            h=(args.init_h if args.init_h is not None
               else math.tanh(params.delta)))
    else:
        init = _default_theory_init(params)
    rng = RandomSource(args.seed)
    mean, runs = market.ensemble(
        params, init, args.horizon, args.realizations, rng,
        theta_profile=theta, mode=args.mode, substeps=args.substeps,
        beta1_shift=args.beta1_shift)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    base = _header("simulate-theory", _params_line(params),
                   f"seed: {args.seed}")
    for i, run in enumerate(runs):
        head = base + [f"realization: {i} (stream {run.stream_id})"]
        _write_table(out_dir / f"run_{i:03d}.csv", head, [
            ("date_index", run.s.times().astype(int)),
            ("s", run.s.values),
            ("h", run.h.values),
            ("p", run.p.values),
        ])
    _write_table(out_dir / "ensemble_mean.csv",
                 base + [f"realizations: {args.realizations}"], [
                     ("date_index", mean.times().astype(int)),
                     ("mean_s", mean.values),
                 ])
    _write_report(out_dir / "manifest.txt", _header("simulate-theory"), [
        ("version", __version__),
        ("seed", args.seed),
        ("horizon", args.horizon),
        ("realizations", args.realizations),
        ("mode", args.mode),
        ("substeps", args.substeps),
        ("beta1_shift", args.beta1_shift),
        ("theta_profile", Path(args.theta).name if args.theta else "none"),
        ("init_s", init.s),
        ("init_h", init.h),
    ] + [(k, getattr(params, k)) for k in _PARAM_FIELDS])
    return 0


def cmd_analyze(args) -> int:
    params = load_params(args.params)
    head = _header(f"analyze {args.task}", _params_line(params))

    if args.task == "equilibria":
        pts = phase.find_equilibria(params)
        _write_table(args.out, head, [
            ("s_star", [p.s_star_pt for p in pts]),
            ("h_star", [p.h_star_pt for p in pts]),
            ("branch", [p.branch for p in pts]),
            ("class", [p.stability for p in pts]),
            ("re_lambda_plus", [p.eigenvalues[0].real for p in pts]),
            ("im_lambda_plus", [p.eigenvalues[0].imag for p in pts]),
            ("re_lambda_minus", [p.eigenvalues[1].real for p in pts]),
            ("im_lambda_minus", [p.eigenvalues[1].imag for p in pts]),
        ])
        return 0

    if args.task == "thresholds":
        rows = []
        for pt in phase.find_equilibria(params):
            if params.beta1 * (1.0 - pt.s_star_pt ** 2) >= 1.0:
                continue                      # saddle branch: no thresholds
            g = phase.gamma_thresholds(pt.s_star_pt, params)
            rows.append((pt.branch, pt.s_star_pt, *g))
        if not rows:
            raise ValueError("no branch admits node/focus transitions")
        _write_table(args.out,
                     head + ["gamma units: multiply by w_s for gamma_bar"], [
                         ("branch", [r[0] for r in rows]),
                         ("s_star", [r[1] for r in rows]),
                         ("gamma_node_focus", [r[2] for r in rows]),
                         ("gamma_focus_unstable", [r[3] for r in rows]),
                         ("gamma_unstable_node", [r[4] for r in rows]),
                     ])
        return 0

    if args.task == "sweep":
        lo, _, hi = args.range.partition(":")
        rows, transitions = phase.bifurcation_sweep(
            params, args.sweep, (float(lo), float(hi)), args.steps)
        extra = [f"sweep: {args.sweep} from {lo} to {hi} in {args.steps} steps"]
        extra += [f"transition: {br} {_fmt(v0)}->{_fmt(v1)} {c0}->{c1}"
                  for v0, v1, br, c0, c1 in transitions]
        value_col, branch_col, class_col = [], [], []
        for v, classes in rows:
            for br in sorted(classes):
                value_col.append(v)
                branch_col.append(br)
                class_col.append(classes[br])
        _write_table(args.out, head + extra, [
            (args.sweep, value_col),
            ("branch", branch_col),
            ("class", class_col),
        ])
        return 0

    if args.task == "limit-cycle":
        init = MarketState(s=args.init_s, h=args.init_h)
        rep = phase.detect_limit_cycle(params, init, args.max_days,
                                       substeps=args.substeps,
                                       reverse=args.reverse)
        _write_report(args.out, head + [
            f"init: s={_fmt(init.s)} h={_fmt(init.h)}",
            f"max_days: {args.max_days}",
            f"direction: {'reverse' if args.reverse else 'forward'}",
        ], [
            ("exists", rep.exists),
            ("period_days", rep.period_days),
            ("s_min", rep.s_amplitude[0]),
            ("s_max", rep.s_amplitude[1]),
            ("convergence_iterations", rep.convergence_iterations),
            ("stable", rep.stable),
        ])
        return 0

    if args.task == "heatmap":
        grid = np.linspace(-1.0, 1.0, args.grid)
        values = market.noise_dominance_map(params, grid, grid)
        s_col = np.repeat(grid, args.grid)
        h_col = np.tile(grid, args.grid)
        _write_table(args.out, head + [f"grid: {args.grid}x{args.grid}"], [
            ("s", s_col),
            ("h", h_col),
            ("feedback_to_noise", values.ravel()),
        ])
        return 0

    if args.task == "potential":
        curve = sentiment.potential_uc(params, params.c,
                                       grid_size=args.grid)
        extra = [f"extremum: s={_fmt(s)} kind={kind}"
                 for s, kind in curve.extrema]
        _write_table(args.out, head + extra, [
            ("s", curve.s_grid),
            ("potential", curve.u_values),
        ])
        return 0

    raise ValueError(f"unknown analyze task {args.task!r}")


def cmd_glauber(args) -> int:
    config = _load_spin_config(args.params)
    head = _header(f"glauber {args.task}", _config_line(config),
                   f"seed: {args.seed}")
    rng = RandomSource(args.seed)
    init = None
    if args.init_S is not None or args.init_H is not None:
        init = SpinMacroState(
            S=args.init_S if args.init_S is not None else config.N_s,
            H=args.init_H if args.init_H is not None else config.N_h)

    if args.task == "trajectory":
        step = args.sample_step
        if args.realizations == 1:
            traj = simulate_glauber(config, args.horizon, rng, init, step)
            _write_table(args.out,
                         head + [f"events: {traj.n_events}"], [
                             ("t", traj.times),
                             ("s", traj.s),
                             ("h", traj.h),
                         ])
        else:
            out_dir = Path(args.out)
            out_dir.mkdir(parents=True, exist_ok=True)
            for i in range(args.realizations):
                traj = simulate_glauber(config, args.horizon,
                                        rng.substream(i), init, step)
                _write_table(out_dir / f"run_{i:03d}.csv",
                             head + [f"realization: {i}",
                                     f"events: {traj.n_events}"], [
                                 ("t", traj.times),
                                 ("s", traj.s),
                                 ("h", traj.h),
                             ])
        return 0

    if args.task == "meanfield":
        report = meanfield_compare(config, args.horizon, args.realizations,
                                   rng, init, args.sample_step or 1.0)
        _write_report(args.out, head + [
            f"horizon: {_fmt(args.horizon)}",
            f"realizations: {args.realizations}",
        ], [
            ("max_deviation_s", report.max_deviation_s),
            ("max_deviation_h", report.max_deviation_h),
            ("rms_deviation_s", report.rms_deviation_s),
            ("rms_deviation_h", report.rms_deviation_h),
            ("max_deviation", report.max_deviation),
            ("rms_deviation", report.rms_deviation),
        ])
        return 0

    raise ValueError(f"unknown glauber task {args.task!r}")


def cmd_stats(args) -> int:
    x = read_series(args.input, column=args.column)
    head = _header(f"stats {args.task}", f"input: {Path(args.input).name}",
                   f"column: {args.column if args.column else 'first'}")

    if args.task == "returns":
        r = analytics.log_returns(x, args.horizon)
        write_series(args.out, r, label="log_return",
                     header=head + [f"horizon_days: {args.horizon}"])
        return 0

    if args.task == "moments":
        mean, var, skew, kurt = analytics.distribution_stats(
            x, normalize=args.normalize)
        _write_report(args.out,
                      head + [f"normalize: {_fmt(args.normalize)}",
                              f"samples: {len(x)}"], [
                          ("mean", mean),
                          ("variance", var),
                          ("skewness", skew),
                          ("excess_kurtosis", kurt),
                      ])
        return 0

    if args.task == "histogram":
        vals = x.values
        if not args.raw:
            std = np.std(vals)
            if std == 0.0:
                raise ValueError("constant input cannot be normalized")
            vals = (vals - np.mean(vals)) / std
        density, edges = np.histogram(vals, bins=args.bins, density=True)
        _write_table(args.out, head + [
            f"bins: {args.bins}",
            f"normalized: {_fmt(not args.raw)}",
            f"samples: {len(x)}",
        ], [
            ("bin_left", edges[:-1]),
            ("bin_right", edges[1:]),
            ("density", density),
        ])
        return 0

    if args.task == "acf":
        rows = analytics.autocorrelation(x, args.max_lag)
        _write_table(args.out, head + [f"samples: {len(x)}"], [
            ("lag", [r[0] for r in rows]),
            ("acf", [r[1] for r in rows]),
            ("band", [r[2] for r in rows]),
        ])
        return 0

    if args.task == "volatility":
        v = analytics.rolling_volatility(x, args.increment, args.window)
        write_series(args.out, v, label="volatility", header=head + [
            f"increment_days: {args.increment}",
            f"window_days: {args.window}",
        ])
        return 0

    if args.task == "lowpass":
        f = analytics.fourier_lowpass(x, args.min_period)
        write_series(args.out, f, label="filtered", header=head + [
            f"min_period_days: {_fmt(args.min_period)}",
        ])
        return 0

    raise ValueError(f"unknown stats task {args.task!r}")


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="newsmarket",
        description="Sentiment-driven market model: simulation, phase "
                    "analysis, spin kinetics, and series statistics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate-empirical",
                       help="drive sentiment with a measured information "
                            "series and emit (day, H, s, p)")
    p.add_argument("--input", required=True,
                   help="information series CSV (date_index,value)")
    p.add_argument("--params", required=True, help="parameter file")
    p.add_argument("--out", required=True, help="output CSV")
    p.add_argument("--init-s", type=float, default=None,
                   help="initial sentiment (default: equilibrium for H[0])")
    p.add_argument("--substeps", type=int, default=8)
    p.set_defaults(func=cmd_simulate_empirical)

    p = sub.add_parser("simulate-theory",
                       help="run the closed stochastic model; one CSV per "
                            "realization plus ensemble mean and manifest")
    p.add_argument("--params", required=True)
    p.add_argument("--horizon", type=int, required=True,
                   help="daily samples per realization")
    p.add_argument("--realizations", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--theta", default=None,
                   help="temperature profile CSV overriding beta1 = 1/theta")
    p.add_argument("--mode", choices=(market.SIMPLIFIED, market.FULL),
                   default=market.SIMPLIFIED)
    p.add_argument("--substeps", type=int, default=8)
    p.add_argument("--beta1-shift", type=float, default=0.0)
    p.add_argument("--init-s", type=float, default=None)
    p.add_argument("--init-h", type=float, default=None)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate_theory)

    p = sub.add_parser("analyze",
                       help="equilibria, thresholds, sweeps, limit cycles, "
                            "noise heat map, potential curve")
    p.add_argument("task", choices=("equilibria", "thresholds", "sweep",
                                    "limit-cycle", "heatmap", "potential"))
    p.add_argument("--params", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--sweep", choices=("gamma", "beta2", "delta"),
                   default="gamma", help="sweep: which field to vary")
    p.add_argument("--range", default="0:100",
                   help="sweep: lo:hi of the varied field")
    p.add_argument("--steps", type=int, default=101, help="sweep: grid size")
    p.add_argument("--init-s", type=float, default=0.9,
                   help="limit-cycle: starting sentiment")
    p.add_argument("--init-h", type=float, default=0.0,
                   help="limit-cycle: starting information flow")
    p.add_argument("--max-days", type=int, default=20000,
                   help="limit-cycle: integration budget")
    p.add_argument("--reverse", action="store_true",
                   help="limit-cycle: integrate backward (unstable cycles)")
    p.add_argument("--substeps", type=int, default=8)
    p.add_argument("--grid", type=int, default=101,
                   help="heatmap/potential: grid points per axis")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("glauber",
                       help="spin-kinetics trajectories and the "
                            "deterministic-limit comparison")
    p.add_argument("task", choices=("trajectory", "meanfield"))
    p.add_argument("--params", required=True, help="spin config file")
    p.add_argument("--horizon", type=float, required=True)
    p.add_argument("--realizations", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sample-step", type=float, default=None,
                   help="record on a uniform grid instead of per event")
    p.add_argument("--init-S", type=int, default=None)
    p.add_argument("--init-H", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_glauber)

    p = sub.add_parser("stats",
                       help="returns, moments, histogram, acf, rolling "
                            "volatility, Fourier low-pass")
    p.add_argument("task", choices=("returns", "moments", "histogram",
                                    "acf", "volatility", "lowpass"))
    p.add_argument("--input", required=True,
                   help="series CSV (date_index,value)")
    p.add_argument("--column", default=None,
                   help="value column name for multi-column inputs "
                        "(default: first column after the index)")
    p.add_argument("--out", required=True)
    p.add_argument("--horizon", type=int, default=21,
                   help="returns: difference horizon in days")
    p.add_argument("--normalize", action="store_true",
                   help="moments: rescale to zero mean / unit variance")
    p.add_argument("--bins", type=int, default=50, help="histogram: bins")
    p.add_argument("--raw", action="store_true",
                   help="histogram: skip zero-mean/unit-variance rescaling")
    p.add_argument("--max-lag", type=int, default=50, help="acf: last lag")
    p.add_argument("--increment", type=int, default=21,
                   help="volatility: increment days")
    p.add_argument("--window", type=int, default=300,
                   help="volatility: trailing window days")
    p.add_argument("--min-period", type=float, default=850.0,
                   help="lowpass: shortest surviving period, days")
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
