"""Release acceptance suite.

One test per shipped acceptance criterion, each printing a single
"criterion N: PASS/FAIL" line on the live terminal (bypassing capture)
before asserting, so a full run always shows the complete scoreboard.

Criterion 9 is known not to hold under the pinned simulation protocol:
its kurtosis clauses fail (measured seed-average excess kurtosis is
slightly negative, positive in only ~35% of seeds) while both skewness
clauses pass.  The test asserts the criterion as stated and is expected
to fail; see the README for the measured values and the analysis.
Criterion 12 needs user-supplied market data and is skipped.
"""

import time
from math import pi, tanh

import numpy as np
import pytest
from scipy import stats as sstats

from newsmarket import analytics, market, phase
from newsmarket.core import MarketState, ModelParams, RandomSource, Series
from newsmarket.glauber import (
    SpinMacroState,
    SpinSystemConfig,
    equilibrium_distribution,
    meanfield_compare,
    simulate_glauber,
    transition_rates,
)
from newsmarket.pricing import (
    calibrate_price,
    initial_sentiment,
    iterative_theta_fit,
    price_from_sentiment,
)
from newsmarket.reference import s_star_corrected, solve_sbar
from newsmarket.sentiment import equilibria_1d, integrate_sentiment, sentiment_rhs

MAIN = dict(w_s=0.04, w_h=0.4, beta1=1.1, beta2=0.55, a1=0.374, a2=0.002,
            a4=6.5, s_star=0.131)


def verdict(capsys, num, ok, detail):
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'} - {detail}"
    with capsys.disabled():
        print(line)


def test_criterion_01_fixed_point_values(capsys):
    t0 = time.time()
    roots = equilibria_1d(1.1, 0.0)
    stable = sorted(s for s, kind in roots if kind == "stable")
    corrected = s_star_corrected(1.1, 0.3)
    elapsed = time.time() - t0
    ok = (len(stable) == 2
          and abs(stable[0] + 0.503) <= 1e-3
          and abs(stable[1] - 0.503) <= 1e-3
          and abs(corrected - 0.313) <= 2e-3
          and elapsed < 1.0)
    verdict(capsys, 1, ok,
            f"stable roots {stable[0]:+.6f}/{stable[1]:+.6f}, "
            f"corrected 0.3-noise level {corrected:.6f} ({elapsed:.2f}s)")
    assert ok


def test_criterion_02_critical_temperature_reduction(capsys):
    # Single-component reduction: with couplings folded onto one species
    # the critical temperature is theta_c = J11 = 2, so theta = 2.4 is
    # disordered and theta = 1.6 orders at |s| ~ 0.717.
    t0 = time.time()

    def longrun_abs_s(theta, init_S):
        cfg = SpinSystemConfig(N_s=10_000, N_h=2, J11=2.0, theta=theta,
                               w_s=1.0, w_h=0.1)
        vals = []
        for i in range(10):
            tr = simulate_glauber(cfg, 15.0, RandomSource(11).substream(i),
                                  init=SpinMacroState(init_S, 0),
                                  sample_step=0.5)
            vals.append(np.mean(np.abs(tr.s[tr.times >= 10.0])))
        return float(np.mean(vals))

    para = longrun_abs_s(2.4, init_S=0)
    ferro = longrun_abs_s(1.6, init_S=10_000)
    spont = max(s for s, kind in equilibria_1d(2.0 / 1.6, 0.0)
                if kind == "stable")
    elapsed = time.time() - t0
    ok = para < 0.05 and abs(ferro - spont) < 0.05 and elapsed < 60.0
    verdict(capsys, 2, ok,
            f"|s| at theta 2.4 = {para:.4f}, at 1.6 = {ferro:.4f} "
            f"(deterministic level {spont:.4f}) ({elapsed:.1f}s)")
    assert ok


def test_criterion_03_detailed_balance_and_histogram(capsys):
    t0 = time.time()
    cfg = SpinSystemConfig(N_s=8, N_h=4, J11=1.2, J12=0.5, J21=1.0, J22=0.3,
                           mu_s=0.7, mu_h=0.4, theta=0.9, w_s=1.0, w_h=1.0,
                           b_s=0.2, b_h=-0.1)
    S_vals, H_vals, P0 = equilibrium_distribution(cfg)

    # exact flux symmetry over every macrostate edge
    worst = 0.0
    for iS, S in enumerate(S_vals):
        for iH, H in enumerate(H_vals):
            up_s, dn_s, up_h, dn_h = transition_rates(SpinMacroState(S, H),
                                                      cfg)
            for rate, dS, dH, back in (
                    (up_s, 2, 0, 1), (dn_s, -2, 0, 0),
                    (up_h, 0, 2, 3), (dn_h, 0, -2, 2)):
                if rate == 0.0:
                    continue
                other = SpinMacroState(S + dS, H + dH)
                rev = transition_rates(other, cfg)[back]
                jS = iS + dS // 2
                jH = iH + dH // 2
                fwd_flux = rate * P0[iS, iH]
                rev_flux = rev * P0[jS, jH]
                worst = max(worst, abs(fwd_flux - rev_flux) / fwd_flux)

    # long-run occupancy vs the enumerated distribution, chi-square at 95%
    tr = simulate_glauber(cfg, 800_000.0, RandomSource(5), sample_step=100.0)
    keep = tr.times >= 100.0
    iS = ((tr.s[keep] * cfg.N_s).round().astype(int) + cfg.N_s) // 2
    iH = ((tr.h[keep] * cfg.N_h).round().astype(int) + cfg.N_h) // 2
    n = len(iS)
    counts = np.zeros_like(P0)
    np.add.at(counts, (iS, iH), 1)
    expected = n * P0
    mask = expected >= 5.0  # pool sparse cells so every chi-square cell is fair
    chi2 = float(np.sum((counts[mask] - expected[mask]) ** 2 / expected[mask]))
    pooled_c, pooled_e = counts[~mask].sum(), expected[~mask].sum()
    dof = int(mask.sum()) - 1
    if pooled_e > 0:
        chi2 += (pooled_c - pooled_e) ** 2 / pooled_e
        dof += 1
    crit = float(sstats.chi2.ppf(0.95, dof))
    elapsed = time.time() - t0
    ok = (worst < 1e-12 and tr.n_events >= 1_000_000 and chi2 < crit
          and elapsed < 120.0)
    verdict(capsys, 3, ok,
            f"flux asymmetry {worst:.1e}, chi2 {chi2:.1f} < {crit:.1f} "
            f"(dof {dof}, {tr.n_events:,} events) ({elapsed:.1f}s)")
    assert ok


def test_criterion_04_meanfield_oracle(capsys):
    t0 = time.time()
    cfg = SpinSystemConfig(N_s=10_000, N_h=1_000, J11=1.1, J12=0.55,
                           J21=5.5, theta=1.0, w_s=0.04, w_h=0.4)
    rep = meanfield_compare(cfg, 500.0, 100, RandomSource(21),
                            sample_step=1.0)
    elapsed = time.time() - t0
    ok = rep.max_deviation <= 0.03 and elapsed < 600.0
    verdict(capsys, 4, ok,
            f"max |ensemble - rate equation| = {rep.max_deviation:.5f} "
            f"(rms {rep.rms_deviation:.5f}) ({elapsed:.1f}s)")
    assert ok


def fd_jacobian(pars, s, h, eps=1e-6):
    out = np.empty((2, 2))
    for j, (ds, dh) in enumerate(((eps, 0.0), (0.0, eps))):
        up = market.drift(MarketState(s + ds, h + dh), pars)
        dn = market.drift(MarketState(s - ds, h - dh), pars)
        out[0, j] = (up[0] - dn[0]) / (2 * eps)
        out[1, j] = (up[1] - dn[1]) / (2 * eps)
    return out


def test_criterion_05_stability_classification(capsys):
    want = ["StableNode", "StableFocus", "UnstableFocus", "UnstableNode"]
    got = {}
    max_dev = 0.0
    for gbar, expect in zip((1.6, 2.0, 2.6, 3.4), want):
        pars = ModelParams(**{**MAIN, "delta": 0.0, "kappa": 0.0,
                              "gamma": gbar / MAIN["w_s"]})
        pts = phase.find_equilibria(pars)
        outer = [q for q in pts if q.branch in ("s_minus", "s_plus")]
        got[gbar] = sorted({q.stability for q in outer})
        for q in outer:
            analytic = np.sort_complex(np.asarray(q.eigenvalues)
                                       * pars.w_s)
            fd = np.sort_complex(np.linalg.eigvals(
                fd_jacobian(pars, q.s_star_pt, q.h_star_pt)))
            max_dev = max(max_dev, float(np.max(np.abs(analytic - fd))))
    ok = (all(got[g] == [w] for g, w in zip((1.6, 2.0, 2.6, 3.4), want))
          and max_dev < 1e-6)
    verdict(capsys, 5, ok,
            "classes " + "/".join(got[g][0] for g in (1.6, 2.0, 2.6, 3.4))
            + f", max eigenvalue deviation {max_dev:.1e}")
    assert ok


def test_criterion_06_limit_cycle_birth_window(capsys):
    t0 = time.time()

    def pars_at(gbar):
        return ModelParams(**{**MAIN, "delta": 0.0, "kappa": 0.0,
                              "gamma": gbar / MAIN["w_s"]})

    below_fwd = phase.detect_limit_cycle(pars_at(2.4612),
                                         MarketState(0.9, 0.0), 20000)
    below_rev = phase.detect_limit_cycle(pars_at(2.4612),
                                         MarketState(0.53, 0.0), 20000,
                                         reverse=True)
    above_fwd = phase.detect_limit_cycle(pars_at(2.4613),
                                         MarketState(0.9, 0.0), 20000)
    above_rev = phase.detect_limit_cycle(pars_at(2.4613),
                                         MarketState(0.53, 0.0), 20000,
                                         reverse=True)
    elapsed = time.time() - t0
    ok = (not below_fwd.exists and not below_rev.exists
          and above_fwd.exists and above_fwd.stable
          and above_rev.exists and not above_rev.stable
          and elapsed < 300.0)
    verdict(capsys, 6, ok,
            f"2.4612: none; 2.4613: stable {above_fwd.period_days:.0f}d + "
            f"unstable {above_rev.period_days:.0f}d pair ({elapsed:.1f}s)")
    assert ok


def test_criterion_07_characteristic_periods(capsys):
    pars = ModelParams(**{**MAIN, "delta": 0.03, "kappa": 0.0,
                          "gamma": 67.7})
    rep = phase.detect_limit_cycle(pars, MarketState(0.9, 0.0), 20000)
    top = max(phase.find_equilibria(pars), key=lambda q: q.s_star_pt)
    decay_period = 2 * pi / (abs(top.eigenvalues[0].imag) * pars.w_s)
    ok = (rep.exists and rep.stable
          and abs(rep.period_days - 295.0) <= 75.0
          and top.stability == "StableFocus"
          and abs(decay_period - 125.0) <= 35.0)
    verdict(capsys, 7, ok,
            f"cycle period {rep.period_days:.1f}d, focus ringing period "
            f"{decay_period:.1f}d")
    assert ok


def test_criterion_08_fold_bias_consistency(capsys):
    dc = phase.delta_critical(1.1, 0.55)

    def count_roots(delta):
        # brute force: sign changes of the self-consistency residual
        s = np.linspace(-1 + 1e-9, 1 - 1e-9, 400001)
        f = np.tanh(1.1 * s + 0.55 * tanh(delta)) - s
        return int(np.sum(np.sign(f[:-1]) * np.sign(f[1:]) < 0))

    below, above = count_roots(dc - 5e-4), count_roots(dc + 5e-4)
    exact = phase.delta_critical(1.01, 0.55)
    asym = phase.delta_critical_asymptotic(1.01, 0.55)
    rel = abs(asym - exact) / exact
    ok = below == 3 and above == 1 and rel < 0.05
    verdict(capsys, 8, ok,
            f"dc={dc:.8f}, roots {below}/{above} across it, asymptotic "
            f"rel err {rel:.3f} at beta1=1.01")
    assert ok


def test_criterion_09_return_distribution_shape(capsys):
    t0 = time.time()
    pars = ModelParams(**{**MAIN, "delta": 0.03, "kappa": 1.0,
                          "gamma": 56.0})
    top = max(phase.find_equilibria(pars.replace(kappa=0.0)),
              key=lambda q: q.s_star_pt)
    init = MarketState(top.s_star_pt, top.h_star_pt)
    skews, kurts = [], []
    for seed in range(20):
        run = market.simulate(pars, init, 15120, rng=RandomSource(seed))
        monthly = Series(analytics.log_returns(run.p, 21).values[::21])
        _, _, sk, ku = analytics.distribution_stats(monthly)
        skews.append(sk)
        kurts.append(ku)
    skews, kurts = np.array(skews), np.array(kurts)
    frac_kurt = float(np.mean(kurts > 0))
    frac_skew = float(np.mean(skews < 0))
    mean_kurt = float(kurts.mean())
    mean_skew = float(skews.mean())
    elapsed = time.time() - t0
    ok = (frac_kurt >= 0.8 and frac_skew >= 0.8
          and abs(mean_kurt - 1.27) <= 0.8
          and abs(mean_skew + 0.71) <= 0.4
          and elapsed < 600.0)
    verdict(capsys, 9, ok,
            f"kurt>0 in {frac_kurt:.0%} of seeds (need 80%), mean kurt "
            f"{mean_kurt:+.2f} (band 1.27+-0.8); skew<0 in {frac_skew:.0%}, "
            f"mean skew {mean_skew:+.2f} (band -0.71+-0.4) ({elapsed:.0f}s)")
    assert ok


def test_criterion_10_turning_point_lead(capsys):
    pars = ModelParams(**{**MAIN, "beta2": 1.0, "delta": 0.03, "kappa": 1.0,
                          "gamma": 56.0})
    events = 0
    interp_violations = 0
    peak_violations = 0
    for seed in range(8):
        rng = np.random.default_rng(seed)
        raw = rng.standard_normal(2000)
        H = np.empty(2000)
        H[0] = 0.1
        for i in range(1, 2000):
            H[i] = 0.995 * H[i - 1] + 0.02 * raw[i]
        H = np.clip(H, -0.9, 0.9)
        s = integrate_sentiment(Series(H), initial_sentiment(1.1, 1.0, H[0]),
                                pars)
        sv = s.values
        d = np.array([sentiment_rhs(sv[i], H[i], pars) for i in range(2000)])
        for i in range(1, 1999):
            if d[i] == 0.0 or d[i] * d[i + 1] >= 0.0:
                continue
            if not (sv[i] > pars.s_star and sv[i + 1] > pars.s_star):
                continue
            events += 1
            # slow-channel price slope at the interpolated turning point
            w = d[i] / (d[i] - d[i + 1])
            s_c = sv[i] + w * (sv[i + 1] - sv[i])
            if pars.a2 * (s_c - pars.s_star) <= 0.0:
                interp_violations += 1
            # price still rising at the last sample before a peak
            if d[i] > 0.0 and pars.a1 * d[i] + pars.a2 * (
                    sv[i] - pars.s_star) <= 0.0:
                peak_violations += 1
    ok = events >= 200 and interp_violations == 0 and peak_violations == 0
    verdict(capsys, 10, ok,
            f"{events} turning points, {interp_violations} slope violations, "
            f"{peak_violations} pre-peak violations")
    assert ok


def test_criterion_11_calibration_round_trip(capsys):
    # noiseless oscillatory path: well conditioned for all four parameters
    gen = ModelParams(**{**MAIN, "delta": 0.0, "kappa": 0.0, "gamma": 62.0})
    s, _ = phase.integrate_autonomous(gen, MarketState(0.9, 0.0), 2000)
    p = price_from_sentiment(s, gen)
    fit = calibrate_price(s, p)
    errs = (abs(fit.a1 - gen.a1), abs(fit.a2 - gen.a2),
            abs(fit.a4 - gen.a4), abs(fit.s_star - gen.s_star))

    def ar1(rng, coef, innov, n, clip):
        x = np.empty(n)
        x[0] = 0.0
        for i in range(1, n):
            x[i] = coef * x[i - 1] + innov * rng.standard_normal()
        return np.clip(x, -clip, clip)

    H = Series(ar1(np.random.default_rng(7), 0.97, 0.06, 1000, 0.8))
    star = solve_sbar(1.12, 0.3)
    gen2 = ModelParams(**{**MAIN, "beta1": 1.12, "beta2": 1.0, "kappa": 0.0,
                          "s_star": star})
    s2 = integrate_sentiment(H, initial_sentiment(1.12, 1.0, H.values[0]),
                             gen2)
    p2 = price_from_sentiment(s2, gen2)
    theta, _ = iterative_theta_fit(H, p2, gen2)
    beta1_err = float(np.max(np.abs(1.0 / theta.values - 1.12)))

    ok = max(errs) <= 1e-8 and beta1_err <= 0.02
    verdict(capsys, 11, ok,
            f"parameter recovery errors <= {max(errs):.1e}, herding-level "
            f"recovery error {beta1_err:.1e}")
    assert ok


def test_criterion_12_real_data_reproduction(capsys):
    with capsys.disabled():
        print("criterion 12: SKIP - needs user-supplied price and news "
              "series; documented in the README, not part of the offline "
              "suite")
    pytest.skip("requires external market data")
