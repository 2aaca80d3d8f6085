"""Acceptance criteria, each at its stated tolerance.

Every test records a PASS/FAIL line (printed in the terminal summary) before
asserting, so a failing criterion still reports its measured values.
"""

import math
import time

import numpy as np
import pytest
from scipy.optimize import brentq

from ringmod import cli
from ringmod.cmmr import CmmrParams
from ringmod.composite import MziBaselineParams
from ringmod.detection import harmonic_level_db, intensity_harmonics, ip3_fit, ip3_improvement_vs_mzi, response_sweep
from ringmod.devices import (
    converged_spectrum,
    output_spectrum,
    paper_preset,
    with_bias,
    with_drive,
    with_frequency,
)
from ringmod.fmmr import FmmrParams, detuning_phase, solve_fmmr
from ringmod.harmonics import HarmonicWindow
from ringmod.timedomain import TdConfig, cross_validate

KINDS = ("fmmr", "cmmr", "dcmmr", "mzi")


def test_c1_static_closed_form(criterion):
    t0 = time.perf_counter()
    base = dict(alpha=0.98, delay_s=2e-12, rho=0.97, beta=0.0, rf_frequency_hz=5e9)
    on = abs(solve_fmmr(FmmrParams(loop_phase=0.0, **base))[1][0])
    off = abs(solve_fmmr(FmmrParams(loop_phase=math.pi, **base))[1][0])
    elapsed = time.perf_counter() - t0
    ok = abs(on - 0.202429) <= 1e-6 and abs(on - 0.01 / 0.0494) <= 1e-9 and abs(off - 1.95 / 1.9506) <= 1e-9
    ok = ok and abs(off - 0.999693) <= 1e-6 and elapsed < 1
    criterion("C1", ok, f"|d0| resonance {on:.9f}, anti-resonance {off:.9f}, {elapsed:.3f} s")
    assert ok


def test_c2_lossless_unitarity(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst, orders = 0.0, []
    for i in range(50):
        beta = rng.uniform(0.0, 1.0)
        bias = rng.uniform(0.01, 2 * math.pi - 0.01)
        f = 10 ** rng.uniform(9, math.log10(5e11))
        fm = FmmrParams(alpha=1.0, delay_s=2e-12, loop_phase=bias, rho=0.97, beta=beta, rf_frequency_hz=f)
        cm = CmmrParams(alpha=1.0, delay_s=2e-12, loop_phase=0.0, bias_phase=bias, beta=beta, rf_frequency_hz=f)
        for dev in (fm, cm):
            d, order, ok = converged_spectrum(dev, max_order=384)
            assert ok
            orders.append(order)
            worst = max(worst, abs(d.power() - 1.0))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 10
    criterion("C2", ok, f"max |sum|d|^2 - 1| = {worst:.2e} over 100 solves (orders {sorted(set(orders))}), "
                        f"{elapsed:.2f} s")
    assert ok


def test_c3_oracle_equivalence(criterion):
    t0 = time.perf_counter()
    errors = {}
    for kind in KINDS:
        for f in (5e9, 50e9, 100e9):
            cv = cross_validate(paper_preset(kind, f), HarmonicWindow(24), TdConfig(samples_per_round_trip=256))
            errors[(kind, f)] = cv.max_relative_error
    elapsed = time.perf_counter() - t0
    worst = max(errors.values())
    ok = worst < 1e-6 and elapsed < 60
    criterion("C3", ok, f"max relative error {worst:.2e} over 12 device/frequency cases, {elapsed:.1f} s")
    assert ok


def test_c4_truncation(criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for kind in KINDS:
        for f in (5e9, 50e9, 100e9, 200e9):
            dev = paper_preset(kind, f)
            a = output_spectrum(dev, HarmonicWindow(16))
            b = output_spectrum(dev, HarmonicWindow(32))
            worst = max(worst, max(abs(a[n] - b[n]) for n in range(-5, 6)))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-9 and elapsed < 5
    criterion("C4", ok, f"max |d_n(32) - d_n(16)|, |n|<=5 = {worst:.2e}, {elapsed:.2f} s")
    assert ok


def test_c5_fmmr_rolloff(criterion):
    dev = paper_preset("fmmr")
    assert dev.loop_phase == pytest.approx(detuning_phase(6e9, 2e-12))
    freqs = np.arange(1e9, 100e9 + 1, 0.25e9)
    fund = np.array([r.fundamental_db for r in response_sweep(dev, freqs, harmonics=(1,))])
    peak = freqs[int(np.argmax(fund))]
    above = fund[freqs >= 10e9]
    monotone = bool(np.all(np.diff(above) < 0))
    ok = abs(peak - 5e9) <= 1e9 and monotone
    criterion("C5", ok, f"fundamental peak at {peak / 1e9:.2f} GHz (target 5 +- 1), "
                        f"monotone decrease 10-100 GHz: {monotone}")
    assert ok


def test_c6_cmmr_flatness(criterion):
    def d1(bias, f):
        return abs(output_spectrum(with_bias(paper_preset("cmmr", f), bias))[1])

    ratio = 20 * math.log10(d1(0.12, 50e9) / d1(0.12, 5e9))
    biases = np.linspace(0.05, 0.5, 46)
    higher = [b for b in biases if d1(b, 50e9) > d1(b, 5e9)]
    ok = abs(ratio) <= 3 and len(higher) > 0
    span = f"{min(higher):.2f}-{max(higher):.2f}" if higher else "none"
    criterion("C6", ok, f"|d1(50G)|/|d1(5G)| at bias 0.12 = {ratio:+.2f} dB; biases with 50G above 5G: {span}")
    assert ok


def test_c7_mzi_quadrature(criterion):
    worst = 0.0
    for beta in np.linspace(0.0, 0.5, 11):
        for f in np.geomspace(1e6, 1e12, 7):
            ih = intensity_harmonics(output_spectrum(MziBaselineParams(beta, f)), 2)
            worst = max(worst, abs(ih[2]))
    ok = worst <= 1e-12
    criterion("C7", ok, f"max |I_2| = {worst:.2e} for beta <= 0.5, 1 MHz-1 THz")
    assert ok


IP3_TARGETS = {5e9: (None, 3.0), 50e9: (10.0, 2.0), 100e9: (12.5, 2.0), 200e9: (17.0, 2.0)}


def test_c8_ip3_improvement(criterion):
    dev = paper_preset("cmmr")
    measured = {f: ip3_improvement_vs_mzi(dev, f) for f in IP3_TARGETS}
    misses = [f for f, (t, tol) in IP3_TARGETS.items()
              if not ((abs(measured[f]) < tol) if t is None else abs(measured[f] - t) <= tol)]
    text = ", ".join(f"{f / 1e9:g}G {v:.2f} dB" for f, v in measured.items())
    if not misses:
        criterion("C8", True, f"all within tolerance: {text}")
        return
    # outside tolerance: the criterion then requires the verify report to show the
    # measured values next to a bias sensitivity sweep over 0.10-0.16
    report = [c.line() for c in cli.verify_checks("cmmr", "paper")]
    shows_values = all(any(f"at {f / 1e9:g} GHz: {measured[f]:.2f} dB" in line for line in report) for f in misses)
    sweep = [line for line in report if "ip3 sensitivity bias=" in line]
    sweep_biases = {float(line.split("bias=")[1].split(":")[0]) for line in sweep}
    covered = {0.10, 0.16} <= sweep_biases and len(sweep_biases) >= 4
    reached = any(line.startswith("[SOFT-OK]") for line in sweep)
    ok = shows_values and covered
    criterion("C8", ok, f"soft; {text}; outside tolerance at "
                        f"{', '.join(f'{f / 1e9:g}G' for f in misses)}; verify report lists measured values "
                        f"and a {len(sweep)}-point bias sweep 0.10-0.16 (any bias meeting all targets: {reached})")
    assert ok


def test_c9a_dcmmr_field_cancellation(criterion):
    worst = 0.0
    for f in (5e9, 50e9, 100e9, 200e9):
        d = output_spectrum(paper_preset("dcmmr", f))
        worst = max(worst, abs(d[2]), abs(d[-2]))
    ok = worst <= 1e-8
    criterion("C9a", ok, f"max |d+-2| = {worst:.2e} at offsets pi/2, pi/2")
    assert ok


def test_c9b_dcmmr_carrier_penalty(criterion):
    penalties = []
    for f in (5e9, 50e9, 100e9):
        dual = intensity_harmonics(output_spectrum(paper_preset("dcmmr", f)), 0).dc
        single = intensity_harmonics(output_spectrum(paper_preset("cmmr", f)), 0).dc
        carrier_dual = abs(output_spectrum(paper_preset("dcmmr", f))[0]) ** 2
        carrier_single = abs(output_spectrum(paper_preset("cmmr", f))[0]) ** 2
        penalties.append((10 * math.log10(carrier_dual / carrier_single), 10 * math.log10(dual / single)))
    carrier = [p[0] for p in penalties]
    ok = all(abs(c + 9) <= 1 for c in carrier)
    criterion("C9b", ok, f"carrier penalty vs single CMMR {carrier[0]:+.2f} dB (mean power {penalties[0][1]:+.2f} dB); "
                         f"target -9 +- 1 dB")
    assert ok


def _matched_h2_gap(f):
    dual = paper_preset("dcmmr", f)
    single = paper_preset("cmmr", f)

    def levels(dev, beta):
        ih = intensity_harmonics(output_spectrum(with_drive(dev, beta)), 2)
        return harmonic_level_db(ih, 1), harmonic_level_db(ih, 2)

    fund, h2_dual = levels(dual, 1e-2)
    beta_single = brentq(lambda b: levels(single, b)[0] - fund, 1e-7, 0.05, xtol=1e-15)
    return levels(single, beta_single)[1] - h2_dual


def test_c9c_dcmmr_intensity_h2(criterion):
    gaps = {f: _matched_h2_gap(f) for f in (5e9, 50e9, 100e9, 200e9)}
    ok = all(g >= 10 for g in gaps.values())
    text = ", ".join(f"{f / 1e9:g}G {g:.2f} dB" for f, g in gaps.items())
    criterion("C9c", ok, f"soft; H2 reduction vs single CMMR at matched fundamental: {text} (target >= 10 dB)")
    assert ok


def test_c10_power_laws(criterion):
    t0 = time.perf_counter()
    grid = np.geomspace(1e-3, 1e-2, 8)
    slopes = {}
    for kind in KINDS:
        for f in (5e9, 50e9, 100e9):
            slopes[(kind, f)] = ip3_fit(paper_preset(kind), f, grid).slopes
    elapsed = time.perf_counter() - t0
    s1 = [s[0] for s in slopes.values()]
    s3 = [s[1] for s in slopes.values()]
    ok = all(abs(s - 1) <= 0.01 for s in s1) and all(abs(s - 3) <= 0.03 for s in s3) and elapsed < 30
    criterion("C10", ok, f"fundamental slopes {min(s1):.4f}-{max(s1):.4f}, H3 slopes {min(s3):.4f}-{max(s3):.4f} "
                         f"(4 devices x 5/50/100 GHz, drive 1e-3..1e-2), {elapsed:.2f} s")
    assert ok
