"""Command-line front end: sweeps, figure presets, verification."""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Sequence

import numpy as np

from .cmmr import CmmrParams
from .composite import DcmmrParams, MziBaselineParams
from .detection import harmonic_level_db, intensity_harmonics, ip3_improvement_vs_mzi
from .devices import (
    DEVICE_KINDS,
    Device,
    bias_of,
    output_spectrum,
    paper_preset,
    with_bias,
    with_drive,
    with_frequency,
)
from .errors import ConfigurationError, DomainError, RingmodError, SingularSystemError
from .fmmr import FmmrParams, all_pass_transmission, detuning_phase
from .harmonics import ComplexSpectrum, HarmonicWindow, convergence_change
from .timedomain import TdConfig, cross_validate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_CONVERGENCE = 4
EXIT_VERIFY = 5

CONVERGENCE_TOL = 1e-9
MAX_ORDER = 96
SUBSAMPLE_FRACTION = 0.05
ORACLE_TOL = 1e-6

PRESETS = ("paper", "lossless-unitarity")
AXES = ("frequency", "bias", "drive")
_SI = {"f": 1e-15, "p": 1e-12, "n": 1e-9, "u": 1e-6, "m": 1e-3, "k": 1e3, "K": 1e3,
       "M": 1e6, "G": 1e9, "T": 1e12}


def parse_si(text: str | float) -> float:
    """Parse ``5e9``, ``5G`` or ``2.5GHz`` style numbers."""
    if isinstance(text, (int, float)):
        return float(text)
    s = text.strip()
    if s.lower().endswith("hz"):
        s = s[:-2]
    if s and s[-1] in _SI:
        return float(s[:-1]) * _SI[s[-1]]
    return float(s)


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    device: str = "cmmr"
    preset: str | None = "paper"
    alpha: float | None = None
    rho: float | None = None
    bias: float | None = None
    loop_phase: float | None = None
    beta: float | None = None
    td: float | None = None
    fsr: float | None = None
    rf_phase: float | None = None
    frequency: float | None = None
    rf_phase_offset: float | None = None
    combine_phase: float | None = None
    sweep_axis: str = "frequency"
    sweep_start: float = 1e9
    sweep_stop: float = 100e9
    sweep_points: int = 100
    sweep_spacing: str = "linear"
    sidebands: list[int] = field(default_factory=lambda: [-2, -1, 0, 1, 2])
    harmonics: list[int] = field(default_factory=lambda: [1, 2, 3])
    order: int = 24
    oracle_check: bool = False
    strict: bool = False
    workers: int | None = None
    output: str | None = None

    def validate(self) -> None:
        if self.device not in DEVICE_KINDS:
            raise ConfigurationError(f"device must be one of {DEVICE_KINDS}, got {self.device!r}")
        if self.preset is not None and self.preset not in PRESETS:
            raise ConfigurationError(f"preset must be one of {PRESETS}, got {self.preset!r}")
        if self.sweep_axis not in AXES:
            raise ConfigurationError(f"sweep axis must be one of {AXES}, got {self.sweep_axis!r}")
        if self.sweep_spacing not in ("linear", "log"):
            raise ConfigurationError("sweep spacing must be 'linear' or 'log'")
        if self.sweep_points < 1:
            raise ConfigurationError("sweep needs at least one point")
        if self.sweep_points > 1 and not self.sweep_start < self.sweep_stop:
            raise ConfigurationError("sweep start must be below stop")
        if self.sweep_spacing == "log" and self.sweep_start <= 0:
            raise ConfigurationError("log spacing needs a positive start")
        if self.td is not None and self.fsr is not None:
            raise ConfigurationError("td and fsr are mutually exclusive")
        if self.order < 0:
            raise ConfigurationError("order must be non-negative")
        if any(n < 1 for n in self.harmonics):
            raise ConfigurationError("harmonics must be >= 1")

    def sweep_values(self) -> np.ndarray:
        if self.sweep_points == 1:
            return np.array([float(self.sweep_start)])
        if self.sweep_spacing == "log":
            return np.geomspace(self.sweep_start, self.sweep_stop, self.sweep_points)
        return np.linspace(self.sweep_start, self.sweep_stop, self.sweep_points)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_mapping(cls, data: dict[str, Any]) -> RunConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


def build_device(cfg: RunConfig) -> Device:
    """Resolve preset plus overrides into device parameters."""
    freq = cfg.frequency if cfg.frequency is not None else 5e9
    base = paper_preset(cfg.device, freq)
    if cfg.preset == "lossless-unitarity":
        base = _override(base, alpha=1.0)
    delay = cfg.td if cfg.td is not None else (1.0 / cfg.fsr if cfg.fsr is not None else None)
    over: dict[str, Any] = {"alpha": cfg.alpha, "rho": cfg.rho, "beta": cfg.beta, "delay_s": delay,
                            "rf_phase": cfg.rf_phase, "loop_phase": cfg.loop_phase}
    if cfg.bias is not None:
        over["loop_phase" if cfg.device == "fmmr" else "bias_phase"] = cfg.bias
    return _override(base, **over, rf_phase_offset=cfg.rf_phase_offset, combine_phase=cfg.combine_phase)


def _override(dev: Device, **values: Any) -> Device:
    values = {k: v for k, v in values.items() if v is not None}
    if isinstance(dev, DcmmrParams):
        outer = {k: values.pop(k) for k in ("rf_phase_offset", "combine_phase") if k in values}
        ring_keys = {f.name for f in fields(CmmrParams)}
        bad = set(values) - ring_keys
        if bad:
            raise ConfigurationError(f"parameters {sorted(bad)} do not apply to dcmmr")
        return replace(dev, ring=replace(dev.ring, **values), **outer)
    keys = {f.name for f in fields(type(dev))}
    bad = set(values) - keys
    if isinstance(dev, FmmrParams) and "rho" in values:
        values["tau"] = None
    if bad:
        raise ConfigurationError(f"parameters {sorted(bad)} do not apply to {type(dev).__name__}")
    return replace(dev, **values)


def resolved_config(cfg: RunConfig, device: Device) -> RunConfig:
    """Config with every device parameter written out explicitly."""
    ring = device.ring if isinstance(device, DcmmrParams) else device
    out = replace(cfg, frequency=device.rf_frequency_hz, beta=device.beta, rf_phase=ring.rf_phase)
    if isinstance(ring, (FmmrParams, CmmrParams)):
        out = replace(out, alpha=ring.alpha, td=ring.delay_s, fsr=None, loop_phase=ring.loop_phase)
    if isinstance(ring, FmmrParams):
        out = replace(out, rho=ring.rho, bias=None)
    else:
        out = replace(out, bias=ring.bias_phase)
    if isinstance(device, DcmmrParams):
        out = replace(out, rf_phase_offset=device.rf_phase_offset, combine_phase=device.combine_phase)
    return out


def _apply_axis(device: Device, axis: str, value: float) -> Device:
    if axis == "frequency":
        return with_frequency(device, value)
    if axis == "bias":
        return with_bias(device, value)
    return with_drive(device, value)


# ---------------------------------------------------------------------------
# Sweep execution
# ---------------------------------------------------------------------------

@dataclass
class SweepResult:
    config: RunConfig
    values: np.ndarray
    spectra: list[ComplexSpectrum]
    flags: list[bool]
    order: int
    max_change: float
    oracle_error: float | None = None


def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isinf(x):
        return "-inf" if x < 0 else "inf"
    return format(float(x), ".12g")


def _subsample(n_rows: int) -> list[int]:
    step = max(1, round(1 / SUBSAMPLE_FRACTION))
    idx = list(range(0, n_rows, step))
    if n_rows - 1 not in idx:
        idx.append(n_rows - 1)
    return idx


def execute(cfg: RunConfig) -> SweepResult:
    """Solve every sweep point; raise the window order until the convergence check passes."""
    cfg.validate()
    base = build_device(cfg)
    values = cfg.sweep_values()
    devices = [_apply_axis(base, cfg.sweep_axis, v) for v in values]
    workers = cfg.workers or os.cpu_count() or 1
    order = cfg.order
    while True:
        window = HarmonicWindow(order)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                spectra = list(pool.map(lambda d: output_spectrum(d, window), devices))
        else:
            spectra = [output_spectrum(d, window) for d in devices]
        checked = {i: convergence_change(lambda w, d=devices[i]: output_spectrum(d, w), window)
                   for i in _subsample(len(devices))}
        ok_all = all(c < CONVERGENCE_TOL for c in checked.values())
        if ok_all or max(1, 2 * order) > MAX_ORDER:
            break
        order = max(1, 2 * order)
    flags = [checked[i] < CONVERGENCE_TOL if i in checked else ok_all for i in range(len(devices))]
    result = SweepResult(cfg, values, spectra, flags, order, max(checked.values()))
    if cfg.oracle_check:
        errs = [cross_validate(devices[i], window).max_relative_error for i in _subsample(len(devices))]
        result.oracle_error = max(errs)
    return result


def csv_columns(cfg: RunConfig) -> list[str]:
    cols = ["sweep_value"]
    for n in cfg.sidebands:
        cols += [f"abs_d[{n}]", f"arg_d[{n}]"]
    cols.append("I0")
    cols += [f"h{n}_db" for n in cfg.harmonics]
    cols.append("convergence_ok")
    return cols


def csv_rows(result: SweepResult) -> list[list[str]]:
    cfg = result.config
    n_out = max(cfg.harmonics, default=0)
    rows = []
    for value, spec, ok in zip(result.values, result.spectra, result.flags):
        row = [_fmt(value)]
        for n in cfg.sidebands:
            d = spec.sideband(n)
            row += [_fmt(abs(d)), _fmt(math.atan2(d.imag, d.real))]
        ih = intensity_harmonics(spec, min(n_out, spec.window.order))
        row.append(_fmt(ih.dc))
        row += [_fmt(harmonic_level_db(ih, n)) for n in cfg.harmonics]
        row.append("true" if ok else "false")
        rows.append(row)
    return rows


def header_lines(result: SweepResult, device: Device) -> list[str]:
    cfg = resolved_config(result.config, device)
    return [
        f"# config: {cfg.to_json()}",
        "# units: sweep_value in Hz (frequency) or rad (bias, drive); abs_d/arg_d field sideband "
        "magnitude and phase [rad]; I0 mean detected power; h<n>_db = 20*log10(2|I_n|) re unit carrier",
        f"# convergence: window order {result.order}; N->2N re-solve on rows {_subsample(len(result.values))}; "
        f"checked rows carry their own flag, other rows the run-level flag (max change {result.max_change:.3g}, "
        f"tol {CONVERGENCE_TOL:g})",
    ]


def render_run(result: SweepResult) -> str:
    device = build_device(result.config)
    buf = io.StringIO()
    for line in header_lines(result, device):
        buf.write(line + "\n")
    buf.write(",".join(csv_columns(result.config)) + "\n")
    for row in csv_rows(result):
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def summary_line(result: SweepResult) -> str:
    parts = [f"rows={len(result.values)}", f"order={result.order}",
             f"convergence_ok={str(all(result.flags)).lower()}", f"max_change={result.max_change:.3g}"]
    if result.oracle_error is not None:
        parts.append(f"oracle_max_rel_err={result.oracle_error:.3g}")
    return " ".join(parts)


# ---------------------------------------------------------------------------
# Figure presets
# ---------------------------------------------------------------------------

_T_D = 2e-12
FIG5_SECOND_BIAS = 0.5


def figure_series(fig: str) -> tuple[str, list[tuple[str, RunConfig]]]:
    """Description and the labelled sweeps behind each figure preset."""
    fmmr_bias = detuning_phase(6e9, _T_D)
    side = dict(sidebands=[-2, -1, 0, 1, 2], harmonics=[1, 2])
    if fig in ("fig2a", "fig2b"):
        f = 5e9 if fig == "fig2a" else 50e9
        return (f"FMMR field sidebands d0, d+-1, d+-2 vs loop phase [rad] at {f / 1e9:g} GHz",
                [("fmmr", RunConfig(device="fmmr", frequency=f, sweep_axis="bias", sweep_start=-0.5,
                                    sweep_stop=0.5, sweep_points=201, **side))])
    if fig == "fig3":
        return ("FMMR detected first and second harmonic vs frequency [Hz], laser 6 GHz from resonance "
                f"(loop phase {fmmr_bias:.6g} rad)",
                [("fmmr", RunConfig(device="fmmr", bias=fmmr_bias, sweep_axis="frequency", sweep_start=1e9,
                                    sweep_stop=100e9, sweep_points=100, sidebands=[], harmonics=[1, 2]))])
    if fig in ("fig4a", "fig4b"):
        f = 5e9 if fig == "fig4a" else 50e9
        return (f"CMMR field sidebands d0, d+-1, d+-2 vs MZI bias [rad] at {f / 1e9:g} GHz",
                [("cmmr", RunConfig(device="cmmr", frequency=f, sweep_axis="bias", sweep_start=0.0,
                                    sweep_stop=0.8, sweep_points=161, **side))])
    if fig == "fig5":
        return (f"CMMR detected fundamental vs frequency [Hz] at bias 0.15 and {FIG5_SECOND_BIAS} rad "
                f"(the second bias value is a chosen assumption)",
                [(f"bias={b:g}", RunConfig(device="cmmr", bias=b, sweep_axis="frequency", sweep_start=1e9,
                                           sweep_stop=500e9, sweep_points=250, sidebands=[], harmonics=[1]))
                 for b in (0.15, FIG5_SECOND_BIAS)])
    if fig == "fig6":
        return ("CMMR detected H1, H2, H3 vs frequency [Hz] at bias 0.12 rad",
                [("cmmr", RunConfig(device="cmmr", bias=0.12, sweep_axis="frequency", sweep_start=1e9,
                                    sweep_stop=500e9, sweep_points=250, sidebands=[]))])
    if fig == "fig7b":
        return ("DCMMR detected H1, H2, H3 vs frequency [Hz] at bias 0.12 rad, offsets pi/2 and pi/2",
                [("dcmmr", RunConfig(device="dcmmr", bias=0.12, sweep_axis="frequency", sweep_start=1e9,
                                     sweep_stop=500e9, sweep_points=250, sidebands=[]))])
    if fig == "fig8":
        return ("Detected H1, H2, H3 vs drive beta [rad] at 100 GHz for CMMR, DCMMR (bias 0.12) and "
                "quadrature MZI",
                [(kind, RunConfig(device=kind, frequency=100e9, sweep_axis="drive", sweep_start=1e-3,
                                  sweep_stop=0.3, sweep_points=60, sweep_spacing="log", sidebands=[],
                                  **({} if kind == "mzi" else {"bias": 0.12})))
                 for kind in ("cmmr", "dcmmr", "mzi")])
    raise KeyError(fig)


FIGURES = ("fig2a", "fig2b", "fig3", "fig4a", "fig4b", "fig5", "fig6", "fig7b", "fig8")


def render_repro(fig: str, workers: int | None = None) -> str:
    desc, series = figure_series(fig)
    buf = io.StringIO()
    buf.write(f"# figure: {fig}: {desc}\n")
    cols: list[str] | None = None
    body = []
    for label, cfg in series:
        cfg.workers = workers
        result = execute(cfg)
        device = build_device(cfg)
        buf.write(f"# series {label}: config {resolved_config(cfg, device).to_json()}\n")
        buf.write(f"# series {label}: window order {result.order}, max N->2N change {result.max_change:.3g}\n")
        cols = ["series"] + csv_columns(cfg)
        body += [[label] + row for row in csv_rows(result)]
    buf.write(",".join(cols or []) + "\n")
    for row in body:
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

@dataclass
class Check:
    name: str
    passed: bool
    detail: str
    soft: bool = False

    def line(self) -> str:
        tag = ("PASS" if self.passed else "FAIL") if not self.soft else ("SOFT-OK" if self.passed else "SOFT-MISS")
        return f"[{tag}] {self.name}: {self.detail}"


def _beta0_expected(device: Device) -> complex:
    if isinstance(device, FmmrParams):
        return all_pass_transmission(device.alpha, device.rho, device.loop_phase)
    if isinstance(device, CmmrParams):
        return all_pass_transmission(device.alpha, math.cos(device.bias_phase / 2), device.loop_phase)
    if isinstance(device, DcmmrParams):
        ring = device.ring
        t = all_pass_transmission(ring.alpha, math.cos(ring.bias_phase / 2), ring.loop_phase)
        return t * (1j + np.exp(1j * device.combine_phase)) / 2
    return 1j * math.sin(device.bias_phase / 2)


def _lossless(device: Device) -> Device | None:
    if isinstance(device, (FmmrParams, CmmrParams)):
        return replace(device, alpha=1.0)
    return None


IP3_TARGETS = {5e9: (None, 3.0), 50e9: (10.0, 2.0), 100e9: (12.5, 2.0), 200e9: (17.0, 2.0)}
IP3_SENSITIVITY_BIASES = (0.10, 0.11, 0.12, 0.13, 0.14, 0.15, 0.16)


def ip3_table(device: Device) -> list[Check]:
    """Measured intercept gains vs the target figures plus a bias-sensitivity sweep."""
    checks = []
    for f, (target, tol) in IP3_TARGETS.items():
        val = ip3_improvement_vs_mzi(device, f)
        ok = abs(val) < tol if target is None else abs(val - target) <= tol
        want = f"|x| < {tol:g}" if target is None else f"{target:g} +- {tol:g}"
        checks.append(Check(f"ip3 gain vs MZI at {f / 1e9:g} GHz", ok, f"{val:.2f} dB (target {want})", soft=True))
    for bias in IP3_SENSITIVITY_BIASES:
        vals = [ip3_improvement_vs_mzi(with_bias(device, bias), f) for f in IP3_TARGETS]
        hits = all((abs(v) < tol) if t is None else abs(v - t) <= tol
                   for v, (t, tol) in zip(vals, IP3_TARGETS.values()))
        text = ", ".join(f"{f / 1e9:g}G={v:.2f}" for f, v in zip(IP3_TARGETS, vals))
        checks.append(Check(f"ip3 sensitivity bias={bias:.2f}", hits, text + " dB", soft=True))
    return checks


def verify_checks(kind: str, preset: str) -> list[Check]:
    cfg = RunConfig(device=kind, preset=preset)
    cfg.validate()
    device = build_device(cfg)
    checks: list[Check] = []

    errs = []
    for f in (5e9, 50e9, 100e9):
        cv = cross_validate(with_frequency(device, f), HarmonicWindow(24), TdConfig(samples_per_round_trip=256))
        errs.append(cv.max_relative_error)
    worst = max(errs)
    checks.append(Check("oracle equivalence (5/50/100 GHz, |n|<=3)", worst < ORACLE_TOL,
                        f"max relative error {worst:.3g} (tol {ORACLE_TOL:g})"))

    lossless = device if preset == "lossless-unitarity" else _lossless(device)
    if lossless is not None:
        rng = np.random.default_rng(7)
        worst_p = 0.0
        for _ in range(10):
            trial = with_drive(with_frequency(with_bias(lossless, rng.uniform(0.05, 3.0)), rng.uniform(1e9, 300e9)),
                               rng.uniform(0.0, 1.0))
            worst_p = max(worst_p, abs(output_spectrum(trial).power() - 1.0))
        checks.append(Check("lossless unitarity (alpha=1)", worst_p < 1e-10, f"max |sum|d_n|^2 - 1| = {worst_p:.3g}"))
        if preset == "lossless-unitarity":
            p = output_spectrum(device).power()
            checks.append(Check("preset output power", abs(p - 1) < 1e-10, f"sum|d_n|^2 = {p:.15f}"))

    static = with_drive(device, 0.0)
    got = output_spectrum(static)[0]
    want = _beta0_expected(static)
    checks.append(Check("beta=0 closed-form reduction", abs(got - want) < 1e-12,
                        f"|d0 - closed form| = {abs(got - want):.3g}"))

    coarse = output_spectrum(device, HarmonicWindow(16))
    fine = output_spectrum(device, HarmonicWindow(32))
    change = max(abs(coarse[n] - fine[n]) for n in range(-5, 6))
    checks.append(Check("truncation convergence (N 16 -> 32, |n|<=5)", change < 1e-9, f"max change {change:.3g}"))

    if kind == "dcmmr":
        d = output_spectrum(device)
        worst2 = max(abs(d[2]), abs(d[-2]))
        checks.append(Check("second-order field cancellation", worst2 <= 1e-8, f"max |d+-2| = {worst2:.3g}"))
        ring_d = output_spectrum(device.ring)
        carrier = 10 * math.log10(abs(d[0]) ** 2 / abs(ring_d[0]) ** 2)
        fund = (harmonic_level_db(intensity_harmonics(d, 1), 1)
                - harmonic_level_db(intensity_harmonics(ring_d, 1), 1))
        checks.append(Check("carrier penalty vs single CMMR", abs(carrier + 9) <= 1,
                            f"{carrier:.2f} dB carrier, {fund:.2f} dB fundamental (target -9 +- 1 dB)", soft=True))
    if kind == "mzi":
        worst_i2 = 0.0
        for beta in (0.01, 0.1, 0.3, 0.5):
            ih = intensity_harmonics(output_spectrum(with_drive(with_bias(device, math.pi / 2), beta)), 2)
            worst_i2 = max(worst_i2, abs(ih[2]))
        checks.append(Check("quadrature intensity H2 vanishes", worst_i2 <= 1e-12, f"max |I_2| = {worst_i2:.3g}"))
    if kind in ("cmmr", "dcmmr") and preset == "paper":
        checks += ip3_table(device)
    return checks


# ---------------------------------------------------------------------------
# Voltage to drive depth
# ---------------------------------------------------------------------------

def beta_from_voltage(v_volts: float, vpi_l_volt_cm: float, electrode_length_cm: float,
                      paper_convention: bool = False) -> float:
    """Phase depth from a drive voltage.

    Default: ``pi * V / V_pi`` with ``V_pi = (V_pi L) / L``. The alternative
    convention returns the bare ratio ``V / V_pi``.
    """
    if v_volts < 0 or vpi_l_volt_cm <= 0 or electrode_length_cm <= 0:
        raise DomainError("voltage must be >= 0 and V_pi*L, length must be positive")
    ratio = v_volts * electrode_length_cm / vpi_l_volt_cm
    return ratio if paper_convention else math.pi * ratio


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # noqa: D401 - argparse API
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _parse_sweep(tokens: Sequence[str]) -> dict[str, Any]:
    if len(tokens) < 2:
        raise ConfigurationError("--sweep needs an axis and a range, e.g. 'frequency 1e9..100e9 points=100'")
    out: dict[str, Any] = {"sweep_axis": tokens[0]}
    m = re.fullmatch(r"(.+?)\.\.(.+)", tokens[1])
    if m:
        out["sweep_start"], out["sweep_stop"] = parse_si(m.group(1)), parse_si(m.group(2))
    else:
        out["sweep_start"] = out["sweep_stop"] = parse_si(tokens[1])
        out["sweep_points"] = 1
    for tok in tokens[2:]:
        key, _, val = tok.partition("=")
        if key == "points":
            out["sweep_points"] = int(val)
        elif key == "spacing":
            out["sweep_spacing"] = val
        else:
            raise ConfigurationError(f"unknown sweep option {tok!r}")
    return out


def _parse_int_range(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    m = re.fullmatch(r"(-?\d+)\.\.(-?\d+)", text)
    if m:
        return list(range(int(m.group(1)), int(m.group(2)) + 1))
    return [int(t) for t in text.split(",")]


def _load_config_file(path: str) -> dict[str, Any]:
    with open(path) as fh:
        text = fh.read()
    for line in text.splitlines():
        if line.startswith("# config: "):
            return json.loads(line[len("# config: "):])
    return json.loads(text)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ringmod", description="Harmonic-balance analysis of micro-ring modulators.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="parameter sweep to CSV")
    run.add_argument("--config", help="JSON config file (or a CSV produced by this tool)")
    run.add_argument("--device", choices=DEVICE_KINDS)
    run.add_argument("--preset", choices=PRESETS)
    for name in ("alpha", "rho", "bias", "loop-phase", "beta", "rf-phase", "rf-phase-offset", "combine-phase"):
        run.add_argument(f"--{name}", type=float)
    run.add_argument("--td", type=parse_si, help="round-trip delay [s]")
    run.add_argument("--fsr", type=parse_si, help="free spectral range [Hz]; td = 1/fsr")
    run.add_argument("--frequency", type=parse_si, help="drive frequency when not sweeping it [Hz]")
    run.add_argument("--sweep", nargs="+", metavar="TOKEN",
                     help="AXIS START..STOP [points=N] [spacing=linear|log]")
    run.add_argument("--sidebands", help="field sidebands to emit, e.g. --sidebands=-2..2 or 0,1")
    run.add_argument("--harmonics", help="intensity harmonics to emit, e.g. 1,2,3")
    run.add_argument("--order", type=int, help="harmonic window order N")
    run.add_argument("--oracle-check", action="store_true", default=None)
    run.add_argument("--strict", action="store_true", default=None)
    run.add_argument("--workers", type=int)
    run.add_argument("--output", "-o")

    rep = sub.add_parser("repro", help="emit the sweep behind a figure")
    rep.add_argument("figure")
    rep.add_argument("--output", "-o")
    rep.add_argument("--workers", type=int)

    ver = sub.add_parser("verify", help="oracle and invariant checks")
    ver.add_argument("device", choices=DEVICE_KINDS)
    ver.add_argument("preset", nargs="?", default="paper", choices=PRESETS)

    bfv = sub.add_parser("beta-from-voltage", help="drive depth from voltage")
    bfv.add_argument("v_volts", type=float)
    bfv.add_argument("vpi_l_volt_cm", type=float)
    bfv.add_argument("electrode_length_cm", type=float)
    bfv.add_argument("--paper-beta-convention", action="store_true")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.td is not None and args.fsr is not None:
        raise ConfigurationError("--td and --fsr are mutually exclusive")
    data: dict[str, Any] = _load_config_file(args.config) if args.config else {}
    flags = {
        "device": args.device, "preset": args.preset, "alpha": args.alpha, "rho": args.rho,
        "bias": args.bias, "loop_phase": args.loop_phase, "beta": args.beta, "td": args.td, "fsr": args.fsr,
        "rf_phase": args.rf_phase, "frequency": args.frequency, "rf_phase_offset": args.rf_phase_offset,
        "combine_phase": args.combine_phase, "order": args.order, "oracle_check": args.oracle_check,
        "strict": args.strict, "workers": args.workers, "output": args.output,
    }
    data.update({k: v for k, v in flags.items() if v is not None})
    if args.td is not None:
        data["fsr"] = None
    if args.fsr is not None:
        data["td"] = None
    if args.sweep:
        data.update(_parse_sweep(args.sweep))
    if args.sidebands is not None:
        data["sidebands"] = _parse_int_range(args.sidebands)
    if args.harmonics is not None:
        data["harmonics"] = _parse_int_range(args.harmonics)
    cfg = RunConfig.from_mapping(data)
    cfg.validate()
    return cfg


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "run":
            cfg = config_from_args(args)
            result = execute(cfg)
            _emit(render_run(result), cfg.output)
            print(summary_line(result), file=sys.stderr)
            if result.oracle_error is not None and result.oracle_error > ORACLE_TOL:
                print(f"oracle check failed: {result.oracle_error:.3g}", file=sys.stderr)
                return EXIT_VERIFY
            if cfg.strict and not all(result.flags):
                return EXIT_CONVERGENCE
            return EXIT_OK
        if args.command == "repro":
            if args.figure not in FIGURES:
                print(f"unknown figure {args.figure!r}; valid ids: {', '.join(FIGURES)}", file=sys.stderr)
                return EXIT_CONFIG
            _emit(render_repro(args.figure, args.workers), args.output)
            return EXIT_OK
        if args.command == "verify":
            checks = verify_checks(args.device, args.preset)
            for chk in checks:
                print(chk.line())
            failed = [c.name for c in checks if not c.passed and not c.soft]
            if failed:
                print(f"verify failed: {', '.join(failed)}", file=sys.stderr)
                return EXIT_VERIFY
            return EXIT_OK
        if args.command == "beta-from-voltage":
            default = beta_from_voltage(args.v_volts, args.vpi_l_volt_cm, args.electrode_length_cm)
            literal = beta_from_voltage(args.v_volts, args.vpi_l_volt_cm, args.electrode_length_cm, True)
            print(_fmt(literal if args.paper_beta_convention else default))
            print(f"beta pi*V/Vpi = {default:.6g}; beta V/Vpi = {literal:.6g}", file=sys.stderr)
            return EXIT_OK
    except (ConfigurationError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SingularSystemError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except RingmodError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (OSError, json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
