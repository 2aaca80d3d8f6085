"""Brute-force time-domain simulation used as an oracle for the harmonic solvers.

The ring is an exact ``P``-sample delay line. Fields are complex envelopes in
the frame rotating with the laser, so the only trace of the optical carrier
is the static loop phase applied on each pass. The modulation is lumped: the
field is multiplied by the drive as it enters the delay line, which is the
same ordering (modulate, then delay) as the harmonic round-trip matrix.

Because a whole round trip depends only on the previous one, the recurrence
is advanced ``P`` samples at a time with array operations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .cmmr import CmmrParams
from .composite import DcmmrParams, MziBaselineParams
from .devices import Device, device_kind, output_spectrum, with_frequency
from .errors import ConfigurationError, ShapeError
from .fmmr import FmmrParams
from .harmonics import ComplexSpectrum, HarmonicWindow

_COMMENSURATE_RTOL = 1e-9
# Sidebands below this fraction of the spectrum's largest line are treated as
# numerically zero in both engines and compared in absolute terms.
ZERO_LINE_RTOL = 1e-12


@dataclass(frozen=True)
class TdConfig:
    """Sampling of the time-domain oracle.

    ``settle_round_trips=None`` picks ``ceil(30 / (1 - loop gain))`` for the
    simulated device, i.e. a transient below ``e^-30`` of steady state.
    """

    samples_per_round_trip: int = 256
    settle_round_trips: int | None = None
    analysis_rf_periods: int = 1

    def __post_init__(self) -> None:
        if self.samples_per_round_trip < 64:
            raise ConfigurationError("samples_per_round_trip must be >= 64")
        if self.settle_round_trips is not None and self.settle_round_trips < 0:
            raise ConfigurationError("settle_round_trips must be >= 0")
        if self.analysis_rf_periods < 1:
            raise ConfigurationError("analysis_rf_periods must be >= 1")


@dataclass(frozen=True, eq=False)
class TdResult:
    samples: NDArray[np.complex128]
    dt: float
    samples_per_rf_period: int
    rf_frequency_hz: float
    settle_round_trips: int


@dataclass
class CrossValidation:
    max_relative_error: float
    per_harmonic: dict[int, float]
    frequency_hz: float
    fd: ComplexSpectrum
    td: ComplexSpectrum
    zero_lines: list[int] = field(default_factory=list)


def _delay(device: Device) -> float | None:
    if isinstance(device, DcmmrParams):
        return device.ring.delay_s
    if isinstance(device, MziBaselineParams):
        return None
    return device.delay_s


def _time_step(device: Device, config: TdConfig) -> float:
    delay = _delay(device)
    if delay is None:
        # No delay line: sample the RF period with the same resolution.
        return 1.0 / (device.rf_frequency_hz * config.samples_per_round_trip)
    return delay / config.samples_per_round_trip


def snap_frequency(frequency_hz: float, dt: float) -> tuple[float, int]:
    """Nearest frequency whose period is an integer number of ``dt`` steps."""
    if frequency_hz <= 0:
        raise ConfigurationError("RF frequency must be positive for time-domain simulation")
    steps = max(1, round(1.0 / (frequency_hz * dt)))
    return 1.0 / (steps * dt), steps


def snap_device(device: Device, config: TdConfig) -> Device:
    """Move the device's drive onto the oracle's commensurate frequency grid."""
    if isinstance(device, MziBaselineParams):
        return device
    f, _ = snap_frequency(device.rf_frequency_hz, _time_step(device, config))
    return with_frequency(device, f)


def _period_samples(device: Device, config: TdConfig, dt: float) -> int:
    f = device.rf_frequency_hz
    exact = 1.0 / (f * dt)
    steps = round(exact)
    if steps < 1 or abs(exact - steps) > _COMMENSURATE_RTOL * exact:
        nearest, _ = snap_frequency(f, dt)
        raise ConfigurationError(
            f"RF frequency {f:.12g} Hz is not commensurate with dt={dt:.6g} s; "
            f"nearest commensurate frequency is {nearest:.12g} Hz"
        )
    return steps


def _settling_gain(device: FmmrParams | CmmrParams) -> float:
    """Per-round-trip decay used to size the transient.

    This is the worst-case loop gain when it is below one. A lossless CMMR
    whose coupler swings through the bar state has worst case exactly one,
    yet its transient still decays at the geometric-mean gain over an RF
    period, which is used instead.
    """
    gain = device.loop_gain
    if gain < 1.0 - 1e-9 or isinstance(device, FmmrParams):
        return gain
    u = 2 * np.pi * np.arange(4096) / 4096
    through = np.abs(np.cos(device.bias_phase / 2 + device.beta * np.cos(u)))
    with np.errstate(divide="ignore"):
        return float(device.alpha * np.exp(np.mean(np.log(through))))


def _settle(gain: float, config: TdConfig) -> int:
    if config.settle_round_trips is not None:
        return config.settle_round_trips
    if gain >= 1.0 - 1e-9:
        raise ConfigurationError("loop gain is 1: set settle_round_trips explicitly")
    return math.ceil(30.0 / (1.0 - gain))


def _drive_phase(index: NDArray[np.int_], period: int, rf_phase: float) -> NDArray[np.float64]:
    return 2 * np.pi * (index % period) / period + rf_phase


def _run_ring(device: FmmrParams | CmmrParams, config: TdConfig) -> TdResult:
    p = config.samples_per_round_trip
    dt = device.delay_s / p
    period = _period_samples(device, config, dt)
    k = _settle(_settling_gain(device), config)
    start = math.ceil(k * p / period) * period  # analysis window starts on an RF period boundary
    total = start + config.analysis_rf_periods * period
    blocks = math.ceil(total / p)
    loop = device.alpha * np.exp(1j * device.loop_phase)
    line = np.zeros(p, dtype=complex)  # field entering the delay line one round trip ago
    out = np.empty(blocks * p, dtype=complex)
    base = np.arange(p)
    fmmr = isinstance(device, FmmrParams)
    for blk in range(blocks):
        u = _drive_phase(base + blk * p, period, device.rf_phase)
        c = loop * line
        if fmmr:
            b = device.rho * c + 1j * device.tau
            out[blk * p:(blk + 1) * p] = device.rho + 1j * device.tau * c
            line = b * np.exp(1j * device.beta * np.cos(u))
        else:
            theta = device.bias_phase / 2 + device.beta * np.cos(u)
            through, cross = np.cos(theta), 1j * np.sin(theta)
            line = through * c + cross
            out[blk * p:(blk + 1) * p] = through + cross * c
    return TdResult(out[start:total], dt, period, device.rf_frequency_hz, k)


def simulate_device_td(device: Device, config: TdConfig | None = None) -> TdResult:
    """Steady-state output samples of ``device`` for a unit CW input.

    The stream covers exactly ``analysis_rf_periods`` RF periods and starts at
    an RF phase of zero, so it lines up with the harmonic solvers' time origin.
    """
    config = config or TdConfig()
    kind = device_kind(device)
    if kind in ("fmmr", "cmmr"):
        return _run_ring(device, config)
    if kind == "dcmmr":
        r1 = _run_ring(device.ring1, config)
        r2 = _run_ring(device.ring2, config)
        if len(r1.samples) != len(r2.samples):
            raise ShapeError("ring streams differ in length")
        combined = (1j * r1.samples + np.exp(1j * device.combine_phase) * r2.samples) / 2
        return TdResult(combined, r1.dt, r1.samples_per_rf_period, r1.rf_frequency_hz,
                        max(r1.settle_round_trips, r2.settle_round_trips))
    dt = _time_step(device, config)
    period = _period_samples(device, config, dt)
    idx = np.arange(config.analysis_rf_periods * period)
    theta = device.bias_phase / 2 + device.beta * np.cos(_drive_phase(idx, period, device.rf_phase))
    return TdResult(1j * np.sin(theta), dt, period, device.rf_frequency_hz, 0)


def dft_harmonics(samples: NDArray[np.complex128], samples_per_rf_period: int, window: HarmonicWindow,
                  rf_frequency_hz: float = 0.0) -> ComplexSpectrum:
    """Project a whole number of RF periods onto ``exp(-i n w t)``, ``|n| <= order``."""
    x = np.asarray(samples, dtype=complex)
    if samples_per_rf_period < 1 or len(x) == 0 or len(x) % samples_per_rf_period:
        raise ShapeError(
            f"{len(x)} samples is not a whole number of {samples_per_rf_period}-sample RF periods"
        )
    q = len(x) // samples_per_rf_period
    if 2 * window.order >= samples_per_rf_period:
        raise ShapeError("window too wide for the sampling rate")
    coeffs = np.fft.ifft(x)
    amps = coeffs[(window.indices * q) % len(x)]
    return ComplexSpectrum(window, amps, 2 * math.pi * rf_frequency_hz)


def td_spectrum(device: Device, window: HarmonicWindow, config: TdConfig | None = None) -> ComplexSpectrum:
    res = simulate_device_td(device, config)
    return dft_harmonics(res.samples, res.samples_per_rf_period, window, res.rf_frequency_hz)


def cross_validate(device: Device, window: HarmonicWindow | None = None, config: TdConfig | None = None,
                   harmonics: int = 3, floor: float = 1e-15) -> CrossValidation:
    """Compare harmonic-solver and time-domain sidebands ``|n| <= harmonics``.

    The drive frequency is first snapped onto the oracle's grid. The error of
    line ``n`` is ``|fd - td| / max(|td|, floor)``. Lines that both engines put
    below ``ZERO_LINE_RTOL`` of the largest line (for instance the cancelled
    second-order sidebands of the dual CMMR) carry no relative information;
    they are listed in ``zero_lines`` and scored as ``|fd - td| / max|td|``.
    """
    window = window or HarmonicWindow()
    config = config or TdConfig()
    dev = snap_device(device, config)
    fd = output_spectrum(dev, window)
    td = td_spectrum(dev, window, config)
    scale = float(np.max(np.abs(td.amplitudes)))
    per: dict[int, float] = {}
    zeros: list[int] = []
    for n in range(-harmonics, harmonics + 1):
        a, b = fd[n], td[n]
        if abs(a) <= ZERO_LINE_RTOL * scale and abs(b) <= ZERO_LINE_RTOL * scale:
            zeros.append(n)
            per[n] = abs(a - b) / scale
        else:
            per[n] = abs(a - b) / max(abs(b), floor)
    return CrossValidation(max(per.values()), per, dev.rf_frequency_hz, fd, td, zeros)
