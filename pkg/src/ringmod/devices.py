"""Uniform access to the four device models and their default presets."""

from __future__ import annotations

import math
from dataclasses import replace
from typing import Union

from .cmmr import CmmrParams, solve_cmmr
from .composite import DcmmrParams, MziBaselineParams, solve_dcmmr, solve_mzi_baseline
from .errors import DomainError
from .fmmr import FmmrParams, detuning_phase, solve_fmmr
from .harmonics import ComplexSpectrum, HarmonicWindow

Device = Union[FmmrParams, CmmrParams, DcmmrParams, MziBaselineParams]

DEVICE_KINDS = ("fmmr", "cmmr", "dcmmr", "mzi")

# Default operating point: 300 um ring, FSR 500 GHz.
PRESET_ALPHA = 0.98
PRESET_RHO = 0.97
PRESET_DELAY_S = 2e-12
PRESET_BETA = 0.0942
PRESET_FMMR_DETUNING_HZ = 6e9
PRESET_CMMR_BIAS = 0.12


def device_kind(device: Device) -> str:
    if isinstance(device, FmmrParams):
        return "fmmr"
    if isinstance(device, CmmrParams):
        return "cmmr"
    if isinstance(device, DcmmrParams):
        return "dcmmr"
    if isinstance(device, MziBaselineParams):
        return "mzi"
    raise TypeError(f"unknown device type {type(device).__name__}")


def output_spectrum(device: Device, window: HarmonicWindow | None = None) -> ComplexSpectrum:
    """Output field sidebands of any supported device."""
    kind = device_kind(device)
    if kind == "fmmr":
        return solve_fmmr(device, window)[1]
    if kind == "cmmr":
        return solve_cmmr(device, window)[1]
    if kind == "dcmmr":
        return solve_dcmmr(device, window)
    return solve_mzi_baseline(device, window)


def with_drive(device: Device, beta: float) -> Device:
    if isinstance(device, DcmmrParams):
        return replace(device, ring=replace(device.ring, beta=beta))
    return replace(device, beta=beta)


def with_frequency(device: Device, frequency_hz: float) -> Device:
    if isinstance(device, DcmmrParams):
        return replace(device, ring=replace(device.ring, rf_frequency_hz=frequency_hz))
    return replace(device, rf_frequency_hz=frequency_hz)


def with_bias(device: Device, bias: float) -> Device:
    """Set the device's DC operating phase.

    For an FMMR this is the loop phase (detuning); for the others it is the
    MZI bias phase.
    """
    if isinstance(device, FmmrParams):
        return replace(device, loop_phase=bias)
    if isinstance(device, DcmmrParams):
        return replace(device, ring=replace(device.ring, bias_phase=bias))
    return replace(device, bias_phase=bias)


def bias_of(device: Device) -> float:
    if isinstance(device, FmmrParams):
        return device.loop_phase
    if isinstance(device, DcmmrParams):
        return device.ring.bias_phase
    return device.bias_phase


def paper_preset(kind: str, rf_frequency_hz: float = 5e9) -> Device:
    """Default operating point for each device kind (the `paper` preset)."""
    if kind == "fmmr":
        return FmmrParams(alpha=PRESET_ALPHA, delay_s=PRESET_DELAY_S,
                          loop_phase=detuning_phase(PRESET_FMMR_DETUNING_HZ, PRESET_DELAY_S),
                          rho=PRESET_RHO, beta=PRESET_BETA, rf_frequency_hz=rf_frequency_hz)
    if kind == "cmmr":
        return CmmrParams(alpha=PRESET_ALPHA, delay_s=PRESET_DELAY_S, loop_phase=0.0,
                          bias_phase=PRESET_CMMR_BIAS, beta=PRESET_BETA, rf_frequency_hz=rf_frequency_hz)
    if kind == "dcmmr":
        return DcmmrParams(ring=paper_preset("cmmr", rf_frequency_hz))
    if kind == "mzi":
        return MziBaselineParams(beta=PRESET_BETA, rf_frequency_hz=rf_frequency_hz, bias_phase=math.pi / 2)
    raise DomainError(f"unknown device kind {kind!r}; expected one of {DEVICE_KINDS}")


def lossless_preset(kind: str, rf_frequency_hz: float = 5e9) -> Device:
    """Default preset with the ring loss removed (alpha = 1)."""
    dev = paper_preset(kind, rf_frequency_hz)
    if isinstance(dev, (FmmrParams, CmmrParams)):
        return replace(dev, alpha=1.0)
    if isinstance(dev, DcmmrParams):
        return replace(dev, ring=replace(dev.ring, alpha=1.0))
    return dev


CONVERGENCE_TOL = 1e-9
MAX_AUTO_ORDER = 96


def converged_spectrum(device: Device, order: int = 24, max_order: int = MAX_AUTO_ORDER,
                       tol: float = CONVERGENCE_TOL) -> tuple[ComplexSpectrum, int, bool]:
    """Output spectrum with the window order doubled until ``N -> 2N`` moves no line by ``tol``.

    Returns the spectrum at the final order, that order, and whether the
    convergence test passed before reaching ``max_order``.
    """
    window = HarmonicWindow(order)
    while True:
        coarse = output_spectrum(device, window)
        fine = output_spectrum(device, window.doubled())
        change = float(max(abs(coarse.amplitudes - fine.truncated(window).amplitudes)))
        if change < tol:
            return coarse, window.order, True
        if window.doubled().order > max_order:
            return fine, window.doubled().order, False
        window = window.doubled()
