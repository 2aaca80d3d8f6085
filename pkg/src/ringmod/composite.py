"""Dual-CMMR linearised modulator and the standalone MZI baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .cmmr import CmmrParams, solve_cmmr
from .errors import DomainError
from .harmonics import ComplexSpectrum, HarmonicWindow, trig_drive_kernels


@dataclass(frozen=True)
class DcmmrParams:
    """Two identical CMMRs between a -3 dB splitter and a -3 dB 2x2 coupler.

    The second ring is driven ``rf_phase_offset`` later in RF phase and its
    output picks up a static optical phase ``combine_phase`` before the
    output coupler. The output is the port that receives ring 1 on the cross
    path and ring 2 on the bar path:

        d = (i * d1 + exp(i * combine_phase) * d2) / 2

    With both offsets at pi/2 the two second-order sidebands arrive in
    antiphase and cancel.
    """

    ring: CmmrParams
    rf_phase_offset: float = math.pi / 2
    combine_phase: float = math.pi / 2

    @property
    def ring1(self) -> CmmrParams:
        return self.ring

    @property
    def ring2(self) -> CmmrParams:
        return replace(self.ring, rf_phase=self.ring.rf_phase + self.rf_phase_offset)

    @property
    def beta(self) -> float:
        return self.ring.beta

    @property
    def rf_frequency_hz(self) -> float:
        return self.ring.rf_frequency_hz

    @property
    def rf_angular_frequency(self) -> float:
        return self.ring.rf_angular_frequency


def combine_outputs(d1: ComplexSpectrum, d2: ComplexSpectrum, combine_phase: float) -> ComplexSpectrum:
    amps = (1j * d1.amplitudes + np.exp(1j * combine_phase) * d2.amplitudes) / 2
    return d1.replace_amplitudes(amps)


def solve_dcmmr(params: DcmmrParams, window: HarmonicWindow | None = None) -> ComplexSpectrum:
    """Output field of the dual CMMR."""
    window = window or HarmonicWindow()
    _, d1 = solve_cmmr(params.ring1, window)
    _, d2 = solve_cmmr(params.ring2, window)
    return combine_outputs(d1, d2, params.combine_phase)


@dataclass(frozen=True)
class MziBaselineParams:
    """Push-pull MZI modulator read at its cross port.

    ``bias_phase = pi/2`` is quadrature.
    """

    beta: float
    rf_frequency_hz: float
    bias_phase: float = math.pi / 2
    rf_phase: float = 0.0

    def __post_init__(self) -> None:
        if self.beta < 0:
            raise DomainError(f"beta must be >= 0, got {self.beta}")
        if self.rf_frequency_hz < 0:
            raise DomainError(f"rf_frequency_hz must be >= 0, got {self.rf_frequency_hz}")

    @property
    def rf_angular_frequency(self) -> float:
        return 2 * math.pi * self.rf_frequency_hz


def solve_mzi_baseline(params: MziBaselineParams, window: HarmonicWindow | None = None) -> ComplexSpectrum:
    """Cross-port field ``i sin(bias/2 + beta cos(w t + theta))`` applied to a unit carrier.

    There is no delay element, so the result does not depend on the drive
    frequency except through the stored ``rf_angular_frequency``.
    """
    window = window or HarmonicWindow()
    _, sin_k = trig_drive_kernels(params.bias_phase / 2, params.beta, params.rf_phase, window)
    a = ComplexSpectrum.carrier(window, params.rf_angular_frequency)
    return a.replace_amplitudes(1j * (sin_k.matrix() @ a.amplitudes))
