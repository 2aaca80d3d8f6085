"""Resonance-frequency-modulated micro-ring (FMMR).

The electro-optic section imposes ``exp(i*beta*cos(w t + theta_rf))`` once per
round trip; the ring is coupled to the bus waveguide by a lossless coupler
with self-coupling ``rho`` and cross-coupling ``tau``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import DomainError
from .harmonics import (
    ComplexSpectrum,
    DelayDiagonal,
    HarmonicWindow,
    phase_drive_kernel,
    solve_feedback,
)


@dataclass(frozen=True)
class FmmrParams:
    """FMMR operating point.

    Parameters
    ----------
    alpha : float
        Round-trip amplitude transmission, in (0, 1].
    delay_s : float
        Round-trip delay t_d [s]; the FSR is 1/t_d.
    loop_phase : float
        Static round-trip carrier phase [rad]: laser detuning plus DC bias.
        Zero is resonance.
    rho : float
        Coupler self-coupling (field).
    beta : float
        Peak phase-modulation depth per round trip [rad].
    rf_frequency_hz : float
        Drive frequency [Hz].
    rf_phase : float
        Drive phase theta_rf [rad]; drive is cos(w t + theta_rf).
    tau : float, optional
        Coupler cross-coupling; defaults to sqrt(1 - rho^2).
    """

    alpha: float
    delay_s: float
    loop_phase: float
    rho: float
    beta: float
    rf_frequency_hz: float
    rf_phase: float = 0.0
    tau: float | None = None

    def __post_init__(self) -> None:
        if not 0 < self.alpha <= 1:
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not 0 <= self.rho <= 1:
            raise DomainError(f"rho must lie in [0, 1], got {self.rho}")
        if self.delay_s <= 0:
            raise DomainError(f"delay_s must be positive, got {self.delay_s}")
        if self.beta < 0:
            raise DomainError(f"beta must be >= 0, got {self.beta}")
        if self.rf_frequency_hz < 0:
            raise DomainError(f"rf_frequency_hz must be >= 0, got {self.rf_frequency_hz}")
        if self.tau is None:
            object.__setattr__(self, "tau", math.sqrt(1.0 - self.rho**2))
        elif abs(self.rho**2 + self.tau**2 - 1.0) > 1e-12:
            raise DomainError("coupler must be lossless: rho^2 + tau^2 = 1")
        object.__setattr__(self, "loop_phase", math.remainder(self.loop_phase, 2 * math.pi))

    @property
    def rf_angular_frequency(self) -> float:
        return 2 * math.pi * self.rf_frequency_hz

    @property
    def loop_gain(self) -> float:
        return self.rho * self.alpha


def detuning_phase(detuning_hz: float, delay_s: float) -> float:
    """Loop phase that places the laser ``detuning_hz`` away from resonance."""
    return -2 * math.pi * detuning_hz * delay_s


def fmmr_round_trip_operator(params: FmmrParams, window: HarmonicWindow) -> NDArray[np.complex128]:
    """Round-trip matrix: modulate, then delay.

    ``M = D @ T`` with ``T`` the Toeplitz matrix of
    ``alpha * exp(i*beta*cos(w t + theta_rf))`` and ``D`` the delay diagonal,
    so the phase of row ``m`` carries ``m * w * t_d``.
    """
    drive = phase_drive_kernel(params.beta, params.rf_phase, window).scaled(params.alpha)
    delay = DelayDiagonal(window, params.loop_phase, params.rf_angular_frequency * params.delay_s)
    return delay.entries[:, None] * drive.matrix()


def solve_fmmr(params: FmmrParams,
               window: HarmonicWindow | None = None) -> tuple[ComplexSpectrum, ComplexSpectrum]:
    """Circulating field ``b`` and output field ``d`` of an FMMR.

    Coupler: ``b = rho*c + i*tau*a`` and ``d = rho*a + i*tau*c`` with
    ``c = M b``. The output uses ``+i*tau``: this is the only sign that keeps
    the coupler unitary and reduces to the all-pass response at beta = 0.
    """
    window = window or HarmonicWindow()
    a = ComplexSpectrum.carrier(window, params.rf_angular_frequency)
    m = fmmr_round_trip_operator(params, window)
    b = solve_feedback(params.rho * m, a.replace_amplitudes(1j * params.tau * a.amplitudes))
    d = params.rho * a.amplitudes + 1j * params.tau * (m @ b.amplitudes)
    return b, a.replace_amplitudes(d)


def all_pass_transmission(alpha: float, rho: float, loop_phase: float) -> complex:
    """Static all-pass field transmission (rho - alpha e^{i theta})/(1 - rho alpha e^{i theta})."""
    z = alpha * np.exp(1j * loop_phase)
    return complex((rho - z) / (1 - rho * z))
