"""Coupling-modulated micro-ring (CMMR).

The ring is coupled to the bus through a balanced Mach-Zehnder section whose
push-pull arms are driven by the RF signal. The MZI acts as a tunable
lossless coupler with instantaneous half-angle

    Theta(t) = bias_phase / 2 + beta * cos(w t + theta_rf)

through transmission ``cos(Theta)`` and cross transmission ``i sin(Theta)``.
``bias_phase = 0`` is the zero-coupling (bar) state and ``bias_phase = pi``
full cross coupling. The ring itself is a pure delay with loss.
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
    solve_feedback,
    trig_drive_kernels,
)


@dataclass(frozen=True)
class CmmrParams:
    """CMMR operating point.

    Parameters
    ----------
    alpha : float
        Round-trip amplitude transmission, in (0, 1].
    delay_s : float
        Round-trip delay t_d [s].
    loop_phase : float
        Ring round-trip carrier phase [rad]; zero is resonance.
    bias_phase : float
        MZI DC phase difference between the arms [rad], from zero coupling.
    beta : float
        Per-arm push-pull modulation depth [rad].
    rf_frequency_hz : float
        Drive frequency [Hz].
    rf_phase : float
        Drive phase [rad].
    """

    alpha: float
    delay_s: float
    loop_phase: float
    bias_phase: float
    beta: float
    rf_frequency_hz: float
    rf_phase: float = 0.0

    def __post_init__(self) -> None:
        if not 0 < self.alpha <= 1:
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.delay_s <= 0:
            raise DomainError(f"delay_s must be positive, got {self.delay_s}")
        if self.beta < 0:
            raise DomainError(f"beta must be >= 0, got {self.beta}")
        if self.rf_frequency_hz < 0:
            raise DomainError(f"rf_frequency_hz must be >= 0, got {self.rf_frequency_hz}")
        object.__setattr__(self, "bias_phase", self.bias_phase % (2 * math.pi))
        object.__setattr__(self, "loop_phase", math.remainder(self.loop_phase, 2 * math.pi))

    @property
    def rf_angular_frequency(self) -> float:
        return 2 * math.pi * self.rf_frequency_hz

    @property
    def loop_gain(self) -> float:
        """Worst-case round-trip field gain ``alpha * max|cos Theta|``."""
        lo = self.bias_phase / 2 - self.beta
        hi = self.bias_phase / 2 + self.beta
        if math.floor(lo / math.pi) != math.floor(hi / math.pi) or lo % math.pi == 0:
            return self.alpha
        return self.alpha * max(abs(math.cos(lo)), abs(math.cos(hi)))


def critical_coupling_bias(alpha: float) -> float:
    """Bias at which the static through transmission equals ``alpha``."""
    return 2 * math.acos(alpha)


def mzi_coupler_operators(bias_phase: float, beta: float, rf_phase: float,
                          window: HarmonicWindow) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
    """Through (``M1``) and cross (``M2``) harmonic matrices of the MZI coupler.

    Both bar paths share ``M1`` and both cross paths share ``M2``, so
    ``[[M1, M2], [M2, M1]]`` is unitary in the untruncated limit.
    """
    cos_k, sin_k = trig_drive_kernels(bias_phase / 2, beta, rf_phase, window)
    return cos_k.matrix(), 1j * sin_k.matrix()


def ring_feedback_operator(params: CmmrParams, window: HarmonicWindow) -> NDArray[np.complex128]:
    """Diagonal round trip ``alpha * exp(i (loop_phase + n w t_d))``."""
    delay = DelayDiagonal(window, params.loop_phase, params.rf_angular_frequency * params.delay_s,
                          gain=params.alpha)
    return delay.matrix()


def solve_cmmr(params: CmmrParams,
               window: HarmonicWindow | None = None) -> tuple[ComplexSpectrum, ComplexSpectrum]:
    """Circulating field ``b`` (ring input) and bus output ``d`` of a CMMR.

    ``b = M1 M3 b + M2 a`` and ``d = M1 a + M2 M3 b``: the output takes the
    through path from the bus input and the cross path from the ring.
    """
    window = window or HarmonicWindow()
    a = ComplexSpectrum.carrier(window, params.rf_angular_frequency)
    m1, m2 = mzi_coupler_operators(params.bias_phase, params.beta, params.rf_phase, window)
    m3 = ring_feedback_operator(params, window)
    b = solve_feedback(m1 @ m3, a.replace_amplitudes(m2 @ a.amplitudes))
    d = m1 @ a.amplitudes + m2 @ (m3 @ b.amplitudes)
    return b, a.replace_amplitudes(d)
