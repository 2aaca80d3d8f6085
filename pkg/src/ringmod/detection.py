"""Square-law detection and linearity metrics.

Levels are electrical dB of the photocurrent harmonic relative to the
photocurrent of an unmodulated unit-power carrier: ``20*log10(2|I_n|)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import brentq

from .composite import MziBaselineParams
from .devices import Device, output_spectrum, with_drive, with_frequency
from .errors import BracketError, DomainError, FitQualityError, RingmodError, ShapeError
from .harmonics import ComplexSpectrum, HarmonicWindow

SMALL_SIGNAL_WINDOW = (1e-3, 3e-2)
FIT_RESIDUAL_DB = 0.05
_MZI_MAX_DRIVE = 0.9  # fundamental of the quadrature MZI peaks near beta = 0.92


@dataclass(frozen=True, eq=False)
class IntensityHarmonics:
    """Detected intensity harmonics ``I_0 .. I_nout`` (negative ones are conjugates)."""

    coefficients: NDArray[np.complex128]

    @property
    def n_out(self) -> int:
        return len(self.coefficients) - 1

    @property
    def dc(self) -> float:
        return float(self.coefficients[0].real)

    def __getitem__(self, n: int) -> complex:
        if n < 0:
            return complex(np.conj(self.coefficients[-n]))
        return complex(self.coefficients[n])


def intensity_harmonics(d: ComplexSpectrum, n_out: int) -> IntensityHarmonics:
    """``I_n = sum_m conj(d_m) d_{m+n}``, the Fourier coefficients of ``|E(t)|^2``.

    The correlation form is used so that ``I_0`` is the mean detected power
    and ``I_{-n} = conj(I_n)``.
    """
    if n_out < 0 or n_out > d.window.order:
        raise ShapeError(f"n_out={n_out} must lie in [0, {d.window.order}]")
    x = d.amplitudes
    size = len(x)
    coeffs = np.array([np.vdot(x[:size - n], x[n:]) for n in range(n_out + 1)])
    coeffs[0] = coeffs[0].real
    return IntensityHarmonics(coeffs)


def harmonic_level_db(intensity: IntensityHarmonics, n: int) -> float:
    """Electrical level of harmonic ``n >= 1`` in dB; ``-inf`` if it vanishes."""
    if n < 1:
        raise DomainError(f"harmonic level needs n >= 1, got {n}")
    mag = 2 * abs(intensity[n])
    if mag == 0:
        return -math.inf
    return 20 * math.log10(mag)


LevelFn = Callable[[IntensityHarmonics, int], float]


@dataclass
class LinearityReport:
    frequency_hz: float
    dc_power: float
    levels_db: dict[int, float] = field(default_factory=dict)
    iip3_proxy_db: float | None = None
    oip3_proxy_db: float | None = None
    slopes: tuple[float, float] | None = None

    @property
    def fundamental_db(self) -> float | None:
        return self.levels_db.get(1)

    @property
    def h2_db(self) -> float | None:
        return self.levels_db.get(2)

    @property
    def h3_db(self) -> float | None:
        return self.levels_db.get(3)


def linearity_report(d: ComplexSpectrum, frequency_hz: float, harmonics: Sequence[int] = (1, 2, 3),
                     level: LevelFn = harmonic_level_db) -> LinearityReport:
    n_out = max(harmonics, default=0)
    ih = intensity_harmonics(d, n_out)
    return LinearityReport(frequency_hz, ih.dc, {n: level(ih, n) for n in harmonics})


def response_sweep(device: Device, frequencies: Iterable[float], harmonics: Sequence[int] = (1, 2, 3),
                   window: HarmonicWindow | None = None, workers: int | None = None) -> list[LinearityReport]:
    """Solve ``device`` independently at every frequency, in input order."""
    freqs = [float(f) for f in frequencies]
    if not freqs:
        raise DomainError("frequency list is empty")

    def point(f: float) -> LinearityReport:
        try:
            d = output_spectrum(with_frequency(device, f), window)
        except RingmodError as exc:
            raise type(exc)(f"{exc} (at {f:.6g} Hz)") from exc
        return linearity_report(d, f, harmonics)

    if workers is None or workers <= 1:
        return [point(f) for f in freqs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(point, freqs))


def _levels(device: Device, beta: float, window: HarmonicWindow | None, level: LevelFn) -> tuple[float, float]:
    ih = intensity_harmonics(output_spectrum(with_drive(device, beta), window), 3)
    return level(ih, 1), level(ih, 3)


def mzi_drive_for_fundamental(target_db: float, frequency_hz: float, window: HarmonicWindow | None = None,
                              level: LevelFn = harmonic_level_db) -> float:
    """Quadrature-MZI drive whose fundamental level equals ``target_db``."""
    mzi = MziBaselineParams(beta=0.0, rf_frequency_hz=frequency_hz)

    def gap(beta: float) -> float:
        return _levels(mzi, beta, window, level)[0] - target_db

    lo, hi = 1e-9, _MZI_MAX_DRIVE
    if not gap(lo) < 0 < gap(hi):
        raise BracketError(
            f"cannot match fundamental {target_db:.2f} dB with an MZI drive in [{lo}, {hi}]"
        )
    return brentq(gap, lo, hi, xtol=1e-15, rtol=1e-13)


def ip3_improvement_vs_mzi(device: Device, frequency_hz: float, drive: float = 1e-2,
                           window: HarmonicWindow | None = None, level: LevelFn = harmonic_level_db) -> float:
    """Intercept gain over a quadrature MZI at equal fundamental, in dB.

    The device is driven at ``drive``; the MZI drive is chosen to give the same
    fundamental level at the same frequency, and the result is half the
    difference of their third-harmonic levels. In the small-signal regime the
    drive cancels out.
    """
    dev = with_frequency(device, frequency_hz)
    fund, h3 = _levels(dev, drive, window, level)
    beta_m = mzi_drive_for_fundamental(fund, frequency_hz, window, level)
    mzi = MziBaselineParams(beta=0.0, rf_frequency_hz=frequency_hz)
    _, h3_mzi = _levels(mzi, beta_m, window, level)
    return (h3_mzi - h3) / 2


def ip3_fit(device: Device, frequency_hz: float, drive_grid: Sequence[float],
            window: HarmonicWindow | None = None) -> LinearityReport:
    """Fit the fundamental (slope 1) and third harmonic (slope 3) against drive dB.

    ``iip3_proxy_db`` is the drive level ``20*log10(beta)`` where the two lines
    cross; ``oip3_proxy_db`` is the fundamental level there. ``slopes`` are
    the unconstrained least-squares slopes.
    """
    grid = np.asarray(sorted(drive_grid), dtype=float)
    lo, hi = SMALL_SIGNAL_WINDOW
    if len(grid) < 6:
        raise DomainError("ip3_fit needs at least 6 drive points")
    if grid[0] < lo * (1 - 1e-12) or grid[-1] > hi * (1 + 1e-12):
        raise DomainError(f"drive grid must lie inside [{lo}, {hi}]")
    dev = with_frequency(device, frequency_hz)
    fund, h3 = np.array([_levels(dev, b, window, harmonic_level_db) for b in grid]).T
    x = 20 * np.log10(grid)
    a = np.mean(fund - x)
    c = np.mean(h3 - 3 * x)
    resid = max(np.max(np.abs(fund - x - a)), np.max(np.abs(h3 - 3 * x - c)))
    if not np.isfinite(resid) or resid > FIT_RESIDUAL_DB:
        raise FitQualityError(f"small-signal fit residual {resid:.3g} dB exceeds {FIT_RESIDUAL_DB} dB")
    slopes = (float(np.polyfit(x, fund, 1)[0]), float(np.polyfit(x, h3, 1)[0]))
    iip3 = (a - c) / 2
    return LinearityReport(
        frequency_hz=frequency_hz,
        dc_power=intensity_harmonics(output_spectrum(with_drive(dev, grid[-1]), window), 0).dc,
        levels_db={1: float(fund[-1]), 3: float(h3[-1])},
        iip3_proxy_db=float(iip3),
        oip3_proxy_db=float(iip3 + a),
        slopes=slopes,
    )


def sfdr(intercept_db: float, noise_floor_db_hz: float) -> float:
    """Spurious-free dynamic range ``(2/3)(intercept - noise floor)`` in dB Hz^(2/3)."""
    if not noise_floor_db_hz < intercept_db:
        raise DomainError("noise floor must lie below the intercept")
    return 2.0 / 3.0 * (intercept_db - noise_floor_db_hz)
