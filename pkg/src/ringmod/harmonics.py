"""Truncated harmonic-domain algebra.

A field that is periodically modulated at the RF angular frequency ``w`` is
written around the optical carrier as

    E(t) = exp(-i w0 t) * sum_n x_n exp(-i n w t),      n = -N..N

so harmonic ``n`` sits at optical frequency ``w0 + n w``. Multiplying such a
field by a periodic function ``g(t) = sum_k f_k exp(-i k w t)`` acts on the
sideband vector as the Toeplitz matrix ``[f_{m-n}]``; delaying it by ``t_d``
acts as the diagonal ``exp(i (w0 + n w) t_d)``. Every device solver in this
package is assembled from these two pieces plus one dense linear solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.typing import NDArray

from .errors import DomainError, ShapeError, SingularSystemError

DEFAULT_ORDER = 24
BESSEL_MAX_ARGUMENT = 20.0
_SERIES_LIMIT = 2.0
_MAX_CONDITION = 1e12
_RESIDUAL_TOL = 1e-12
_I_POWERS = np.array([1.0, 1j, -1.0, -1j])


@dataclass(frozen=True)
class HarmonicWindow:
    """Sideband indices ``-order..order`` kept after truncation."""

    order: int = DEFAULT_ORDER

    def __post_init__(self) -> None:
        if int(self.order) != self.order or self.order < 0:
            raise DomainError(f"window order must be a non-negative integer, got {self.order}")

    @property
    def size(self) -> int:
        return 2 * self.order + 1

    @property
    def indices(self) -> NDArray[np.int_]:
        return np.arange(-self.order, self.order + 1)

    def position(self, n: int) -> int:
        """Array position of harmonic ``n``."""
        if abs(n) > self.order:
            raise ShapeError(f"harmonic {n} outside window of order {self.order}")
        return n + self.order

    def doubled(self) -> HarmonicWindow:
        return HarmonicWindow(max(2 * self.order, 1))


@dataclass(frozen=True, eq=False)
class ComplexSpectrum:
    """Complex field sideband amplitudes on a harmonic window.

    Amplitudes are normalised to a unit input carrier, ``|a_0| = 1``.
    """

    window: HarmonicWindow
    amplitudes: NDArray[np.complex128]
    rf_angular_frequency: float = 0.0

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.window.size,):
            raise ShapeError(
                f"expected {self.window.size} amplitudes for order {self.window.order}, got {amps.shape}"
            )
        if not np.all(np.isfinite(amps)):
            raise DomainError("spectrum contains non-finite amplitudes")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def carrier(cls, window: HarmonicWindow, rf_angular_frequency: float = 0.0,
                amplitude: complex = 1.0) -> ComplexSpectrum:
        """Unmodulated input field: only ``n = 0`` populated."""
        amps = np.zeros(window.size, dtype=complex)
        amps[window.order] = amplitude
        return cls(window, amps, rf_angular_frequency)

    def __getitem__(self, n: int) -> complex:
        return complex(self.amplitudes[self.window.position(n)])

    def sideband(self, n: int) -> complex:
        """Amplitude at harmonic ``n``; zero outside the window."""
        if abs(n) > self.window.order:
            return 0j
        return self[n]

    def power(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def replace_amplitudes(self, amplitudes: NDArray[np.complex128]) -> ComplexSpectrum:
        return ComplexSpectrum(self.window, amplitudes, self.rf_angular_frequency)

    def truncated(self, window: HarmonicWindow) -> ComplexSpectrum:
        """Re-express on a window no larger than the current one."""
        if window.order > self.window.order:
            pad = window.order - self.window.order
            amps = np.pad(self.amplitudes, pad)
        else:
            cut = self.window.order - window.order
            amps = self.amplitudes[cut:cut + window.size]
        return ComplexSpectrum(window, amps, self.rf_angular_frequency)

    def evaluate(self, phases: NDArray[np.float64]) -> NDArray[np.complex128]:
        """Baseband envelope sum_n x_n exp(-i n u) at RF phases ``u``."""
        u = np.asarray(phases, dtype=float)
        return np.exp(-1j * np.outer(u, self.window.indices)) @ self.amplitudes


@dataclass(frozen=True, eq=False)
class ToeplitzKernel:
    """Fourier coefficients ``f_k``, ``k = -2N..2N``, of a periodic modulation.

    The coefficients follow the ``exp(-i k u)`` basis, so ``apply`` maps
    ``out_m = sum_n f_{m-n} in_n``.
    """

    window: HarmonicWindow
    coefficients: NDArray[np.complex128]

    def __post_init__(self) -> None:
        coeffs = np.asarray(self.coefficients, dtype=complex)
        expected = 4 * self.window.order + 1
        if coeffs.shape != (expected,):
            raise ShapeError(f"kernel needs {expected} coefficients, got {coeffs.shape}")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def lags(self) -> NDArray[np.int_]:
        return np.arange(-2 * self.window.order, 2 * self.window.order + 1)

    def coefficient(self, k: int) -> complex:
        span = 2 * self.window.order
        if abs(k) > span:
            return 0j
        return complex(self.coefficients[k + span])

    def matrix(self) -> NDArray[np.complex128]:
        """Dense ``(2N+1) x (2N+1)`` matrix ``[f_{m-n}]``."""
        idx = self.window.indices
        return self.coefficients[idx[:, None] - idx[None, :] + 2 * self.window.order]

    def evaluate(self, phases: NDArray[np.float64]) -> NDArray[np.complex128]:
        """Reconstruct the periodic function at RF phases ``u``."""
        u = np.asarray(phases, dtype=float)
        return np.exp(-1j * np.outer(u, self.lags)) @ self.coefficients

    def scaled(self, factor: complex) -> ToeplitzKernel:
        return ToeplitzKernel(self.window, factor * self.coefficients)

    def __add__(self, other: ToeplitzKernel) -> ToeplitzKernel:
        _check_window(self.window, other.window)
        return ToeplitzKernel(self.window, self.coefficients + other.coefficients)

    @classmethod
    def from_function(cls, func: Callable[[NDArray[np.float64]], NDArray], window: HarmonicWindow,
                      samples: int | None = None) -> ToeplitzKernel:
        """Project a periodic function of the RF phase onto the kernel basis.

        Uses an FFT over ``samples`` equally spaced phases, so it is exact for
        functions band-limited to ``samples // 2`` harmonics.
        """
        span = 2 * window.order
        m = samples or max(8 * window.order + 1, 64)
        u = 2 * np.pi * np.arange(m) / m
        spectrum = np.fft.ifft(np.asarray(func(u), dtype=complex) * np.ones(m))
        lags = np.arange(-span, span + 1)
        return cls(window, spectrum[lags % m])


@dataclass(frozen=True, eq=False)
class DelayDiagonal:
    """Round-trip delay acting as ``exp(i (theta0 + n * rf_phase_step))``."""

    window: HarmonicWindow
    carrier_phase: float
    rf_phase_step: float
    gain: float = 1.0
    entries: NDArray[np.complex128] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        theta0 = math.remainder(self.carrier_phase, 2 * math.pi)
        object.__setattr__(self, "carrier_phase", theta0)
        phases = theta0 + self.window.indices * self.rf_phase_step
        object.__setattr__(self, "entries", self.gain * np.exp(1j * phases))

    def matrix(self) -> NDArray[np.complex128]:
        return np.diag(self.entries)


def _check_window(a: HarmonicWindow, b: HarmonicWindow) -> None:
    if a != b:
        raise ShapeError(f"window mismatch: order {a.order} vs {b.order}")


# ---------------------------------------------------------------------------
# Bessel functions of the first kind, integer order
# ---------------------------------------------------------------------------

def _series_orders(kmax: int, x: float) -> NDArray[np.float64]:
    # Ascending series, all orders 0..kmax at once.
    h = 0.5 * x
    hh = h * h
    out = np.zeros(kmax + 1)
    lead = 1.0  # (x/2)^k / k!
    for k in range(kmax + 1):
        if k > 0:
            lead *= h / k
        if lead == 0.0:
            break
        term = lead
        total = term
        m = 0
        while True:
            m += 1
            term *= -hh / (m * (m + k))
            total += term
            if abs(term) <= 1e-17 * abs(total):
                break
        out[k] = total
    return out


def _miller_orders(kmax: int, x: float) -> NDArray[np.float64]:
    # Downward recurrence J_{k-1} = (2k/x) J_k - J_{k+1}, normalised with
    # J_0 + 2 sum J_{2k} = 1.
    top = max(kmax, int(x)) + 20 + int(math.sqrt(40.0 * max(kmax, int(x), 1)))
    top += top % 2
    vals = np.zeros(top + 2)
    vals[top] = 1e-300
    for k in range(top, 0, -1):
        vals[k - 1] = (2.0 * k / x) * vals[k] - vals[k + 1]
        if abs(vals[k - 1]) > 1e250:
            vals[k - 1:] *= 1e-250
    norm = vals[0] + 2.0 * vals[2:top + 1:2].sum()
    return vals[:kmax + 1] / norm


def bessel_orders(kmax: int, x: float) -> NDArray[np.float64]:
    """``J_0(x) .. J_kmax(x)`` for real ``|x| <= 20``."""
    x = float(x)
    if not math.isfinite(x) or abs(x) > BESSEL_MAX_ARGUMENT:
        raise DomainError(f"Bessel argument {x} outside supported range |x| <= {BESSEL_MAX_ARGUMENT}")
    if kmax < 0:
        raise DomainError("kmax must be non-negative")
    ax = abs(x)
    if ax == 0.0:
        out = np.zeros(kmax + 1)
        out[0] = 1.0
        return out
    out = _series_orders(kmax, ax) if ax <= _SERIES_LIMIT else _miller_orders(kmax, ax)
    if x < 0:
        out[1::2] *= -1.0
    return out


def bessel_first_kind(order: int, argument: float) -> float:
    """Bessel function ``J_k(x)`` of integer order, absolute accuracy ~1e-13.

    Negative orders use ``J_{-k}(x) = (-1)^k J_k(x)``.
    """
    k = int(order)
    if k != order:
        raise DomainError(f"order must be an integer, got {order}")
    value = float(bessel_orders(abs(k), argument)[abs(k)])
    return -value if (k < 0 and k % 2) else value


# ---------------------------------------------------------------------------
# Drive kernels
# ---------------------------------------------------------------------------

def _signed_bessel(span: int, beta: float) -> NDArray[np.float64]:
    j = bessel_orders(span, beta)
    k = np.arange(-span, span + 1)
    vals = j[np.abs(k)]
    return np.where((k < 0) & (k % 2 == 1), -vals, vals)


def phase_drive_kernel(depth: float, rf_phase: float, window: HarmonicWindow) -> ToeplitzKernel:
    """Kernel of ``exp(i*beta*cos(w t + theta))`` (Jacobi-Anger).

    In the ``exp(-i k w t)`` basis the coefficients are
    ``i^k J_k(beta) exp(-i k theta)``.
    """
    if depth < 0:
        raise DomainError(f"modulation depth must be >= 0, got {depth}")
    span = 2 * window.order
    k = np.arange(-span, span + 1)
    coeffs = _I_POWERS[k % 4] * _signed_bessel(span, depth) * np.exp(-1j * k * rf_phase)
    return ToeplitzKernel(window, coeffs)


def trig_drive_kernels(half_bias: float, depth: float, rf_phase: float,
                       window: HarmonicWindow) -> tuple[ToeplitzKernel, ToeplitzKernel]:
    """Kernels of ``cos(x + beta*cos(.))`` and ``sin(x + beta*cos(.))``."""
    plus = phase_drive_kernel(depth, rf_phase, window)
    # exp(-i beta cos u): same Bessel magnitudes, i^k -> (-i)^k.
    k = plus.lags
    minus = ToeplitzKernel(window, plus.coefficients * (-1.0) ** (k % 2))
    ep, em = np.exp(1j * half_bias), np.exp(-1j * half_bias)
    cos_k = ToeplitzKernel(window, 0.5 * (ep * plus.coefficients + em * minus.coefficients))
    sin_k = ToeplitzKernel(window, (ep * plus.coefficients - em * minus.coefficients) / 2j)
    return cos_k, sin_k


def apply_toeplitz(kernel: ToeplitzKernel, spectrum: ComplexSpectrum) -> ComplexSpectrum:
    """Multiply a spectrum by the kernel's periodic function, truncated."""
    _check_window(kernel.window, spectrum.window)
    return spectrum.replace_amplitudes(kernel.matrix() @ spectrum.amplitudes)


# ---------------------------------------------------------------------------
# Feedback solve
# ---------------------------------------------------------------------------

def solve_feedback(loop_operator: NDArray[np.complex128] | ToeplitzKernel,
                   forcing: ComplexSpectrum) -> ComplexSpectrum:
    """Solve ``(I - A) x = forcing`` for the circulating sideband vector.

    ``loop_operator`` is a dense matrix (or a kernel) on the forcing's window.
    Raises :class:`SingularSystemError` when the system's condition number
    exceeds 1e12.
    """
    if isinstance(loop_operator, ToeplitzKernel):
        _check_window(loop_operator.window, forcing.window)
        a = loop_operator.matrix()
    else:
        a = np.atleast_2d(np.asarray(loop_operator, dtype=complex))
    size = forcing.window.size
    if a.shape != (size, size):
        raise ShapeError(f"loop operator shape {a.shape} does not match window size {size}")
    system = np.eye(size, dtype=complex) - a
    cond = np.linalg.cond(system)
    if not np.isfinite(cond) or cond > _MAX_CONDITION:
        raise SingularSystemError(f"feedback system is singular (condition number {cond:.3g})")
    rhs = forcing.amplitudes
    x = np.linalg.solve(system, rhs)
    # one step of iterative refinement keeps the residual at rounding level
    x = x + np.linalg.solve(system, rhs - system @ x)
    scale = np.linalg.norm(rhs)
    if np.linalg.norm(system @ x - rhs) > _RESIDUAL_TOL * max(scale, 1e-300) and scale > 0:
        raise SingularSystemError("feedback solve failed to reach residual tolerance")
    return forcing.replace_amplitudes(x)


def convergence_change(solve: Callable[[HarmonicWindow], ComplexSpectrum], window: HarmonicWindow,
                       harmonics: int | None = None) -> float:
    """Largest sideband change when the window order is doubled.

    ``solve`` maps a window to an output spectrum. Only ``|n| <= harmonics``
    (default: the whole smaller window) are compared.
    """
    coarse = solve(window)
    fine = solve(window.doubled()).truncated(window)
    diff = np.abs(coarse.amplitudes - fine.amplitudes)
    if harmonics is not None:
        diff = diff[np.abs(window.indices) <= harmonics]
    return float(diff.max())
