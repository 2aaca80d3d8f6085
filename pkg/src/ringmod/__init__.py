"""Frequency-domain and time-domain models of ring-assisted modulators."""

from .cmmr import CmmrParams, critical_coupling_bias, solve_cmmr
from .composite import DcmmrParams, MziBaselineParams, solve_dcmmr, solve_mzi_baseline
from .detection import (
    IntensityHarmonics,
    LinearityReport,
    harmonic_level_db,
    intensity_harmonics,
    ip3_fit,
    ip3_improvement_vs_mzi,
    linearity_report,
    response_sweep,
    sfdr,
)
from .devices import (
    converged_spectrum,
    lossless_preset,
    output_spectrum,
    paper_preset,
    with_bias,
    with_drive,
    with_frequency,
)
from .errors import (
    BracketError,
    ConfigurationError,
    DomainError,
    FitQualityError,
    RingmodError,
    ShapeError,
    SingularSystemError,
)
from .fmmr import FmmrParams, all_pass_transmission, detuning_phase, solve_fmmr
from .harmonics import ComplexSpectrum, DelayDiagonal, HarmonicWindow, ToeplitzKernel, bessel_first_kind
from .timedomain import TdConfig, cross_validate, simulate_device_td, td_spectrum

__all__ = [name for name in dir() if not name.startswith("_")]
