"""Exception types shared across the solvers, the oracle and the CLI."""


class RingmodError(Exception):
    """Base class for every error raised by this package."""


class DomainError(RingmodError, ValueError):
    """A parameter lies outside the supported physical or numerical range."""


class ShapeError(RingmodError, ValueError):
    """Spectra, kernels or sample streams do not share a compatible shape."""


class SingularSystemError(RingmodError, ArithmeticError):
    """The feedback system ``(I - A) x = f`` is numerically singular.

    In practice this means a lossless ring that is exactly on resonance with
    no outcoupling.
    """


class ConfigurationError(RingmodError, ValueError):
    """An oracle or sweep configuration is inconsistent."""


class FitQualityError(RingmodError, RuntimeError):
    """A small-signal power-law fit exceeded its residual budget."""


class BracketError(RingmodError, RuntimeError):
    """A root search could not bracket its target."""
