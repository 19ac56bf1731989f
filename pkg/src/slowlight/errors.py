"""Exception types shared across the package."""

from __future__ import annotations


class SlowlightError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(SlowlightError, ValueError):
    """A parameter or experiment definition violates a declared invariant."""


class UndefinedAngleError(SlowlightError, ValueError):
    """Mixing angle requested with both coupling and control equal to zero."""


class SingularityError(SlowlightError, ZeroDivisionError):
    """Susceptibility denominator is exactly zero."""


class DegenerateWindowError(SlowlightError, ValueError):
    """Transparency window has no resolvable half-maximum crossing."""


class WaveformError(SlowlightError, ValueError):
    """Waveform is empty or was queried on an invalid interval."""


class IntegrationError(SlowlightError, FloatingPointError):
    """Integration produced a non-finite state value.

    Carries the simulation time and the index of the first offending cell.
    """

    def __init__(self, message: str, t: float, cell: int):
        super().__init__(message)
        self.t = t
        self.cell = cell


class DetectionError(SlowlightError, ValueError):
    """Detector balancing or readout could not be performed."""


class PulseNotFoundError(SlowlightError, ValueError):
    """A trace holds no pulse energy above the detection threshold."""
