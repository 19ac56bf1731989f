"""Piecewise-linear time envelopes.

Every drive in an experiment (control Rabi frequency, signal envelope,
magnetic field) is a real piecewise-linear function of time defined by
knots.  Outside the knot range the waveform continues at the boundary
value, so a single knot describes a constant drive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, WaveformError


@dataclass(frozen=True)
class Waveform:
    """Knots are (time_us, value) pairs with strictly increasing times."""

    knots: tuple[tuple[float, float], ...]

    def __post_init__(self):
        clean = tuple((float(t), float(v)) for t, v in self.knots)
        object.__setattr__(self, "knots", clean)
        times = [t for t, _ in clean]
        for a, b in zip(times, times[1:]):
            if not b > a:
                raise ConfigError(f"knot times must be strictly increasing, got {a} then {b}")
        for t, v in clean:
            if not (np.isfinite(t) and np.isfinite(v)):
                raise ConfigError(f"knot ({t}, {v}) is not finite")

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.knots])

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.knots])

    def evaluate(self, t):
        """Value at time t (scalar or array), constant beyond the end knots."""
        if not self.knots:
            raise WaveformError("cannot evaluate an empty waveform")
        out = np.interp(t, self.times, self.values)
        return float(out) if np.ndim(t) == 0 else out

    def integral(self, t0: float, t1: float) -> float:
        """Exact integral over [t0, t1].

        The trapezoid rule over the knots is exact because the function is
        linear between them (and constant outside).
        """
        if not self.knots:
            raise WaveformError("cannot integrate an empty waveform")
        if t1 < t0:
            raise WaveformError(f"integration interval [{t0}, {t1}] is reversed")
        if t1 == t0:
            return 0.0
        times = self.times
        inner = times[(times > t0) & (times < t1)]
        pts = np.concatenate(([t0], inner, [t1]))
        vals = np.interp(pts, times, self.values)
        return float(np.trapezoid(vals, pts))

    def scaled(self, factor: float) -> "Waveform":
        """Same knot times with all values multiplied by factor."""
        return Waveform(tuple((t, v * factor) for t, v in self.knots))

    def maximum(self) -> float:
        """Largest knot value (equals the global maximum for this class)."""
        if not self.knots:
            raise WaveformError("empty waveform has no maximum")
        return float(max(v for _, v in self.knots))


def constant(value: float, t0: float = 0.0) -> Waveform:
    return Waveform(((t0, value),))
