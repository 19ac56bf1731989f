"""Built-in experiment presets.

Four named timelines cover the standard protocol:

``fig2a``      store the signal pulse, apply a 15 us magnetic pulse with an
               area of 1.5 gauss us while the control is dark, then release.
``fig2b``      same storage, but a 50 mG field switches on during the dark
               interval and stays on through release, so the released light
               beats against the mixed control.
``fig3_trace`` the k-th member (k = 0..19) of a family whose magnetic pulse
               amplitude is stepped so the expected spin phase is 0.2 pi k.
``slowlight``  no storage at all: constant control, the pulse just crawls
               through the cell.

All knot times sit on a 0.1 us lattice.  Integration steps of 0.01, 0.005
or 0.0025 us therefore never straddle a slope discontinuity, which keeps
the integrator at full order.
"""

from __future__ import annotations

import math
import re

from .errors import ConfigError
from .model import MediumParams, ZeemanConfig, zeeman_phase
from .sequence import DetectionConfig, ExperimentSpec, GridSpec
from .waveform import Waveform

CONTROL_RABI = 1.025     # plateau Rabi frequency, rad/us
SIGNAL_PEAK = 0.1        # signal envelope peak, arbitrary field units
RAMP_US = 3.0            # control ramp duration
PULSE_GAUSS_US = 1.5     # magnetic pulse area of the fig2a preset
BFIELD_HOLD_GAUSS = 0.05  # held field of the fig2b preset
TRACE_STEP_RAD = 0.2 * math.pi
TRACE_COUNT = 20

MIX_AMPLITUDE = 0.08     # close to the balanced value for these presets
MIX_PHASE = -0.085 * math.pi  # interferometer offset, see DetectionConfig

_T_RAMP_OFF = 36.5
_T_RAMP_ON = 59.5
_B_START = 42.5
_B_STOP = 57.5

_NAME_RE = re.compile(r"^fig3_trace\((\d+)\)$")


def _cosine_ramp(t0: float, v0: float, v1: float, spacing: float = 0.2) -> list[tuple[float, float]]:
    """Raised-cosine ramp from v0 at t0 to v1 at t0 + RAMP_US, sampled
    onto the knot lattice."""
    n = int(round(RAMP_US / spacing))
    pts = []
    for j in range(n + 1):
        x = j / n
        pts.append((t0 + j * spacing, v0 + (v1 - v0) * 0.5 * (1.0 - math.cos(math.pi * x))))
    return pts


def _hann_pulse(t0: float, t1: float, peak: float, spacing: float = 0.3) -> list[tuple[float, float]]:
    n = int(round((t1 - t0) / spacing))
    return [(t0 + j * spacing, peak * 0.5 * (1.0 - math.cos(2.0 * math.pi * j / n)))
            for j in range(n + 1)]


def _storage_control(retrieval_level: float = CONTROL_RABI) -> Waveform:
    knots = [(0.0, CONTROL_RABI)]
    knots += _cosine_ramp(_T_RAMP_OFF, CONTROL_RABI, 0.0)
    knots += _cosine_ramp(_T_RAMP_ON, 0.0, retrieval_level)
    return Waveform(tuple(knots))


def _signal_pulse() -> Waveform:
    return Waveform(((5.0, 0.0), (15.0, SIGNAL_PEAK), (25.0, 0.0)))


def _storage_bfield(area_gauss_us: float, zeeman: ZeemanConfig) -> Waveform:
    """15 us raised-cosine pulse inside the dark interval, scaled so its
    exact area matches the request."""
    unit = Waveform(tuple(_hann_pulse(_B_START, _B_STOP, 1.0)))
    base_area = unit.integral(_B_START, _B_STOP)
    if area_gauss_us == 0.0:
        return Waveform(((_B_START, 0.0), (_B_STOP, 0.0)))
    return unit.scaled(area_gauss_us / base_area)


def scenario(name: str, k: int | None = None) -> ExperimentSpec:
    """Build one of the named presets.

    ``fig3_trace`` takes the trace index either as the k argument or
    embedded in the name, e.g. ``scenario("fig3_trace(5)")``.
    """
    match = _NAME_RE.match(name)
    if match:
        if k is not None:
            raise ConfigError("give the trace index either in the name or as k, not both")
        k = int(match.group(1))
        name = "fig3_trace"

    medium = MediumParams()
    zeeman = ZeemanConfig()
    detection = DetectionConfig(mix_amplitude=MIX_AMPLITUDE, mix_phase=MIX_PHASE)

    if name == "slowlight":
        return ExperimentSpec(
            medium=medium, zeeman=zeeman,
            control=Waveform(((0.0, CONTROL_RABI),)),
            signal=_signal_pulse(),
            bfield=Waveform(((0.0, 0.0),)),
            grid=GridSpec(t_end=70.0),
            detection=detection, label="slowlight")

    if name == "fig2a":
        return ExperimentSpec(
            medium=medium, zeeman=zeeman,
            control=_storage_control(),
            signal=_signal_pulse(),
            bfield=_storage_bfield(PULSE_GAUSS_US, zeeman),
            grid=GridSpec(t_end=90.0),
            detection=detection, label="fig2a")

    if name == "fig2b":
        hold = [(_B_START, 0.0)]
        for j in range(1, 6):
            x = j / 5.0
            hold.append((_B_START + j * 0.2,
                         BFIELD_HOLD_GAUSS * 0.5 * (1.0 - math.cos(math.pi * x))))
        return ExperimentSpec(
            medium=medium, zeeman=zeeman,
            control=_storage_control(retrieval_level=0.6 * CONTROL_RABI),
            signal=_signal_pulse(),
            bfield=Waveform(tuple(hold)),
            grid=GridSpec(t_end=140.0),
            detection=detection, label="fig2b")

    if name == "fig3_trace":
        if k is None:
            raise ConfigError("fig3_trace needs a trace index k")
        if not 0 <= k < TRACE_COUNT:
            raise ConfigError(f"trace index {k} outside 0..{TRACE_COUNT - 1}")
        target_phase = TRACE_STEP_RAD * k
        area = target_phase / (zeeman.delta_g * zeeman.mu_B_over_hbar)
        spec = ExperimentSpec(
            medium=medium, zeeman=zeeman,
            control=_storage_control(),
            signal=_signal_pulse(),
            bfield=_storage_bfield(area, zeeman),
            grid=GridSpec(t_end=90.0),
            detection=detection, label=f"fig3_trace({k})")
        # The scaled area reproduces the requested phase exactly.
        got = zeeman_phase(spec.bfield, spec.grid.t_start, spec.grid.t_end, zeeman)
        assert abs(got - target_phase) < 1e-9
        return spec

    raise ConfigError(f"unknown scenario '{name}'")


def scenario_names() -> list[str]:
    names = ["fig2a", "fig2b", "slowlight"]
    names += [f"fig3_trace({k})" for k in range(TRACE_COUNT)]
    return names
