"""Derived quantities: delays, efficiencies, phase sweeps and fringe fits."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .detect import auto_balance, detect
from .errors import ConfigError, PulseNotFoundError, SlowlightError
from .model import zeeman_phase
from .sequence import ExperimentSpec
from .solver import RunResult, run

PEAK_WINDOW_US = 2.0  # half-width for locating retrieved-pulse peaks


def _centroid(times: np.ndarray, intensity: np.ndarray) -> float:
    weight = float(np.trapezoid(intensity, times))
    if weight <= 0.0:
        raise PulseNotFoundError("trace carries no energy; cannot locate a pulse")
    return float(np.trapezoid(times * intensity, times)) / weight


def group_delay(times, input_trace, output_trace) -> float:
    """Centroid delay of the output intensity against the input, us."""
    times = np.asarray(times, dtype=float)
    t_in = _centroid(times, np.asarray(input_trace, dtype=float))
    t_out = _centroid(times, np.asarray(output_trace, dtype=float))
    return t_out - t_in


def compression_factor(spec: ExperimentSpec) -> float:
    """Spatial compression c / v_g at the control plateau."""
    plateau = spec.control.maximum()
    if plateau <= 0.0:
        raise ConfigError("control waveform never turns on; compression is undefined")
    return (plateau**2 + spec.medium.coupling_g2N) / plateau**2


class EfficiencyReport(NamedTuple):
    stored_fraction: float
    retrieved_fraction: float
    escaped_fraction: float
    storage_window: tuple


def retrieval_efficiency(result: RunResult, windows=None) -> EfficiencyReport:
    """Energy bookkeeping of a storage run, as fractions of input energy.

    stored_fraction is the medium excitation (spin + optical coherence) at
    the start of the storage window; escaped and retrieved are the output
    light before and inside the retrieval window.  Windows default to the
    control-off interval the solver found and the remainder of the run,
    and may be overridden as ((t0, t1), (t2, t3)).
    """
    d = result.diagnostics
    if windows is None:
        dark = d.get("dark_interval")
        if dark is None:
            raise ConfigError("run has no control-off interval; nothing was stored")
        storage, retrieval = dark, (dark[1], float(result.times[-1]))
    else:
        storage, retrieval = windows
    t_lo, t_hi = float(result.times[0]), float(result.times[-1])
    for lo, hi in (storage, retrieval):
        if not (t_lo <= lo <= hi <= t_hi):
            raise ConfigError(f"window ({lo}, {hi}) falls outside the trace")

    light_in = d["input_energy"]
    c = d["light_speed"]
    if light_in <= 0:
        raise PulseNotFoundError("run had no input energy")
    out = np.abs(result.field_out) ** 2
    pre = result.times <= storage[0]
    ret = (result.times >= retrieval[0]) & (result.times <= retrieval[1])
    escaped = c * float(np.trapezoid(np.where(pre, out, 0.0), result.times)) / light_in
    retrieved = c * float(np.trapezoid(np.where(ret, out, 0.0), result.times)) / light_in
    idx = int(np.searchsorted(result.times, storage[0]))
    idx = min(idx, result.times.size - 1)
    stored = float(result.medium_energy[idx]) / light_in
    return EfficiencyReport(stored, retrieved, escaped, (float(storage[0]), float(storage[1])))


def relative_retrieval_phase(result: RunResult, reference: RunResult,
                             window: tuple[float, float]) -> float:
    """Phase of the retrieved field against a reference run, radians.

    Uses the energy-weighted overlap sum(E conj(E_ref)) inside the window,
    so a uniform phase factor is read off exactly even on noisy envelopes.
    """
    if result.times.shape != reference.times.shape:
        raise ConfigError("runs must share an output grid")
    mask = (result.times >= window[0]) & (result.times <= window[1])
    overlap = np.sum(result.field_out[mask] * np.conj(reference.field_out[mask]))
    if abs(overlap) < 1e-30:
        raise PulseNotFoundError("no overlapping field energy in the window")
    return float(np.angle(overlap))


@dataclass
class FringeFit:
    """Least-squares fit of I(phi) = offset + amplitude*cos(phi + phase)."""

    offset: float
    amplitude: float
    phase: float
    residual: float

    def evaluate(self, phi):
        return self.offset + self.amplitude * np.cos(np.asarray(phi) + self.phase)

    @property
    def contrast(self) -> float:
        return self.amplitude / self.offset if self.offset > 0 else math.inf


def fit_fringe(phases, intensities) -> FringeFit:
    phases = np.asarray(phases, dtype=float)
    intensities = np.asarray(intensities, dtype=float)
    if phases.size < 3:
        raise ConfigError("fringe fit needs at least 3 points")
    basis = np.column_stack([np.ones_like(phases), np.cos(phases), np.sin(phases)])
    coef, *_ = np.linalg.lstsq(basis, intensities, rcond=None)
    a, b, c = coef
    resid = float(np.sqrt(np.mean((intensities - basis @ coef) ** 2)))
    return FringeFit(offset=float(a), amplitude=float(math.hypot(b, c)),
                     phase=float(math.atan2(-c, b)), residual=resid)


class SweepEntry(NamedTuple):
    expected_phase: float            # programmed spin phase, rad
    b_area: float                    # field-pulse area, gauss us
    retrieval_peak_intensity: float  # detector peak in the retrieval window
    fitted_phase: float              # measured phase vs the first run, [0, 2pi)


@dataclass
class SweepResult:
    entries: list
    fringe_fit: FringeFit
    mix_amplitude: float
    peak_time: float
    runs: list

    @property
    def phases(self) -> np.ndarray:
        return np.array([e.expected_phase for e in self.entries])

    @property
    def peak_intensity(self) -> np.ndarray:
        return np.array([e.retrieval_peak_intensity for e in self.entries])


def _quadrature_phase(result: RunResult, idx: int, mix: float) -> float:
    """Field phase at one sample, read the way a detector would.

    Mixes the control tap at phase 0 and pi/2 and combines the two
    intensities; the algebra reduces to arg E, but only detector-level
    quantities enter.
    """
    scale = result.diagnostics["control_scale"]
    peak = float(result.control_out.max(initial=0.0))
    rel = result.control_out[idx] / peak if peak > 0 else 0.0
    tap = mix * scale * rel
    e = result.field_out[idx]
    i_cos = abs(e + tap) ** 2
    i_sin = abs(e + 1j * tap) ** 2
    flat = abs(e) ** 2 + tap**2
    return math.atan2(i_sin - flat, i_cos - flat)


def phase_sweep(base_spec: ExperimentSpec, n_runs: int, phi_max: float,
                output_stride: int = 10, balance: bool = True,
                integrated: bool = False) -> SweepResult:
    """Repeat a storage experiment over a grid of programmed spin phases.

    Run k targets phase phi_max * k / n_runs; the magnetic waveform of the
    base experiment is rescaled to hit each target exactly.  The first run
    (zero applied field) balances the detector mix, every trace is then
    re-detected with that common mix, and the retrieved peak intensities
    are fit to a cosine fringe.  With integrated=True the fringe uses the
    windowed signal energy instead of the peak sample.
    """
    if n_runs < 3:
        raise ConfigError("a phase sweep needs at least 3 runs")
    grid = base_spec.grid
    phi_base = zeeman_phase(base_spec.bfield, grid.t_start, grid.t_end,
                            base_spec.zeeman)
    targets = phi_max * np.arange(n_runs) / n_runs
    if abs(phi_base) < 1e-12 and np.any(np.abs(targets) > 1e-12):
        raise ConfigError("base experiment applies no field; phases cannot be scaled")

    runs: list[RunResult] = []
    for k, phi in enumerate(targets):
        scale = 0.0 if phi == 0.0 else phi / phi_base
        spec_k = base_spec.with_bfield(base_spec.bfield.scaled(scale))
        try:
            runs.append(run(spec_k, output_stride=output_stride))
        except SlowlightError as exc:
            raise ConfigError(
                f"sweep aborted: run {k} (phase {phi:.4f} rad) failed: {exc}") from exc

    ref = runs[0]
    dark = ref.diagnostics["dark_interval"]
    if dark is None:
        raise ConfigError("base experiment never switches the control off")
    mix = base_spec.detection.mix_amplitude
    if balance:
        mix = auto_balance(ref.times, ref.field_out, ref.control_out,
                           control_scale=ref.diagnostics["control_scale"],
                           dark_interval=dark)
    config = dataclasses.replace(base_spec.detection, mix_amplitude=mix)
    for r in runs:
        r.detector = detect(r.times, r.field_out, r.control_out, config,
                            control_scale=r.diagnostics["control_scale"])

    after = ref.times > dark[1]
    if not np.any(after):
        raise PulseNotFoundError("no samples after the storage interval")
    seg = ref.detector.signal_channel[after]
    peak_time = float(ref.times[after][int(np.argmax(seg))])
    window = (ref.times >= peak_time - PEAK_WINDOW_US) & \
             (ref.times <= peak_time + PEAK_WINDOW_US)
    idx_ref = int(np.flatnonzero(ref.times >= peak_time)[0])

    if integrated:
        peaks = [float(np.trapezoid(r.detector.signal_channel[window],
                                    r.times[window])) for r in runs]
    else:
        peaks = [float(r.detector.signal_channel[window].max()) for r in runs]
    chi0 = _quadrature_phase(ref, idx_ref, mix)
    base_area = base_spec.bfield.integral(grid.t_start, grid.t_end)
    entries = []
    for phi, peak, r in zip(targets, peaks, runs):
        chi = (_quadrature_phase(r, idx_ref, mix) - chi0) % (2.0 * math.pi)
        area = 0.0 if phi == 0.0 else base_area * phi / phi_base
        entries.append(SweepEntry(float(phi), area, peak, chi))

    fringe = fit_fringe(targets, peaks)
    return SweepResult(entries=entries, fringe_fit=fringe, mix_amplitude=mix,
                       peak_time=peak_time, runs=runs)
