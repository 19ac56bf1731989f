"""Weak-probe propagation through the driven medium.

State per grid cell: optical coherence P and spin coherence S (complex).
The signal field E follows them quasi-statically,

    dE/dz = i (sqrt(g^2 N)/c) P,      E(0, t) = input envelope,

integrated across cells by trapezoid accumulation from the boundary.  The
cell transit time L/c is nanoseconds against microsecond dynamics, so the
time derivative of E is dropped.  P and S evolve as

    dP/dt = -gamma_e P + i sqrt(g^2 N) E + i Omega_c(t) S
    dS/dt = -(gamma_s + i delta_B(t)) S + i Omega_c(t) P

and are stepped with classical fixed-step RK4; the field is re-solved at
every substage.  Everything is linear in (E, P, S), which the tests lean
on heavily.

The explicit scheme must resolve the fastest damping rate.  Through the
slaved field the polarization feels the collective absorption rate
g^2 N L / c = gamma_e d / 2 on top of its own decay, so runs require

    dt <= 0.2 / max(gamma_e (1 + d/2), max Omega_c, max |delta_B|, gamma_s).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .detect import DetectorTrace, detect
from .errors import ConfigError, IntegrationError
from .model import zeeman_detuning
from .sequence import ExperimentSpec

log = logging.getLogger(__name__)

STABILITY_MARGIN = 0.2
CONTROL_OFF_FRACTION = 0.005  # below this fraction of peak the control counts as dark


@dataclass
class SimulationState:
    """Medium state at one instant.  Arrays are indexed by cell."""

    t: float
    E: np.ndarray
    P: np.ndarray
    S: np.ndarray
    z_cells: np.ndarray


@dataclass
class RunResult:
    times: np.ndarray          # decimated output instants, us
    input_trace: np.ndarray    # |E(0, t)|^2
    field_out: np.ndarray      # complex E(L, t)
    control_out: np.ndarray    # Omega_c(t), rad/us
    bfield_out: np.ndarray     # B(t), gauss
    medium_energy: np.ndarray  # integral of |P|^2 + |S|^2 over z
    detector: DetectorTrace
    snapshots: list[SimulationState] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)


def _field_coef(spec: ExperimentSpec) -> complex:
    dz = spec.medium.length_cm / spec.grid.nz
    return 1j * math.sqrt(spec.medium.coupling_g2N) / spec.medium.light_speed * dz


def propagate_field(p: np.ndarray, spec: ExperimentSpec, boundary: complex = 0.0):
    """Quasi-static field at the cell centers, given the entrance value.

    Trapezoid accumulation of dE/dz = i (sqrt(g^2 N)/c) P from z = 0; with
    p identically zero the field is the boundary value everywhere.
    """
    b = _field_coef(spec)
    return boundary + b * (np.cumsum(p) - 0.5 * p)


def _rates(p, s, e, omega_c, spin_decay, spec):
    ge = spec.medium.gamma_e
    root = 1j * math.sqrt(spec.medium.coupling_g2N)
    ioc = 1j * omega_c
    dp = root * e + ioc * s - ge * p
    ds = ioc * p - spin_decay * s
    return dp, ds


def equations_of_motion(state: SimulationState, t: float, spec: ExperimentSpec):
    """(dP/dt, dS/dt) with the field slaved to the current polarization."""
    omega_c = spec.control.evaluate(t)
    spin_decay = spec.medium.gamma_s + 1j * zeeman_detuning(spec.bfield.evaluate(t), spec.zeeman)
    e = propagate_field(state.P, spec, spec.signal.evaluate(t))
    return _rates(state.P, state.S, e, omega_c, spin_decay, spec)


def _advance(p, s, drives, dt, spec):
    """One RK4 step.  drives holds (omega_c, spin_decay, boundary) at the
    step start, midpoint and end."""
    (c0, d0, b0), (cm, dm, bm), (ce, de, be) = drives
    coef = _field_coef(spec)
    half = 0.5 * dt

    e = b0 + coef * (np.cumsum(p) - 0.5 * p)
    k1p, k1s = _rates(p, s, e, c0, d0, spec)

    p2 = p + half * k1p
    s2 = s + half * k1s
    e = bm + coef * (np.cumsum(p2) - 0.5 * p2)
    k2p, k2s = _rates(p2, s2, e, cm, dm, spec)

    p3 = p + half * k2p
    s3 = s + half * k2s
    e = bm + coef * (np.cumsum(p3) - 0.5 * p3)
    k3p, k3s = _rates(p3, s3, e, cm, dm, spec)

    p4 = p + dt * k3p
    s4 = s + dt * k3s
    e = be + coef * (np.cumsum(p4) - 0.5 * p4)
    k4p, k4s = _rates(p4, s4, e, ce, de, spec)

    sixth = dt / 6.0
    p_new = p + sixth * (k1p + 2.0 * (k2p + k3p) + k4p)
    s_new = s + sixth * (k1s + 2.0 * (k2s + k3s) + k4s)
    return p_new, s_new


def _drives_at(spec: ExperimentSpec, t: float):
    omega_c = spec.control.evaluate(t)
    decay = spec.medium.gamma_s + 1j * zeeman_detuning(spec.bfield.evaluate(t), spec.zeeman)
    return omega_c, decay, spec.signal.evaluate(t)


def initial_state(spec: ExperimentSpec) -> SimulationState:
    nz = spec.grid.nz
    dz = spec.medium.length_cm / nz
    z = (np.arange(nz) + 0.5) * dz
    zero = np.zeros(nz, dtype=complex)
    e = propagate_field(zero, spec, spec.signal.evaluate(spec.grid.t_start))
    return SimulationState(spec.grid.t_start, e, zero.copy(), zero.copy(), z)


def step(state: SimulationState, spec: ExperimentSpec, dt: float) -> SimulationState:
    """Advance one step of size dt and return the new state."""
    t = state.t
    drives = (_drives_at(spec, t), _drives_at(spec, t + 0.5 * dt), _drives_at(spec, t + dt))
    p, s = _advance(state.P, state.S, drives, dt, spec)
    e = propagate_field(p, spec, drives[2][2])
    return SimulationState(t + dt, e, p, s, state.z_cells)


def stability_limit(spec: ExperimentSpec, omega_max: float, detuning_max: float) -> float:
    """Largest admissible dt for the given drive extrema."""
    collective = spec.medium.gamma_e * (1.0 + 0.5 * spec.medium.optical_depth)
    rate = max(collective, omega_max, detuning_max, spec.medium.gamma_s)
    return STABILITY_MARGIN / rate


def _dark_interval(oc: np.ndarray, times: np.ndarray):
    """Longest contiguous stretch with the control effectively off."""
    peak = float(oc.max(initial=0.0))
    if peak <= 0.0:
        return None
    off = oc < CONTROL_OFF_FRACTION * peak
    best = (0, -1)
    start = None
    for i, flag in enumerate(np.append(off, False)):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            if i - start > best[1] - best[0]:
                best = (start, i - 1)
            start = None
    if best[1] < best[0]:
        return None
    return float(times[best[0]]), float(times[best[1]])


def run(spec: ExperimentSpec, output_stride: int = 10) -> RunResult:
    """Integrate the full experiment and attach the detector model.

    Output traces are decimated to every ``output_stride``-th step.
    Raises ConfigError for invalid specs and IntegrationError if the state
    leaves the finite range.
    """
    issues = spec.validate()
    errors = [i for i in issues if i.severity == "error"]
    if errors:
        raise ConfigError("; ".join(str(i) for i in errors))
    warnings = [str(i) for i in issues if i.severity == "warning"]
    if output_stride < 1:
        raise ConfigError("output_stride must be at least 1")

    grid, medium = spec.grid, spec.medium
    dt = grid.dt
    n_steps = int(math.ceil((grid.t_end - grid.t_start) / dt - 1e-9))
    half_t = grid.t_start + 0.5 * dt * np.arange(2 * n_steps + 1)
    oc_half = np.asarray(spec.control.evaluate(half_t), dtype=float)
    b_half = np.asarray(spec.bfield.evaluate(half_t), dtype=float)
    det_half = zeeman_detuning(b_half, spec.zeeman)
    in_half = np.asarray(spec.signal.evaluate(half_t), dtype=float)
    decay_half = medium.gamma_s + 1j * det_half

    dt_max = stability_limit(spec, float(oc_half.max(initial=0.0)),
                             float(np.abs(det_half).max(initial=0.0)))
    if dt > dt_max * (1.0 + 1e-9):
        raise ConfigError(
            f"dt = {dt} exceeds the stability limit {dt_max:.3e} us for this drive")

    peak_oc = float(oc_half.max(initial=0.0))
    if peak_oc > 0.0:
        live = oc_half > 0.05 * peak_oc
        if np.count_nonzero(live) > 2:
            slope = np.gradient(oc_half, 0.5 * dt)
            ratio = np.abs(slope[live]) / oc_half[live]
            if float(ratio.max()) > medium.gamma_e * medium.optical_depth:
                warnings.append(
                    "adiabaticity: control ramp rate exceeds gamma_e * optical depth")

    nz = grid.nz
    dz = medium.length_cm / nz
    z = (np.arange(nz) + 0.5) * dz
    p = np.zeros(nz, dtype=complex)
    s = np.zeros(nz, dtype=complex)
    coef = _field_coef(spec)

    n_out = n_steps // output_stride + 1
    times = grid.t_start + dt * output_stride * np.arange(n_out)
    field_out = np.zeros(n_out, dtype=complex)
    field_out[0] = in_half[0]
    medium_energy = np.zeros(n_out)
    max_abs_p = 0.0

    dark = _dark_interval(oc_half, half_t)
    stored_fraction = None
    mid_step = None
    if dark is not None:
        mid_step = int(round((0.5 * (dark[0] + dark[1]) - grid.t_start) / dt))
    light_in = medium.light_speed * float(np.trapezoid(in_half**2, dx=0.5 * dt))

    snapshots: list[SimulationState] = []
    if grid.snapshot_stride:
        e0 = propagate_field(p, spec, in_half[0])
        snapshots.append(SimulationState(grid.t_start, e0, p.copy(), s.copy(), z))

    for k in range(n_steps):
        i0 = 2 * k
        drives = ((oc_half[i0], decay_half[i0], in_half[i0]),
                  (oc_half[i0 + 1], decay_half[i0 + 1], in_half[i0 + 1]),
                  (oc_half[i0 + 2], decay_half[i0 + 2], in_half[i0 + 2]))
        p, s = _advance(p, s, drives, dt, spec)
        k1 = k + 1

        if k1 == mid_step:
            stored_fraction = float(np.sum(np.abs(s)**2 + np.abs(p)**2) * dz / light_in) \
                if light_in > 0 else None

        if k1 % output_stride == 0:
            j = k1 // output_stride
            exit_field = in_half[i0 + 2] + coef * p.sum()
            field_out[j] = exit_field
            medium_energy[j] = float(np.sum(np.abs(p)**2 + np.abs(s)**2) * dz)
            if not np.isfinite(exit_field.real) or not np.isfinite(exit_field.imag):
                bad = np.flatnonzero(~np.isfinite(p))
                cell = int(bad[0]) if bad.size else 0
                raise IntegrationError(
                    f"non-finite field at t = {times[j]:.3f} us", float(times[j]), cell)
            max_abs_p = max(max_abs_p, float(np.abs(p).max()))

        if grid.snapshot_stride and k1 % grid.snapshot_stride == 0:
            e_cells = propagate_field(p, spec, in_half[i0 + 2])
            snapshots.append(
                SimulationState(grid.t_start + k1 * dt, e_cells, p.copy(), s.copy(), z))

    if not (np.all(np.isfinite(p.view(float))) and np.all(np.isfinite(s.view(float)))):
        bad = np.flatnonzero(~(np.isfinite(p) & np.isfinite(s)))
        raise IntegrationError("non-finite state at end of run",
                               float(grid.t_start + n_steps * dt), int(bad[0]))

    sel = 2 * output_stride * np.arange(n_out)
    control_out = oc_half[sel]
    bfield_out = b_half[sel]
    input_trace = in_half[sel] ** 2

    out_intensity = np.abs(field_out) ** 2
    escaped = retrieved = None
    if dark is not None and light_in > 0:
        pre = times <= dark[0]
        post = times >= dark[1]
        escaped = medium.light_speed * float(np.trapezoid(
            np.where(pre, out_intensity, 0.0), times)) / light_in
        retrieved = medium.light_speed * float(np.trapezoid(
            np.where(post, out_intensity, 0.0), times)) / light_in

    signal_peak = float(np.abs(in_half).max(initial=0.0))
    control_scale = math.sqrt(10.0) * (signal_peak if signal_peak > 0 else 1.0)
    detector = detect(times, field_out, control_out, spec.detection,
                      control_scale=control_scale)

    diagnostics = {
        "steps": n_steps,
        "max_abs_polarization": max_abs_p,
        "warnings": warnings,
        "input_energy": light_in,
        "light_speed": medium.light_speed,
        "dark_interval": dark,
        "escaped_fraction": escaped,
        "retrieved_fraction": retrieved,
        "stored_fraction": stored_fraction,
        "control_scale": control_scale,
        "final_medium_fraction": float(np.sum(np.abs(s)**2 + np.abs(p)**2) * dz / light_in)
        if light_in > 0 else None,
    }
    if warnings:
        for w in warnings:
            log.warning("%s: %s", spec.label or "run", w)

    return RunResult(times=times, input_trace=input_trace, field_out=field_out,
                     control_out=control_out, bfield_out=bfield_out,
                     medium_energy=medium_energy, detector=detector,
                     snapshots=snapshots, diagnostics=diagnostics)
