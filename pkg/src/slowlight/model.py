"""Closed-form optics of a driven three-level lambda medium.

Unit conventions used everywhere in this package:

    time                microseconds (us)
    length              centimeters (cm)
    angular frequency   rad/us  (1 rad/us = 1/(2 pi) MHz)
    magnetic field      gauss

A weak signal field couples one ground state to the excited state while a
strong control field couples the other ground state.  The collective
coupling ``coupling_g2N`` is g^2 N in rad^2/us^2; together with the control
Rabi frequency it sets the dark-state mixing angle, the group velocity and
the width of the transparency window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateWindowError, SingularityError, UndefinedAngleError
from .waveform import Waveform

SPEED_OF_LIGHT = 2.9979e4
"""Vacuum light speed in cm/us."""

MU_B_OVER_HBAR = 2.0 * math.pi * 1.3996
"""Bohr magneton over hbar, rad/(us gauss): a 1 gauss shift is 1.3996 MHz."""


@dataclass(frozen=True)
class MediumParams:
    """Static properties of the vapor cell.

    Defaults describe a 4 cm cell that is opaque on resonance (optical
    depth 25) and, under the default control power, shows a transparency
    window of about 2 pi x 40 kHz with a group delay near 17 us.
    """

    length_cm: float = 4.0
    coupling_g2N: float = 131158.125  # g^2 N, rad^2/us^2
    gamma_e: float = 1.4              # optical coherence decay, rad/us
    gamma_s: float = 0.005            # spin coherence decay, rad/us
    light_speed: float = SPEED_OF_LIGHT

    def validate(self) -> None:
        if self.length_cm <= 0:
            raise ConfigError("length_cm must be positive")
        if self.coupling_g2N < 0:
            raise ConfigError("coupling_g2N must be non-negative")
        if self.gamma_e <= 0:
            raise ConfigError("gamma_e must be positive")
        if self.gamma_s < 0:
            raise ConfigError("gamma_s must be non-negative")
        if self.light_speed <= 0:
            raise ConfigError("light_speed must be positive")

    @property
    def optical_depth(self) -> float:
        """Resonant intensity attenuation exponent 2 g^2 N L / (c gamma_e)."""
        return 2.0 * self.coupling_g2N * self.length_cm / (self.light_speed * self.gamma_e)


@dataclass(frozen=True)
class ZeemanConfig:
    """Differential magnetic response of the two ground states."""

    delta_g: float = 1.0
    mu_B_over_hbar: float = MU_B_OVER_HBAR

    def validate(self) -> None:
        if self.mu_B_over_hbar <= 0:
            raise ConfigError("mu_B_over_hbar must be positive")


@dataclass(frozen=True)
class LambdaLabels:
    """Human-readable names of the three levels, carried in metadata only."""

    minus: str = "ground (signal-coupled)"
    plus: str = "ground (control-coupled)"
    excited: str = "excited"


def mixing_angle(g2N: float, omega_c: float) -> float:
    """Dark-state mixing angle theta with tan(theta) = sqrt(g^2 N) / Omega_c."""
    if omega_c < 0:
        raise ConfigError("omega_c must be non-negative")
    if g2N < 0:
        raise ConfigError("g2N must be non-negative")
    if omega_c == 0.0 and g2N == 0.0:
        raise UndefinedAngleError("mixing angle undefined for zero coupling and zero control")
    return math.atan2(math.sqrt(g2N), omega_c)


def group_velocity(theta: float, light_speed: float = SPEED_OF_LIGHT) -> float:
    """Polariton group velocity c cos^2(theta), in cm/us."""
    if not 0.0 <= theta <= 0.5 * math.pi:
        raise ConfigError("mixing angle must lie in [0, pi/2]")
    return light_speed * math.cos(theta) ** 2


def zeeman_detuning(b_gauss, zeeman: ZeemanConfig):
    """Two-photon detuning delta_B produced by a field value, rad/us."""
    out = zeeman.delta_g * zeeman.mu_B_over_hbar * np.asarray(b_gauss, dtype=float)
    return float(out) if np.ndim(b_gauss) == 0 else out


def zeeman_phase(bfield: Waveform, t0: float, t1: float, zeeman: ZeemanConfig) -> float:
    """Phase accumulated by the spin coherence over [t0, t1].

    Equal to delta_g * (mu_B/hbar) * integral of B(t); exact because the
    field is piecewise linear.
    """
    return zeeman.delta_g * zeeman.mu_B_over_hbar * bfield.integral(t0, t1)


def eit_susceptibility(delta, omega_c: float, medium: MediumParams, delta_B: float = 0.0):
    """Complex spatial gain kappa(delta) of the signal envelope, 1/cm.

    The steady-state field obeys E(z) proportional to exp(kappa z), with

        kappa = -(g^2 N / c) / (gamma_e + i delta + Omega_c^2 /
                                (gamma_s + i (delta - delta_B)))

    Re kappa <= 0 always; transmission through the cell is
    exp(2 Re kappa L).  On two-photon resonance with no spin decay the
    medium is perfectly transparent (kappa = 0).
    """
    if omega_c < 0:
        raise ConfigError("omega_c must be non-negative")
    d = np.asarray(delta, dtype=float)
    if omega_c == 0.0:
        pump = np.zeros(d.shape, dtype=complex)
        dark = np.zeros(d.shape, dtype=bool)
    else:
        inner = medium.gamma_s + 1j * (d - delta_B)
        dark = inner == 0
        safe = np.where(dark, 1.0, inner)
        pump = np.where(dark, 0.0, omega_c**2 / safe)
    den = medium.gamma_e + 1j * d + pump
    if np.any((den == 0) & ~dark):
        raise SingularityError("susceptibility denominator vanishes; all decay rates are zero")
    kappa = -(medium.coupling_g2N / medium.light_speed) / den
    # An exactly dark point with a finite control field is fully transparent.
    kappa = np.where(dark, 0.0, kappa)
    return complex(kappa) if np.ndim(delta) == 0 else kappa


def transmission(delta, omega_c: float, medium: MediumParams, delta_B: float = 0.0):
    """Intensity transmission exp(2 Re kappa L) through the full cell."""
    kappa = eit_susceptibility(delta, omega_c, medium, delta_B)
    return np.exp(2.0 * np.real(kappa) * medium.length_cm)


def transparency_fwhm(omega_c: float, medium: MediumParams) -> float:
    """Full width of the transparency window at half maximum, rad/us.

    The half level is taken midway between the on-resonance transmission
    and the absorption floor, and each crossing is located by bisection.
    A useful analytic estimate in the deep-EIT regime is
    Omega_c^2 / (gamma_e sqrt(d)).
    """
    medium.validate()
    if omega_c <= 0:
        raise ConfigError("transparency width requires a positive control field")
    depth = medium.optical_depth
    if depth <= 0:
        raise DegenerateWindowError("zero optical depth: the window is not defined")

    t_center = transmission(0.0, omega_c, medium)
    # Scan out to beyond the dressed-state resonances to find the floor.
    span = 4.0 * (omega_c + medium.gamma_e)
    grid = np.linspace(0.0, span, 4001)
    t_scan = transmission(grid, omega_c, medium)
    floor = float(t_scan.min())
    half = floor + 0.5 * (t_center - floor)
    if t_center - floor < 1e-12:
        raise DegenerateWindowError("transmission curve is flat: no half-maximum crossing")

    def crossing(sign: float) -> float:
        step = max(omega_c**2 / (medium.gamma_e * math.sqrt(max(depth, 1.0))), 1e-6) / 16.0
        lo, hi = 0.0, step
        for _ in range(10000):
            if transmission(sign * hi, omega_c, medium) < half:
                break
            lo, hi = hi, hi + step
            step *= 1.25
        else:
            raise DegenerateWindowError("no half-maximum crossing found")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if transmission(sign * mid, omega_c, medium) >= half:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-12 * max(hi, 1.0):
                break
        return 0.5 * (lo + hi)

    return crossing(1.0) + crossing(-1.0)
