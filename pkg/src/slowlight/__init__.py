"""Slow-light pulse storage simulator.

Simulates a weak signal pulse propagating through a coherently driven
three-level medium: dramatic group-velocity reduction, conversion of the
pulse into a spin coherence when the drive is switched off, phase imprint
by a pulsed magnetic field, and interferometric read-out on retrieval.
"""

from .analysis import (EfficiencyReport, FringeFit, SweepEntry, SweepResult,
                       compression_factor, fit_fringe, group_delay,
                       phase_sweep, relative_retrieval_phase,
                       retrieval_efficiency)
from .detect import DetectorTrace, auto_balance, beat_frequency, detect
from .errors import (ConfigError, DegenerateWindowError, DetectionError,
                     IntegrationError, PulseNotFoundError, SingularityError,
                     SlowlightError, UndefinedAngleError, WaveformError)
from .model import (MU_B_OVER_HBAR, SPEED_OF_LIGHT, LambdaLabels, MediumParams,
                    ZeemanConfig, eit_susceptibility, group_velocity,
                    mixing_angle, transmission, transparency_fwhm,
                    zeeman_detuning, zeeman_phase)
from .scenarios import scenario, scenario_names
from .sequence import (DetectionConfig, ExperimentSpec, GridSpec, Issue,
                       SpecFormatError, content_hash, lint_experiment,
                       parse_experiment, render_experiment, validate_spec)
from .solver import (RunResult, SimulationState, equations_of_motion,
                     initial_state, propagate_field, run, stability_limit, step)
from .waveform import Waveform, constant

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DegenerateWindowError", "DetectionError", "DetectorTrace",
    "DetectionConfig", "ExperimentSpec", "FringeFit", "GridSpec",
    "IntegrationError", "Issue", "LambdaLabels", "MU_B_OVER_HBAR",
    "MediumParams", "PulseNotFoundError", "RunResult", "SPEED_OF_LIGHT",
    "SimulationState", "SingularityError", "SlowlightError", "SpecFormatError",
    "SweepEntry", "SweepResult", "EfficiencyReport", "UndefinedAngleError", "Waveform", "WaveformError",
    "ZeemanConfig", "auto_balance", "beat_frequency", "compression_factor",
    "constant", "content_hash", "detect", "eit_susceptibility",
    "equations_of_motion", "fit_fringe", "group_delay", "group_velocity",
    "initial_state", "lint_experiment", "mixing_angle", "parse_experiment",
    "phase_sweep", "propagate_field", "relative_retrieval_phase",
    "render_experiment", "retrieval_efficiency", "run", "scenario",
    "scenario_names", "stability_limit", "step", "transmission",
    "transparency_fwhm", "validate_spec", "zeeman_detuning", "zeeman_phase",
    "__version__",
]
