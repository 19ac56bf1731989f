"""Experiment definition: grids, detection settings, file format.

An experiment file is flat key-value text split into sections, one section
per field of :class:`ExperimentSpec`.  Waveform sections list one knot per
line.  Parsing is total: any input yields either a validated spec or a
list of diagnostics with stable codes and line numbers.  Rendering is
canonical (fixed section order, sorted keys, repr floats), so
parse(render(spec)) reproduces the spec exactly.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace

from .errors import ConfigError, SlowlightError
from .model import MediumParams, ZeemanConfig
from .waveform import Waveform

HZ_TO_RAD_US = 2.0 * math.pi * 1e-6

# Diagnostic codes, stable across releases.
E_MISSING_SECTION = "missing-section"
E_UNKNOWN_SECTION = "unknown-section"
E_MISSING_KEY = "missing-key"
E_UNKNOWN_KEY = "unknown-key"
E_DUPLICATE_KEY = "duplicate-key"
E_BAD_NUMBER = "bad-number"
E_BAD_SYNTAX = "bad-syntax"
E_KNOT_ORDER = "knot-order"
E_EMPTY_WAVEFORM = "empty-waveform"
E_UNIT_CONFLICT = "unit-conflict"
E_INVARIANT = "invariant"
W_WEAK_PROBE = "weak-probe"

_WAVEFORM_SECTIONS = ("control", "signal", "bfield")
_SCALAR_SECTIONS = {
    "medium": {
        "required": ("coupling_g2n", "gamma_e", "gamma_s", "length_cm"),
        "optional": ("light_speed",),
        "hz": ("gamma_e", "gamma_s"),
        "int": (),
    },
    "zeeman": {
        "required": ("delta_g",),
        "optional": ("mu_b_over_hbar",),
        "hz": (),
        "int": (),
    },
    "grid": {
        "required": ("dt", "nz", "t_end", "t_start"),
        "optional": ("snapshot_stride",),
        "hz": (),
        "int": ("nz", "snapshot_stride"),
    },
    "detection": {
        "required": ("mix_amplitude", "mix_phase"),
        "optional": (),
        "hz": (),
        "int": (),
    },
}


@dataclass(frozen=True)
class GridSpec:
    """Discretization: nz cells across the medium, fixed time step dt (us)."""

    nz: int = 200
    dt: float = 0.01
    t_start: float = 0.0
    t_end: float = 90.0
    snapshot_stride: int = 0  # steps between full-state snapshots, 0 = none

    def validate(self) -> None:
        if self.nz < 8:
            raise ConfigError("nz must be at least 8")
        if self.dt <= 0:
            raise ConfigError("dt must be positive")
        if self.t_end <= self.t_start:
            raise ConfigError("t_end must exceed t_start")
        if (self.t_end - self.t_start) / self.dt > 1e8:
            raise ConfigError("step count exceeds 1e8")
        if self.snapshot_stride < 0:
            raise ConfigError("snapshot_stride must be non-negative")


@dataclass(frozen=True)
class DetectionConfig:
    """Interferometric readout: a fraction of the control is mixed onto
    the signal detector with amplitude ratio mix_amplitude and phase
    mix_phase.  The mixed intensity fraction must stay below 10%."""

    mix_amplitude: float = math.sqrt(0.05)
    mix_phase: float = -0.085 * math.pi

    def validate(self) -> None:
        if not 0.0 <= self.mix_amplitude < 1.0:
            raise ConfigError("mix_amplitude must lie in [0, 1)")
        if self.mix_amplitude**2 >= 0.10:
            raise ConfigError("mixed intensity fraction mix_amplitude^2 must be below 0.10")


@dataclass(frozen=True)
class ExperimentSpec:
    medium: MediumParams
    zeeman: ZeemanConfig
    control: Waveform
    signal: Waveform
    bfield: Waveform
    grid: GridSpec
    detection: DetectionConfig
    label: str = ""

    def validate(self) -> "list[Issue]":
        return validate_spec(self)

    def with_bfield(self, bfield: Waveform) -> "ExperimentSpec":
        return replace(self, bfield=bfield)


@dataclass
class Issue:
    """One diagnostic from parsing or validation."""

    code: str
    message: str
    line: int | None = None
    severity: str = "error"

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message,
                "line": self.line, "severity": self.severity}

    def __str__(self) -> str:
        where = f" (line {self.line})" if self.line is not None else ""
        return f"{self.severity}: [{self.code}] {self.message}{where}"


class SpecFormatError(SlowlightError):
    """Raised by parse_experiment when the text contains errors."""

    def __init__(self, issues: list[Issue]):
        self.issues = issues
        summary = "; ".join(str(i) for i in issues if i.severity == "error")
        super().__init__(f"invalid experiment file: {summary}")


def validate_spec(spec: ExperimentSpec) -> list[Issue]:
    """Semantic checks on a structurally complete spec."""
    issues: list[Issue] = []

    def check(obj) -> None:
        try:
            obj.validate()
        except ConfigError as exc:
            issues.append(Issue(E_INVARIANT, str(exc)))

    check(spec.medium)
    check(spec.zeeman)
    check(spec.grid)
    check(spec.detection)
    for name in _WAVEFORM_SECTIONS:
        if not getattr(spec, name).knots:
            issues.append(Issue(E_EMPTY_WAVEFORM, f"section [{name}] defines no knots"))
    if spec.control.knots and spec.signal.knots:
        peak_c = max(abs(v) for _, v in spec.control.knots)
        peak_s = max(abs(v) for _, v in spec.signal.knots)
        if peak_c > 0 and peak_s > 0 and peak_s / peak_c > 0.3:
            issues.append(Issue(
                W_WEAK_PROBE,
                f"signal amplitude is {peak_s / peak_c:.2f} of the control; "
                "the weak-probe model assumes a ratio well below 0.3",
                severity="warning"))
    return issues


def _parse_float(token: str, line: int, key: str, issues: list[Issue]):
    try:
        value = float(token)
    except ValueError:
        issues.append(Issue(E_BAD_NUMBER, f"value for '{key}' is not a number: {token!r}", line))
        return None
    if not math.isfinite(value):
        issues.append(Issue(E_BAD_NUMBER, f"value for '{key}' must be finite", line))
        return None
    return value


def _parse_int(token: str, line: int, key: str, issues: list[Issue]):
    try:
        return int(token)
    except ValueError:
        issues.append(Issue(E_BAD_NUMBER, f"value for '{key}' is not an integer: {token!r}", line))
        return None


def _structural_parse(text: str):
    """First pass: split into sections, collect raw values and diagnostics."""
    issues: list[Issue] = []
    label = ""
    scalars: dict[str, dict[str, float]] = {name: {} for name in _SCALAR_SECTIONS}
    knots: dict[str, list[tuple[float, float, int]]] = {n: [] for n in _WAVEFORM_SECTIONS}
    seen_sections: set[str] = set()
    seen_keys: dict[str, set[str]] = {}
    section: str | None = None
    section_known = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            section_known = section in _SCALAR_SECTIONS or section in _WAVEFORM_SECTIONS
            if not section_known:
                issues.append(Issue(E_UNKNOWN_SECTION, f"unknown section [{section}]", lineno))
            else:
                seen_sections.add(section)
                seen_keys.setdefault(section, set())
            continue
        if "=" not in line:
            issues.append(Issue(E_BAD_SYNTAX, f"expected 'key = value', got {line!r}", lineno))
            continue
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()

        if section is None:
            if key == "label":
                label = value
            else:
                issues.append(Issue(E_UNKNOWN_KEY, f"key '{key}' before any section", lineno))
            continue
        if not section_known:
            continue

        if section in _WAVEFORM_SECTIONS:
            if key != "knot":
                issues.append(Issue(E_UNKNOWN_KEY,
                                    f"section [{section}] accepts only 'knot' entries", lineno))
                continue
            parts = value.split()
            if len(parts) != 2:
                issues.append(Issue(E_BAD_SYNTAX,
                                    f"knot needs two numbers 'time value', got {value!r}", lineno))
                continue
            t = _parse_float(parts[0], lineno, "knot time", issues)
            v = _parse_float(parts[1], lineno, "knot value", issues)
            if t is not None and v is not None:
                knots[section].append((t, v, lineno))
            continue

        layout = _SCALAR_SECTIONS[section]
        base = key[:-3] if key.endswith("_hz") else key
        allowed = set(layout["required"]) | set(layout["optional"])
        if base not in allowed or (key.endswith("_hz") and base not in layout["hz"]):
            issues.append(Issue(E_UNKNOWN_KEY, f"unknown key '{key}' in [{section}]", lineno))
            continue
        if base in seen_keys[section]:
            kind = E_UNIT_CONFLICT if key.endswith("_hz") or f"{base}_hz_seen" in seen_keys[section] \
                else E_DUPLICATE_KEY
            issues.append(Issue(kind, f"'{base}' given more than once in [{section}]", lineno))
            continue
        seen_keys[section].add(base)
        if key.endswith("_hz"):
            seen_keys[section].add(f"{base}_hz_seen")
            parsed = _parse_float(value, lineno, key, issues)
            if parsed is not None:
                scalars[section][base] = parsed * HZ_TO_RAD_US
        elif base in layout["int"]:
            parsed = _parse_int(value, lineno, key, issues)
            if parsed is not None:
                scalars[section][base] = parsed
        else:
            parsed = _parse_float(value, lineno, key, issues)
            if parsed is not None:
                scalars[section][base] = parsed

    for name in list(_SCALAR_SECTIONS) + list(_WAVEFORM_SECTIONS):
        if name not in seen_sections:
            issues.append(Issue(E_MISSING_SECTION, f"required section [{name}] is missing"))
    for name, layout in _SCALAR_SECTIONS.items():
        if name in seen_sections:
            for key in layout["required"]:
                if key not in scalars[name]:
                    issues.append(Issue(E_MISSING_KEY, f"[{name}] is missing '{key}'"))
    for name in _WAVEFORM_SECTIONS:
        if name in seen_sections and not knots[name]:
            issues.append(Issue(E_EMPTY_WAVEFORM, f"section [{name}] defines no knots"))
        pts = knots[name]
        for (t0, _, _), (t1, _, ln) in zip(pts, pts[1:]):
            if t1 <= t0:
                issues.append(Issue(E_KNOT_ORDER,
                                    f"[{name}] knot times must increase: {t0} then {t1}", ln))
    return label, scalars, knots, issues


def lint_experiment(text: str) -> list[Issue]:
    """All diagnostics (errors and warnings) for an experiment file."""
    label, scalars, knots, issues = _structural_parse(text)
    if any(i.severity == "error" for i in issues):
        return issues
    spec = _assemble(label, scalars, knots)
    return issues + validate_spec(spec)


def _assemble(label, scalars, knots) -> ExperimentSpec:
    med = scalars["medium"]
    zee = scalars["zeeman"]
    grd = scalars["grid"]
    det = scalars["detection"]
    return ExperimentSpec(
        medium=MediumParams(
            length_cm=med["length_cm"],
            coupling_g2N=med["coupling_g2n"],
            gamma_e=med["gamma_e"],
            gamma_s=med["gamma_s"],
            light_speed=med.get("light_speed", MediumParams.light_speed),
        ),
        zeeman=ZeemanConfig(
            delta_g=zee["delta_g"],
            mu_B_over_hbar=zee.get("mu_b_over_hbar", ZeemanConfig.mu_B_over_hbar),
        ),
        control=Waveform(tuple((t, v) for t, v, _ in knots["control"])),
        signal=Waveform(tuple((t, v) for t, v, _ in knots["signal"])),
        bfield=Waveform(tuple((t, v) for t, v, _ in knots["bfield"])),
        grid=GridSpec(
            nz=grd["nz"],
            dt=grd["dt"],
            t_start=grd["t_start"],
            t_end=grd["t_end"],
            snapshot_stride=grd.get("snapshot_stride", 0),
        ),
        detection=DetectionConfig(
            mix_amplitude=det["mix_amplitude"],
            mix_phase=det["mix_phase"],
        ),
        label=label,
    )


def parse_experiment(text: str) -> ExperimentSpec:
    """Parse and fully validate an experiment file.

    Raises SpecFormatError carrying every diagnostic if the text has
    errors; warnings alone do not block parsing.
    """
    label, scalars, knots, issues = _structural_parse(text)
    if any(i.severity == "error" for i in issues):
        raise SpecFormatError(issues)
    spec = _assemble(label, scalars, knots)
    issues = issues + validate_spec(spec)
    if any(i.severity == "error" for i in issues):
        raise SpecFormatError(issues)
    return spec


def _fmt(value) -> str:
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def render_experiment(spec: ExperimentSpec) -> str:
    """Canonical text form: fixed section order, sorted keys, repr floats."""
    lines: list[str] = []
    if spec.label:
        lines.append(f"label = {spec.label}")
        lines.append("")
    med, zee, grd, det = spec.medium, spec.zeeman, spec.grid, spec.detection
    sections: list[tuple[str, dict]] = [
        ("medium", {
            "coupling_g2n": med.coupling_g2N, "gamma_e": med.gamma_e,
            "gamma_s": med.gamma_s, "length_cm": med.length_cm,
            "light_speed": med.light_speed}),
        ("zeeman", {"delta_g": zee.delta_g, "mu_b_over_hbar": zee.mu_B_over_hbar}),
    ]
    for name, values in sections:
        lines.append(f"[{name}]")
        for key in sorted(values):
            lines.append(f"{key} = {_fmt(values[key])}")
        lines.append("")
    for name in _WAVEFORM_SECTIONS:
        lines.append(f"[{name}]")
        for t, v in getattr(spec, name).knots:
            lines.append(f"knot = {_fmt(t)} {_fmt(v)}")
        lines.append("")
    lines.append("[grid]")
    for key, value in sorted({"dt": grd.dt, "nz": grd.nz, "snapshot_stride": grd.snapshot_stride,
                              "t_end": grd.t_end, "t_start": grd.t_start}.items()):
        lines.append(f"{key} = {_fmt(value)}")
    lines.append("")
    lines.append("[detection]")
    for key, value in sorted({"mix_amplitude": det.mix_amplitude,
                              "mix_phase": det.mix_phase}.items()):
        lines.append(f"{key} = {_fmt(value)}")
    lines.append("")
    return "\n".join(lines)


def content_hash(spec: ExperimentSpec) -> str:
    """SHA-256 of the canonical rendering; stable across round trips."""
    return hashlib.sha256(render_experiment(spec).encode()).hexdigest()
