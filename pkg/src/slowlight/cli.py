"""Command-line front end.

Subcommands
    validate  lint an experiment file; exit 0 only when fully clean
    run       integrate one experiment, write traces, meta and figures
    sweep     repeat a storage run over a phase grid and fit the fringe
    spectrum  tabulate the steady-state susceptibility and transmission
    scenario  print or save one of the built-in presets

Exit codes: 0 success, 1 validation or configuration problem, 2 I/O
problem, 3 numerical failure during integration.  Output tables are
plain comma-separated text with '#' comment headers and %.12g floats,
so repeated runs of the same experiment produce byte-identical files.
Figures are rendered next to each table unless --no-figures is given;
the default output directory is $SLOWLIGHT_OUTDIR, falling back to the
current directory.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (group_delay, phase_sweep, retrieval_efficiency)
from .detect import beat_frequency
from .errors import ConfigError, IntegrationError, SlowlightError
from .model import transmission, eit_susceptibility, transparency_fwhm, \
    zeeman_detuning, zeeman_phase
from .scenarios import scenario, scenario_names
from .sequence import SpecFormatError, content_hash, lint_experiment, \
    parse_experiment, render_experiment
from .solver import run

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_NUMERIC = 3

log = logging.getLogger("slowlight")


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _out_dir(args) -> Path:
    if args.out:
        return Path(args.out)
    env = os.environ.get("SLOWLIGHT_OUTDIR")
    return Path(env) if env else Path.cwd()


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write_csv(path: Path, header_lines, columns, rows) -> None:
    """Deterministic comma-separated table with a commented header."""
    lines = [f"# {h}" for h in header_lines]
    lines.append("# columns: " + ",".join(columns))
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _load_spec(path: str):
    """Parse an experiment file, mapping failures onto exit codes."""
    try:
        text = _read_text(path)
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_IO)
    try:
        return parse_experiment(text)
    except SpecFormatError as exc:
        for issue in exc.issues:
            print(str(issue), file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def cmd_validate(args) -> int:
    try:
        text = _read_text(args.spec)
    except OSError as exc:
        print(f"error: cannot read {args.spec}: {exc}", file=sys.stderr)
        return EXIT_IO
    issues = lint_experiment(text)
    errors = sum(1 for i in issues if i.severity == "error")
    warnings = len(issues) - errors
    if args.json:
        doc = {"file": args.spec, "ok": not issues, "errors": errors,
               "warnings": warnings, "issues": [i.to_dict() for i in issues]}
        print(json.dumps(doc, sort_keys=True))
    else:
        for issue in issues:
            print(str(issue), file=sys.stderr)
        if not issues:
            spec = parse_experiment(text)
            print(f"ok: {args.spec} ({content_hash(spec)[:12]})")
    return EXIT_OK if not issues else EXIT_CONFIG


def _beat_report(result, spec) -> dict | None:
    """Expected and measured beat for runs that hold the field through
    retrieval.  Measured over three expected periods of the strong part
    of the retrieved pulse; the faint tail drifts as the spin pool
    empties and is deliberately excluded."""
    dark = result.diagnostics.get("dark_interval")
    if dark is None:
        return None
    t_end = float(result.times[-1])
    b_level = spec.bfield.evaluate(0.5 * (dark[1] + t_end))
    delta = zeeman_detuning(b_level, spec.zeeman)
    if abs(delta) < 1e-9:
        return None
    expected_mhz = abs(delta) / (2.0 * math.pi)
    start = dark[1] + 3.0
    window = (start, min(start + 3.0 / expected_mhz, t_end))
    measured = beat_frequency(result.detector, window)
    return {"expected_mhz": expected_mhz, "measured_mhz": measured,
            "window_us": window}


def cmd_run(args) -> int:
    spec = _load_spec(args.spec)
    if args.snapshots:
        spec = dataclasses.replace(
            spec, grid=dataclasses.replace(spec.grid, snapshot_stride=args.snapshots))
    try:
        result = run(spec, output_stride=args.stride)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    out = _out_dir(args)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create {out}: {exc}", file=sys.stderr)
        return EXIT_IO
    stem = spec.label or Path(args.spec).stem
    spec_hash = content_hash(spec)

    d = result.diagnostics
    for msg in d.get("warnings", ()):
        log.warning(msg)

    rows = zip(result.times, result.input_trace,
               result.field_out.real, result.field_out.imag,
               np.abs(result.field_out) ** 2,
               result.control_out, result.bfield_out,
               result.detector.signal_channel, result.detector.control_channel,
               result.medium_energy)
    csv_path = out / f"{stem}_run.csv"
    _write_csv(
        csv_path,
        [f"slowlight {__version__} run", f"spec sha256 {spec_hash}",
         "time us; fields in input units; control rad/us; bfield gauss"],
        ["time_us", "input_intensity", "field_re", "field_im",
         "field_intensity", "control_rad_us", "bfield_gauss",
         "signal_channel", "control_channel", "medium_energy"],
        rows)

    summary = {
        "version": __version__, "label": spec.label,
        "content_hash": spec_hash,
        "spin_phase_rad": zeeman_phase(spec.bfield, spec.grid.t_start,
                                       spec.grid.t_end, spec.zeeman),
        "dark_interval_us": d.get("dark_interval"),
        "warnings": list(d.get("warnings", ())),
        "steps": d.get("steps"),
    }
    intensity = np.abs(result.field_out) ** 2
    if d.get("input_energy", 0.0) > 0:
        try:
            summary["group_delay_us"] = group_delay(
                result.times, result.input_trace, intensity)
        except SlowlightError:
            pass
    if d.get("dark_interval") is not None:
        eff = retrieval_efficiency(result)
        summary["stored_fraction"] = eff.stored_fraction
        summary["retrieved_fraction"] = eff.retrieved_fraction
        summary["escaped_fraction"] = eff.escaped_fraction
        beat = _beat_report(result, spec)
        if beat is not None:
            summary["beat"] = beat

    (out / f"{stem}_meta.json").write_text(
        json.dumps(summary, sort_keys=True, indent=2) + "\n", encoding="utf-8")

    if result.snapshots:
        snap_path = out / f"{stem}_snapshots.npz"
        np.savez(snap_path,
                 times=np.array([s.t for s in result.snapshots]),
                 z_cells=result.snapshots[0].z_cells,
                 field=np.array([s.E for s in result.snapshots]),
                 polarization=np.array([s.P for s in result.snapshots]),
                 spin=np.array([s.S for s in result.snapshots]))
        print(f"snapshots: {snap_path} ({len(result.snapshots)} frames)")

    print(f"wrote {csv_path}")
    print(f"spin phase: {summary['spin_phase_rad']:.6f} rad "
          f"({summary['spin_phase_rad'] / math.pi:.4f} pi)")
    if "group_delay_us" in summary:
        print(f"group delay: {summary['group_delay_us']:.3f} us")
    if "stored_fraction" in summary:
        print(f"fractions: escaped {summary['escaped_fraction']:.4f}  "
              f"stored {summary['stored_fraction']:.4f}  "
              f"retrieved {summary['retrieved_fraction']:.4f}")
    if "beat" in summary:
        b = summary["beat"]
        got = b["measured_mhz"]
        got_s = f"{got * 1e3:.2f} kHz" if got is not None else "not resolved"
        print(f"retrieval beat: expected {b['expected_mhz'] * 1e3:.2f} kHz, "
              f"measured {got_s}")

    if not args.no_figures:
        save = out / f"{stem}_run.png"
        from .report import save_run_figure
        save_run_figure(result, save, title=stem)
        print(f"figure: {save}")
    return EXIT_OK


def _parse_phase(text: str) -> float:
    """Phase argument in radians; a trailing 'pi' multiplies by pi."""
    s = text.strip().lower().replace(" ", "")
    factor = 1.0
    if s.endswith("pi"):
        factor = math.pi
        s = s[:-2].rstrip("*")
        if s == "" or s == "+":
            s = "1"
        elif s == "-":
            s = "-1"
    try:
        return float(s) * factor
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"cannot read phase {text!r}; use radians or a multiple of pi, e.g. 4pi")


def cmd_sweep(args) -> int:
    spec = _load_spec(args.spec)
    try:
        sweep = phase_sweep(spec, args.n, args.phi_max, output_stride=args.stride,
                            integrated=args.integrated)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    out = _out_dir(args)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create {out}: {exc}", file=sys.stderr)
        return EXIT_IO
    stem = spec.label or Path(args.spec).stem
    fit = sweep.fringe_fit
    csv_path = out / f"{stem}_sweep.csv"
    _write_csv(
        csv_path,
        [f"slowlight {__version__} sweep", f"spec sha256 {content_hash(spec)}",
         f"mix_amplitude {_fmt(sweep.mix_amplitude)} peak_time_us {_fmt(sweep.peak_time)}",
         f"fringe offset {_fmt(fit.offset)} amplitude {_fmt(fit.amplitude)} "
         f"phase {_fmt(fit.phase)} residual {_fmt(fit.residual)}"],
        ["expected_phase_rad", "b_area_gauss_us",
         "retrieval_peak_intensity", "fitted_phase_rad"],
        sweep.entries)

    print(f"wrote {csv_path}")
    print(f"runs: {len(sweep.entries)}, detector mix {sweep.mix_amplitude:.4f}, "
          f"retrieval peak at {sweep.peak_time:.2f} us")
    print(f"fringe: offset {fit.offset:.4e}, amplitude {fit.amplitude:.4e}, "
          f"phase {fit.phase:.4f} rad, contrast {fit.contrast:.3f}")

    if not args.no_figures:
        save = out / f"{stem}_sweep.png"
        from .report import save_sweep_figure
        save_sweep_figure(sweep, save, title=stem)
        print(f"figure: {save}")
    return EXIT_OK


def _parse_range(text: str):
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError(
            f"range must be LO:HI or LO:HI:N, got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
        n = int(parts[2]) if len(parts) == 3 else 801
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot read range {text!r}")
    if not hi > lo:
        raise argparse.ArgumentTypeError("range needs HI > LO")
    if n < 3:
        raise argparse.ArgumentTypeError("range needs at least 3 points")
    return lo, hi, n


def cmd_spectrum(args) -> int:
    spec = _load_spec(args.spec)
    medium = spec.medium
    if medium.optical_depth == 0.0:
        print("error: medium has zero optical depth; the transmission "
              "spectrum is identically 1 and carries no information",
              file=sys.stderr)
        return EXIT_CONFIG
    omega_c = spec.control.maximum()
    lo, hi, n = args.delta_range
    deltas = np.linspace(lo, hi, n)
    kappa = eit_susceptibility(deltas, omega_c, medium)
    trans = transmission(deltas, omega_c, medium)

    out = _out_dir(args)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create {out}: {exc}", file=sys.stderr)
        return EXIT_IO
    stem = spec.label or Path(args.spec).stem
    csv_path = out / f"{stem}_spectrum.csv"
    _write_csv(
        csv_path,
        [f"slowlight {__version__} spectrum", f"spec sha256 {content_hash(spec)}",
         f"control rad/us {_fmt(omega_c)}; detuning rad/us"],
        ["delta_rad_us", "re_kappa", "im_kappa", "transmission"],
        zip(deltas, kappa.real, kappa.imag, trans))

    print(f"wrote {csv_path}")
    t0 = float(transmission(0.0, omega_c, medium))
    print(f"on-resonance transmission: {t0:.6g}")
    if omega_c > 0.0:
        fwhm = transparency_fwhm(omega_c, medium)
        print(f"transparency window fwhm: {fwhm:.6f} rad/us "
              f"({fwhm / (2 * math.pi) * 1e3:.2f} kHz)")
    else:
        print(f"control is off: bare absorption, T(0) = exp(-d) = "
              f"{math.exp(-medium.optical_depth):.3e}")

    if not args.no_figures:
        save = out / f"{stem}_spectrum.png"
        from .report import save_spectrum_figure
        save_spectrum_figure(deltas, trans, save, title=stem)
        print(f"figure: {save}")
    return EXIT_OK


def cmd_scenario(args) -> int:
    if args.list:
        for name in scenario_names():
            print(name)
        return EXIT_OK
    if not args.name:
        print("error: give a scenario name or --list", file=sys.stderr)
        return EXIT_CONFIG
    try:
        spec = scenario(args.name)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = render_experiment(spec)
    if args.out:
        try:
            Path(args.out).write_text(text, encoding="utf-8")
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slowlight",
        description="Storage and phase control of light pulses in a "
                    "driven three-level medium.")
    parser.add_argument("--version", action="version",
                        version=f"slowlight {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log solver warnings and progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="lint an experiment file")
    p.add_argument("spec", help="experiment file")
    p.add_argument("--json", action="store_true",
                   help="machine-readable diagnostics on stdout")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="integrate one experiment")
    p.add_argument("spec", help="experiment file")
    p.add_argument("--out", help="output directory (default $SLOWLIGHT_OUTDIR or .)")
    p.add_argument("--stride", type=int, default=10,
                   help="record every Nth step (default 10)")
    p.add_argument("--snapshots", type=int, default=0, metavar="N",
                   help="keep a full state snapshot every N steps")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="phase sweep of a storage experiment")
    p.add_argument("spec", help="experiment file (the field pulse sets the shape)")
    p.add_argument("--n", type=int, required=True, help="number of runs")
    p.add_argument("--phi-max", type=_parse_phase, required=True,
                   help="phase reached after the last run, e.g. 4pi or 12.57")
    p.add_argument("--integrated", action="store_true",
                   help="fringe from windowed signal energy instead of the peak")
    p.add_argument("--out", help="output directory (default $SLOWLIGHT_OUTDIR or .)")
    p.add_argument("--stride", type=int, default=10)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("spectrum", help="steady-state transmission spectrum")
    p.add_argument("spec", help="experiment file")
    p.add_argument("--delta-range", type=_parse_range, default=(-2.0, 2.0, 801),
                   metavar="LO:HI[:N]", help="detuning grid in rad/us (default -2:2:801)")
    p.add_argument("--out", help="output directory (default $SLOWLIGHT_OUTDIR or .)")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("scenario", help="print or save a built-in preset")
    p.add_argument("name", nargs="?", help="preset name, e.g. fig2a or fig3_trace(5)")
    p.add_argument("--out", help="write to a file instead of stdout")
    p.add_argument("--list", action="store_true", help="list preset names")
    p.set_defaults(func=cmd_scenario)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else EXIT_CONFIG
    except SlowlightError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
