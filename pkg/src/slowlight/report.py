"""Figure rendering for the command-line report path.

Every plot goes straight to a PNG file next to the CSV it illustrates;
nothing opens a window (the Agg backend is forced on import).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_run_figure(result, path, title: str = "") -> None:
    """Detector picture of one run: intensities plus the drive waveforms."""
    fig, (ax, ax2) = plt.subplots(
        2, 1, figsize=(8.0, 6.0), sharex=True,
        gridspec_kw={"height_ratios": [3, 1]})
    t = result.times
    ax.plot(t, result.input_trace, color="0.6", lw=1.0, label="input $|E(0,t)|^2$")
    ax.plot(t, np.abs(result.field_out) ** 2, color="tab:blue", lw=1.2,
            label="output $|E(L,t)|^2$")
    ax.plot(t, result.detector.signal_channel, color="tab:red", lw=1.0,
            label="signal diode")
    ax.set_ylabel("intensity (arb.)")
    ax.legend(loc="upper right", fontsize=9)
    if title:
        ax.set_title(title)

    ax2.plot(t, result.control_out, color="tab:green", lw=1.2, label="control (rad/us)")
    axb = ax2.twinx()
    axb.plot(t, result.bfield_out * 1e3, color="tab:purple", lw=1.0, ls="--",
             label="B (mG)")
    axb.set_ylabel("B (mG)")
    ax2.set_xlabel("time (us)")
    ax2.set_ylabel("control (rad/us)")
    lines = ax2.get_lines() + axb.get_lines()
    ax2.legend(lines, [ln.get_label() for ln in lines], loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sweep_figure(sweep, path, title: str = "") -> None:
    """Fringe: retrieval peak intensity against the programmed phase."""
    phases = sweep.phases
    peaks = sweep.peak_intensity
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.plot(phases / np.pi, peaks, "o", color="tab:red", ms=5, label="runs")
    if phases.size >= 3 and np.ptp(phases) > 0:
        dense = np.linspace(phases.min(), phases.max(), 400)
        ax.plot(dense / np.pi, sweep.fringe_fit.evaluate(dense), "-",
                color="0.4", lw=1.0, label="cosine fit")
    ax.set_xlabel(r"spin phase $\Phi/\pi$")
    ax.set_ylabel("retrieval peak intensity (arb.)")
    ax.legend(fontsize=9)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_spectrum_figure(deltas, transmission_curve, path, title: str = "") -> None:
    """Intensity transmission against two-photon detuning."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.plot(deltas, transmission_curve, color="tab:blue", lw=1.3)
    ax.set_xlabel(r"detuning $\delta$ (rad/us)")
    ax.set_ylabel("intensity transmission")
    ax.set_ylim(-0.02, 1.05)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
