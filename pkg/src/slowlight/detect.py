"""Interferometric detector model.

The retrieved signal leaves the cell collinear with the strong control
beam.  A fraction epsilon of the control is mixed onto the signal arm
with a settable relative phase, so the signal photodiode sees

    I_sig(t) = | E(L, t) + epsilon * C(t) * exp(i phi) |^2

while the remaining control power lands on a reference diode,

    I_ref(t) = (1 - epsilon^2) * C(t)^2.

C(t) is the control Rabi waveform rescaled to detector units; by
convention its plateau is sqrt(10) times the input signal peak, which
mirrors the roughly 10:1 drive-to-signal power ratio of the setup.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DetectionError
from .sequence import DetectionConfig

MIX_POWER_CAP = 0.10          # at most 10% of control power tapped into the mix
MIN_BEAT_CONTRAST = 6.0       # spectral peak must beat the noise floor by this factor


@dataclass
class DetectorTrace:
    times: np.ndarray
    signal_channel: np.ndarray
    control_channel: np.ndarray
    baseline: float


def detect(times, field_out, control_out, config: DetectionConfig,
           control_scale: float | None = None,
           noise_std: float = 0.0, seed: int | None = None) -> DetectorTrace:
    """Photodiode traces for a run's exit field and control waveform.

    control_out is the Rabi waveform in rad/us; control_scale converts its
    peak to detector field units (defaults to the peak itself, i.e. raw
    Rabi units).  Gaussian noise of rms noise_std is added per sample when
    requested; intensities are clipped at zero afterwards.
    """
    times = np.asarray(times, dtype=float)
    field_out = np.asarray(field_out, dtype=complex)
    control_out = np.asarray(control_out, dtype=float)
    if times.shape != field_out.shape or times.shape != control_out.shape:
        raise DetectionError("times, field_out and control_out must share a shape")

    peak = float(control_out.max(initial=0.0))
    if peak > 0.0:
        rel = control_out / peak
    else:
        rel = np.zeros_like(control_out)
    amp = control_scale if control_scale is not None else peak
    mixed = config.mix_amplitude * amp * rel * np.exp(1j * config.mix_phase)

    signal = np.abs(field_out + mixed) ** 2
    reference = (1.0 - config.mix_amplitude**2) * (amp * rel) ** 2
    baseline = float(signal[0]) if signal.size else 0.0

    if noise_std > 0.0:
        rng = np.random.default_rng(seed)
        signal = signal + rng.normal(0.0, noise_std, signal.shape)
        reference = reference + rng.normal(0.0, noise_std, reference.shape)
        np.clip(signal, 0.0, None, out=signal)
        np.clip(reference, 0.0, None, out=reference)

    return DetectorTrace(times=times, signal_channel=signal,
                         control_channel=reference, baseline=baseline)


def auto_balance(times, field_out, control_out, control_scale: float | None = None,
                 dark_interval: tuple[float, float] | None = None) -> float:
    """Mix amplitude that matches the tapped control to the retrieved peak.

    Finds the retrieved pulse (after the control gap, located from the
    waveform itself when not given) and returns epsilon such that
    epsilon * C equals the retrieved field amplitude at its peak.  The
    result is capped just under the 10% power limit.
    """
    times = np.asarray(times, dtype=float)
    field_out = np.asarray(field_out, dtype=complex)
    control_out = np.asarray(control_out, dtype=float)

    peak = float(control_out.max(initial=0.0))
    if peak <= 0.0:
        raise DetectionError("control waveform is identically zero")
    if dark_interval is None:
        off = control_out < 0.005 * peak
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
            raise DetectionError("no storage interval found in the control waveform")
        dark_interval = (float(times[best[0]]), float(times[best[1]]))

    after = times > dark_interval[1]
    if not np.any(after):
        raise DetectionError("no samples after the storage interval")
    segment = np.abs(field_out[after])
    idx = int(np.argmax(segment))
    retrieved_peak = float(segment[idx])
    if retrieved_peak <= 0.0:
        raise DetectionError("retrieved field vanishes; nothing to balance against")

    amp = control_scale if control_scale is not None else peak
    rel_at_peak = float(control_out[np.flatnonzero(after)[idx]]) / peak
    if rel_at_peak <= 0.0:
        rel_at_peak = 1.0
    epsilon = retrieved_peak / (amp * rel_at_peak)
    cap = math.sqrt(MIX_POWER_CAP * (1.0 - 1e-3))
    return min(epsilon, cap)


def beat_frequency(trace: DetectorTrace, window: tuple[float, float]) -> float | None:
    """Dominant oscillation frequency of the signal channel in a window, MHz.

    Subtracts the mean, applies a Hann taper and locates the spectral peak
    on a zero-padded FFT with parabolic interpolation.  Returns None when
    no clear line stands above the spectrum's floor.
    """
    t0, t1 = window
    mask = (trace.times >= t0) & (trace.times <= t1)
    if np.count_nonzero(mask) < 8:
        raise DetectionError("beat window holds fewer than 8 samples")
    t = trace.times[mask]
    y = trace.signal_channel[mask].astype(float)
    dt = float(t[1] - t[0])

    y = y - y.mean()
    rms = float(np.sqrt(np.mean(y**2)))
    if rms < 1e-12:
        return None
    y = y * np.hanning(y.size)

    n = int(2 ** math.ceil(math.log2(y.size * 16)))
    spec = np.abs(np.fft.rfft(y, n=n))
    spec[0] = 0.0
    freqs = np.fft.rfftfreq(n, d=dt)
    i = int(np.argmax(spec))
    floor = float(np.median(spec[1:]))
    if floor > 0 and spec[i] < MIN_BEAT_CONTRAST * floor:
        return None
    if i <= 0 or i >= spec.size - 1:
        return float(freqs[i])

    s0, s1, s2 = spec[i - 1], spec[i], spec[i + 1]
    denom = s0 - 2.0 * s1 + s2
    shift = 0.0 if denom == 0 else 0.5 * (s0 - s2) / denom
    return float((freqs[i] + shift * (freqs[1] - freqs[0])))
