import dataclasses
import math

import numpy as np
import pytest

from slowlight import (ConfigError, DetectionConfig, DetectorTrace,
                       auto_balance, beat_frequency, detect)
from slowlight.errors import DetectionError


def flat_config(eps=0.0, phase=0.0):
    return DetectionConfig(mix_amplitude=eps, mix_phase=phase)


def test_zero_mix_reads_plain_intensity():
    t = np.linspace(0, 10, 101)
    field = (0.1 + 0.05j) * np.exp(1j * 0.3 * t)
    control = np.ones_like(t)
    trace = detect(t, field, control, flat_config(0.0), control_scale=2.0)
    assert np.array_equal(trace.signal_channel, np.abs(field) ** 2)
    assert np.allclose(trace.control_channel, 4.0)
    assert trace.baseline == trace.signal_channel[0]


def test_antiphase_mix_cancels_a_matched_field():
    t = np.linspace(0, 1, 11)
    e0 = 0.05
    field = np.full_like(t, e0, dtype=complex)
    control = np.ones_like(t)
    eps = 0.25
    trace = detect(t, field, control, flat_config(eps, math.pi),
                   control_scale=e0 / eps)
    assert np.allclose(trace.signal_channel, 0.0, atol=1e-30)


def test_detection_is_pointwise():
    rng = np.random.default_rng(7)
    t = np.arange(64.0)
    field = rng.normal(size=64) + 1j * rng.normal(size=64)
    control = rng.uniform(0.2, 1.0, size=64)
    cfg = flat_config(0.2, 0.4)
    trace = detect(t, field, control, cfg, control_scale=1.5)
    perm = rng.permutation(64)
    shuffled = detect(t, field[perm], control[perm], cfg, control_scale=1.5)
    # Permuting the samples permutes the outputs sample for sample, except
    # for the normalization peak which we keep fixed via control_scale and
    # an unchanged maximum.
    assert np.allclose(shuffled.signal_channel, trace.signal_channel[perm])
    assert np.allclose(shuffled.control_channel, trace.control_channel[perm])


def test_shape_mismatch_rejected():
    with pytest.raises(DetectionError):
        detect(np.arange(5.0), np.zeros(4, complex), np.ones(5), flat_config())


def test_noise_is_reproducible_and_non_negative():
    t = np.linspace(0, 5, 200)
    field = np.full_like(t, 0.01, dtype=complex)
    control = np.ones_like(t)
    a = detect(t, field, control, flat_config(0.1), noise_std=0.05, seed=42)
    b = detect(t, field, control, flat_config(0.1), noise_std=0.05, seed=42)
    c = detect(t, field, control, flat_config(0.1), noise_std=0.05, seed=43)
    assert np.array_equal(a.signal_channel, b.signal_channel)
    assert not np.array_equal(a.signal_channel, c.signal_channel)
    assert np.all(a.signal_channel >= 0)
    assert np.all(a.control_channel >= 0)


def synthetic_storage(peak=0.2, scale=1.0):
    t = np.arange(0.0, 100.0, 0.5)
    control = np.where((t >= 20) & (t <= 60), 0.0, 1.0)
    field = np.where(t >= 60, peak * np.exp(-0.5 * ((t - 75) / 4.0) ** 2), 0.0)
    return t, field.astype(complex), control, scale


def test_auto_balance_matches_the_retrieved_peak():
    t, field, control, scale = synthetic_storage(peak=0.2, scale=1.0)
    eps = auto_balance(t, field, control, control_scale=scale)
    assert eps == pytest.approx(0.2, rel=1e-12)


def test_auto_balance_respects_the_power_cap():
    t, field, control, scale = synthetic_storage(peak=10.0, scale=1.0)
    eps = auto_balance(t, field, control, control_scale=scale)
    assert eps == pytest.approx(math.sqrt(0.10 * (1 - 1e-3)))
    assert eps**2 < 0.10


def test_auto_balance_failure_modes():
    t = np.arange(0.0, 10.0, 0.5)
    with pytest.raises(DetectionError):
        auto_balance(t, np.zeros_like(t, dtype=complex), np.zeros_like(t))
    # Control never switches off: no storage interval to search behind.
    with pytest.raises(DetectionError):
        auto_balance(t, np.ones_like(t, dtype=complex), np.ones_like(t))
    # Dark to the very end: nothing after it.
    control = np.where(t > 5, 0.0, 1.0)
    with pytest.raises(DetectionError):
        auto_balance(t, np.ones_like(t, dtype=complex), control,
                     dark_interval=(6.0, 9.5))
    # Retrieval window holds no field at all.
    t, field, control, scale = synthetic_storage(peak=0.0)
    with pytest.raises(DetectionError):
        auto_balance(t, field, control, control_scale=scale)


def test_balanced_mix_tracks_the_retrieval_amplitude(fig2a_result):
    r = fig2a_result
    scale = r.diagnostics["control_scale"]
    eps = auto_balance(r.times, r.field_out, r.control_out, control_scale=scale,
                       dark_interval=r.diagnostics["dark_interval"])
    after = r.times > r.diagnostics["dark_interval"][1]
    seg = np.abs(r.field_out[after])
    idx = int(np.argmax(seg))
    rel = r.control_out[after][idx] / r.control_out.max()
    assert eps * scale * rel == pytest.approx(float(seg[idx]), rel=1e-9)
    assert eps == pytest.approx(0.0815, abs=0.002)


def make_trace(t, y):
    return DetectorTrace(times=t, signal_channel=y,
                         control_channel=np.zeros_like(y), baseline=0.0)


def test_beat_frequency_on_a_synthetic_tone():
    t = np.arange(0.0, 200.0, 0.1)
    y = 0.5 + 0.3 * np.cos(2 * math.pi * 0.1 * t + 0.7)
    trace = make_trace(t, y)
    f = beat_frequency(trace, (10.0, 150.0))
    assert f == pytest.approx(0.1, abs=1e-3)


def test_beat_frequency_picks_the_dominant_tone():
    t = np.arange(0.0, 300.0, 0.1)
    y = 1.0 + 0.4 * np.cos(2 * math.pi * 0.07 * t) \
        + 0.05 * np.cos(2 * math.pi * 0.21 * t)
    f = beat_frequency(make_trace(t, y), (0.0, 300.0))
    assert f == pytest.approx(0.07, abs=1e-3)


def test_beat_frequency_needs_oscillation():
    t = np.arange(0.0, 50.0, 0.1)
    assert beat_frequency(make_trace(t, np.full_like(t, 2.0)), (0, 50)) is None


def test_beat_frequency_window_too_small():
    t = np.arange(0.0, 50.0, 0.1)
    with pytest.raises(DetectionError):
        beat_frequency(make_trace(t, np.cos(t)), (10.0, 10.4))


def test_config_invariants():
    with pytest.raises(ConfigError):
        DetectionConfig(mix_amplitude=0.5).validate()
    with pytest.raises(ConfigError):
        DetectionConfig(mix_amplitude=-0.1).validate()
    DetectionConfig(mix_amplitude=0.31).validate()
    cfg = DetectionConfig()
    assert cfg.mix_amplitude**2 < 0.10
    replaced = dataclasses.replace(cfg, mix_phase=1.0)
    assert replaced.mix_amplitude == cfg.mix_amplitude
