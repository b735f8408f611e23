import math

import numpy as np
import pytest

from airwriting.dataset import TrialRecord
from airwriting.envelopes import (
    ENVELOPE_KINDS,
    WindowPlan,
    compute_envelope,
    envelope_feature,
    segment,
    znorm,
)
from airwriting.errors import SignalTooShort
from airwriting.resample import FixedTrial


def naive_feature(window, kind, zero_mean_var=True):
    """Two-pass loop oracle, no vectorized shortcuts."""
    w = len(window)
    if kind == "mav":
        return sum(abs(v) for v in window) / w
    if kind == "energy":
        return sum(v * v for v in window) / w
    if kind == "var":
        mu = 0.0 if zero_mean_var else sum(window) / w
        return sum((v - mu) ** 2 for v in window) / (w - 1)
    if kind == "rms":
        return math.sqrt(sum(v * v for v in window) / w)
    if kind == "tm3":
        return sum(abs(v) ** 3 for v in window) / w
    if kind == "tm4":
        return sum(v ** 4 for v in window) / w
    if kind == "tm5":
        return sum(abs(v) ** 5 for v in window) / w
    if kind == "logd":
        return math.exp(sum(math.log(max(abs(v), 1e-12)) for v in window) / w)
    raise AssertionError(kind)


def fixed_trial(data, rate=2000.0):
    data = np.atleast_2d(np.asarray(data, dtype=float))
    rec = TrialRecord(subject_id="S01", letter="A", repetition=0,
                      sample_rate_hz=rate, n_channels=data.shape[0],
                      data_path="S01/A_0.myos")
    return FixedTrial(record=rec, samples=data)


def test_fixed_values_from_hand_arithmetic():
    w = [1.0, -2.0, 3.0]
    assert envelope_feature(w, "mav") == pytest.approx(2.0)
    assert envelope_feature(w, "energy") == pytest.approx(14.0 / 3.0)
    assert envelope_feature(w, "rms") == pytest.approx(math.sqrt(14.0 / 3.0))
    assert envelope_feature(w, "tm3") == pytest.approx(12.0)
    assert envelope_feature(w, "tm4") == pytest.approx(98.0 / 3.0)
    assert envelope_feature(w, "tm5") == pytest.approx(276.0 / 3.0)


def test_logd_is_geometric_mean():
    assert envelope_feature([1.0, 2.0, 4.0], "logd") == pytest.approx(2.0)


def test_all_zero_window():
    zeros = [0.0, 0.0, 0.0]
    assert envelope_feature(zeros, "logd") == pytest.approx(1e-12)
    for kind in ("mav", "energy", "var", "rms", "tm3", "tm4", "tm5"):
        assert envelope_feature(zeros, kind) == 0.0


def test_variance_conventions():
    w = [1.0, -2.0, 3.0]
    assert envelope_feature(w, "var", zero_mean_var=True) == pytest.approx(14.0 / 2.0)
    mu = 2.0 / 3.0
    want = sum((v - mu) ** 2 for v in w) / 2.0
    assert envelope_feature(w, "var", zero_mean_var=False) == pytest.approx(want)


def test_every_kind_matches_loop_oracle():
    rng = np.random.default_rng(21)
    for _ in range(100):
        w = int(rng.integers(25, 301))
        window = rng.standard_normal(w) * 10.0 ** rng.integers(-2, 3)
        for kind in ENVELOPE_KINDS:
            got = envelope_feature(window, kind)
            want = naive_feature(window.tolist(), kind)
            assert abs(got - want) <= 1e-12 * max(abs(want), 1e-300), kind


def test_scaling_laws_and_sign_invariance():
    rng = np.random.default_rng(22)
    window = rng.standard_normal(250)
    a = -3.7
    powers = {"mav": 1, "energy": 2, "var": 2, "rms": 1, "tm3": 3, "tm4": 4, "tm5": 5, "logd": 1}
    for kind, p in powers.items():
        base = envelope_feature(window, kind)
        scaled = envelope_feature(a * window, kind)
        assert scaled == pytest.approx(abs(a) ** p * base, rel=1e-9), kind
        assert envelope_feature(-window, kind) == pytest.approx(base, rel=1e-12), kind


def test_rms_squared_equals_energy():
    rng = np.random.default_rng(23)
    window = rng.standard_normal(250)
    rms = envelope_feature(window, "rms")
    energy = envelope_feature(window, "energy")
    assert rms * rms == pytest.approx(energy, rel=1e-15)


def test_zero_mean_variance_vs_energy_identity():
    rng = np.random.default_rng(24)
    window = rng.standard_normal(100)
    w = len(window)
    var = envelope_feature(window, "var")
    energy = envelope_feature(window, "energy")
    assert var == pytest.approx(energy * w / (w - 1), rel=1e-12)


def test_segment_frame_counts():
    plan = WindowPlan(window_len_samples=250)
    assert plan.hop == 125
    assert segment(np.zeros(8000), plan).shape == (63, 250)
    plan200 = WindowPlan(window_len_samples=200)
    assert segment(np.zeros(8000), plan200).shape == (79, 200)
    one = WindowPlan(window_len_samples=250)
    assert segment(np.zeros(250), one).shape == (1, 250)


def test_segment_frame_offsets():
    plan = WindowPlan(window_len_samples=4, overlap_fraction=0.5)
    x = np.arange(10.0)
    frames = segment(x, plan)
    assert np.array_equal(frames[0], [0, 1, 2, 3])
    assert np.array_equal(frames[1], [2, 3, 4, 5])
    assert frames.shape == (4, 4)  # trailing sample dropped


def test_segment_too_short():
    with pytest.raises(SignalTooShort):
        segment(np.zeros(100), WindowPlan(window_len_samples=250))


def test_compute_envelope_shapes_and_constant():
    trial = fixed_trial(np.full((5, 8000), -2.5))
    env = compute_envelope(trial, WindowPlan(window_len_samples=250), "mav")
    assert env.values.shape == (5, 63)
    assert np.allclose(env.values, 2.5)


def test_impulse_energy_envelope():
    x = np.zeros(8000)
    x[0] = 1.0
    env = compute_envelope(fixed_trial(x), WindowPlan(window_len_samples=250), "energy")
    assert env.values[0, 0] == pytest.approx(1.0 / 250.0)
    assert np.all(env.values[0, 2:] == 0.0)


def test_nonnegative_envelopes():
    rng = np.random.default_rng(25)
    trial = fixed_trial(rng.standard_normal((3, 2000)))
    for kind in ENVELOPE_KINDS:
        env = compute_envelope(trial, WindowPlan(window_len_samples=100), kind)
        assert np.all(env.values >= 0.0), kind
        assert np.all(np.isfinite(env.values)), kind


def test_znorm_direct_values():
    out = znorm(np.array([[1.0, 2.0, 3.0]]))
    assert np.allclose(out, [[-math.sqrt(1.5), 0.0, math.sqrt(1.5)]])


def test_znorm_constant_channel_guard():
    out = znorm(np.array([[4.0, 4.0, 4.0], [1.0, 2.0, 3.0]]))
    assert np.array_equal(out[0], np.zeros(3))
    assert abs(out[1].mean()) < 1e-12


def test_znorm_recomputation_oracle():
    rng = np.random.default_rng(26)
    m = rng.standard_normal((5, 63)) * 7.0 + 3.0
    out = znorm(m)
    assert np.max(np.abs(out.mean(axis=1))) < 1e-10
    assert np.max(np.abs(out.std(axis=1) - 1.0)) < 1e-10


def test_znorm_idempotent():
    rng = np.random.default_rng(27)
    m = rng.standard_normal((4, 40))
    once = znorm(m)
    assert np.max(np.abs(znorm(once) - once)) < 1e-9
