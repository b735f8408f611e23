"""Sliding-window time-domain envelopes and per-channel z-normalization.

Eight windowed amplitude statistics: mean absolute value, energy, variance,
RMS, the third/fourth/fifth absolute temporal moments, and the log detector
(a geometric mean of rectified amplitude).  All are nonnegative and carry
no sign information, so feature(x) == feature(-x).
"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import SignalTooShort
from .resample import FixedTrial, round_half_away

ENVELOPE_KINDS = ("mav", "energy", "var", "rms", "tm3", "tm4", "tm5", "logd")

LOG_EPS = 1e-12  # rectified-amplitude clamp for the log detector
STD_EPS = 1e-12  # degenerate-channel guard for z-normalization


@dataclass(frozen=True)
class WindowPlan:
    window_len_samples: int
    overlap_fraction: float = 0.5

    def __post_init__(self):
        if self.window_len_samples < 2:
            raise ValueError("window must hold at least 2 samples")
        if not 0.0 <= self.overlap_fraction < 1.0:
            raise ValueError("overlap_fraction must be in [0, 1)")

    @property
    def hop(self) -> int:
        return max(1, round_half_away(self.window_len_samples * (1.0 - self.overlap_fraction)))

    def n_frames(self, n_samples: int) -> int:
        if n_samples < self.window_len_samples:
            raise SignalTooShort(
                f"signal of {n_samples} samples is shorter than window {self.window_len_samples}")
        return (n_samples - self.window_len_samples) // self.hop + 1


@dataclass(frozen=True)
class Envelope:
    values: np.ndarray  # (n_channels, n_frames)
    plan: WindowPlan
    kind: str

    @property
    def n_frames(self) -> int:
        return self.values.shape[1]


def segment(channel, plan: WindowPlan) -> np.ndarray:
    """Frame a channel into overlapping windows, dropping the tail remainder.

    Returns a (n_frames, W) view; frame i covers samples [i*hop, i*hop + W).
    """
    x = np.asarray(channel, dtype=float)
    plan.n_frames(len(x))  # raises SignalTooShort
    return sliding_window_view(x, plan.window_len_samples)[::plan.hop]


def _feature_of_frames(frames, kind, zero_mean_var=True):
    """Reduce a (n_frames, W) matrix to one value per frame."""
    w = frames.shape[1]
    if kind == "mav":
        return np.abs(frames).mean(axis=1)
    if kind == "energy":
        return (frames ** 2).mean(axis=1)
    if kind == "var":
        mu = 0.0 if zero_mean_var else frames.mean(axis=1, keepdims=True)
        return ((frames - mu) ** 2).sum(axis=1) / (w - 1)
    if kind == "rms":
        return np.sqrt((frames ** 2).mean(axis=1))
    if kind == "tm3":
        return (np.abs(frames) ** 3).mean(axis=1)
    if kind == "tm4":
        return (frames ** 4).mean(axis=1)
    if kind == "tm5":
        return (np.abs(frames) ** 5).mean(axis=1)
    if kind == "logd":
        return np.exp(np.log(np.maximum(np.abs(frames), LOG_EPS)).mean(axis=1))
    raise ValueError(f"unknown envelope kind {kind!r}")


def envelope_feature(window, kind: str, zero_mean_var: bool = True) -> float:
    """One feature value for a single window."""
    x = np.asarray(window, dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise ValueError("window must be a 1-D sequence of at least 2 samples")
    return float(_feature_of_frames(x[None, :], kind, zero_mean_var)[0])


def envelope_matrix(samples, plan: WindowPlan, kind: str, zero_mean_var: bool = True) -> np.ndarray:
    """(n_channels, n_frames) envelope of a (n_channels, N) signal matrix."""
    data = np.asarray(samples, dtype=float)
    return np.stack([
        _feature_of_frames(segment(data[ch], plan), kind, zero_mean_var)
        for ch in range(data.shape[0])
    ])


def compute_envelope(trial: FixedTrial, plan: WindowPlan, kind: str,
                     zero_mean_var: bool = True) -> Envelope:
    if kind not in ENVELOPE_KINDS:
        raise ValueError(f"unknown envelope kind {kind!r}")
    return Envelope(values=envelope_matrix(trial.samples, plan, kind, zero_mean_var),
                    plan=plan, kind=kind)


def znorm(values) -> np.ndarray:
    """Zero-mean, unit-variance scaling of each row (population std).

    Rows with std below the degeneracy guard come back as zeros.
    """
    m = np.asarray(values, dtype=float)
    mean = m.mean(axis=1, keepdims=True)
    std = m.std(axis=1, keepdims=True)
    out = np.zeros_like(m)
    ok = std[:, 0] >= STD_EPS
    out[ok] = (m[ok] - mean[ok]) / std[ok]
    return out
