"""Time-frequency magnitude images: one-sided STFT and Morlet scalograms.

The STFT uses a periodic Hann window with 50% overlap and an FFT length
equal to the window.  The scalogram takes inner products with an analytic
Morlet wavelet on a log-spaced scale grid, evaluated on a decimated
translation grid with support truncated at a fixed multiple of the scale.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import SignalTooShort
from .resample import FixedTrial

MORLET_NORM = np.pi ** -0.25


def hann_window(length: int) -> np.ndarray:
    """Periodic Hann: w[n] = 0.5*(1 - cos(2*pi*n/W)), n = 0..W-1."""
    if length < 2:
        raise ValueError("window length must be >= 2")
    n = np.arange(length)
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * n / length))


@dataclass(frozen=True)
class StftConfig:
    window_len_samples: int = 200

    def __post_init__(self):
        w = self.window_len_samples
        if w < 4 or w % 2:
            raise ValueError("STFT window length must be even and >= 4")

    @property
    def hop(self) -> int:
        return self.window_len_samples // 2

    @property
    def n_bins(self) -> int:
        return self.window_len_samples // 2 + 1

    def n_frames(self, n_samples: int) -> int:
        if n_samples < self.window_len_samples:
            raise SignalTooShort(
                f"signal of {n_samples} samples is shorter than window {self.window_len_samples}")
        return (n_samples - self.window_len_samples) // self.hop + 1


@dataclass(frozen=True)
class Spectrogram:
    values: np.ndarray  # (n_channels, n_bins, n_frames), magnitudes
    config: StftConfig


def stft_magnitude(channel, config: StftConfig) -> np.ndarray:
    """One-sided STFT magnitude, shape (W/2 + 1, n_frames)."""
    x = np.asarray(channel, dtype=float)
    w = config.window_len_samples
    n_frames = config.n_frames(len(x))
    starts = np.arange(n_frames) * config.hop
    frames = np.stack([x[s:s + w] for s in starts]) * hann_window(w)
    return np.abs(np.fft.rfft(frames, n=w, axis=1)).T


def stft_trial(trial: FixedTrial, config: StftConfig) -> Spectrogram:
    values = np.stack([stft_magnitude(ch, config) for ch in trial.samples])
    return Spectrogram(values=values, config=config)


@dataclass(frozen=True)
class CwtConfig:
    n_scales: int = 60
    omega0: float = 6.0
    freq_range_hz: Optional[tuple] = None  # defaults to (4, min(500, fs/2))
    time_decimation: int = 100
    support_radius: float = 4.0

    def __post_init__(self):
        if self.n_scales < 1 or self.time_decimation < 1:
            raise ValueError("n_scales and time_decimation must be positive")
        if self.omega0 <= 0 or self.support_radius <= 0:
            raise ValueError("omega0 and support_radius must be positive")

    def frequencies(self, sample_rate_hz: float) -> np.ndarray:
        """Pseudo-frequency grid, log-spaced, descending from f_max to f_min."""
        if self.freq_range_hz is None:
            f_min, f_max = 4.0, min(500.0, sample_rate_hz / 2.0)
        else:
            f_min, f_max = self.freq_range_hz
        if not 0 < f_min < f_max <= sample_rate_hz / 2.0:
            raise ValueError("need 0 < f_min < f_max <= fs/2")
        return np.geomspace(f_max, f_min, self.n_scales)

    def scales(self, sample_rate_hz: float) -> np.ndarray:
        """Strictly increasing scale grid, in samples."""
        return self.omega0 * sample_rate_hz / (2.0 * np.pi * self.frequencies(sample_rate_hz))

    def frame_times(self, n_samples: int) -> np.ndarray:
        return np.arange(0, n_samples, self.time_decimation)

    def interior_frames(self, n_samples: int, sample_rate_hz: float) -> np.ndarray:
        """Mask of frames whose largest-scale support is fully inside the signal."""
        reach = int(np.floor(self.support_radius * self.scales(sample_rate_hz).max()))
        taus = self.frame_times(n_samples)
        return (taus - reach >= 0) & (taus + reach <= n_samples - 1)


@dataclass(frozen=True)
class Scalogram:
    values: np.ndarray  # (n_channels, n_scales, n_frames), magnitudes
    config: CwtConfig
    scales: np.ndarray


def morlet(t, sigma: float, omega0: float = 6.0, tau: float = 0.0) -> np.ndarray:
    """Scaled/translated analytic Morlet wavelet, unit-energy normalized."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    u = (np.asarray(t, dtype=float) - tau) / sigma
    return MORLET_NORM / np.sqrt(sigma) * np.exp(1j * omega0 * u) * np.exp(-0.5 * u * u)


def cwt_magnitude(channel, config: CwtConfig, sample_rate_hz: float) -> np.ndarray:
    """Morlet scalogram magnitude, shape (n_scales, n_frames).

    Each coefficient sums y[t] * conj(wavelet) over |t - tau| <= radius*sigma
    (clipped at the signal edges) and multiplies by the sample period.
    """
    x = np.asarray(channel, dtype=float)
    n = len(x)
    if n < 2:
        raise SignalTooShort("CWT needs at least 2 samples")
    dt = 1.0 / sample_rate_hz
    taus = config.frame_times(n)
    sigmas = config.scales(sample_rate_hz)
    out = np.empty((len(sigmas), len(taus)))
    for j, sigma in enumerate(sigmas):
        reach = int(np.floor(config.support_radius * sigma))
        offsets = np.arange(-reach, reach + 1)
        psi_conj = np.conj(morlet(offsets, sigma, config.omega0))
        for i, tau in enumerate(taus):
            lo = max(0, tau - reach)
            hi = min(n - 1, tau + reach)
            window = x[lo:hi + 1]
            kernel = psi_conj[lo - (tau - reach): hi - (tau - reach) + 1]
            out[j, i] = np.abs(np.dot(window, kernel)) * dt
    return out


def cwt_trial(trial: FixedTrial, config: CwtConfig) -> Scalogram:
    fs = trial.record.sample_rate_hz
    values = np.stack([cwt_magnitude(ch, config, fs) for ch in trial.samples])
    return Scalogram(values=values, config=config, scales=config.scales(fs))
