"""Fixed-length conditioning of raw trials.

Signals longer than the target keep their first N samples; shorter signals
are evaluated at N query times linearly spaced over the original support
using one of four interpolators: nearest neighbor, piecewise linear, a
quadratic spline with knots at the midpoints between samples (natural end
condition), or a not-a-knot cubic spline.  Knots sit at integer sample
indices 0..l-1, so all spline systems are over a uniform grid.
"""

from dataclasses import dataclass

import numpy as np

from .dataset import Trial, TrialRecord
from .errors import DegenerateSignal, InsufficientPoints, OutOfDomain

METHODS = ("nearest", "linear", "quadratic", "cubic")

_MIN_POINTS = {"nearest": 2, "linear": 2, "quadratic": 3, "cubic": 4}


def round_half_away(x: float) -> int:
    """Round half away from zero (4000.5 -> 4001, -0.5 -> -1)."""
    return int(np.floor(x + 0.5)) if x >= 0 else int(np.ceil(x - 0.5))


@dataclass(frozen=True)
class ResampleSpec:
    target_length_s: float = 4.0
    method: str = "cubic"

    def __post_init__(self):
        if self.target_length_s <= 0:
            raise ValueError("target_length_s must be positive")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")

    def target_samples(self, sample_rate_hz: float) -> int:
        return round_half_away(self.target_length_s * sample_rate_hz)


@dataclass(frozen=True)
class FixedTrial:
    record: TrialRecord
    samples: np.ndarray  # (n_channels, N)

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]


def _solve_tridiag(lower, diag, upper, rhs):
    """Thomas elimination for a tridiagonal system (no pivoting).

    All systems solved here are strictly diagonally dominant.
    """
    n = len(diag)
    d = np.array(diag, dtype=float)
    r = np.array(rhs, dtype=float)
    for i in range(1, n):
        w = lower[i - 1] / d[i - 1]
        d[i] -= w * upper[i - 1]
        r[i] -= w * r[i - 1]
    x = np.empty(n)
    x[-1] = r[-1] / d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = (r[i] - upper[i] * x[i + 1]) / d[i]
    return x


def _cubic_moments(y):
    """Second derivatives of the not-a-knot cubic spline on unit-spaced knots.

    Not-a-knot forces S''' continuous across the first and last interior
    knots; on a uniform grid that pins M[1] and M[n-2] directly and leaves a
    plain tridiagonal system for the rest.
    """
    n = len(y)
    r = 6.0 * (y[2:] - 2.0 * y[1:-1] + y[:-2])  # r[i-1] pairs with knot i
    m = np.empty(n)
    m[1] = r[0] / 6.0
    m[n - 2] = r[n - 3] / 6.0
    k = n - 4  # unknowns M[2..n-3]
    if k > 0:
        rhs = r[1:-1].copy()
        rhs[0] -= m[1]
        rhs[-1] -= m[n - 2]
        inner = _solve_tridiag(np.ones(k - 1), np.full(k, 4.0), np.ones(k - 1), rhs)
        m[2:n - 2] = inner
    m[0] = 2.0 * m[1] - m[2]
    m[n - 1] = 2.0 * m[n - 2] - m[n - 3]
    return m


def _quadratic_coeffs(y):
    """Slopes and curvatures of the midpoint-knot quadratic spline.

    Piece i covers [i-1/2, i+1/2] (clamped at the ends) and is
    ``y[i] + d[i]*(x-i) + c[i]*(x-i)^2``.  Value and slope continuity at
    the midpoints plus natural ends (c[0] = c[n-1] = 0) reduce to a
    diagonally dominant tridiagonal system in the slopes d.
    """
    n = len(y)
    delta = np.diff(y)
    diag = np.full(n, 6.0)
    diag[0] = diag[-1] = 3.0
    rhs = np.empty(n)
    rhs[0] = 4.0 * delta[0]
    rhs[-1] = 4.0 * delta[-1]
    rhs[1:-1] = 4.0 * (delta[:-1] + delta[1:])
    d = _solve_tridiag(np.ones(n - 1), diag, np.ones(n - 1), rhs)
    c = np.zeros(n)
    c[1:-1] = (4.0 * delta[1:] - 3.0 * d[1:-1] - d[2:]) / 2.0
    return d, c


def interpolate(values, query_times, method: str) -> np.ndarray:
    """Evaluate a sampled sequence at arbitrary times in [0, l-1]."""
    y = np.asarray(values, dtype=float)
    q = np.atleast_1d(np.asarray(query_times, dtype=float))
    n = len(y)
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if n < _MIN_POINTS[method]:
        raise InsufficientPoints(f"{method} interpolation needs >= {_MIN_POINTS[method]} points, got {n}")
    if q.size and (q.min() < 0.0 or q.max() > n - 1):
        raise OutOfDomain(f"queries must lie in [0, {n - 1}]")

    if method == "nearest":
        # exact midpoints round toward the later sample
        idx = np.clip(np.floor(q + 0.5).astype(int), 0, n - 1)
        return y[idx]

    if method == "linear":
        i = np.clip(np.floor(q).astype(int), 0, n - 2)
        t = q - i
        return y[i] * (1.0 - t) + y[i + 1] * t

    if method == "quadratic":
        d, c = _quadratic_coeffs(y)
        i = np.clip(np.floor(q + 0.5).astype(int), 0, n - 1)
        u = q - i
        return y[i] + d[i] * u + c[i] * u * u

    m = _cubic_moments(y)
    i = np.clip(np.floor(q).astype(int), 0, n - 2)
    u = q - i
    b = (y[i + 1] - y[i]) - (2.0 * m[i] + m[i + 1]) / 6.0
    return y[i] + b * u + 0.5 * m[i] * u * u + (m[i + 1] - m[i]) / 6.0 * u ** 3


def fit_length(trial: Trial, spec: ResampleSpec) -> FixedTrial:
    """Force a trial to exactly N = round(L * fs) samples per channel.

    Longer signals are head-truncated (the writing onset carries the letter
    information); shorter ones are interpolated at N query times spanning
    the original support.
    """
    target = spec.target_samples(trial.record.sample_rate_hz)
    if target < 2:
        raise DegenerateSignal(f"target length {target} is too short")
    data = trial.samples
    n = data.shape[1]
    if n >= target:
        return FixedTrial(record=trial.record, samples=np.array(data[:, :target]))
    if n < 2:
        raise DegenerateSignal("cannot interpolate a signal with fewer than 2 samples")
    queries = np.linspace(0.0, n - 1, target)
    out = np.empty((data.shape[0], target))
    for ch in range(data.shape[0]):
        out[ch] = interpolate(data[ch], queries, spec.method)
    return FixedTrial(record=trial.record, samples=out)
