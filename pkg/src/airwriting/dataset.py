"""On-disk dataset model: manifests, trial files, corpus statistics,
and a seeded synthetic corpus generator for desk-scale testing.

A dataset is a JSON manifest plus one binary file per trial.  Trial files
carry a fixed little-endian header (magic ``MYOS``) followed by
channel-major float32 samples, so loads are bit-exact round-trips of what
the generator wrote.
"""

import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    CorruptFile,
    EmptyDataset,
    IoError,
    MissingFile,
    NonFiniteData,
    ParseError,
    SchemaViolation,
)

LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
N_CLASSES = len(LETTERS)

TRIAL_MAGIC = b"MYOS"
TRIAL_VERSION = 1
_TRIAL_HEAD = struct.Struct("<HHQd")  # version, n_channels, n_samples, sample_rate_hz


@dataclass(frozen=True)
class TrialRecord:
    subject_id: str
    letter: str
    repetition: int
    sample_rate_hz: float
    n_channels: int
    data_path: str

    @property
    def key(self):
        return (self.subject_id, self.letter, self.repetition)

    @property
    def label(self) -> int:
        return LETTERS.index(self.letter)


@dataclass(frozen=True)
class Trial:
    record: TrialRecord
    samples: np.ndarray  # (n_channels, n_samples) float64

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.record.sample_rate_hz


@dataclass
class DatasetManifest:
    version: int
    root: Path
    subjects: list
    trials: list  # of TrialRecord

    def data_file(self, record: TrialRecord) -> Path:
        return self.root / record.data_path


@dataclass
class DurationStats:
    mean_s: float
    median_s: float
    p999_s: float
    bin_edges: np.ndarray
    counts: np.ndarray


@dataclass(frozen=True)
class SyntheticSpec:
    n_subjects: int
    n_repetitions: int
    sample_rate_hz: float = 2000.0
    duration_range_s: tuple = (1.0, 3.0)
    n_channels: int = 5
    class_separability: float = 1.0
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.duration_range_s
        if not (0 < lo <= hi):
            raise ValueError("duration_range_s must satisfy 0 < min <= max")
        if self.n_subjects < 1 or self.n_repetitions < 1 or self.n_channels < 1:
            raise ValueError("counts must be positive")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        if not 0.0 <= self.class_separability <= 1.0:
            raise ValueError("class_separability must be in [0, 1]")


# -- trial files ---------------------------------------------------------------


def write_trial_file(path, samples, sample_rate_hz: float) -> None:
    """Write channel-major float32 samples under the MYOS header."""
    arr = np.ascontiguousarray(samples, dtype="<f4")
    if arr.ndim != 2:
        raise IoError("trial samples must be a (channels, samples) matrix")
    n_channels, n_samples = arr.shape
    with open(path, "wb") as fh:
        fh.write(TRIAL_MAGIC)
        fh.write(_TRIAL_HEAD.pack(TRIAL_VERSION, n_channels, n_samples, sample_rate_hz))
        fh.write(arr.tobytes(order="C"))


def read_trial_header(path):
    """Return (n_channels, n_samples, sample_rate_hz) without reading payload."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        head = fh.read(_TRIAL_HEAD.size)
    if magic != TRIAL_MAGIC:
        raise CorruptFile(f"{path}: bad magic {magic!r}")
    if len(head) != _TRIAL_HEAD.size:
        raise CorruptFile(f"{path}: truncated header")
    version, n_channels, n_samples, rate = _TRIAL_HEAD.unpack(head)
    if version != TRIAL_VERSION:
        raise CorruptFile(f"{path}: unsupported trial file version {version}")
    if n_samples < 2:
        raise CorruptFile(f"{path}: trials must hold at least 2 samples")
    return n_channels, n_samples, rate


def load_trial(manifest: DatasetManifest, record: TrialRecord) -> Trial:
    """Load one trial, checking the header against the manifest record."""
    path = manifest.data_file(record)
    if not path.is_file():
        raise MissingFile(str(path))
    n_channels, n_samples, rate = read_trial_header(path)
    if n_channels != record.n_channels:
        raise CorruptFile(
            f"{path}: header has {n_channels} channels, manifest says {record.n_channels}")
    payload = path.read_bytes()[4 + _TRIAL_HEAD.size:]
    expected = 4 * n_channels * n_samples
    if len(payload) != expected:
        raise CorruptFile(f"{path}: payload holds {len(payload)} bytes, header implies {expected}")
    data = np.frombuffer(payload, dtype="<f4").reshape(n_channels, n_samples).astype(float)
    if not np.all(np.isfinite(data)):
        raise NonFiniteData(f"{path}: non-finite samples")
    return Trial(record=record, samples=data)


# -- manifest ------------------------------------------------------------------


def validate_manifest(manifest: DatasetManifest) -> None:
    """Enforce the manifest invariants (no file-existence checks)."""
    subjects = set(manifest.subjects)
    if len(subjects) != len(manifest.subjects):
        raise SchemaViolation("duplicate subject ids")
    seen = set()
    for rec in manifest.trials:
        if len(rec.letter) != 1 or rec.letter not in LETTERS:
            raise SchemaViolation(f"bad letter {rec.letter!r} for {rec.subject_id}")
        if not isinstance(rec.repetition, int) or rec.repetition < 0:
            raise SchemaViolation(f"bad repetition {rec.repetition!r}")
        if rec.sample_rate_hz <= 0:
            raise SchemaViolation(f"bad sample rate {rec.sample_rate_hz}")
        if rec.n_channels < 1:
            raise SchemaViolation(f"bad channel count {rec.n_channels}")
        if rec.subject_id not in subjects:
            raise SchemaViolation(f"unknown subject {rec.subject_id!r}")
        if rec.key in seen:
            raise SchemaViolation(f"duplicate trial {rec.key}")
        seen.add(rec.key)


def load_manifest(path) -> DatasetManifest:
    """Parse and validate a manifest; every referenced data file must exist."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(str(path))
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    try:
        root = Path(doc["root"])
        if not root.is_absolute():
            root = path.parent / root
        trials = [
            TrialRecord(
                subject_id=str(t["subject_id"]),
                letter=str(t["letter"]),
                repetition=int(t["repetition"]),
                sample_rate_hz=float(t["sample_rate_hz"]),
                n_channels=int(t["n_channels"]),
                data_path=str(t["data_path"]),
            )
            for t in doc["trials"]
        ]
        manifest = DatasetManifest(
            version=int(doc["version"]),
            root=root,
            subjects=[str(s) for s in doc["subjects"]],
            trials=trials,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: malformed manifest ({exc})") from exc
    validate_manifest(manifest)
    for rec in manifest.trials:
        if not manifest.data_file(rec).is_file():
            raise MissingFile(str(manifest.data_file(rec)))
    return manifest


def save_manifest(manifest: DatasetManifest, path) -> None:
    doc = {
        "version": manifest.version,
        "root": ".",
        "subjects": list(manifest.subjects),
        "trials": [
            {
                "subject_id": r.subject_id,
                "letter": r.letter,
                "repetition": r.repetition,
                "sample_rate_hz": r.sample_rate_hz,
                "n_channels": r.n_channels,
                "data_path": r.data_path,
            }
            for r in manifest.trials
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


# -- corpus statistics ---------------------------------------------------------


def duration_stats_from_values(durations, n_bins: int = 50) -> DurationStats:
    """Stats over raw duration values.

    Median is the lower median; the 99.9th percentile is nearest-rank
    (index ceil(0.999*n) - 1 of the ascending sort).  Histogram spans
    [0, max] with uniform bins.
    """
    durations = np.sort(np.asarray(durations, dtype=float))
    if len(durations) == 0:
        raise EmptyDataset("no durations")
    n = len(durations)
    p999_idx = max(0, math.ceil(0.999 * n) - 1)
    counts, edges = np.histogram(durations, bins=n_bins, range=(0.0, float(durations[-1])))
    return DurationStats(
        mean_s=float(durations.mean()),
        median_s=float(durations[(n - 1) // 2]),
        p999_s=float(durations[p999_idx]),
        bin_edges=edges,
        counts=counts,
    )


def dataset_stats(manifest: DatasetManifest, n_bins: int = 50) -> DurationStats:
    """Duration statistics over every trial in the manifest."""
    if not manifest.trials:
        raise EmptyDataset("manifest lists no trials")
    durations = []
    for rec in manifest.trials:
        path = manifest.data_file(rec)
        if not path.is_file():
            raise MissingFile(str(path))
        _, n_samples, rate = read_trial_header(path)
        durations.append(n_samples / rate)
    return duration_stats_from_values(durations, n_bins)


# -- synthetic corpus ----------------------------------------------------------
#
# Class identity is encoded as per-channel burst envelopes that modulate
# white noise: every implemented feature is an amplitude statistic, so the
# learnable signal survives windowing and per-channel z-normalization.


def _burst_params(rng, n_bursts=3):
    return (
        rng.uniform(0.08, 0.92, n_bursts),   # centers (normalized phase)
        rng.uniform(0.04, 0.12, n_bursts),   # widths
        rng.uniform(0.6, 1.6, n_bursts),     # amplitudes
    )


def _eval_bursts(params, phase):
    centers, widths, amps = params
    env = np.zeros_like(phase)
    for c, w, a in zip(centers, widths, amps):
        env += a * np.exp(-0.5 * ((phase - c) / w) ** 2)
    return env


def generate_synthetic(spec: SyntheticSpec, out_dir) -> DatasetManifest:
    """Write a labeled synthetic corpus (manifest + trial files) under out_dir.

    Deterministic for a fixed seed.  class_separability blends each class
    template against one shared template: 0 makes all classes identical
    (chance-level corpus), 1 keeps templates fully distinct.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sep = spec.class_separability

    class_templates = {
        (k, c): _burst_params(np.random.default_rng([spec.seed, 101, k, c]))
        for k in range(N_CLASSES)
        for c in range(spec.n_channels)
    }
    common_templates = {
        c: _burst_params(np.random.default_rng([spec.seed, 7, c]))
        for c in range(spec.n_channels)
    }

    subjects = [f"S{i + 1:02d}" for i in range(spec.n_subjects)]
    records = []
    for si, subject in enumerate(subjects):
        subj_dir = out_dir / subject
        subj_dir.mkdir(exist_ok=True)
        subj_gain = np.random.default_rng([spec.seed, 3, si]).uniform(
            0.8, 1.2, spec.n_channels)
        for k, letter in enumerate(LETTERS):
            for rep in range(spec.n_repetitions):
                rng = np.random.default_rng([spec.seed, si, k, rep])
                duration = rng.uniform(*spec.duration_range_s)
                n = max(2, int(np.floor(duration * spec.sample_rate_hz + 0.5)))
                gain = rng.uniform(0.85, 1.15)
                phase = np.linspace(0.0, 1.0, n)
                data = np.empty((spec.n_channels, n))
                for c in range(spec.n_channels):
                    envelope = 0.05 + (
                        (1.0 - sep) * _eval_bursts(common_templates[c], phase)
                        + sep * _eval_bursts(class_templates[(k, c)], phase)
                    )
                    data[c] = gain * subj_gain[c] * envelope * rng.standard_normal(n)
                rel = f"{subject}/{letter}_{rep}.myos"
                try:
                    write_trial_file(out_dir / rel, data, spec.sample_rate_hz)
                except OSError as exc:
                    raise IoError(f"{out_dir / rel}: {exc}") from exc
                records.append(
                    TrialRecord(
                        subject_id=subject,
                        letter=letter,
                        repetition=rep,
                        sample_rate_hz=spec.sample_rate_hz,
                        n_channels=spec.n_channels,
                        data_path=rel,
                    ))
    manifest = DatasetManifest(version=1, root=out_dir, subjects=subjects, trials=records)
    save_manifest(manifest, out_dir / "manifest.json")
    return manifest
