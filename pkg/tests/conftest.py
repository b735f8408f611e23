import numpy as np
import pytest

from airwriting.dataset import SyntheticSpec, generate_synthetic


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """Separable desk-scale corpus: 4 subjects x 2 reps x 26 letters at 500 Hz."""
    root = tmp_path_factory.mktemp("corpus")
    spec = SyntheticSpec(
        n_subjects=4, n_repetitions=2, sample_rate_hz=500.0,
        duration_range_s=(0.8, 1.3), class_separability=1.0, seed=11)
    manifest = generate_synthetic(spec, root)
    return root, manifest


def scale_relative(actual, expected):
    """Max absolute difference normalized by the largest expected magnitude."""
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    return float(np.max(np.abs(actual - expected)) / max(np.max(np.abs(expected)), 1e-300))
