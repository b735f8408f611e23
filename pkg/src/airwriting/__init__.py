"""sEMG airwriting recognition pipeline.

Dataset model and synthetic corpora, fixed-length resampling, time-domain
envelopes, STFT/CWT magnitude images, cross-validation splits, a baseline
classifier with the full training protocol, significance tests, and a
bit-exact tensor export format for downstream deep-model training.
"""

from .classifier import (
    BaselineModel,
    ConfusionMatrix,
    TrainConfig,
    confusion_matrix,
    predict,
    top_confusable_pairs,
    train_baseline,
)
from .dataset import (
    DatasetManifest,
    DurationStats,
    SyntheticSpec,
    Trial,
    TrialRecord,
    dataset_stats,
    generate_synthetic,
    load_manifest,
    load_trial,
)
from .envelopes import ENVELOPE_KINDS, Envelope, WindowPlan, compute_envelope, envelope_feature, segment, znorm
from .pipeline import RunConfig, run_eval, run_extract
from .resample import FixedTrial, ResampleSpec, fit_length, interpolate
from .splits import SplitAssignment, make_folds
from .stats import StatTestResult, betainc, one_way_anova, t_test_one_tailed
from .tensorfile import read_tensor, write_tensor
from .timefreq import (
    CwtConfig,
    Scalogram,
    Spectrogram,
    StftConfig,
    cwt_magnitude,
    hann_window,
    morlet,
    stft_magnitude,
)

__version__ = "0.1.0"
