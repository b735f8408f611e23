"""End-to-end orchestration: feature extraction to tensor files, per-fold
training/evaluation, and comparison reports.

Extraction runs resample -> feature image -> per-channel z-normalization
for every trial and stacks the results into one float32 tensor, with a
parallel label tensor, a fold-assignment table in tensor row order, and a
provenance file recording every parameter.  Identical configurations
produce byte-identical outputs.
"""

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import classifier, splits, stats, tensorfile
from .dataset import LETTERS, load_manifest, load_trial
from .envelopes import ENVELOPE_KINDS, WindowPlan, envelope_matrix, znorm
from .errors import EmptyDataset, MissingTensors, NoErrors, PartialFailure
from .resample import ResampleSpec, fit_length
from .timefreq import CwtConfig, StftConfig, cwt_magnitude, stft_magnitude

REPORT_HEADER = "airwriting-report v1"
COMPARISON_HEADER = "airwriting-comparison v1"
FEATURES = ENVELOPE_KINDS + ("stft", "cwt")


@dataclass
class RunConfig:
    manifest_path: str
    out_dir: str
    feature: str = "mav"
    scheme: str = "user_dependent"
    seed: int = 0
    n_folds: int = 5
    resample: ResampleSpec = field(default_factory=ResampleSpec)
    window: Optional[WindowPlan] = None
    stft: Optional[StftConfig] = None
    cwt: Optional[CwtConfig] = None
    zero_mean_var: bool = True
    train: classifier.TrainConfig = field(default_factory=classifier.TrainConfig)
    threads: int = 1

    def __post_init__(self):
        if self.feature not in FEATURES:
            raise ValueError(f"unknown feature {self.feature!r}")
        if self.feature in ENVELOPE_KINDS:
            if self.window is None:
                self.window = WindowPlan(window_len_samples=250)
            if self.stft is not None or self.cwt is not None:
                raise ValueError("time-frequency configs are not valid for envelope features")
        elif self.feature == "stft":
            if self.stft is None:
                self.stft = StftConfig()
            if self.window is not None or self.cwt is not None:
                raise ValueError("stft runs take only an StftConfig")
        else:
            if self.cwt is None:
                self.cwt = CwtConfig()
            if self.window is not None or self.stft is not None:
                raise ValueError("cwt runs take only a CwtConfig")

    def params(self) -> dict:
        doc = {
            "feature": self.feature,
            "scheme": self.scheme,
            "seed": self.seed,
            "n_folds": self.n_folds,
            "resample": {"target_length_s": self.resample.target_length_s,
                         "method": self.resample.method},
            "zero_mean_var": self.zero_mean_var,
            "train": {
                "batch_size": self.train.batch_size,
                "learning_rate": self.train.learning_rate,
                "beta1": self.train.beta1,
                "beta2": self.train.beta2,
                "epsilon": self.train.epsilon,
                "val_fraction": self.train.val_fraction,
                "patience": self.train.patience,
                "max_epochs": self.train.max_epochs,
                "seed": self.train.seed,
            },
        }
        if self.window is not None:
            doc["window"] = {"window_len_samples": self.window.window_len_samples,
                             "overlap_fraction": self.window.overlap_fraction}
        if self.stft is not None:
            doc["stft"] = {"window_len_samples": self.stft.window_len_samples}
        if self.cwt is not None:
            doc["cwt"] = {
                "n_scales": self.cwt.n_scales,
                "omega0": self.cwt.omega0,
                "freq_range_hz": list(self.cwt.freq_range_hz) if self.cwt.freq_range_hz else None,
                "time_decimation": self.cwt.time_decimation,
                "support_radius": self.cwt.support_radius,
            }
        return doc


def trial_features(trial, config: RunConfig) -> np.ndarray:
    """Feature image for one trial: resampled, transformed, z-normalized."""
    fixed = fit_length(trial, config.resample)
    if config.feature in ENVELOPE_KINDS:
        image = envelope_matrix(fixed.samples, config.window, config.feature,
                                config.zero_mean_var)
    elif config.feature == "stft":
        image = np.stack([stft_magnitude(ch, config.stft) for ch in fixed.samples])
    else:
        fs = trial.record.sample_rate_hz
        image = np.stack([cwt_magnitude(ch, config.cwt, fs) for ch in fixed.samples])
    n_channels = image.shape[0]
    normed = znorm(image.reshape(n_channels, -1)).reshape(image.shape)
    return normed.astype(np.float32)


def run_extract(config: RunConfig) -> dict:
    """Extract one tensor set; aborts (writing nothing) if any trial fails."""
    manifest = load_manifest(config.manifest_path)
    if not manifest.trials:
        raise EmptyDataset(f"{config.manifest_path} lists no trials")
    records = sorted(manifest.trials, key=lambda r: r.key)

    def worker(record):
        return trial_features(load_trial(manifest, record), config)

    results = [None] * len(records)
    failures = []
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            futures = [pool.submit(worker, rec) for rec in records]
            for i, fut in enumerate(futures):
                try:
                    results[i] = fut.result()
                except Exception as exc:  # gathered by trial index
                    failures.append((records[i].key, exc))
    else:
        for i, rec in enumerate(records):
            try:
                results[i] = worker(rec)
            except Exception as exc:
                failures.append((rec.key, exc))
    if failures:
        raise PartialFailure(failures)

    features = np.stack(results)
    labels = np.asarray([r.label for r in records], dtype=np.float32)
    assignment = splits.make_folds(manifest, config.scheme, config.seed, config.n_folds)

    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tensorfile.write_tensor(out / "features.myot", features)
    tensorfile.write_tensor(out / "labels.myot", labels)
    splits.write_fold_table(out / "folds.tsv", records, assignment)
    provenance = config.params()
    provenance["kind"] = "extract"
    provenance["manifest"] = str(config.manifest_path)
    provenance["dims"] = list(features.shape)
    provenance["n_folds_effective"] = assignment.n_folds
    (out / "run.json").write_text(
        json.dumps(provenance, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return {
        "features": out / "features.myot",
        "labels": out / "labels.myot",
        "folds": out / "folds.tsv",
        "run": out / "run.json",
    }


def _load_tensors(tensors_dir):
    tensors_dir = Path(tensors_dir)
    for name in ("features.myot", "labels.myot", "folds.tsv", "run.json"):
        if not (tensors_dir / name).is_file():
            raise MissingTensors(f"{tensors_dir / name} is missing; run extract first")
    features = tensorfile.read_tensor(tensors_dir / "features.myot").astype(float)
    labels = tensorfile.read_tensor(tensors_dir / "labels.myot").astype(int)
    keys, folds = splits.read_fold_table(tensors_dir / "folds.tsv")
    if len(keys) != len(features) or len(labels) != len(features):
        raise MissingTensors("tensor row count disagrees with fold table")
    run_params = json.loads((tensors_dir / "run.json").read_text(encoding="utf-8"))
    return features, labels, np.asarray(folds), run_params


def train_fold(tensors_dir, fold: int, train_config: classifier.TrainConfig,
               out_dir=None):
    """Train the baseline on one fold's training rows; returns model + summary."""
    features, labels, folds, run_params = _load_tensors(tensors_dir)
    flat = features.reshape(len(features), -1)
    train_rows = folds != fold
    test_rows = ~train_rows
    if not test_rows.any():
        raise MissingTensors(f"fold {fold} has no test rows")
    model = classifier.train_baseline(
        flat[train_rows], labels[train_rows], train_config,
        feature_spec=json.dumps(run_params, sort_keys=True))
    predictions = classifier.predict(model, flat[test_rows])
    cm = classifier.confusion_matrix(labels[test_rows], predictions)
    summary = {
        "fold": fold,
        "test_accuracy": cm.accuracy,
        "n_train": int(train_rows.sum()),
        "n_test": int(test_rows.sum()),
        "best_epoch": model.history["best_epoch"],
        "epochs_run": model.history["epochs_run"],
    }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        tensorfile.write_tensor(out / "weights.myot", model.weights.astype(np.float32))
        tensorfile.write_tensor(out / "bias.myot", model.bias.astype(np.float32))
        (out / "model.json").write_text(
            json.dumps({"summary": summary, "params": run_params}, indent=1, sort_keys=True)
            + "\n", encoding="utf-8")
    return model, cm, summary


def format_mean_std(mean: float, std: float) -> str:
    return f"{mean:.2f} ± {std:.3f}"


def render_report(result: dict) -> str:
    """Serialize an evaluation result in the shared report schema."""
    lines = [
        REPORT_HEADER,
        f"scheme: {result['scheme']}",
        f"feature: {result['feature']}",
        f"model: {result['model']}",
        f"folds: {len(result['fold_accuracies'])}",
        "fold_accuracies: " + " ".join(f"{a:.6f}" for a in result["fold_accuracies"]),
        f"accuracy_mean: {result['accuracy_mean']:.6f}",
        f"accuracy_std: {result['accuracy_std']:.6f}",
        "accuracy_summary: " + format_mean_std(result["accuracy_mean"], result["accuracy_std"]),
        "confusion_rows: 26",
    ]
    for row in result["confusion"]:
        lines.append(" ".join(str(int(v)) for v in row))
    lines.append(f"top_pairs: {len(result['top_pairs'])}")
    for pair, pct in result["top_pairs"]:
        lines.append(f"{pair} {pct:.2f}%")
    lines.append("params: " + json.dumps(result["params"], sort_keys=True))
    return "\n".join(lines) + "\n"


def run_eval(tensors_dir, train_config: Optional[classifier.TrainConfig] = None,
             out_dir=None, model_name: str = "softmax_regression") -> dict:
    """Train and evaluate every fold; returns (and optionally writes) the report."""
    features, labels, folds, run_params = _load_tensors(tensors_dir)
    if train_config is None:
        train_config = classifier.TrainConfig(**run_params.get("train", {}))
    fold_ids = sorted(set(int(f) for f in folds))
    accuracies = []
    total_counts = np.zeros((len(LETTERS), len(LETTERS)), dtype=int)
    fold_summaries = []
    for fold in fold_ids:
        _, cm, summary = train_fold(tensors_dir, fold, train_config)
        accuracies.append(cm.accuracy)
        total_counts += cm.counts
        fold_summaries.append(summary)
    acc = np.asarray(accuracies)
    total_cm = classifier.ConfusionMatrix(counts=total_counts)
    try:
        pairs = [(f"{a},{b}", pct) for (a, b), pct in
                 classifier.top_confusable_pairs(total_cm, k=5)]
    except NoErrors:
        pairs = []  # perfect classifier: no off-diagonal mass
    params = dict(run_params)
    params["eval_train"] = {
        "batch_size": train_config.batch_size,
        "learning_rate": train_config.learning_rate,
        "val_fraction": train_config.val_fraction,
        "patience": train_config.patience,
        "max_epochs": train_config.max_epochs,
        "seed": train_config.seed,
    }
    result = {
        "kind": "eval",
        "scheme": run_params.get("scheme", "?"),
        "feature": run_params.get("feature", "?"),
        "model": model_name,
        "fold_accuracies": [float(a) for a in acc],
        "accuracy_mean": float(acc.mean()),
        "accuracy_std": float(acc.std()),  # population std across folds
        "confusion": total_counts.tolist(),
        "top_pairs": pairs,
        "fold_summaries": fold_summaries,
        "params": params,
    }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.txt").write_text(render_report(result), encoding="utf-8")
        (out / "metrics.json").write_text(
            json.dumps(result, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return result


def compare_runs(metrics_docs, paired: bool = True) -> str:
    """ANOVA plus pairwise one-tailed t-tests across evaluation runs."""
    lines = [COMPARISON_HEADER, f"runs: {len(metrics_docs)}"]
    for i, doc in enumerate(metrics_docs):
        lines.append(
            f"run {i}: feature={doc['feature']} scheme={doc['scheme']} "
            f"model={doc['model']} accuracy={format_mean_std(doc['accuracy_mean'], doc['accuracy_std'])}")
    if len(metrics_docs) >= 2:
        groups = [doc["fold_accuracies"] for doc in metrics_docs]
        anova = stats.one_way_anova(groups)
        lines.append(
            f"anova: F={anova.statistic:.6g} p={anova.p_value:.6g} "
            f"dof=({anova.dof[0]:g}, {anova.dof[1]:g})")
        mode = "paired" if paired else "welch"
        lines.append(f"pairwise_one_tailed_t_tests: {mode}")
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                try:
                    t = stats.t_test_one_tailed(groups[i], groups[j], paired=paired)
                    lines.append(
                        f"run {i} vs run {j}: t={t.statistic:.6g} p={t.p_value:.6g}")
                except Exception as exc:
                    lines.append(f"run {i} vs run {j}: {type(exc).__name__}: {exc}")
    return "\n".join(lines) + "\n"


def export_bundle(tensors_dir, out_path=None) -> dict:
    """Validate an extraction directory and write a checksummed index.

    The index is what the deep-model trainer consumes to locate tensors.
    """
    tensors_dir = Path(tensors_dir)
    features, labels, folds, run_params = _load_tensors(tensors_dir)
    files = {}
    for name in ("features.myot", "labels.myot", "folds.tsv", "run.json"):
        digest = hashlib.sha256((tensors_dir / name).read_bytes()).hexdigest()
        files[name] = {"sha256": digest, "bytes": (tensors_dir / name).stat().st_size}
    index = {
        "kind": "export",
        "files": files,
        "dims": list(features.shape),
        "n_trials": int(len(features)),
        "n_folds": int(folds.max()) + 1,
        "classes": len(LETTERS),
        "params": run_params,
    }
    if out_path is None:
        out_path = tensors_dir / "export.json"
    Path(out_path).write_text(json.dumps(index, indent=1, sort_keys=True) + "\n",
                              encoding="utf-8")
    return index
