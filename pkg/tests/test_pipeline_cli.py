import json
import subprocess
import sys

import numpy as np
import pytest

from airwriting import tensorfile
from airwriting.classifier import TrainConfig
from airwriting.dataset import LETTERS, SyntheticSpec, generate_synthetic
from airwriting.envelopes import WindowPlan
from airwriting.errors import EmptyDataset, MissingTensors, PartialFailure
from airwriting.pipeline import (
    RunConfig,
    compare_runs,
    export_bundle,
    format_mean_std,
    render_report,
    run_eval,
    run_extract,
    train_fold,
)
from airwriting.resample import ResampleSpec
from airwriting.splits import read_fold_table

CLI = [sys.executable, "-m", "airwriting.cli"]


def run_cli(*args, check=True):
    proc = subprocess.run([*CLI, *map(str, args)], capture_output=True, text=True)
    if check and proc.returncode != 0:
        raise AssertionError(f"exit {proc.returncode}: {proc.stderr}\n{proc.stdout}")
    return proc


@pytest.fixture(scope="module")
def corpus_2000(tmp_path_factory):
    """2 subjects x 2 reps at the hardware rate, for frame-arithmetic checks."""
    root = tmp_path_factory.mktemp("corpus2000")
    spec = SyntheticSpec(n_subjects=2, n_repetitions=2, sample_rate_hz=2000.0,
                         duration_range_s=(1.0, 3.0), class_separability=1.0, seed=2)
    generate_synthetic(spec, root)
    return root


def mav_config(root, out, **overrides):
    kwargs = dict(
        manifest_path=str(root / "manifest.json"),
        out_dir=str(out),
        feature="mav",
        scheme="user_dependent",
        seed=0,
        resample=ResampleSpec(target_length_s=4.0, method="cubic"),
        window=WindowPlan(window_len_samples=250),
        train=TrainConfig(seed=0),
    )
    kwargs.update(overrides)
    return RunConfig(**kwargs)


# -- extraction ----------------------------------------------------------------


def test_envelope_tensor_dims(tmp_path, corpus_2000):
    cfg = mav_config(corpus_2000, tmp_path / "t")
    run_extract(cfg)
    feats = tensorfile.read_tensor(tmp_path / "t" / "features.myot")
    assert feats.shape == (104, 5, 63)  # 2*2*26 trials, 5 channels, 63 frames
    labels = tensorfile.read_tensor(tmp_path / "t" / "labels.myot")
    assert labels.shape == (104,)
    assert sorted(set(labels.tolist())) == list(range(26))


def test_stft_tensor_dims(tmp_path, corpus_2000):
    from airwriting.timefreq import StftConfig

    cfg = mav_config(corpus_2000, tmp_path / "t", feature="stft", window=None,
                     stft=StftConfig(window_len_samples=200))
    run_extract(cfg)
    feats = tensorfile.read_tensor(tmp_path / "t" / "features.myot")
    assert feats.shape == (104, 5, 101, 79)


def test_extract_is_deterministic(tmp_path, corpus_2000):
    run_extract(mav_config(corpus_2000, tmp_path / "a"))
    run_extract(mav_config(corpus_2000, tmp_path / "b", threads=3))
    for name in ("features.myot", "labels.myot", "folds.tsv", "run.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_fold_table_rows_align_with_tensor(tmp_path, corpus_2000):
    run_extract(mav_config(corpus_2000, tmp_path / "t"))
    keys, folds = read_fold_table(tmp_path / "t" / "folds.tsv")
    labels = tensorfile.read_tensor(tmp_path / "t" / "labels.myot").astype(int)
    assert len(keys) == len(labels)
    for (subject, letter, rep), label in zip(keys, labels):
        assert LETTERS.index(letter) == label
    assert keys == sorted(keys)


def test_partial_failure_aborts(tmp_path):
    spec = SyntheticSpec(n_subjects=1, n_repetitions=1, sample_rate_hz=200.0,
                         duration_range_s=(0.5, 0.8), seed=4)
    man = generate_synthetic(spec, tmp_path / "c")
    victim = tmp_path / "c" / man.trials[5].data_path
    victim.write_bytes(victim.read_bytes()[:-4])  # truncate one payload
    cfg = mav_config(tmp_path / "c", tmp_path / "t",
                     resample=ResampleSpec(target_length_s=0.5, method="linear"),
                     window=WindowPlan(window_len_samples=20))
    with pytest.raises(PartialFailure) as err:
        run_extract(cfg)
    assert man.trials[5].key in [key for key, _ in err.value.failures]
    assert not (tmp_path / "t" / "features.myot").exists()  # nothing written


def test_empty_dataset_error(tmp_path):
    (tmp_path / "manifest.json").write_text(
        json.dumps({"version": 1, "root": ".", "subjects": [], "trials": []}))
    cfg = mav_config(tmp_path, tmp_path / "t")
    with pytest.raises(EmptyDataset):
        run_extract(cfg)


def test_missing_tensors_error(tmp_path):
    with pytest.raises(MissingTensors):
        run_eval(tmp_path)


# -- evaluation ----------------------------------------------------------------


def perfect_tensors(tmp_path, n_per_class=8):
    """Tensor set whose features are (almost) the one-hot label encoding."""
    rng = np.random.default_rng(6)
    n = 26 * n_per_class
    labels = np.repeat(np.arange(26), n_per_class)
    feats = np.eye(26)[labels] * 4.0 + 0.01 * rng.standard_normal((n, 26))
    out = tmp_path / "perfect"
    out.mkdir()
    tensorfile.write_tensor(out / "features.myot", feats.astype(np.float32))
    tensorfile.write_tensor(out / "labels.myot", labels.astype(np.float32))
    lines = ["subject_id\tletter\trepetition\tfold"]
    for i, label in enumerate(labels):
        lines.append(f"S01\t{LETTERS[label]}\t{i}\t{i % 2}")
    (out / "folds.tsv").write_text("\n".join(lines) + "\n")
    (out / "run.json").write_text(json.dumps(
        {"feature": "mav", "scheme": "user_dependent", "train": {"seed": 0}}))
    return out


def test_perfect_classifier_reports_one(tmp_path):
    out = perfect_tensors(tmp_path)
    result = run_eval(out, out_dir=tmp_path / "report")
    assert result["fold_accuracies"] == [1.0, 1.0]
    assert result["accuracy_mean"] == 1.0
    assert result["accuracy_std"] == 0.0
    assert result["top_pairs"] == []
    text = (tmp_path / "report" / "report.txt").read_text()
    assert text.startswith("airwriting-report v1\n")
    assert "accuracy_mean: 1.000000" in text
    assert "accuracy_summary: 1.00 ± 0.000" in text


def test_mean_std_formatting_example():
    accs = np.array([0.6, 0.62, 0.58, 0.61, 0.59])
    assert format_mean_std(float(accs.mean()), float(accs.std())) == "0.60 ± 0.014"


def test_report_determinism(tmp_path):
    out = perfect_tensors(tmp_path)
    a = render_report(run_eval(out))
    b = render_report(run_eval(out))
    assert a == b


def test_train_fold_writes_model(tmp_path):
    out = perfect_tensors(tmp_path)
    model, cm, summary = train_fold(out, 0, TrainConfig(seed=0), out_dir=tmp_path / "m")
    assert summary["test_accuracy"] == 1.0
    weights = tensorfile.read_tensor(tmp_path / "m" / "weights.myot")
    assert weights.shape == (26, 26)
    doc = json.loads((tmp_path / "m" / "model.json").read_text())
    assert doc["summary"]["fold"] == 0


def test_compare_runs_statistics(tmp_path):
    doc_a = {"feature": "mav", "scheme": "user_dependent", "model": "softmax_regression",
             "fold_accuracies": [0.93, 0.95, 0.94, 0.96, 0.92],
             "accuracy_mean": 0.94, "accuracy_std": 0.0141}
    doc_b = {"feature": "tm5", "scheme": "user_dependent", "model": "softmax_regression",
             "fold_accuracies": [0.70, 0.72, 0.69, 0.71, 0.68],
             "accuracy_mean": 0.70, "accuracy_std": 0.0141}
    text = compare_runs([doc_a, doc_b], paired=True)
    assert text.startswith("airwriting-comparison v1\n")
    assert "anova:" in text
    assert "run 0 vs run 1:" in text
    p = float(text.split("run 0 vs run 1: ")[1].split("p=")[1].split()[0])
    assert p < 0.01  # clearly separated accuracies


def test_export_bundle_checksums(tmp_path):
    out = perfect_tensors(tmp_path)
    index = export_bundle(out)
    assert (out / "export.json").is_file()
    assert index["dims"] == [208, 26]
    assert index["n_folds"] == 2
    import hashlib
    want = hashlib.sha256((out / "features.myot").read_bytes()).hexdigest()
    assert index["files"]["features.myot"]["sha256"] == want


# -- CLI -----------------------------------------------------------------------


def test_cli_full_chain(tmp_path):
    corpus = tmp_path / "corpus"
    run_cli("synth", "--out", corpus, "--subjects", 4, "--reps", 2, "--rate", 500,
            "--duration-min", 0.8, "--duration-max", 1.2, "--separability", 1.0,
            "--seed", 11)
    manifest = corpus / "manifest.json"
    assert manifest.is_file()

    proc = run_cli("stats", "--data", manifest)
    assert "mean_s:" in proc.stdout

    folds_tsv = tmp_path / "folds.tsv"
    proc = run_cli("split", "--data", manifest, "--scheme", "user-dependent",
                   "--out", folds_tsv)
    assert "2 folds" in proc.stdout

    tensors = tmp_path / "tensors"
    proc = run_cli("extract", "--data", manifest, "--out", tensors,
                   "--feature", "mav", "--length-s", 1.0, "--window-ms", 100,
                   "--interp", "cubic", "--scheme", "user-dependent")
    assert "extracted tensor dims" in proc.stdout
    feats = tensorfile.read_tensor(tensors / "features.myot")
    assert feats.shape[0] == 4 * 2 * 26

    proc = run_cli("train", "--tensors", tensors, "--fold", 0, "--out", tmp_path / "model")
    assert "test accuracy" in proc.stdout

    report_dir = tmp_path / "report"
    proc = run_cli("eval", "--tensors", tensors, "--out", report_dir)
    assert "airwriting-report v1" in proc.stdout
    assert (report_dir / "metrics.json").is_file()

    proc = run_cli("report", "--metrics", report_dir / "metrics.json",
                   "--metrics", report_dir / "metrics.json", "--unpaired")
    assert "airwriting-comparison v1" in proc.stdout

    proc = run_cli("export", "--tensors", tensors)
    assert "export index" in proc.stdout
    assert (tensors / "export.json").is_file()


def test_cli_usage_error_exits_1(tmp_path):
    proc = run_cli("extract", "--data", tmp_path / "nope.json", "--out", tmp_path / "t",
                   check=False)
    assert proc.returncode == 1  # neither --feature nor --tf chosen

    proc = run_cli("synth", check=False)  # missing required --out
    assert proc.returncode == 1

    proc = run_cli("bogus-command", check=False)
    assert proc.returncode == 1


def test_cli_data_error_exits_2(tmp_path):
    proc = run_cli("stats", "--data", tmp_path / "missing.json", check=False)
    assert proc.returncode == 2

    bad = tmp_path / "manifest.json"
    bad.write_text("{broken")
    proc = run_cli("stats", "--data", bad, check=False)
    assert proc.returncode == 2


def test_cli_numeric_error_exits_3(tmp_path):
    metrics = tmp_path / "m.json"
    doc = {"feature": "mav", "scheme": "user_dependent", "model": "x",
           "fold_accuracies": [0.5, 0.5, 0.5], "accuracy_mean": 0.5, "accuracy_std": 0.0}
    metrics.write_text(json.dumps(doc))
    # identical runs: ANOVA is degenerate -> numeric failure
    proc = run_cli("report", "--metrics", metrics, "--metrics", metrics, check=False)
    assert proc.returncode == 3
