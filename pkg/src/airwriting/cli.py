"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

import json
import sys
from pathlib import Path

import click

from . import pipeline
from .classifier import TrainConfig
from .dataset import SyntheticSpec, dataset_stats, generate_synthetic, load_manifest
from .envelopes import ENVELOPE_KINDS, WindowPlan
from .errors import DataError, NumericError
from .resample import ResampleSpec, round_half_away
from .splits import make_folds, write_fold_table
from .timefreq import CwtConfig, StftConfig

_SCHEME_CHOICES = click.Choice(["user-dependent", "user-independent"])


def _scheme(value: str) -> str:
    return value.replace("-", "_")


@click.group()
def cli():
    """sEMG airwriting recognition pipeline."""


@cli.command()
@click.option("--out", required=True, type=click.Path(), help="Corpus output directory.")
@click.option("--subjects", default=5, show_default=True, type=int)
@click.option("--reps", default=2, show_default=True, type=int)
@click.option("--rate", default=2000.0, show_default=True, type=float, help="Sample rate in Hz.")
@click.option("--channels", default=5, show_default=True, type=int)
@click.option("--duration-min", default=1.0, show_default=True, type=float)
@click.option("--duration-max", default=3.0, show_default=True, type=float)
@click.option("--separability", default=1.0, show_default=True, type=float,
              help="0 = identical classes, 1 = fully distinct templates.")
@click.option("--seed", default=0, show_default=True, type=int)
def synth(out, subjects, reps, rate, channels, duration_min, duration_max, separability, seed):
    """Generate a labeled synthetic corpus for desk-scale testing."""
    try:
        spec = SyntheticSpec(
            n_subjects=subjects, n_repetitions=reps, sample_rate_hz=rate,
            n_channels=channels, duration_range_s=(duration_min, duration_max),
            class_separability=separability, seed=seed)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    manifest = generate_synthetic(spec, out)
    click.echo(f"wrote {len(manifest.trials)} trials under {out}")


@cli.command()
@click.option("--data", "manifest_path", required=True, type=click.Path(), help="Manifest file.")
def stats(manifest_path):
    """Duration statistics over a corpus."""
    manifest = load_manifest(manifest_path)
    st = dataset_stats(manifest)
    click.echo(f"trials: {len(manifest.trials)}")
    click.echo(f"mean_s: {st.mean_s:.4f}")
    click.echo(f"median_s: {st.median_s:.4f}")
    click.echo(f"p999_s: {st.p999_s:.4f}")
    click.echo("histogram:")
    for lo, hi, count in zip(st.bin_edges[:-1], st.bin_edges[1:], st.counts):
        click.echo(f"  [{lo:.3f}, {hi:.3f}) {count}")


@cli.command()
@click.option("--data", "manifest_path", required=True, type=click.Path())
@click.option("--scheme", default="user-dependent", show_default=True, type=_SCHEME_CHOICES)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--folds", default=5, show_default=True, type=int)
@click.option("--out", required=True, type=click.Path(), help="Fold table (TSV) path.")
def split(manifest_path, scheme, seed, folds, out):
    """Write a fold-assignment table for a corpus."""
    manifest = load_manifest(manifest_path)
    assignment = make_folds(manifest, _scheme(scheme), seed, folds)
    records = sorted(manifest.trials, key=lambda r: r.key)
    write_fold_table(out, records, assignment)
    click.echo(f"wrote {len(records)} assignments ({assignment.n_folds} folds) to {out}")


def _build_run_config(manifest_path, out, feature, tf, scheme, seed, folds, length_s,
                      interp, window_ms, no_zero_mean_var, stft_window_ms, cwt_scales,
                      cwt_omega0, cwt_decimate, threads, train_seed):
    if (feature is None) == (tf is None):
        raise click.UsageError("choose exactly one of --feature or --tf")
    kind = feature if feature is not None else tf

    # window sizes are given in milliseconds; sample counts need the corpus rate
    manifest = load_manifest(manifest_path)
    if not manifest.trials:
        raise DataError(f"{manifest_path} lists no trials")
    rate = manifest.trials[0].sample_rate_hz

    window = stft = cwt = None
    if feature is not None:
        window = WindowPlan(window_len_samples=max(2, round_half_away(window_ms * rate / 1000.0)))
    elif tf == "stft":
        w = round_half_away(stft_window_ms * rate / 1000.0)
        if w % 2:
            w += 1  # the one-sided layout needs an even window
        stft = StftConfig(window_len_samples=max(4, w))
    else:
        cwt = CwtConfig(n_scales=cwt_scales, omega0=cwt_omega0, time_decimation=cwt_decimate)

    return pipeline.RunConfig(
        manifest_path=str(manifest_path),
        out_dir=str(out),
        feature=kind,
        scheme=_scheme(scheme),
        seed=seed,
        n_folds=folds,
        resample=ResampleSpec(target_length_s=length_s, method=interp),
        window=window,
        stft=stft,
        cwt=cwt,
        zero_mean_var=not no_zero_mean_var,
        train=TrainConfig(seed=train_seed),
        threads=threads,
    )


@cli.command()
@click.option("--data", "manifest_path", required=True, type=click.Path())
@click.option("--out", required=True, type=click.Path(), help="Tensor output directory.")
@click.option("--feature", type=click.Choice(list(ENVELOPE_KINDS)), default=None,
              help="Time-domain envelope kind.")
@click.option("--tf", type=click.Choice(["stft", "cwt"]), default=None,
              help="Time-frequency image kind.")
@click.option("--scheme", default="user-dependent", show_default=True, type=_SCHEME_CHOICES)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--folds", default=5, show_default=True, type=int)
@click.option("--length-s", default=4.0, show_default=True, type=float,
              help="Fixed signal length L in seconds.")
@click.option("--interp", default="cubic", show_default=True,
              type=click.Choice(["nearest", "linear", "quadratic", "cubic"]))
@click.option("--window-ms", default=125.0, show_default=True, type=float,
              help="Envelope window length in milliseconds.")
@click.option("--no-zero-mean-var", is_flag=True, default=False,
              help="Use the sample mean instead of 0 in the variance envelope.")
@click.option("--stft-window-ms", default=100.0, show_default=True, type=float)
@click.option("--cwt-scales", default=60, show_default=True, type=int)
@click.option("--cwt-omega0", default=6.0, show_default=True, type=float)
@click.option("--cwt-decimate", default=100, show_default=True, type=int)
@click.option("--threads", default=1, show_default=True, type=int)
@click.option("--train-seed", default=0, show_default=True, type=int)
def extract(**kwargs):
    """Extract feature tensors, labels, and fold assignments to disk."""
    config = _build_run_config(**kwargs)
    paths = pipeline.run_extract(config)
    dims = json.loads(Path(paths["run"]).read_text())["dims"]
    click.echo(f"extracted tensor dims {dims} to {config.out_dir}")


@cli.command()
@click.option("--tensors", required=True, type=click.Path(), help="Extraction directory.")
@click.option("--fold", required=True, type=int)
@click.option("--out", default=None, type=click.Path(), help="Model output directory.")
@click.option("--seed", default=0, show_default=True, type=int)
def train(tensors, fold, out, seed):
    """Train the baseline classifier on one fold."""
    _, _, summary = pipeline.train_fold(tensors, fold, TrainConfig(seed=seed), out_dir=out)
    click.echo(f"fold {fold}: test accuracy {summary['test_accuracy']:.4f} "
               f"({summary['n_train']} train / {summary['n_test']} test, "
               f"best epoch {summary['best_epoch']})")


@cli.command("eval")
@click.option("--tensors", required=True, type=click.Path())
@click.option("--out", required=True, type=click.Path(), help="Report output directory.")
@click.option("--seed", default=None, type=int, help="Override the training seed.")
def evaluate(tensors, out, seed):
    """Run the full per-fold protocol and write report.txt / metrics.json."""
    train_config = None if seed is None else TrainConfig(seed=seed)
    result = pipeline.run_eval(tensors, train_config=train_config, out_dir=out)
    click.echo(pipeline.render_report(result), nl=False)


@cli.command()
@click.option("--metrics", "metrics_paths", required=True, multiple=True,
              type=click.Path(), help="metrics.json files to compare (repeatable).")
@click.option("--unpaired", is_flag=True, default=False,
              help="Welch t-tests instead of paired.")
def report(metrics_paths, unpaired):
    """Compare evaluation runs: ANOVA and pairwise one-tailed t-tests."""
    docs = []
    for path in metrics_paths:
        try:
            docs.append(json.loads(Path(path).read_text(encoding="utf-8")))
        except FileNotFoundError as exc:
            raise DataError(str(exc)) from exc
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: {exc}") from exc
    click.echo(pipeline.compare_runs(docs, paired=not unpaired), nl=False)


@cli.command()
@click.option("--tensors", required=True, type=click.Path())
@click.option("--out", default=None, type=click.Path(), help="Index path (default: export.json).")
def export(tensors, out):
    """Validate an extraction directory and write a checksummed index."""
    index = pipeline.export_bundle(tensors, out)
    click.echo(f"export index: {index['n_trials']} trials, dims {index['dims']}, "
               f"{index['n_folds']} folds")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Abort:
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except NumericError as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        return 3
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except OSError as exc:
        click.echo(f"i/o error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
