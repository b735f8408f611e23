import numpy as np
import pytest

from airwriting.dataset import LETTERS, DatasetManifest, TrialRecord
from airwriting.errors import IncompatibleRepetitionCount, TooFewSubjects
from airwriting.splits import make_folds, read_fold_table, write_fold_table


def manifest_for(n_subjects, n_reps):
    subjects = [f"S{i + 1:02d}" for i in range(n_subjects)]
    trials = [
        TrialRecord(subject_id=s, letter=letter, repetition=r, sample_rate_hz=2000.0,
                    n_channels=5, data_path=f"{s}/{letter}_{r}.myos")
        for s in subjects for letter in LETTERS for r in range(n_reps)
    ]
    return DatasetManifest(version=1, root=None, subjects=subjects, trials=trials)


def fold_counts(manifest, assignment):
    counts = np.zeros(assignment.n_folds, dtype=int)
    for rec in manifest.trials:
        counts[assignment.fold_of(rec)] += 1
    return counts


def test_paper_layout_user_independent_counts():
    man = manifest_for(50, 10)
    assignment = make_folds(man, "user_independent", seed=0)
    counts = fold_counts(man, assignment)
    assert np.array_equal(counts, [2600] * 5)  # 10 test subjects x 260
    for fold in range(5):
        assert len(assignment.train_keys(fold)) == 10400
        assert len(assignment.test_keys(fold)) == 2600


def test_paper_layout_user_dependent_counts():
    man = manifest_for(50, 10)
    assignment = make_folds(man, "user_dependent", seed=0)
    for fold in range(5):
        test_reps = {k[2] for k in assignment.test_keys(fold)}
        train_reps = {k[2] for k in assignment.train_keys(fold)}
        assert len(test_reps) == 2 and len(train_reps) == 8
        assert not (test_reps & train_reps)
        assert len(assignment.train_keys(fold)) == 10400
    # deterministic consecutive pairing
    assert {k[2] for k in assignment.test_keys(0)} == {0, 1}
    assert {k[2] for k in assignment.test_keys(4)} == {8, 9}


def test_five_subjects_one_per_fold():
    man = manifest_for(5, 2)
    assignment = make_folds(man, "user_independent", seed=3)
    for fold in range(5):
        assert len({k[0] for k in assignment.test_keys(fold)}) == 1


def test_no_subject_overlap_over_seeded_runs():
    rng = np.random.default_rng(42)
    for run in range(30):
        n_subjects = int(rng.integers(5, 51))
        man = manifest_for(n_subjects, 2)
        assignment = make_folds(man, "user_independent", seed=run)
        all_keys = set()
        for fold in range(5):
            test_subjects = {k[0] for k in assignment.test_keys(fold)}
            train_subjects = {k[0] for k in assignment.train_keys(fold)}
            assert not (test_subjects & train_subjects)
            all_keys.update(assignment.test_keys(fold))
        assert len(all_keys) == len(man.trials)  # disjoint + exhaustive


def test_fold_sizes_as_even_as_possible():
    man = manifest_for(13, 1)
    assignment = make_folds(man, "user_independent", seed=9)
    per_fold_subjects = [len({k[0] for k in assignment.test_keys(f)}) for f in range(5)]
    assert max(per_fold_subjects) - min(per_fold_subjects) <= 1
    assert sum(per_fold_subjects) == 13


def test_two_reps_fall_back_to_two_folds():
    man = manifest_for(4, 2)
    assignment = make_folds(man, "user_dependent", seed=0)
    assert assignment.n_folds == 2
    assert {k[2] for k in assignment.test_keys(0)} == {0}
    assert {k[2] for k in assignment.test_keys(1)} == {1}


def test_incompatible_repetitions_and_too_few_subjects():
    with pytest.raises(IncompatibleRepetitionCount):
        make_folds(manifest_for(3, 1), "user_dependent", seed=0)
    with pytest.raises(TooFewSubjects):
        make_folds(manifest_for(4, 2), "user_independent", seed=0)


def test_deterministic_for_fixed_seed():
    man = manifest_for(12, 3)
    a = make_folds(man, "user_independent", seed=5)
    b = make_folds(man, "user_independent", seed=5)
    assert a.fold_of_trial == b.fold_of_trial
    c = make_folds(man, "user_independent", seed=6)
    assert a.fold_of_trial != c.fold_of_trial


def test_unknown_scheme_rejected():
    with pytest.raises(ValueError):
        make_folds(manifest_for(6, 2), "bogus", seed=0)


def test_fold_table_roundtrip(tmp_path):
    man = manifest_for(6, 2)
    assignment = make_folds(man, "user_dependent", seed=0)
    records = sorted(man.trials, key=lambda r: r.key)
    path = tmp_path / "folds.tsv"
    write_fold_table(path, records, assignment)
    keys, folds = read_fold_table(path)
    assert keys == [r.key for r in records]
    assert folds == [assignment.fold_of(r) for r in records]
