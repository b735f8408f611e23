"""Cross-validation fold assignment.

Two schemes: user-independent folds partition subjects (no subject overlap
between train and test), user-dependent folds partition repetition indices
(every subject appears on both sides).
"""

from dataclasses import dataclass

import numpy as np

from .dataset import DatasetManifest, TrialRecord
from .errors import IncompatibleRepetitionCount, TooFewSubjects

SCHEMES = ("user_independent", "user_dependent")


@dataclass(frozen=True)
class SplitAssignment:
    scheme: str
    n_folds: int
    fold_of_trial: dict  # (subject_id, letter, repetition) -> fold index
    seed: int

    def fold_of(self, record: TrialRecord) -> int:
        return self.fold_of_trial[record.key]

    def test_keys(self, fold: int):
        return [k for k, f in self.fold_of_trial.items() if f == fold]

    def train_keys(self, fold: int):
        return [k for k, f in self.fold_of_trial.items() if f != fold]


def make_folds(manifest: DatasetManifest, scheme: str, seed: int,
               n_folds: int = 5) -> SplitAssignment:
    """Deterministic fold assignment for every trial in the manifest.

    user_independent: subjects are shuffled by the seed and dealt
    round-robin, so fold sizes differ by at most one subject.

    user_dependent: distinct repetition indices are cut into consecutive
    blocks, pairs (0,1),(2,3),... for the 10-repetition layout.  Corpora
    with fewer repetitions than requested folds fall back to one fold per
    repetition.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    if scheme == "user_independent":
        subjects = sorted(set(manifest.subjects))
        if len(subjects) < n_folds:
            raise TooFewSubjects(
                f"user-independent folding needs >= {n_folds} subjects, got {len(subjects)}")
        order = list(np.random.default_rng(seed).permutation(subjects))
        fold_of_subject = {s: i % n_folds for i, s in enumerate(order)}
        fold_of_trial = {r.key: fold_of_subject[r.subject_id] for r in manifest.trials}
        return SplitAssignment(scheme=scheme, n_folds=n_folds,
                               fold_of_trial=fold_of_trial, seed=seed)

    reps = sorted({r.repetition for r in manifest.trials})
    if len(reps) < 2:
        raise IncompatibleRepetitionCount(
            f"user-dependent folding needs >= 2 distinct repetitions, got {len(reps)}")
    folds = min(n_folds, len(reps))
    fold_of_rep = {}
    for fold, block in enumerate(np.array_split(np.asarray(reps), folds)):
        for rep in block:
            fold_of_rep[int(rep)] = fold
    fold_of_trial = {r.key: fold_of_rep[r.repetition] for r in manifest.trials}
    return SplitAssignment(scheme=scheme, n_folds=folds,
                           fold_of_trial=fold_of_trial, seed=seed)


def write_fold_table(path, records, assignment: SplitAssignment) -> None:
    """Serialize assignments as a TSV in the given record order."""
    lines = ["subject_id\tletter\trepetition\tfold"]
    for rec in records:
        lines.append(f"{rec.subject_id}\t{rec.letter}\t{rec.repetition}\t{assignment.fold_of(rec)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_fold_table(path):
    """Return (keys, folds) lists in file order."""
    keys, folds = [], []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if header.strip() != "subject_id\tletter\trepetition\tfold":
            raise ValueError(f"{path}: unexpected fold-table header")
        for line in fh:
            if not line.strip():
                continue
            subject, letter, rep, fold = line.rstrip("\n").split("\t")
            keys.append((subject, letter, int(rep)))
            folds.append(int(fold))
    return keys, folds
