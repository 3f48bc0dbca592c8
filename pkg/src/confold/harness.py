"""Experiment harness: CSV ingestion, splits, repeated trials, sweeps.

Columns are auto-typed (numeric when every non-empty cell parses as a
finite real), empty cells become missing values, and the label column is
pulled out as the class.  Trials draw an independent split per trial id so
runs reproduce exactly under a fixed seed, serial or parallel.
"""

from __future__ import annotations

import csv
import io
import math
import random
import statistics
import time
from dataclasses import dataclass, replace
from typing import Sequence

from . import model
from .learner import LearnerConfig, confold
from .metrics import Prediction, accuracy, ibs
from .model import CATEGORICAL, NUMERIC, DataError, Dataset, Example, Program


def load_csv(
    path: str,
    label: str | None,
    schema_hints: dict[str, str] | None = None,
    missing_tokens: Sequence[str] = ("",),
) -> Dataset:
    """Read a headed CSV file into a dataset.

    ``label`` names the class column; pass None for unlabeled prediction
    data (every example gets the empty-string label).  ``schema_hints``
    forces a kind ("categorical"/"numeric") per column, overriding
    auto-typing.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = list(reader)
    if not header or all(not h for h in header):
        raise DataError(f"{path}: empty header row")
    if label is not None and label not in header:
        raise DataError(f"{path}: label column {label!r} not found")
    for i, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise DataError(f"{path}: row {i} has {len(row)} cells, expected {len(header)}")
    if not rows:
        raise DataError(f"{path}: no data rows")

    missing = set(missing_tokens)
    hints = schema_hints or {}
    feature_cols = [(i, name) for i, name in enumerate(header) if name != label]

    def numeric_cell(cell: str) -> float | None:
        try:
            v = float(cell)
        except ValueError:
            return None
        return v if math.isfinite(v) else None

    kinds: dict[str, str] = {}
    for i, name in feature_cols:
        if name in hints:
            if hints[name] not in (CATEGORICAL, NUMERIC):
                raise DataError(f"bad schema hint for {name!r}: {hints[name]!r}")
            kinds[name] = hints[name]
            continue
        cells = [row[i] for row in rows if row[i] not in missing]
        all_numeric = bool(cells) and all(numeric_cell(c) is not None for c in cells)
        kinds[name] = NUMERIC if all_numeric else CATEGORICAL

    label_idx = header.index(label) if label is not None else None
    examples = []
    for n, row in enumerate(rows):
        feats: dict[str, model.FeatureValue] = {}
        for i, name in feature_cols:
            cell = row[i]
            if cell in missing:
                feats[name] = None
            elif kinds[name] == NUMERIC:
                v = numeric_cell(cell)
                if v is None:
                    raise DataError(f"{path}: non-numeric cell {cell!r} in numeric column {name!r}")
                feats[name] = v
            else:
                feats[name] = cell
        y = row[label_idx] if label_idx is not None else ""
        examples.append(Example(n, feats, y))
    schema = tuple((name, kinds[name]) for _, name in feature_cols)
    classes = frozenset(ex.label for ex in examples)
    return Dataset(schema, classes, tuple(examples), target=label or "class")


def stratified_split(
    dataset: Dataset,
    train_fraction: float,
    seed: int,
    stratify_min: bool = False,
) -> tuple[Dataset, Dataset]:
    """Uniform random split; optionally force every class into training.

    With ``stratify_min``, classes missing from the training side are
    swapped in from the test side (evicting an example of the currently
    best-represented class); if the training side is too small to hold one
    example of every class it grows just enough to fit them.
    """
    if not 0.0 < train_fraction < 1.0:
        raise DataError("train_fraction must lie strictly between 0 and 1")
    n = len(dataset.examples)
    k = int(n * train_fraction)
    if k < 1 or k >= n:
        raise DataError(f"train_fraction {train_fraction} yields an empty side for n={n}")
    order = list(range(n))
    random.Random(seed).shuffle(order)
    train_idx = order[:k]
    test_idx = order[k:]

    if stratify_min:
        labels = [ex.label for ex in dataset.examples]
        have = {labels[i] for i in train_idx}
        for cls in sorted(dataset.classes - have):
            incoming = next(i for i in test_idx if labels[i] == cls)
            counts = {}
            for i in train_idx:
                counts[labels[i]] = counts.get(labels[i], 0) + 1
            evictable = [i for i in train_idx if counts[labels[i]] > 1]
            test_idx.remove(incoming)
            if evictable:
                # evict from the most-represented class, latest pick first
                victim = max(evictable, key=lambda i: (counts[labels[i]], train_idx.index(i)))
                train_idx.remove(victim)
                test_idx.append(victim)
            train_idx.append(incoming)

    def subset(indices: list[int]) -> Dataset:
        chosen = [dataset.examples[i] for i in sorted(indices)]
        return Dataset(
            dataset.schema,
            frozenset(ex.label for ex in chosen),
            tuple(chosen),
            dataset.target,
        )

    return subset(train_idx), subset(test_idx)


@dataclass(frozen=True)
class TrialReport:
    trial_id: int
    accuracy: float
    ibs: float
    rule_count: int
    predicate_count: int
    train_wall_time: float
    seed: int


@dataclass(frozen=True)
class TrialSummary:
    trials: int
    mean_accuracy: float
    std_accuracy: float
    mean_ibs: float
    std_ibs: float
    mean_rules: float
    std_rules: float
    mean_preds: float
    std_preds: float
    mean_time: float


@dataclass(frozen=True)
class SweepCell:
    t_imp: float
    t_con: float
    mean_accuracy: float
    mean_rule_count: float
    trials: int


def predicate_count(program: Program) -> int:
    """Number of literal occurrences across all rules (and exceptions)."""
    return sum(len(r.body) for ar in program.rules for r in (ar.rule, *ar.aux))


def predictions(program: Program, dataset: Dataset) -> list[tuple[Prediction, str]]:
    """Score every example; abstentions become ``Prediction(None, 0.5)``."""
    out = []
    for ex in dataset.examples:
        result = model.classify(program, ex)
        p = Prediction(None, 0.5) if result is None else Prediction(result[0], result[1])
        out.append((p, ex.label))
    return out


def _trial_seed(seed: int, trial: int) -> int:
    return seed * 1_000_003 + trial


def run_trial(
    dataset: Dataset,
    cfg: LearnerConfig,
    trial: int,
    seed: int,
    train_fraction: float = 0.8,
    stratify_min: bool = False,
) -> tuple[TrialReport, Program]:
    s = _trial_seed(seed, trial)
    train, test = stratified_split(dataset, train_fraction, s, stratify_min)
    t0 = time.perf_counter()
    program = confold(train, cfg)
    wall = time.perf_counter() - t0
    pairs = predictions(program, test)
    return (
        TrialReport(
            trial_id=trial,
            accuracy=accuracy(pairs),
            ibs=ibs(pairs),
            rule_count=len(program.rules),
            predicate_count=predicate_count(program),
            train_wall_time=wall,
            seed=s,
        ),
        program,
    )


def run_trials(
    dataset: Dataset,
    cfg: LearnerConfig,
    trials: int,
    seed: int,
    train_fraction: float = 0.8,
    stratify_min: bool = False,
) -> tuple[list[TrialReport], TrialSummary]:
    """Fresh split + fit + test per trial; mean and sample std over trials."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    reports = [
        run_trial(dataset, cfg, t, seed, train_fraction, stratify_min)[0]
        for t in range(trials)
    ]

    def agg(values: list[float]) -> tuple[float, float]:
        return (
            statistics.fmean(values),
            statistics.stdev(values) if len(values) > 1 else 0.0,
        )

    ma, sa = agg([r.accuracy for r in reports])
    mi, si = agg([r.ibs for r in reports])
    mr, sr = agg([float(r.rule_count) for r in reports])
    mp, sp = agg([float(r.predicate_count) for r in reports])
    mt = statistics.fmean([r.train_wall_time for r in reports])
    summary = TrialSummary(trials, ma, sa, mi, si, mr, sr, mp, sp, mt)
    return reports, summary


def sweep(
    dataset: Dataset,
    grid: Sequence[tuple[float, float]],
    trials_per_cell: int,
    seed: int,
    cfg: LearnerConfig = LearnerConfig(),
    train_fraction: float = 0.8,
    stratify_min: bool = False,
) -> list[SweepCell]:
    """Run the trial protocol once per (t_imp, t_con) grid cell."""
    if not grid:
        raise ValueError("sweep needs a non-empty grid")
    cells = []
    for t_imp, t_con in grid:
        cell_cfg = replace(cfg, improvement_threshold=t_imp, confidence_threshold=t_con)
        _, summary = run_trials(
            dataset, cell_cfg, trials_per_cell, seed, train_fraction, stratify_min
        )
        cells.append(SweepCell(t_imp, t_con, summary.mean_accuracy, summary.mean_rules,
                               trials_per_cell))
    return cells


def reports_to_csv(reports: Sequence[TrialReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["trial", "accuracy", "ibs", "rules", "preds", "train_seconds", "seed"])
    for r in reports:
        w.writerow([r.trial_id, f"{r.accuracy:.6f}", f"{r.ibs:.6f}", r.rule_count,
                    r.predicate_count, f"{r.train_wall_time:.6f}", r.seed])
    return buf.getvalue()


def sweep_to_csv(cells: Sequence[SweepCell]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["t_imp", "t_con", "mean_accuracy", "mean_rule_count", "trials"])
    for c in cells:
        w.writerow([c.t_imp, c.t_con, f"{c.mean_accuracy:.6f}",
                    f"{c.mean_rule_count:.6f}", c.trials])
    return buf.getvalue()


def summary_table(summary: TrialSummary) -> str:
    return (
        f"trials    {summary.trials}\n"
        f"accuracy  {summary.mean_accuracy:.4f} ± {summary.std_accuracy:.4f}\n"
        f"ibs       {summary.mean_ibs:.4f} ± {summary.std_ibs:.4f}\n"
        f"rules     {summary.mean_rules:.2f} ± {summary.std_rules:.2f}\n"
        f"preds     {summary.mean_preds:.2f} ± {summary.std_preds:.2f}\n"
        f"fit time  {summary.mean_time:.3f}s\n"
    )
