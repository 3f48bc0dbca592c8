"""Rule induction: greedy literal selection plus the confidence-annotating
training loop.

The learner peels one class at a time off a worklist of examples: the
majority class becomes the positive side, a conjunctive rule is grown to
maximize information gain, residual covered negatives are absorbed by
recursively learned exception rules, and the finished rule is annotated
with a Wilson-score confidence.  Examples the rule fires on (right or
wrong) leave the worklist, so the loop always terminates.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from . import model
from .model import (
    AnnotatedRule,
    Dataset,
    Example,
    Literal,
    Program,
    Rule,
)
from .pruning import confidence_filter, evaluate_exceptions, rule_confidence

_OP_RANK = {"=": 0, "!=": 1, "<=": 2, ">": 3, "<": 4, ">=": 5}


@dataclass(frozen=True)
class LearnerConfig:
    """Training hyperparameters.

    ratio: stop refining a conjunction once covered negatives are at most
        this fraction of covered positives; exceptions absorb the rest.
    improvement_threshold: minimum confidence an exception must contribute
        to survive pruning (0 disables exception pruning).
    confidence_threshold: minimum Wilson confidence for keeping a rule.
    z: half-width parameter of the Wilson interval.
    max_exception_depth: cap on exception nesting; None means unbounded.
    post_filter: apply the confidence threshold as a final pass over the
        finished program instead of discarding rules inside the loop.
    """

    ratio: float = 0.5
    improvement_threshold: float = 0.0
    confidence_threshold: float = 0.0
    z: float = 3.0
    max_exception_depth: int | None = None
    post_filter: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.ratio <= 1.0:
            raise ValueError("ratio must be in [0, 1]")
        if self.improvement_threshold < 0:
            raise ValueError("improvement_threshold must be >= 0")
        if not 0.0 <= self.confidence_threshold <= 1.0:
            raise ValueError("confidence_threshold must be in [0, 1]")
        if self.z <= 0:
            raise ValueError("z must be positive")
        if self.max_exception_depth is not None and self.max_exception_depth < 0:
            raise ValueError("max_exception_depth must be >= 0 or None")


@dataclass(frozen=True)
class SplitCounts:
    """Coverage counts for a candidate literal: covered positives tp,
    covered negatives fp, uncovered negatives tn, uncovered positives fn."""

    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("counts must be non-negative")


class _Namer:
    """Allocates globally unique auxiliary heads in creation order."""

    def __init__(self, rules: int = 0, abs_: int = 0) -> None:
        self._rules = rules
        self._abs = abs_

    def rule(self) -> str:
        self._rules += 1
        return f"rule{self._rules}"

    def ab(self) -> str:
        self._abs += 1
        return f"ab{self._abs}"


def _examples(X: Dataset | Sequence[Example]) -> Sequence[Example]:
    return X.examples if isinstance(X, Dataset) else X


def most(X: Dataset | Sequence[Example]) -> str:
    """The class with the most examples; ties go to lexicographic order."""
    examples = _examples(X)
    if not examples:
        raise ValueError("most() needs a non-empty example set")
    counts = Counter(d.label for d in examples)
    return min(counts, key=lambda c: (-counts[c], c))


def split_by_literal(
    X: Dataset | Sequence[Example], label: str
) -> tuple[list[Example], list[Example]]:
    """Partition examples into (labelled ``label``, everything else),
    preserving order."""
    pos, neg = [], []
    for d in _examples(X):
        (pos if d.label == label else neg).append(d)
    return pos, neg


def _entropy(p: int, n: int) -> float:
    if p == 0 or n == 0:
        return 0.0
    t = p + n
    fp, fn = p / t, n / t
    return -fp * math.log2(fp) - fn * math.log2(fn)


def information_gain(counts: SplitCounts) -> float:
    """Weighted binary-entropy gain of splitting on a literal.

    H(pos, neg) minus the coverage-weighted entropies of the covered
    (tp, fp) and uncovered (fn, tn) halves.
    """
    return _information_gain(counts.tp, counts.fp, counts.tn, counts.fn)


def _information_gain(tp: int, fp: int, tn: int, fn: int) -> float:
    total = tp + fp + tn + fn
    if total == 0:
        raise ValueError("information gain of an empty split is undefined")
    covered = tp + fp
    uncovered = fn + tn
    before = _entropy(tp + fn, fp + tn)
    after = (covered / total) * _entropy(tp, fp) + (uncovered / total) * _entropy(fn, tn)
    return before - after


def best_literal(
    pos: Sequence[Example],
    neg: Sequence[Example],
    excluded: Iterable[Literal] = (),
    features: Sequence[str] | None = None,
) -> Literal | None:
    """The candidate literal with maximal information gain, or None.

    Candidates are ``(f = v)`` / ``(f != v)`` for every observed value of a
    categorical feature and ``(f <= v)`` / ``(f > v)`` for every observed
    value of a numeric feature.  Only literals covering at least one
    positive example and achieving strictly positive gain qualify.  Ties
    break on higher tp, then feature order, then operator order
    (=, !=, <=, >), then smaller value.  Numeric features are scored with
    prefix sums over the sorted values, one pass per feature.
    """
    if features is None:
        seen: dict[str, None] = {}
        for d in (*pos, *neg):
            for name in d.features:
                seen.setdefault(name)
        features = list(seen)
    banned = set(excluded)
    n_pos, n_neg = len(pos), len(neg)

    best: Literal | None = None
    best_key: tuple[float, int, int, int] | None = None

    def consider(feat_rank: int, feature: str, op: str, value: str | float, tp: int, fp: int):
        nonlocal best, best_key
        if tp < 1:
            return
        gain = _information_gain(tp, fp, n_neg - fp, n_pos - tp)
        if gain <= 0.0:
            return
        key = (gain, tp, -feat_rank, -_OP_RANK[op])
        if best_key is not None and key <= best_key:
            return
        lit = Literal(feature, op, value)
        if lit in banned:
            return
        best, best_key = lit, key

    for rank, feature in enumerate(features):
        cat_pos: Counter = Counter()
        cat_neg: Counter = Counter()
        num_pairs: list[tuple[float, bool]] = []
        for side, counter in ((pos, cat_pos), (neg, cat_neg)):
            is_pos = counter is cat_pos
            for d in side:
                v = d.features.get(feature)
                if v is None:
                    continue
                if isinstance(v, str):
                    counter[v] += 1
                else:
                    num_pairs.append((float(v), is_pos))

        if cat_pos or cat_neg:
            p_total = sum(cat_pos.values())
            n_total = sum(cat_neg.values())
            for value in sorted(set(cat_pos) | set(cat_neg)):
                tp, fp = cat_pos[value], cat_neg[value]
                consider(rank, feature, "=", value, tp, fp)
                # != never covers missing values, so totals exclude them
                consider(rank, feature, "!=", value, p_total - tp, n_total - fp)

        if num_pairs:
            num_pairs.sort(key=lambda t: t[0])
            p_total = sum(1 for _, is_pos in num_pairs if is_pos)
            n_total = len(num_pairs) - p_total
            cum_p = cum_n = 0
            i = 0
            while i < len(num_pairs):
                value = num_pairs[i][0]
                while i < len(num_pairs) and num_pairs[i][0] == value:
                    if num_pairs[i][1]:
                        cum_p += 1
                    else:
                        cum_n += 1
                    i += 1
                consider(rank, feature, "<=", value, cum_p, cum_n)
                consider(rank, feature, ">", value, p_total - cum_p, n_total - cum_n)
    return best


def learn_rule(
    label: str,
    pos: Sequence[Example],
    neg: Sequence[Example],
    cfg: LearnerConfig = LearnerConfig(),
    depth: int = 0,
    namer: _Namer | None = None,
    features: Sequence[str] | None = None,
) -> tuple[Rule, tuple[Rule, ...]]:
    """Grow one rule for ``label`` from positive/negative example sets.

    Literals are added greedily while covered negatives exceed
    ratio * covered positives and an informative literal exists.  Covered
    negatives that remain afterwards are handed to recursively learned
    exception rules with the positive/negative roles swapped.
    """
    if not pos:
        raise ValueError("learn_rule needs at least one positive example")
    if namer is None:
        namer = _Namer()
    head = namer.rule() if depth == 0 else namer.ab()

    body: list[Literal] = []
    cur_p, cur_n = list(pos), list(neg)
    while cur_n:
        lit = best_literal(cur_p, cur_n, excluded=body, features=features)
        if lit is None:
            break
        body.append(lit)
        cur_p = [d for d in cur_p if model.satisfies(d, lit)]
        cur_n = [d for d in cur_n if model.satisfies(d, lit)]
        if len(cur_n) <= cfg.ratio * len(cur_p):
            break  # residue small enough to hand to exceptions

    exceptions: list[str] = []
    aux: list[Rule] = []
    depth_ok = cfg.max_exception_depth is None or depth < cfg.max_exception_depth
    # exception learning must shrink the problem, else inseparable rows
    # would swap roles forever
    if cur_n and depth_ok and len(cur_p) + len(cur_n) < len(pos) + len(neg):
        work = cur_n
        while work:
            ab, ab_aux = learn_rule(label, work, cur_p, cfg, depth + 1, namer, features)
            if not ab.body and not ab.exceptions:
                break  # would veto the parent everywhere
            ab_index = {r.head: r for r in ab_aux}
            remaining = [d for d in work if not model.fires(ab, ab_index, d)]
            if len(remaining) == len(work):
                break
            exceptions.append(ab.head)
            aux.append(ab)
            aux.extend(ab_aux)
            work = remaining

    return Rule(head, tuple(body), tuple(exceptions)), tuple(aux)


def conf(
    rule: Rule,
    aux: Sequence[Rule],
    pos: Sequence[Example],
    neg: Sequence[Example],
    z: float = 3.0,
) -> float:
    """Wilson confidence of a rule: covered positives over covered total."""
    return rule_confidence(rule, aux, pos, neg, z)


def confold(
    dataset: Dataset,
    cfg: LearnerConfig = LearnerConfig(),
    on_iteration: Callable[[int], None] | None = None,
) -> Program:
    """Learn an ordered, confidence-annotated program for the dataset.

    Each pass targets the current majority class, learns one rule (with
    exceptions, optionally pruned by the improvement threshold), removes
    every example the rule fires on, and keeps the rule if its confidence
    clears the confidence threshold.  Stops when a rule classifies no
    positive example or the worklist empties.
    """
    namer = _Namer()
    annotated = _confold_loop(list(dataset.examples), dataset, cfg, namer, on_iteration)
    program = Program(tuple(annotated), dataset.classes, dataset.target)
    if cfg.post_filter:
        program = confidence_filter(program, cfg.confidence_threshold)
    return program


def _confold_loop(
    worklist: list[Example],
    dataset: Dataset,
    cfg: LearnerConfig,
    namer: _Namer,
    on_iteration: Callable[[int], None] | None = None,
) -> list[AnnotatedRule]:
    features = dataset.feature_names
    out: list[AnnotatedRule] = []
    while worklist:
        if on_iteration is not None:
            on_iteration(len(worklist))
        label = most(worklist)
        pos, neg = split_by_literal(worklist, label)
        rule, aux = learn_rule(label, pos, neg, cfg, 0, namer, features)
        if cfg.improvement_threshold > 0:
            rule, aux = evaluate_exceptions(
                rule, aux, pos, neg, cfg.improvement_threshold, cfg.z
            )
        index = {r.head: r for r in aux}
        covered_pos = sum(1 for d in pos if model.fires(rule, index, d))
        if covered_pos == 0:
            break  # rule classified nothing
        worklist = [d for d in worklist if not model.fires(rule, index, d)]
        c = conf(rule, aux, pos, neg, cfg.z)
        if cfg.post_filter or c >= cfg.confidence_threshold:
            out.append(AnnotatedRule(rule, aux, label, c))
    return out
