"""Wilson-score confidence and confidence-driven pruning.

Two pruning passes operate on learned rules: exception pruning drops an
exception when removing it costs less confidence than the improvement
threshold, and confidence filtering drops whole rules below the
confidence threshold.
"""

from __future__ import annotations

from typing import Sequence

from . import model
from .model import Example, Program, Rule


def wilson(n_p: int, n: int, z: float = 3.0) -> float:
    """Centre of the Wilson score interval: (n_p + z²/2) / (n + z²).

    ``n_p`` counts covered examples of the target class, ``n`` covered
    examples of any class.  Equals 0.5 on no evidence, stays strictly
    inside (0, 1), and approaches n_p/n as n grows.
    """
    if z <= 0:
        raise ValueError("z must be positive")
    if n_p < 0 or n < n_p:
        raise ValueError(f"need 0 <= n_p <= n, got n_p={n_p}, n={n}")
    return (n_p + 0.5 * z * z) / (n + z * z)


def rule_confidence(
    rule: Rule,
    aux: Sequence[Rule],
    pos: Sequence[Example],
    neg: Sequence[Example],
    z: float = 3.0,
) -> float:
    """Wilson confidence of a rule from the examples it covers."""
    index = {r.head: r for r in aux}
    n_p = sum(1 for d in pos if model.fires(rule, index, d))
    n_other = sum(1 for d in neg if model.fires(rule, index, d))
    return wilson(n_p, n_p + n_other, z)


def remove_rule(rules: Sequence[Rule], victim: Rule, root: str | None = None) -> tuple[Rule, ...]:
    """Remove ``victim`` from a rule set and erase references to it.

    Every ``not victim`` occurrence is dropped from the remaining rules'
    exception lists, and rules left unreachable from ``root`` (default:
    the first rule) are collected as orphans.
    """
    heads = [r.head for r in rules]
    if victim.head not in heads:
        raise ValueError(f"victim {victim.head!r} not in rule set")
    if root is None:
        root = rules[0].head
    kept = [
        Rule(r.head, r.body, tuple(e for e in r.exceptions if e != victim.head))
        for r in rules
        if r.head != victim.head
    ]
    index = {r.head: r for r in kept}
    reachable: set[str] = set()
    stack = [root] if root in index else []
    while stack:
        h = stack.pop()
        if h in reachable:
            continue
        reachable.add(h)
        stack.extend(index[h].exceptions)
    return tuple(r for r in kept if r.head in reachable)


def evaluate_exceptions(
    rule: Rule,
    aux: Sequence[Rule],
    pos: Sequence[Example],
    neg: Sequence[Example],
    threshold: float,
    z: float = 3.0,
) -> tuple[Rule, tuple[Rule, ...]]:
    """Prune exceptions whose removal costs less than ``threshold``.

    Walks the rule's exceptions in order; each is tentatively removed and
    the rule's confidence recomputed on (pos, neg).  A drop below the
    threshold commits the removal, otherwise the exception survives and
    its own sub-exceptions are checked recursively.  Returns the possibly
    rewritten rule and its pruned auxiliary set.
    """
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    rules = ev_ex_loop((rule, *aux), rule.head, pos, neg, threshold, z)
    return rules[0], rules[1:]


def ev_ex_loop(
    rules: tuple[Rule, ...],
    cursor: str,
    pos: Sequence[Example],
    neg: Sequence[Example],
    threshold: float,
    z: float = 3.0,
) -> tuple[Rule, ...]:
    """One pruning pass over the exceptions of the rule named ``cursor``.

    ``rules[0]`` is the top-level rule whose confidence drives every
    decision; it is never removed.
    """
    current = rules
    root = rules[0].head
    for e in _by_head(rules, cursor).exceptions:
        index = {r.head: r for r in current}
        if e not in index:
            continue
        trial = remove_rule(current, index[e], root)
        c = rule_confidence(current[0], current[1:], pos, neg, z)
        c_t = rule_confidence(trial[0], trial[1:], pos, neg, z)
        if c - c_t < threshold:
            current = trial  # tolerable loss of confidence
        else:
            current = ev_ex_loop(current, e, pos, neg, threshold, z)
    return current


def _by_head(rules: Sequence[Rule], head: str) -> Rule:
    for r in rules:
        if r.head == head:
            return r
    raise ValueError(f"no rule named {head!r}")


def confidence_filter(program: Program, t_con: float) -> Program:
    """Drop rules whose confidence falls below ``t_con``, keeping order."""
    kept = tuple(ar for ar in program.rules if ar.confidence >= t_con)
    return Program(kept, program.classes, program.target)
