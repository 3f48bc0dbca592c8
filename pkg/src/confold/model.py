"""Domain types and evaluation semantics for rule-based classifiers.

Training data is a flat table of categorical/numeric feature values with
missing entries allowed.  A model is an ordered list of default rules;
each rule is a conjunction of feature tests guarded by negated exception
rules (negation-as-failure over auxiliary predicates).  The rule set is
always stratified, so evaluation has a unique layered bottom-up model;
classification walks the list and the first rule that fires decides.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence, Union

CATEGORICAL = "categorical"
NUMERIC = "numeric"

#: A feature value: a symbol, a finite real, or None for a missing entry.
FeatureValue = Union[str, float, None]

OPS = ("=", "!=", "<=", ">", "<", ">=")
CATEGORICAL_OPS = ("=", "!=")
#: Operator negation used when compiling ``not`` over feature literals.
COMPLEMENT = {"=": "!=", "!=": "=", "<=": ">", ">": "<=", "<": ">=", ">=": "<"}


class DataError(ValueError):
    """Tabular input violates the schema contract."""


class InvalidLiteralError(ValueError):
    """A literal pairs an operator with an incompatible value kind."""


class MalformedProgramError(ValueError):
    """A rule set is not stratified or references undefined rules."""


@dataclass(frozen=True)
class Literal:
    """One feature test, ``feature <op> value``.

    String values admit only ``=`` and ``!=``; numeric values admit every
    comparison operator.  A missing feature value satisfies no literal,
    not even ``!=``.
    """

    feature: str
    op: str
    value: str | float

    def __post_init__(self) -> None:
        if self.op not in OPS:
            raise InvalidLiteralError(f"unknown operator {self.op!r}")
        if isinstance(self.value, str):
            if self.op not in CATEGORICAL_OPS:
                raise InvalidLiteralError(
                    f"operator {self.op!r} is not allowed on categorical value {self.value!r}"
                )
        elif isinstance(self.value, bool) or self.value is None:
            raise InvalidLiteralError(f"unsupported literal value {self.value!r}")
        else:
            v = float(self.value)
            if not math.isfinite(v):
                raise InvalidLiteralError("numeric literal value must be finite")
            object.__setattr__(self, "value", v)

    def complement(self) -> "Literal":
        return Literal(self.feature, COMPLEMENT[self.op], self.value)

    def __str__(self) -> str:
        return f"{self.feature} {self.op} {self.value!r}"


@dataclass(frozen=True)
class Example:
    """One data row: an opaque id, a feature map, and a class label."""

    id: int | str
    features: Mapping[str, FeatureValue]
    label: str


@dataclass(frozen=True)
class Dataset:
    """An ordered, schema-checked collection of examples.

    ``schema`` fixes column order and kind; ``classes`` always equals the
    set of labels occurring in ``examples``.  Datasets are immutable after
    construction and safe to share across threads.
    """

    schema: tuple[tuple[str, str], ...]
    classes: frozenset[str]
    examples: tuple[Example, ...]
    target: str = "class"

    def __post_init__(self) -> None:
        kinds = dict(self.schema)
        if len(kinds) != len(self.schema):
            raise DataError("duplicate feature names in schema")
        for name, kind in self.schema:
            if kind not in (CATEGORICAL, NUMERIC):
                raise DataError(f"unknown kind {kind!r} for feature {name!r}")
        seen = set()
        for ex in self.examples:
            seen.add(ex.label)
            for name, value in ex.features.items():
                if name not in kinds:
                    raise DataError(f"feature {name!r} not in schema (example {ex.id!r})")
                if value is None:
                    continue
                if kinds[name] == CATEGORICAL and not isinstance(value, str):
                    raise DataError(f"feature {name!r} is categorical but holds {value!r}")
                if kinds[name] == NUMERIC:
                    if isinstance(value, str) or not math.isfinite(float(value)):
                        raise DataError(f"feature {name!r} needs a finite number, got {value!r}")
        if seen != set(self.classes):
            raise DataError("classes field must equal the labels present in examples")

    @classmethod
    def from_rows(
        cls,
        schema: Sequence[tuple[str, str]],
        rows: Sequence[tuple[Mapping[str, FeatureValue], str]],
        target: str = "class",
        ids: Sequence[int | str] | None = None,
    ) -> "Dataset":
        if ids is None:
            ids = range(len(rows))
        examples = tuple(
            Example(i, dict(feats), str(label)) for i, (feats, label) in zip(ids, rows)
        )
        classes = frozenset(ex.label for ex in examples)
        return cls(tuple((n, k) for n, k in schema), classes, examples, target)

    @property
    def kinds(self) -> dict[str, str]:
        return dict(self.schema)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.schema)

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self) -> Iterator[Example]:
        return iter(self.examples)


@dataclass(frozen=True)
class Rule:
    """A named rule: literal conjunction plus default-negated exceptions.

    ``head`` is the auxiliary predicate name (``rule3``, ``ab7``);
    ``exceptions`` holds heads of other rules, each used under ``not``.
    """

    head: str
    body: tuple[Literal, ...] = ()
    exceptions: tuple[str, ...] = ()


@dataclass(frozen=True)
class AnnotatedRule:
    """A rule for one class together with its exception closure.

    ``aux`` must be exactly the rules reachable from ``rule`` through
    exception references (checked, along with stratification).
    """

    rule: Rule
    aux: tuple[Rule, ...]
    label: str
    confidence: float
    _index: Mapping[str, Rule] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")
        index = {r.head: r for r in self.aux}
        if len(index) != len(self.aux):
            raise MalformedProgramError("duplicate auxiliary rule heads")
        reachable = _reachable_heads(self.rule, index)
        if reachable != set(index):
            extra = set(index) - reachable
            missing = reachable - set(index)
            raise MalformedProgramError(
                f"aux set must be the exception closure (unreachable={sorted(extra)}, "
                f"dangling={sorted(missing)})"
            )
        object.__setattr__(self, "_index", index)

    def fires(self, example: Example) -> bool:
        return fires(self.rule, self._index, example)


def _reachable_heads(rule: Rule, index: Mapping[str, Rule]) -> set[str]:
    """Heads reachable from ``rule`` via exceptions; raises on cycles."""
    done: set[str] = set()
    path: set[str] = set()

    def visit(r: Rule) -> None:
        for e in r.exceptions:
            if e in path:
                raise MalformedProgramError(f"exception cycle through {e!r}")
            if e in done:
                continue
            if e not in index:
                raise MalformedProgramError(f"dangling exception reference {e!r}")
            done.add(e)
            path.add(e)
            visit(index[e])
            path.discard(e)

    visit(rule)
    return done


@dataclass(frozen=True)
class Program:
    """An ordered rule list; order is evaluation priority."""

    rules: tuple[AnnotatedRule, ...]
    classes: frozenset[str]
    target: str = "class"

    def __post_init__(self) -> None:
        heads: set[str] = set()
        for ar in self.rules:
            for h in (ar.rule.head, *(r.head for r in ar.aux)):
                if h in heads:
                    raise MalformedProgramError(f"auxiliary head {h!r} is not globally unique")
                heads.add(h)
            if ar.label not in self.classes:
                raise MalformedProgramError(f"rule class {ar.label!r} not in program classes")

    def __len__(self) -> int:
        return len(self.rules)


def satisfies(example: Example, lit: Literal) -> bool:
    """True iff the example's value for ``lit.feature`` passes the test.

    Missing values fail every operator, including ``!=``.  A value whose
    runtime type does not match the literal constant also fails (rather
    than erroring), so dirty test rows degrade to "rule does not apply";
    systematic mismatches are caught by schema checks at ingestion.
    """
    value = example.features.get(lit.feature)
    if value is None:
        return False
    if isinstance(lit.value, str):
        if not isinstance(value, str):
            return False
        return (value == lit.value) if lit.op == "=" else (value != lit.value)
    if isinstance(value, str):
        return False
    v = float(value)
    c = lit.value
    if lit.op == "=":
        return v == c
    if lit.op == "!=":
        return v != c
    if lit.op == "<=":
        return v <= c
    if lit.op == ">":
        return v > c
    if lit.op == "<":
        return v < c
    return v >= c


def fires(rule: Rule, aux: Sequence[Rule] | Mapping[str, Rule], example: Example) -> bool:
    """True iff the stratified set ``{rule} ∪ aux`` derives the rule head.

    Every body literal must hold and no exception rule may fire; exception
    rules are evaluated recursively, which coincides with the layered
    bottom-up model because the reference graph is acyclic.
    """
    index = aux if isinstance(aux, Mapping) else {r.head: r for r in aux}
    return _fires(rule, index, example)


def _fires(rule: Rule, index: Mapping[str, Rule], example: Example) -> bool:
    for lit in rule.body:
        if not satisfies(example, lit):
            return False
    for e in rule.exceptions:
        ab = index.get(e)
        if ab is None:
            raise MalformedProgramError(f"dangling exception reference {e!r}")
        if _fires(ab, index, example):
            return False
    return True


def classify(program: Program, example: Example) -> tuple[str, float] | None:
    """First-match evaluation: class and confidence of the first rule that
    fires, or None when no rule fires (the model abstains)."""
    for ar in program.rules:
        if ar.fires(example):
            return ar.label, ar.confidence
    return None


def bottom_up_classify(program: Program, example: Example) -> tuple[str, float] | None:
    """Layered bottom-up evaluation of the exported rule encoding.

    Materializes what `export_program` writes: one target rule per list
    entry, carrying default negations of every earlier entry.  Auxiliary
    rule truth is computed stratum by stratum (a rule's stratum is one
    above its deepest exception), then target atoms are derived from the
    finished lower strata.  Kept deliberately independent of `classify`
    so the two can cross-check each other.
    """
    rules: dict[str, Rule] = {}
    for ar in program.rules:
        rules[ar.rule.head] = ar.rule
        for r in ar.aux:
            rules[r.head] = r

    stratum: dict[str, int] = {}

    def depth(head: str) -> int:
        if head not in stratum:
            stratum[head] = 1 + max(
                (depth(e) for e in rules[head].exceptions), default=-1
            )
        return stratum[head]

    for head in rules:
        depth(head)

    truth: dict[str, bool] = {}
    for head in sorted(rules, key=lambda h: stratum[h]):
        r = rules[head]
        truth[head] = all(satisfies(example, lit) for lit in r.body) and not any(
            truth[e] for e in r.exceptions
        )

    derived: list[tuple[str, float]] = []
    earlier: list[str] = []
    for ar in program.rules:
        if truth[ar.rule.head] and not any(truth[h] for h in earlier):
            derived.append((ar.label, ar.confidence))
        earlier.append(ar.rule.head)
    if len(derived) > 1:  # impossible under the decision-list encoding
        raise MalformedProgramError("bottom-up model derived more than one class atom")
    return derived[0] if derived else None


# --- textual rendering ------------------------------------------------------

_BARE_ATOM = re.compile(r"[a-z][A-Za-z0-9_]*\Z")
_VAR_POOL = "ABCDEFGHIJKLMNOPQRSTUVW"  # X is reserved for the individual


def format_number(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def quote_atom(s: str) -> str:
    """Quote a symbol unless it is a bare lowercase atom."""
    if _BARE_ATOM.match(s):
        return s
    return "'" + s.replace("'", "''") + "'"


def _class_token(label: str) -> str:
    # numeric-looking class symbols round-trip as bare number tokens
    try:
        if label == format_number(float(label)):
            return label
    except ValueError:
        pass
    return quote_atom(label)


def _render_body(rule: Rule) -> str:
    items: list[str] = []
    fresh = iter(_VAR_POOL)
    for lit in rule.body:
        f = quote_atom(lit.feature)
        if isinstance(lit.value, str):
            atom = f"{f}(X,{quote_atom(lit.value)})"
            items.append(atom if lit.op == "=" else f"not {atom}")
        elif lit.op == "=":
            items.append(f"{f}(X,{format_number(lit.value)})")
        elif lit.op == "!=":
            items.append(f"not {f}(X,{format_number(lit.value)})")
        else:
            var = next(fresh, None) or f"V{len(items)}"
            op = {"<=": "=<", ">=": ">=", "<": "<", ">": ">"}[lit.op]
            items.append(f"{f}(X,{var}), {var}{op}{format_number(lit.value)}")
    items.extend(f"not {e}(X)" for e in rule.exceptions)
    return ", ".join(items)


def export_program(program: Program) -> str:
    """Render a program as Prolog-style text, one rule per line.

    Target rules come first in list order, each prefixed with its
    confidence and guarded by ``not rule_j(X)`` for every earlier target
    rule; auxiliary rules follow in creation order.  Rules with no body
    are written as facts.  The text round-trips through the rule parser.
    """
    lines: list[str] = []
    earlier: list[str] = []
    for ar in program.rules:
        guards = "".join(f", not {h}(X)" for h in earlier)
        head = f"{ar.confidence!r}::{quote_atom(program.target)}(X,{_class_token(ar.label)})"
        lines.append(f"{head} :- {ar.rule.head}(X){guards}.")
        earlier.append(ar.rule.head)
    for ar in program.rules:
        for r in (ar.rule, *ar.aux):
            body = _render_body(r)
            lines.append(f"{r.head}(X) :- {body}." if body else f"{r.head}(X).")
    return "\n".join(lines) + ("\n" if lines else "")
