"""Rule-text parsing and injection of user knowledge into training.

The text format is the one `model.export_program` writes, extended with
boolean bodies for hand-written rules:

    program    : statement*
    statement  : [ number "::" ] head [ ":-" body ] "."
    head       : functor "(" term "," term ")"   target rule; one argument is
                                                 the individual variable, the
                                                 other the class value
               | functor "(" VARIABLE ")"        auxiliary rule definition
    body       : conj ( ";" conj )*              ";" is disjunction
    conj       : elem ( "," elem )*              "," is conjunction
    elem       : "not" elem
               | "(" body ")"
               | VARIABLE cmp number             comparison on a bound variable
               | functor "(" VARIABLE ")"        auxiliary reference, or unary
                                                 (boolean) feature atom
               | functor "(" VARIABLE "," value ")"
                                                 feature test; a VARIABLE value
                                                 binds the feature for later
                                                 comparisons
    cmp        : "<" | ">" | "=<" | "<=" | ">=" | "=" | "==" | "\\=" | "!="
    functor    : lowercase identifier | quoted atom
    comment    : "%" to end of line

Boolean bodies are compiled to disjunctive normal form, one rule per
disjunct; ``not`` over a feature literal becomes the complemented
operator.  Auxiliary rule definitions must be conjunctive.  Categorical
features admit only ``=`` and ``!=``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Sequence

from .learner import LearnerConfig, _confold_loop, _Namer, conf, split_by_literal
from .model import (
    CATEGORICAL,
    NUMERIC,
    AnnotatedRule,
    Dataset,
    Literal,
    Program,
    Rule,
    format_number,
)
from .pruning import evaluate_exceptions


class RuleError(ValueError):
    """A rule file is syntactically or semantically invalid."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {col})"
        super().__init__(message)
        self.line = line
        self.col = col


class RuleSyntaxError(RuleError):
    pass


@dataclass(frozen=True)
class KnowledgeRule:
    """A parsed user rule for one class.

    ``rule`` holds the body literals and exception references; its head is
    ``""`` until the rule is placed into a program (hand-written rules) or
    the name given in the source text (rules in exported form).  ``fixed``
    rules are background knowledge: never re-scored, never pruned.
    """

    label: str
    rule: Rule
    aux: tuple[Rule, ...]
    confidence: float | None
    fixed: bool = False


# --- tokenizer ---------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<comment>%[^\n]*)
      | (?P<number>-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
      | (?P<quoted>'(?:[^']|'')*')
      | (?P<ident>[a-z][A-Za-z0-9_]*)
      | (?P<var>[A-Z_][A-Za-z0-9_]*)
      | (?P<punct>::|:-|=<|<=|>=|\\=|!=|==|[=<>().,;])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise RuleSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup or ""
        raw = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, raw, line, col))
        newlines = raw.count("\n")
        if newlines:
            line += newlines
            col = len(raw) - raw.rfind("\n")
        else:
            col += len(raw)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


# --- syntax tree -------------------------------------------------------------

@dataclass
class _Atom:
    functor: str
    args: list[tuple[str, object]]  # ("var", name) | ("num", float) | ("sym", str)
    line: int
    col: int


@dataclass
class _Cmp:
    var: str
    op: str
    value: float
    line: int
    col: int


@dataclass
class _Not:
    item: object


@dataclass
class _And:
    items: list


@dataclass
class _Or:
    items: list


@dataclass
class _Stmt:
    confidence: float | None
    head: _Atom
    body: object | None
    line: int


_CMP_CANON = {"<": "<", ">": ">", "=<": "<=", "<=": "<=", ">=": ">=",
              "=": "=", "==": "=", "\\=": "!=", "!=": "!="}


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> _Token:
        t = self.next()
        if t.text != text:
            raise RuleSyntaxError(f"expected {text!r}, found {t.text or 'end of input'!r}",
                                  t.line, t.col)
        return t

    def statements(self) -> list[_Stmt]:
        out = []
        while self.peek().kind != "eof":
            out.append(self.statement())
        return out

    def statement(self) -> _Stmt:
        start = self.peek()
        confidence = None
        if start.kind == "number" and self.tokens[self.i + 1].text == "::":
            confidence = float(self.next().text)
            self.next()
        head = self.atom()
        body = None
        if self.peek().text == ":-":
            self.next()
            body = self.disjunction()
        self.expect(".")
        return _Stmt(confidence, head, body, start.line)

    def atom(self) -> _Atom:
        t = self.next()
        if t.kind == "ident":
            functor = t.text
        elif t.kind == "quoted":
            functor = _unquote(t.text)
        else:
            raise RuleSyntaxError(f"expected a predicate, found {t.text!r}", t.line, t.col)
        self.expect("(")
        args = [self.term()]
        while self.peek().text == ",":
            self.next()
            args.append(self.term())
        self.expect(")")
        return _Atom(functor, args, t.line, t.col)

    def term(self) -> tuple[str, object]:
        t = self.next()
        if t.kind == "var":
            return ("var", t.text)
        if t.kind == "number":
            return ("num", float(t.text))
        if t.kind == "ident":
            return ("sym", t.text)
        if t.kind == "quoted":
            return ("sym", _unquote(t.text))
        raise RuleSyntaxError(f"expected a term, found {t.text!r}", t.line, t.col)

    def disjunction(self):
        items = [self.conjunction()]
        while self.peek().text == ";":
            self.next()
            items.append(self.conjunction())
        return items[0] if len(items) == 1 else _Or(items)

    def conjunction(self):
        items = [self.element()]
        while self.peek().text == ",":
            self.next()
            items.append(self.element())
        return items[0] if len(items) == 1 else _And(items)

    def element(self):
        t = self.peek()
        if t.text == "not":
            self.next()
            return _Not(self.element())
        if t.text == "(":
            self.next()
            inner = self.disjunction()
            self.expect(")")
            return inner
        if t.kind == "var":
            self.next()
            op = self.next()
            if op.text not in _CMP_CANON:
                raise RuleSyntaxError(f"expected a comparison operator, found {op.text!r}",
                                      op.line, op.col)
            v = self.next()
            if v.kind != "number":
                raise RuleSyntaxError(f"comparisons require a numeric constant, found {v.text!r}",
                                      v.line, v.col)
            return _Cmp(t.text, _CMP_CANON[op.text], float(v.text), t.line, t.col)
        return self.atom()


def _unquote(s: str) -> str:
    return s[1:-1].replace("''", "'")


# --- compilation -------------------------------------------------------------

# leaves after normalization: ("lit", Literal) or ("ref", head, negated)

def _resolve(node, indiv: str, bindings: Mapping[str, str], kinds, aux_names, target, stmt):
    """Replace atoms/comparisons with literal or reference leaves."""
    if isinstance(node, _Or):
        return _Or([_resolve(n, indiv, bindings, kinds, aux_names, target, stmt) for n in node.items])
    if isinstance(node, _And):
        return _And([_resolve(n, indiv, bindings, kinds, aux_names, target, stmt) for n in node.items])
    if isinstance(node, _Not):
        return _Not(_resolve(node.item, indiv, bindings, kinds, aux_names, target, stmt))
    if isinstance(node, _Cmp):
        if node.var not in bindings:
            raise RuleError(f"variable {node.var} is not bound to a feature", node.line, node.col)
        feature = bindings[node.var]
        _check_kind(feature, node.op, kinds, node.line, node.col)
        return ("lit", Literal(feature, node.op, node.value))
    if isinstance(node, _Atom):
        if node.functor == target:
            raise RuleError("the target predicate cannot appear in a rule body",
                            node.line, node.col)
        if len(node.args) == 1:
            kind, name = node.args[0][0], node.args[0][1]
            if kind != "var":
                raise RuleSyntaxError("single-argument atoms take the individual variable",
                                      node.line, node.col)
            if node.functor in aux_names:
                return ("ref", node.functor, False)
            _check_feature(node.functor, kinds, node.line, node.col)
            if kinds is not None and kinds.get(node.functor) == NUMERIC:
                raise RuleError(
                    f"unary atom {node.functor!r} requires a categorical feature",
                    node.line, node.col)
            return ("lit", Literal(node.functor, "=", "true"))
        if len(node.args) != 2:
            raise RuleSyntaxError("feature atoms take exactly two arguments",
                                  node.line, node.col)
        (k0, v0), (k1, v1) = node.args
        if k0 != "var" or v0 != indiv:
            raise RuleError(f"first argument must be the individual variable {indiv}",
                            node.line, node.col)
        feature = node.functor
        _check_feature(feature, kinds, node.line, node.col)
        if k1 == "var":
            # a binding atom; it was substituted away before this walk
            raise RuleError(f"feature variable {v1} is bound but never compared",
                            node.line, node.col)
        if k1 == "num":
            if kinds is not None and kinds.get(feature) == CATEGORICAL:
                return ("lit", Literal(feature, "=", format_number(v1)))
            return ("lit", Literal(feature, "=", float(v1)))
        if kinds is not None and kinds.get(feature) == NUMERIC:
            raise RuleError(f"feature {feature!r} is numeric but compared to symbol {v1!r}",
                            node.line, node.col)
        return ("lit", Literal(feature, "=", str(v1)))
    raise AssertionError(f"unexpected node {node!r}")


def _check_feature(name: str, kinds, line, col) -> None:
    if kinds is not None and name not in kinds:
        raise RuleError(f"unknown feature {name!r}", line, col)


def _check_kind(feature: str, op: str, kinds, line, col) -> None:
    if kinds is not None and kinds.get(feature) == CATEGORICAL and op not in ("=", "!="):
        raise RuleError(
            f"categorical feature {feature!r} admits only = and !=, not {op!r}", line, col)


def _collect_bindings(node, indiv: str, bindings: dict[str, str]):
    """Strip binding atoms f(X, Var) from the tree, recording Var -> f."""
    if isinstance(node, (_Or, _And)):
        kept = []
        for item in node.items:
            stripped = _collect_bindings(item, indiv, bindings)
            if stripped is not None:
                kept.append(stripped)
        if not kept:
            return None
        if len(kept) == 1:
            return kept[0]
        node.items = kept
        return node
    if isinstance(node, _Not):
        inner = _collect_bindings(node.item, indiv, bindings)
        if inner is None:
            raise RuleError("a binding atom cannot be negated")
        node.item = inner
        return node
    if isinstance(node, _Atom) and len(node.args) == 2:
        (k0, v0), (k1, v1) = node.args
        if k0 == "var" and k1 == "var" and v1 != indiv:
            if v1 in bindings and bindings[v1] != node.functor:
                raise RuleError(f"variable {v1} bound to two features", node.line, node.col)
            bindings[str(v1)] = node.functor
            return None
    return node


def _push_not(node, negate: bool):
    if isinstance(node, _Not):
        return _push_not(node.item, not negate)
    if isinstance(node, _And):
        items = [_push_not(n, negate) for n in node.items]
        return _Or(items) if negate else _And(items)
    if isinstance(node, _Or):
        items = [_push_not(n, negate) for n in node.items]
        return _And(items) if negate else _Or(items)
    tag = node[0]
    if not negate:
        return node
    if tag == "lit":
        return ("lit", node[1].complement())
    return ("ref", node[1], not node[2])


def _dnf(node) -> list[list]:
    if isinstance(node, _Or):
        out = []
        for item in node.items:
            out.extend(_dnf(item))
        return out
    if isinstance(node, _And):
        disjuncts = [[]]
        for item in node.items:
            expanded = _dnf(item)
            disjuncts = [d + e for d in disjuncts for e in expanded]
        return disjuncts
    return [[node]]


# --- statement assembly ------------------------------------------------------

def _parse_text(text: str, kinds, target: str | None):
    """Parse and compile; returns (target, label-order list of entries).

    Each entry is (label, confidence, rule, aux_closure) with the rule head
    preserved from the source when the statement merely adopts an auxiliary
    rule, and "" otherwise.
    """
    statements = _Parser(_tokenize(text)).statements()

    aux_stmts: dict[str, _Stmt] = {}
    target_stmts: list[_Stmt] = []
    for stmt in statements:
        arity = len(stmt.head.args)
        if arity == 1:
            if stmt.head.args[0][0] != "var":
                raise RuleSyntaxError("auxiliary rule heads take a single variable",
                                      stmt.head.line, stmt.head.col)
            if stmt.head.functor in aux_stmts:
                raise RuleError(f"duplicate rule name {stmt.head.functor!r}",
                                stmt.head.line, stmt.head.col)
            if stmt.confidence is not None:
                raise RuleError("confidence prefixes belong on class rules only",
                                stmt.head.line, stmt.head.col)
            aux_stmts[stmt.head.functor] = stmt
        elif arity == 2:
            target_stmts.append(stmt)
        else:
            raise RuleSyntaxError("rule heads take one or two arguments",
                                  stmt.head.line, stmt.head.col)

    functors = {s.head.functor for s in target_stmts}
    if target is None:
        if len(functors) > 1:
            raise RuleError(f"multiple target predicates: {sorted(functors)}")
        target = next(iter(functors), "class")
    else:
        for s in target_stmts:
            if s.head.functor != target:
                raise RuleError(
                    f"head predicate {s.head.functor!r} is not the target {target!r}",
                    s.head.line, s.head.col)
    if target in aux_stmts:
        raise RuleError(f"the target predicate {target!r} cannot define an auxiliary rule")

    aux_rules: dict[str, Rule] = {}
    aux_excs: dict[str, list[str]] = {}

    def compile_aux(name: str, trail: tuple[str, ...] = ()) -> Rule:
        if name in aux_rules:
            return aux_rules[name]
        if name in trail:
            raise RuleError(f"rule {name!r} depends on itself")
        stmt = aux_stmts[name]
        indiv = str(stmt.head.args[0][1])
        lits, refs = _compile_conjunction(stmt.body, indiv, stmt, trail + (name,))
        rule = Rule(name, tuple(lits), tuple(refs))
        aux_rules[name] = rule
        aux_excs[name] = list(refs)
        return rule

    def _compile_conjunction(body, indiv, stmt, trail):
        """Compile a (necessarily conjunctive) auxiliary body."""
        if body is None:
            return [], []
        bindings: dict[str, str] = {}
        stripped = _collect_bindings(body, indiv, bindings)
        if stripped is None:
            return [], []
        resolved = _resolve(stripped, indiv, bindings, kinds, set(aux_stmts), target, stmt)
        disjuncts = _dnf(_push_not(resolved, False))
        if len(disjuncts) != 1:
            raise RuleError(
                f"auxiliary rule bodies must be conjunctive (line {stmt.line})")
        lits, refs = [], []
        for leaf in disjuncts[0]:
            if leaf[0] == "lit":
                lits.append(leaf[1])
            elif leaf[2]:
                compile_aux(leaf[1], trail)
                refs.append(leaf[1])
            else:
                inner = compile_aux(leaf[1], trail)
                lits.extend(inner.body)
                for e in inner.exceptions:
                    refs.append(e)
        return lits, refs

    aux_order = {name: i for i, name in enumerate(aux_stmts)}

    def closure(ref_heads: Sequence[str]) -> tuple[Rule, ...]:
        seen: set[str] = set()
        frontier = list(ref_heads)
        while frontier:
            h = frontier.pop()
            if h in seen:
                continue
            seen.add(h)
            frontier.extend(compile_aux(h).exceptions)
        # source-text order, which is creation order for exported programs
        return tuple(compile_aux(h) for h in sorted(seen, key=aux_order.__getitem__))

    entries = []
    adopted: set[str] = set()
    used_aux: set[str] = set()
    for stmt in target_stmts:
        terms = stmt.head.args
        var_positions = [i for i, (k, _) in enumerate(terms) if k == "var"]
        if len(var_positions) != 1:
            raise RuleSyntaxError(
                "a class rule head needs exactly one variable argument",
                stmt.head.line, stmt.head.col)
        indiv = str(terms[var_positions[0]][1])
        value_kind, value = terms[1 - var_positions[0]]
        label = format_number(value) if value_kind == "num" else str(value)

        bindings: dict[str, str] = {}
        body = stmt.body
        stripped = _collect_bindings(body, indiv, bindings) if body is not None else None
        if stripped is None:
            disjuncts: list[list] = [[]]
        else:
            resolved = _resolve(stripped, indiv, bindings, kinds, set(aux_stmts), target, stmt)
            disjuncts = _dnf(_push_not(resolved, False))

        for disjunct in disjuncts:
            lits: list[Literal] = []
            pos_refs: list[str] = []
            neg_refs: list[str] = []
            for leaf in disjunct:
                if leaf[0] == "lit":
                    lits.append(leaf[1])
                elif leaf[2]:
                    neg_refs.append(leaf[1])
                else:
                    pos_refs.append(leaf[1])
            used_aux.update(pos_refs)
            used_aux.update(neg_refs)

            guard_refs = [h for h in neg_refs if h in adopted]
            exc_refs = [h for h in neg_refs if h not in adopted]
            if len(pos_refs) == 1 and not lits and not exc_refs:
                # exported form: adopt the named rule wholesale
                rule = compile_aux(pos_refs[0])
                adopted.add(rule.head)
            else:
                for h in pos_refs:
                    inner = compile_aux(h)
                    lits.extend(inner.body)
                    exc_refs.extend(inner.exceptions)
                rule = Rule("", tuple(lits), tuple(exc_refs))
            used_aux.update(_heads_below(rule, compile_aux))
            entries.append((label, stmt.confidence, rule, closure(rule.exceptions)))

    unused = set(aux_stmts) - used_aux - adopted
    for name in sorted(unused):
        stmt = aux_stmts[name]
        raise RuleError(
            f"rule {name!r} is neither a class rule nor referenced by one",
            stmt.head.line, stmt.head.col)

    return target, entries


def _heads_below(rule: Rule, compile_aux) -> set[str]:
    seen: set[str] = set()
    frontier = list(rule.exceptions)
    while frontier:
        h = frontier.pop()
        if h in seen:
            continue
        seen.add(h)
        frontier.extend(compile_aux(h).exceptions)
    return seen


def _kinds_of(schema) -> Mapping[str, str] | None:
    if schema is None:
        return None
    if isinstance(schema, Dataset):
        return schema.kinds
    return dict(schema)


def parse_rules(
    text: str,
    schema: Dataset | Mapping[str, str] | None = None,
    target: str | None = None,
    fixed: bool = False,
) -> list[KnowledgeRule]:
    """Parse rule text into knowledge rules, one per DNF disjunct.

    ``schema`` (a dataset or a feature->kind mapping) enables feature
    validation; without it, kinds are inferred from the syntax.  ``fixed``
    marks every parsed rule as immutable background knowledge.
    """
    _, entries = _parse_text(text, _kinds_of(schema), target)
    return [
        KnowledgeRule(label, rule, aux, confidence, fixed)
        for label, confidence, rule, aux in entries
    ]


def parse_program(
    text: str,
    schema: Dataset | Mapping[str, str] | None = None,
    target: str | None = None,
    default_confidence: float = 1.0,
) -> Program:
    """Parse exported program text back into an executable program.

    Rule names from the source are kept, so export -> parse -> export is a
    fixpoint on exported programs.  Rules without a confidence prefix get
    ``default_confidence``.
    """
    inferred, entries = _parse_text(text, _kinds_of(schema), target)
    namer = _seeded_namer(r for _, _, rule, aux in entries for r in (rule, *aux))
    annotated = []
    for label, confidence, rule, aux in entries:
        if not rule.head:
            rule = Rule(namer.rule(), rule.body, rule.exceptions)
        c = default_confidence if confidence is None else confidence
        annotated.append(AnnotatedRule(rule, aux, label, c))
    classes = frozenset(ar.label for ar in annotated)
    return Program(tuple(annotated), classes, inferred)


def _seeded_namer(rules) -> _Namer:
    max_rule = max_ab = 0
    for r in rules:
        m = re.fullmatch(r"rule(\d+)", r.head)
        if m:
            max_rule = max(max_rule, int(m.group(1)))
        m = re.fullmatch(r"ab(\d+)", r.head)
        if m:
            max_ab = max(max_ab, int(m.group(1)))
    return _Namer(max_rule, max_ab)


def inject(
    seed: Sequence[KnowledgeRule],
    dataset: Dataset,
    cfg: LearnerConfig = LearnerConfig(),
) -> Program:
    """Train with user rules placed at the front of the decision list.

    Rules are processed in the given order; examples a kept rule fires on
    leave the worklist before learning continues, mirroring the training
    loop's own update.  Modifiable rules with no confidence get a Wilson
    score from the data they cover, can lose exceptions to improvement
    pruning, and are dropped entirely below the confidence threshold (in
    which case their examples stay available to the learner).  Fixed rules
    are kept verbatim (confidence defaults to 1.0).
    """
    namer = _seeded_namer([r for kr in seed for r in (kr.rule, *kr.aux)])
    worklist = list(dataset.examples)
    annotated: list[AnnotatedRule] = []
    fixed_heads: set[str] = set()
    for kr in seed:
        rule, aux = kr.rule, kr.aux
        if not rule.head:
            rule = Rule(namer.rule(), rule.body, rule.exceptions)
        pos, neg = split_by_literal(worklist, kr.label)
        if kr.fixed:
            c = 1.0 if kr.confidence is None else kr.confidence
            fixed_heads.add(rule.head)
        else:
            if cfg.improvement_threshold > 0 and rule.exceptions:
                rule, aux = evaluate_exceptions(
                    rule, aux, pos, neg, cfg.improvement_threshold, cfg.z)
            c = kr.confidence if kr.confidence is not None else conf(rule, aux, pos, neg, cfg.z)
            if c < cfg.confidence_threshold and not cfg.post_filter:
                continue
        ar = AnnotatedRule(rule, aux, kr.label, c)
        annotated.append(ar)
        worklist = [d for d in worklist if not ar.fires(d)]
    annotated.extend(_confold_loop(worklist, dataset, cfg, namer))
    classes = dataset.classes | {ar.label for ar in annotated}
    program = Program(tuple(annotated), frozenset(classes), dataset.target)
    if cfg.post_filter:
        kept = tuple(
            ar for ar in program.rules
            if ar.rule.head in fixed_heads or ar.confidence >= cfg.confidence_threshold
        )
        program = Program(kept, program.classes, program.target)
    return program
