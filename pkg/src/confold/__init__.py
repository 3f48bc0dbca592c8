"""Explainable rule learning with confidence scores.

Learns ordered default-rule programs (with nested exceptions encoded via
negation-as-failure) from tabular data, attaches Wilson-score confidences
to every rule, prunes by confidence, and scores probabilistic predictions
with the Inverse Brier Score.  User knowledge can be injected as fixed
background rules or modifiable initial rules.
"""

from .harness import (
    SweepCell,
    TrialReport,
    TrialSummary,
    load_csv,
    predicate_count,
    run_trials,
    stratified_split,
    sweep,
)
from .knowledge import KnowledgeRule, RuleError, RuleSyntaxError, inject, parse_program, parse_rules
from .learner import (
    LearnerConfig,
    SplitCounts,
    best_literal,
    conf,
    confold,
    information_gain,
    learn_rule,
    most,
    split_by_literal,
)
from .metrics import Prediction, accuracy, ibs, multiclass_brier, one_class_brier
from .model import (
    CATEGORICAL,
    NUMERIC,
    AnnotatedRule,
    DataError,
    Dataset,
    Example,
    InvalidLiteralError,
    Literal,
    MalformedProgramError,
    Program,
    Rule,
    bottom_up_classify,
    classify,
    export_program,
    fires,
    satisfies,
)
from .pruning import confidence_filter, ev_ex_loop, evaluate_exceptions, remove_rule, wilson

__all__ = [
    "AnnotatedRule",
    "CATEGORICAL",
    "DataError",
    "Dataset",
    "Example",
    "InvalidLiteralError",
    "KnowledgeRule",
    "LearnerConfig",
    "Literal",
    "MalformedProgramError",
    "NUMERIC",
    "Prediction",
    "Program",
    "Rule",
    "RuleError",
    "RuleSyntaxError",
    "SplitCounts",
    "SweepCell",
    "TrialReport",
    "TrialSummary",
    "accuracy",
    "best_literal",
    "bottom_up_classify",
    "classify",
    "conf",
    "confidence_filter",
    "confold",
    "ev_ex_loop",
    "evaluate_exceptions",
    "export_program",
    "fires",
    "ibs",
    "information_gain",
    "inject",
    "learn_rule",
    "load_csv",
    "most",
    "multiclass_brier",
    "one_class_brier",
    "parse_program",
    "parse_rules",
    "predicate_count",
    "remove_rule",
    "run_trials",
    "satisfies",
    "split_by_literal",
    "stratified_split",
    "sweep",
    "wilson",
]

__version__ = "0.1.0"
