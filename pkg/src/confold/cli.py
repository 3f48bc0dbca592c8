"""Command-line interface: train, predict, bench, sweep.

Exit codes: 0 success, 1 usage error, 2 data error, 3 rule-file error.
"""

from __future__ import annotations

import argparse
import sys

from . import harness, knowledge, model
from .learner import LearnerConfig, confold
from .metrics import accuracy, ibs


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _learner_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ratio", type=float, default=0.5,
                   help="exception-switch ratio (default 0.5)")
    p.add_argument("--z", type=float, default=3.0,
                   help="Wilson interval half-width (default 3)")
    p.add_argument("--improvement-threshold", type=float, default=0.0, metavar="T",
                   help="minimum confidence an exception must contribute")
    p.add_argument("--confidence-threshold", type=float, default=0.0, metavar="T",
                   help="minimum rule confidence to keep a rule")
    p.add_argument("--max-exception-depth", type=int, default=None, metavar="D")
    p.add_argument("--post-filter", action="store_true",
                   help="apply the confidence threshold after training instead of in-loop")


def _config(args: argparse.Namespace) -> LearnerConfig:
    return LearnerConfig(
        ratio=args.ratio,
        improvement_threshold=args.improvement_threshold,
        confidence_threshold=args.confidence_threshold,
        z=args.z,
        max_exception_depth=args.max_exception_depth,
        post_filter=args.post_filter,
    )


def build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="confold", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="learn a rule program from a CSV file")
    train.add_argument("--data", required=True)
    train.add_argument("--label", required=True)
    train.add_argument("--background", metavar="FILE",
                       help="fixed knowledge rules placed before learned rules")
    train.add_argument("--initial", metavar="FILE",
                       help="modifiable knowledge rules (re-scored, prunable)")
    train.add_argument("--out", metavar="MODEL", help="write the program here (default stdout)")
    _learner_flags(train)

    predict = sub.add_parser("predict", help="classify a CSV file with a saved model")
    predict.add_argument("--model", required=True)
    predict.add_argument("--data", required=True)
    predict.add_argument("--label", default=None,
                         help="label column, if present; enables accuracy/IBS output")
    predict.add_argument("--explain", action="store_true",
                         help="also print the rule that fired")

    bench = sub.add_parser("bench", help="repeated train/test trials")
    bench.add_argument("--data", required=True)
    bench.add_argument("--label", required=True)
    bench.add_argument("--trials", type=int, default=30)
    bench.add_argument("--train-frac", type=float, default=0.8)
    bench.add_argument("--stratify-min", action="store_true",
                       help="force at least one training example per class")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--format", choices=("csv", "table"), default="table")
    _learner_flags(bench)

    swp = sub.add_parser("sweep", help="pruning-threshold grid sweep")
    swp.add_argument("--data", required=True)
    swp.add_argument("--label", required=True)
    swp.add_argument("--grid", required=True, metavar="IMPSxCONS",
                     help="e.g. '0,0.02,0.08x0,0.5,0.65' (t_imp values x t_con values)")
    swp.add_argument("--trials", type=int, default=30)
    swp.add_argument("--train-frac", type=float, default=0.8)
    swp.add_argument("--stratify-min", action="store_true")
    swp.add_argument("--seed", type=int, default=0)
    _learner_flags(swp)
    return parser


def _cmd_train(args) -> int:
    dataset = harness.load_csv(args.data, args.label)
    cfg = _config(args)
    seed_rules: list[knowledge.KnowledgeRule] = []
    for path, fixed in ((args.background, True), (args.initial, False)):
        if path:
            with open(path, encoding="utf-8") as fh:
                seed_rules.extend(
                    knowledge.parse_rules(fh.read(), dataset, dataset.target, fixed=fixed)
                )
    program = knowledge.inject(seed_rules, dataset, cfg) if seed_rules else confold(dataset, cfg)
    text = model.export_program(program)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {len(program.rules)} rules to {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_predict(args) -> int:
    with open(args.model, encoding="utf-8") as fh:
        program = knowledge.parse_program(fh.read())
    dataset = harness.load_csv(args.data, args.label)
    rows = []
    for ex in dataset.examples:
        fired = None
        for ar in program.rules:
            if ar.fires(ex):
                fired = ar
                break
        if fired is None:
            rows.append((ex, "abstain", "", None))
        else:
            rows.append((ex, fired.label, f"{fired.confidence!r}", fired))
    for ex, label, confidence, fired in rows:
        cells = [str(ex.id), label, confidence]
        if args.explain:
            if fired is None:
                cells.append("no rule fired")
            else:
                single = model.Program((fired,), frozenset({fired.label}), program.target)
                # line 0 is the decision-list head; line 1 defines the rule body
                cells.append(model.export_program(single).splitlines()[1])
        print(",".join(cells))
    if args.label is not None:
        pairs = harness.predictions(program, dataset)
        print(f"accuracy={accuracy(pairs):.4f} ibs={ibs(pairs):.4f}", file=sys.stderr)
    return 0


def _cmd_bench(args) -> int:
    dataset = harness.load_csv(args.data, args.label)
    reports, summary = harness.run_trials(
        dataset, _config(args), args.trials, args.seed, args.train_frac, args.stratify_min
    )
    if args.format == "csv":
        sys.stdout.write(harness.reports_to_csv(reports))
    else:
        sys.stdout.write(harness.summary_table(summary))
    return 0


def _cmd_sweep(args) -> int:
    dataset = harness.load_csv(args.data, args.label)
    try:
        imps_text, cons_text = args.grid.split("x")
        imps = [float(v) for v in imps_text.split(",") if v != ""]
        cons = [float(v) for v in cons_text.split(",") if v != ""]
        if not imps or not cons:
            raise ValueError
    except ValueError:
        print("confold: error: --grid must look like '0,0.02x0,0.5'", file=sys.stderr)
        return 1
    grid = [(ti, tc) for ti in imps for tc in cons]
    cells = harness.sweep(dataset, grid, args.trials, args.seed, _config(args),
                          args.train_frac, args.stratify_min)
    sys.stdout.write(harness.sweep_to_csv(cells))
    return 0


_COMMANDS = {
    "train": _cmd_train,
    "predict": _cmd_predict,
    "bench": _cmd_bench,
    "sweep": _cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except FileNotFoundError as e:
        print(f"confold: error: {e}", file=sys.stderr)
        return 2
    except model.DataError as e:
        print(f"confold: data error: {e}", file=sys.stderr)
        return 2
    except knowledge.RuleError as e:
        print(f"confold: rule error: {e}", file=sys.stderr)
        return 3
    except ValueError as e:
        print(f"confold: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
