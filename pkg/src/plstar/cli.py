"""Command-line experiment harness.

Subcommands: sample, learn, compare, order-effect, correlate, score-order.
Exit codes: 0 success, 1 usage error, 2 input error, 3 internal invariant
violation.  CSV schemas are documented in docs/formats.md.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import experiments as ex
from .adaptive import OtRepository, adaptive_init, order_score
from .learning import (
    MembershipOracle,
    NotACounterexample,
    RoundLimitExceeded,
    lstar_learn,
)
from .mealy import ParseError, ValidationError, to_dot, write_fsm_file
from .oracles import make_oracle
from .sampling import chvatal_sample, default_spec
from .spl import ModelFormatError, TooManyFeatures, UnknownFeature, load_feature_model, load_fts
from .stats import ZeroVariance, improvement_percentage

USAGE_ERROR = 1
INPUT_ERROR = 2
INTERNAL_ERROR = 3

INPUT_ERRORS = (
    FileNotFoundError,
    IsADirectoryError,
    json.JSONDecodeError,
    ParseError,
    ValidationError,
    ModelFormatError,
    UnknownFeature,
    TooManyFeatures,
    ValueError,
)
INTERNAL_ERRORS = (AssertionError, NotACounterexample, RoundLimitExceeded)


class MalformedCsv(ValueError):
    """The input CSV lacks the columns of a compare run."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _add_model_args(parser):
    parser.add_argument("--model", required=True, help="feature model JSON")
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--fts", help="featured transition system JSON")
    group.add_argument(
        "--components", help="directory of per-feature component .fsm files"
    )


def _add_run_args(parser):
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--oracle", choices=("wp", "perfect"), default="wp")
    parser.add_argument(
        "--wp-depth",
        default="2",
        help="'auto' or an integer lookahead floor (default 2)",
    )
    parser.add_argument(
        "--randomize",
        default="alphabet,prefixes,suffixes",
        help="comma list of randomized sources, or 'none'",
    )


def _source(args, fm):
    if args.fts:
        return ex.FtsSource(load_fts(args.fts))
    return ex.ComponentSource.from_directory(fm, args.components)


def _oracle_cfg(args) -> ex.OracleConfig:
    depth = args.wp_depth if args.wp_depth == "auto" else int(args.wp_depth)
    return ex.OracleConfig(kind=args.oracle, depth=depth)


def _out_dir(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _load_setup(args):
    fm = load_feature_model(args.model)
    source = _source(args, fm)
    sample = ex.load_sample(fm, args.sample)
    specs = ex.resolve_products(source, sample)
    return fm, sample, specs


# -- subcommands ---------------------------------------------------------------


def cmd_sample(args) -> int:
    fm = load_feature_model(args.model)
    source = _source(args, fm)
    sample = chvatal_sample(fm, default_spec(fm, t=args.t))
    ex.save_sample(fm, sample, args.out)
    print(f"sample of {len(sample)} products (t={args.t}) -> {args.out}")
    for i, config in enumerate(sample):
        machine = source.machine(config)
        features = ",".join(sorted(config.selected))
        print(f"  product {i}: {len(machine.states)} states "
              f"({len(machine.inputs)} inputs) [{features}]")
    return 0


def cmd_learn(args) -> int:
    fm = load_feature_model(args.model)
    source = _source(args, fm)
    sample = ex.load_sample(fm, args.sample)
    if not 0 <= args.product < len(sample):
        raise ValueError(f"product index {args.product} out of range")
    spec = ex.resolve_products(source, sample)[args.product]
    plan = ex.Randomization.parse(args.randomize)
    alphabet = ex.draw_alphabet(args.seed, "", spec, plan)
    repo = OtRepository.load(args.repo) if args.repo else OtRepository()
    init = adaptive_init(repo, alphabet)
    init = ex.shuffle_init(args.seed, "", spec.product_id, plan, init)
    oracle_cfg = _oracle_cfg(args)
    mq = MembershipOracle(spec.machine)
    eq = make_oracle(
        oracle_cfg.kind,
        spec.machine,
        depth=oracle_cfg.depth,
        known_sul_states=len(spec.machine.states),
    )
    result = lstar_learn(mq, eq, init=init, alphabet=alphabet)
    metrics = result.metrics
    print(f"product {args.product}: learned {len(result.machine.states)} states "
          f"in {metrics.rounds} rounds")
    for name in ex.METRIC_FIELDS:
        print(f"  {name} = {getattr(metrics, name)}")
    if args.write_model:
        write_fsm_file(result.machine, args.write_model)
        print(f"model -> {args.write_model}")
    if args.write_dot:
        with open(args.write_dot, "w", encoding="utf-8") as handle:
            handle.write(to_dot(result.machine))
        print(f"dot -> {args.write_dot}")
    if args.save_repo:
        repo.add(spec.product_id, alphabet, result.table.prefixes, result.table.suffixes)
        repo.save(args.save_repo)
        print(f"repository ({len(repo)} tables) -> {args.save_repo}")
    return 0


def cmd_compare(args) -> int:
    fm, sample, specs = _load_setup(args)
    plan = ex.Randomization.parse(args.randomize)
    out = _out_dir(args)
    compare_csv = os.path.join(out, "compare.csv")
    # rows flush as orders complete, so an aborted run keeps its partial CSV
    with ex.CsvStream(compare_csv, ex.COMPARE_HEADER) as stream:
        outcome = ex.run_compare(
            specs, fm, sample, args.orders, args.seed, plan, _oracle_cfg(args),
            jobs=args.jobs,
            on_row=lambda row: stream.append(ex.compare_row_tuple(row)),
        )
    summary = ex.summarize_compare(outcome)
    summary_csv = os.path.join(out, "summary.csv")
    ex.write_csv(
        summary_csv,
        ("metric", "pl_mean", "pl_std", "na_mean", "improvement_pct",
         "t_statistic", "p_value"),
        ex.summary_rows_for_csv(summary),
    )
    ranked = sorted(
        outcome.rows,
        key=lambda row: (
            row.adaptive["total_resets"],
            row.adaptive["total_symbols"],
            row.adaptive["rounds"],
        ),
    )
    with open(os.path.join(out, "best_order.json"), "w", encoding="utf-8") as fh:
        json.dump(list(ranked[0].order), fh)
    with open(os.path.join(out, "worst_order.json"), "w", encoding="utf-8") as fh:
        json.dump(list(ranked[-1].order), fh)
    if not args.no_figures:
        from . import figures

        for metric in ("rounds", "total_resets", "total_symbols"):
            figures.boxplot_vs_reference(
                outcome.column("pl", metric),
                outcome.rows[0].non_adaptive[metric],
                metric,
                os.path.join(out, f"fig_{metric}.png"),
            )
    print(f"{len(outcome.rows)} orders -> {compare_csv}")
    for line in summary:
        extra = "" if line.p_value is None else f"  p={line.p_value:.3e}"
        print(f"  {line.metric}: pl={line.pl_mean:.3f}+-{line.pl_std:.3f} "
              f"na={line.na_mean:.3f} improvement={line.improvement_pct:+.1f}%{extra}")
    return 0


def cmd_order_effect(args) -> int:
    fm, sample, specs = _load_setup(args)
    order_a = ex.load_order(args.order_best, len(sample))
    order_b = ex.load_order(args.order_worst, len(sample))
    plan = ex.Randomization.parse(args.randomize)
    out = _out_dir(args)
    rows_csv = os.path.join(out, "order_effect.csv")
    with ex.CsvStream(
        rows_csv, ("order_label", "repetition") + ex.METRIC_FIELDS
    ) as stream:
        outcome = ex.run_order_effect(
            specs, order_a, order_b, args.reps, args.seed, plan, _oracle_cfg(args),
            on_row=lambda row: stream.append(
                (row[0], row[1]) + tuple(row[2][m] for m in ex.METRIC_FIELDS)
            ),
        )
    summary_rows = []
    print(f"{args.reps} repetitions per order -> {rows_csv}")
    for metric, test in outcome.tests.items():
        a = outcome.column("order1", metric)
        b = outcome.column("order2", metric)
        mean_a, mean_b = sum(a) / len(a), sum(b) / len(b)
        std = lambda xs, m: (sum((x - m) ** 2 for x in xs) / (len(xs) - 1)) ** 0.5
        if isinstance(test, ZeroVariance):
            stat = p = ""
            note = "zero variance in both orders"
        elif isinstance(test, Exception):
            stat = p = ""
            note = str(test)
        else:
            stat, p, note = test.statistic, test.p_value, ""
            print(f"  {metric}: order1={mean_a:.1f} order2={mean_b:.1f} "
                  f"t={stat:.3f} p={p:.3e}")
        summary_rows.append(
            (metric, mean_a, std(a, mean_a), mean_b, std(b, mean_b), stat, p, note)
        )
    ex.write_csv(
        os.path.join(out, "order_effect_summary.csv"),
        ("metric", "order1_mean", "order1_std", "order2_mean", "order2_std",
         "t_statistic", "p_value", "note"),
        summary_rows,
    )
    if not args.no_figures:
        from . import figures

        for metric in ("total_resets", "total_symbols"):
            figures.grouped_boxplot(
                {"order1": outcome.column("order1", metric),
                 "order2": outcome.column("order2", metric)},
                metric,
                os.path.join(out, f"fig_order_effect_{metric}.png"),
            )
    return 0


def cmd_correlate(args) -> int:
    import csv as csv_mod

    with open(args.csv, encoding="utf-8", newline="") as handle:
        reader = csv_mod.DictReader(handle)
        rows = list(reader)
    needed = {"d_score", "pl_total_resets", "pl_total_symbols"}
    if not rows or not needed <= set(rows[0]):
        raise MalformedCsv(
            f"{args.csv} is not a compare CSV (needs columns {sorted(needed)})"
        )
    if len(rows) < 3:
        raise MalformedCsv("correlation needs at least 3 rows")
    d = [float(r["d_score"]) for r in rows]
    out = _out_dir(args)
    results = []
    for metric in ("total_resets", "total_symbols"):
        values = [float(r[f"pl_{metric}"]) for r in rows]
        res = ex.correlate_columns(d, {metric: values})[metric]
        results.append((metric, res.statistic, res.p_value, res.df))
        ex.write_csv(
            os.path.join(out, f"scatter_{metric}.csv"),
            ("d_score", metric),
            zip(d, values),
        )
        if not args.no_figures:
            from . import figures

            figures.scatter_with_regression(
                d, values, metric, os.path.join(out, f"fig_d_vs_{metric}.png")
            )
        print(f"D vs {metric}: r={res.statistic:+.4f} p={res.p_value:.3e}")
    ex.write_csv(
        os.path.join(out, "correlate.csv"),
        ("metric", "pearson_r", "p_value", "df"),
        results,
    )
    return 0


def cmd_score_order(args) -> int:
    fm = load_feature_model(args.model)
    sample = ex.load_sample(fm, args.sample)
    ids = ex.load_order(args.order, len(sample))
    scored = order_score(ids, fm, sample)
    print(f"order: {' '.join(str(i) for i in ids)}")
    print(f"new-feature counts: {' '.join(str(c) for c in scored.new_feature_counts)}")
    print(f"D = {scored.score!r}")
    return 0


def cmd_improvement(args) -> int:
    print(f"{improvement_percentage(args.value, args.baseline):+.2f}%")
    return 0


# -- argument wiring -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="plstar", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="t-wise product sample from a feature model")
    _add_model_args(p)
    p.add_argument("--t", type=int, default=3)
    p.add_argument("--out", required=True, help="sample JSON output path")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("learn", help="learn a single product")
    _add_model_args(p)
    p.add_argument("--sample", required=True)
    p.add_argument("--product", type=int, required=True, help="sample index")
    p.add_argument("--repo", help="adaptive-init repository JSON to load")
    p.add_argument("--save-repo", help="write repository incl. this run")
    p.add_argument("--write-model", help="write the learned machine (.fsm)")
    p.add_argument("--write-dot", help="write the learned machine as GraphViz dot")
    _add_run_args(p)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("compare", help="adaptive vs non-adaptive over random orders")
    _add_model_args(p)
    p.add_argument("--sample", required=True)
    p.add_argument("--orders", type=int, default=20)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--no-figures", action="store_true")
    _add_run_args(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("order-effect", help="repeat two fixed orders with fresh draws")
    _add_model_args(p)
    p.add_argument("--sample", required=True)
    p.add_argument("--order-best", required=True)
    p.add_argument("--order-worst", required=True)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--out", required=True)
    p.add_argument("--no-figures", action="store_true")
    _add_run_args(p)
    p.set_defaults(func=cmd_order_effect)

    p = sub.add_parser("correlate", help="Pearson correlation of D with cost metrics")
    p.add_argument("--csv", required=True, help="compare.csv from a compare run")
    p.add_argument("--out", required=True)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("score-order", help="heuristic score D of a learning order")
    p.add_argument("--model", required=True)
    p.add_argument("--sample", required=True)
    p.add_argument("--order", required=True, help="order JSON (list of ids)")
    p.set_defaults(func=cmd_score_order)

    p = sub.add_parser("improvement", help="improvement percentage (1 - m/m')*100")
    p.add_argument("value", type=float)
    p.add_argument("baseline", type=float)
    p.set_defaults(func=cmd_improvement)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except INTERNAL_ERRORS as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return INTERNAL_ERROR
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
