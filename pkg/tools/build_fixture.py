#!/usr/bin/env python3
"""Build the synthetic SPL fixture and report its experiment characteristics.

Writes fixtures/sample_spl/{feature_model.json, components/*.fsm} and prints
the sample size, per-product state counts, and (with --measure) cost ratios
that the acceptance thresholds rely on.
"""

import argparse
import json
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from plstar.experiments import (
    ComponentSource,
    OracleConfig,
    Randomization,
    resolve_products,
    run_compare,
    summarize_compare,
)
from plstar.mealy import MealyMachine, write_fsm
from plstar.sampling import chvatal_sample, default_spec
from plstar.spl import feature_model_from_json
from plstar.stats import pearson

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), "..", "fixtures", "sample_spl")

FEATURE_MODEL = {
    "features": {
        "name": "root",
        "children": [
            {"name": "A", "kind": "mandatory", "children": [
                {"name": "D", "kind": "alternative", "group": "mode"},
                {"name": "E", "kind": "alternative", "group": "mode"},
            ]},
            {"name": "B", "kind": "optional"},
            {"name": "C", "kind": "mandatory", "children": [
                {"name": "F", "kind": "or", "group": "units"},
                {"name": "G", "kind": "or", "group": "units"},
                {"name": "H", "kind": "or", "group": "units"},
            ]},
        ],
    },
    "constraints": [],
}


def toggle(sym, outs=("0", "1")):
    return MealyMachine.build(
        "q0", (sym,), {("q0", sym): ("q1", outs[0]), ("q1", sym): ("q0", outs[1])}
    )


def cycle(sym, n, fire="1", idle="0"):
    trans = {}
    for i in range(n):
        trans[(f"c{i}", sym)] = (f"c{(i + 1) % n}", fire if i == n - 1 else idle)
    return MealyMachine.build("c0", (sym,), trans)


def latch(sym):
    return MealyMachine.build(
        "u0", (sym,), {("u0", sym): ("u1", "0"), ("u1", sym): ("u1", "1")}
    )


def with_status(machine, status_sym):
    """Add a read-only status input revealing the current state index."""
    trans = dict(machine.transitions)
    for i, state in enumerate(machine.states):
        trans[(state, status_sym)] = (state, str(i))
    return MealyMachine.build(machine.initial, machine.inputs + (status_sym,), trans)


def build_components():
    return {
        "root": with_status(cycle("r", 2), "rs"),
        "B": MealyMachine.build("q0", ("b",), {("q0", "b"): ("q0", "1")}),
        "D": toggle("d"),
        "E": cycle("e", 3),
        "F": toggle("f"),
        "G": latch("g"),
        "H": cycle("h", 2),
    }


def write_fixture():
    os.makedirs(os.path.join(FIXTURE_DIR, "components"), exist_ok=True)
    with open(os.path.join(FIXTURE_DIR, "feature_model.json"), "w") as handle:
        json.dump(FEATURE_MODEL, handle, indent=2)
    for feature, machine in build_components().items():
        path = os.path.join(FIXTURE_DIR, "components", f"{feature}.fsm")
        with open(path, "w") as handle:
            handle.write(write_fsm(machine))


def report(measure: bool, n_orders: int, depth):
    fm = feature_model_from_json(FEATURE_MODEL)
    sample = chvatal_sample(fm, default_spec(fm, t=3))
    source = ComponentSource(fm, build_components())
    specs = resolve_products(source, sample)
    sizes = [len(s.machine.states) for s in specs]
    print(f"non-mandatory features: {fm.non_mandatory_features()}")
    print(f"sample size: {len(sample)}")
    print(f"product states: min={min(sizes)} max={max(sizes)} all={sorted(sizes)}")
    print(f"product alphabets: {[len(s.alphabet) for s in specs]}")
    if not measure:
        return
    plan = Randomization()
    cfg = OracleConfig(kind="wp", depth=depth)
    t0 = time.time()
    outcome = run_compare(specs, fm, sample, n_orders, seed=1, plan=plan, oracle_cfg=cfg)
    dt = time.time() - t0
    print(f"compare {n_orders} orders took {dt:.1f}s ({dt/n_orders:.1f}s/order both arms)")
    for line in summarize_compare(outcome):
        p = "" if line.p_value is None else f" p={line.p_value:.3e}"
        print(
            f"  {line.metric:13s} pl={line.pl_mean:12.1f}+-{line.pl_std:10.1f} "
            f"na={line.na_mean:12.1f} improv={line.improvement_pct:+6.2f}%{p}"
        )
    pl_eq = sum(outcome.column("pl", "eq_resets"))
    pl_mq = sum(outcome.column("pl", "mq_resets"))
    na_eq = sum(outcome.column("na", "eq_resets"))
    na_mq = sum(outcome.column("na", "mq_resets"))
    print(f"  EQ/MQ resets ratio: pl={pl_eq/pl_mq:.1f} na={na_eq/na_mq:.1f}")
    wins = sum(
        1 for row in outcome.rows
        if row.adaptive["rounds"] < row.non_adaptive["rounds"]
    )
    print(f"  orders with fewer pl rounds: {wins}/{len(outcome.rows)}")
    d = outcome.d_scores()
    for metric in ("total_resets", "total_symbols"):
        res = pearson(d, outcome.column("pl", metric))
        print(f"  pearson D vs {metric}: r={res.statistic:+.3f} p={res.p_value:.3e}")


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--measure", action="store_true")
    parser.add_argument("--orders", type=int, default=10)
    parser.add_argument("--depth", default="2")
    parser.add_argument("--write", action="store_true")
    args = parser.parse_args()
    depth = args.depth if args.depth == "auto" else int(args.depth)
    if args.write:
        write_fixture()
        print(f"fixture written to {FIXTURE_DIR}")
    report(args.measure, args.orders, depth)
