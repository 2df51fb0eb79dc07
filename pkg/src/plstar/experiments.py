"""Experiment harness: product resolution, seeded randomization, and the
compare / order-effect / correlation study designs.

Every random draw comes from a named substream of the experiment seed, keyed
by product id (and repetition, where applicable) but never by learning order.
Both learning arms of a comparison therefore see identical alphabet
permutations and initial-sequence shuffles, and the non-adaptive arm's
metrics are provably order-invariant, which the runner asserts.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

from . import rng
from .adaptive import (
    FamilyResult,
    OtRepository,
    generate_orders,
    learn_family,
    order_score,
)
from .learning import TableInit
from .mealy import MealyMachine, compose, read_fsm_file
from .oracles import make_oracle
from .spl import (
    Configuration,
    FeatureModel,
    FeaturedTransitionSystem,
    configuration_from_json,
    configuration_to_json,
    derive,
    is_valid,
    product_alphabet,
)
from .stats import (
    describe,
    improvement_percentage,
    paired_t_one_sided,
    pearson,
    unpaired_t_two_sided,
)

METRIC_FIELDS = (
    "rounds",
    "mq_resets",
    "mq_symbols",
    "eq_resets",
    "eq_symbols",
    "total_resets",
    "total_symbols",
)

COMPARE_HEADER = (
    ("order_id", "order", "d_score")
    + tuple(f"pl_{m}" for m in METRIC_FIELDS)
    + tuple(f"na_{m}" for m in METRIC_FIELDS)
)


# --------------------------------------------------------------------------
# Product sources
# --------------------------------------------------------------------------

class FtsSource:
    """Products derived by projecting a featured transition system."""

    def __init__(self, fts: FeaturedTransitionSystem):
        self.fts = fts

    def alphabet(self, config: Configuration) -> tuple[str, ...]:
        return product_alphabet(self.fts, config)

    def machine(self, config: Configuration) -> MealyMachine:
        return derive(self.fts, config)


class ComponentSource:
    """Products built by composing one component machine per feature.

    The directory holds ``<feature>.fsm`` files; features without a file
    contribute neither behavior nor alphabet.  Composition follows the
    feature model's declaration order.
    """

    def __init__(self, fm: FeatureModel, components: dict[str, MealyMachine]):
        self.fm = fm
        unknown = set(components) - set(fm.features)
        if unknown:
            raise ValueError(f"components for unknown features {sorted(unknown)}")
        self.components = components
        self.feature_order = [f for f in fm.order if f in components]

    @classmethod
    def from_directory(cls, fm: FeatureModel, directory) -> "ComponentSource":
        components = {}
        for name in sorted(os.listdir(directory)):
            if name.endswith(".fsm"):
                feature = name[: -len(".fsm")]
                components[feature] = read_fsm_file(os.path.join(directory, name))
        return cls(fm, components)

    def _selected(self, config: Configuration) -> list[str]:
        return [f for f in self.feature_order if f in config.selected]

    def alphabet(self, config: Configuration) -> tuple[str, ...]:
        symbols: list[str] = []
        for feature in self._selected(config):
            symbols.extend(self.components[feature].inputs)
        return tuple(symbols)

    def machine(self, config: Configuration) -> MealyMachine:
        return compose([self.components[f] for f in self._selected(config)])


@dataclass(frozen=True)
class ProductSpec:
    product_id: int
    config: Configuration
    alphabet: tuple[str, ...]
    machine: MealyMachine


def resolve_products(source, sample: list[Configuration]) -> list[ProductSpec]:
    return [
        ProductSpec(
            product_id=i,
            config=config,
            alphabet=source.alphabet(config),
            machine=source.machine(config),
        )
        for i, config in enumerate(sample)
    ]


# --------------------------------------------------------------------------
# Randomization
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Randomization:
    """Which exogenous orders are randomized (all on by default)."""

    alphabet: bool = True
    prefixes: bool = True
    suffixes: bool = True

    @classmethod
    def parse(cls, text: str) -> "Randomization":
        if text == "none":
            return cls(False, False, False)
        parts = {p.strip() for p in text.split(",") if p.strip()}
        unknown = parts - {"alphabet", "prefixes", "suffixes"}
        if unknown:
            raise ValueError(f"unknown randomization sources {sorted(unknown)}")
        return cls(
            alphabet="alphabet" in parts,
            prefixes="prefixes" in parts,
            suffixes="suffixes" in parts,
        )


def draw_alphabet(seed: int, scope: str, spec: ProductSpec, plan: Randomization):
    if not plan.alphabet:
        return spec.alphabet
    stream = rng.substream(seed, f"{scope}alphabet/{spec.product_id}")
    order = list(spec.alphabet)
    stream.shuffle(order)
    return tuple(order)


def shuffle_init(seed: int, scope: str, product_id: int, plan: Randomization, init: TableInit) -> TableInit:
    prefixes = list(init.prefixes)
    suffixes = list(init.suffixes)
    if plan.prefixes:
        rng.substream(seed, f"{scope}prefixes/{product_id}").shuffle(prefixes)
    if plan.suffixes:
        rng.substream(seed, f"{scope}suffixes/{product_id}").shuffle(suffixes)
    return TableInit(prefixes=tuple(prefixes), suffixes=tuple(suffixes))


@dataclass(frozen=True)
class OracleConfig:
    kind: str = "wp"  # "wp" | "perfect"
    depth: str | int = 2  # "auto" or a fixed lookahead floor


def run_family(
    order,
    specs: list[ProductSpec],
    seed: int,
    plan: Randomization,
    oracle_cfg: OracleConfig,
    adaptive: bool,
    scope: str = "",
    repository: OtRepository | None = None,
) -> FamilyResult:
    """One family run with per-product seeded draws.

    ``scope`` prefixes the substream names; the compare design uses one scope
    for every order and arm (so draws depend only on the product), while the
    order-effect design scopes per repetition for fresh draws.
    """
    products = {}
    for spec in specs:
        alphabet = draw_alphabet(seed, scope, spec, plan)
        products[spec.product_id] = (alphabet, spec.machine)

    def factory(machine: MealyMachine):
        return make_oracle(
            oracle_cfg.kind,
            machine,
            depth=oracle_cfg.depth,
            known_sul_states=len(machine.states),
        )

    def transform(product_id: int, init: TableInit) -> TableInit:
        return shuffle_init(seed, scope, product_id, plan, init)

    return learn_family(
        order,
        products,
        factory,
        adaptive=adaptive,
        init_transform=transform,
        repository=repository,
    )


# --------------------------------------------------------------------------
# Comparison over random orders
# --------------------------------------------------------------------------

def _metric_values(metrics) -> dict[str, int]:
    return {name: getattr(metrics, name) for name in METRIC_FIELDS}


@dataclass
class CompareRow:
    order_id: int
    order: tuple[int, ...]
    d_score: float
    adaptive: dict[str, int]
    non_adaptive: dict[str, int]


@dataclass
class CompareOutcome:
    rows: list[CompareRow]
    per_product_non_adaptive: dict[int, dict[str, int]] = field(default_factory=dict)

    def column(self, arm: str, metric: str) -> list[float]:
        key = "adaptive" if arm == "pl" else "non_adaptive"
        return [float(getattr(row, key)[metric]) for row in self.rows]

    def d_scores(self) -> list[float]:
        return [row.d_score for row in self.rows]


def _compare_one_order(task):
    (order_id, order, specs, d_score, seed, plan, oracle_cfg, adaptive_only) = task
    adaptive_result = run_family(order, specs, seed, plan, oracle_cfg, adaptive=True)
    if adaptive_only:
        na_metrics = {name: 0 for name in METRIC_FIELDS}
        per_product = None
    else:
        na_result = run_family(order, specs, seed, plan, oracle_cfg, adaptive=False)
        per_product = {
            run.product_id: _metric_values(run.result.metrics)
            for run in na_result.runs
        }
        na_metrics = _metric_values(na_result.totals)
    row = CompareRow(
        order_id=order_id,
        order=order,
        d_score=d_score,
        adaptive=_metric_values(adaptive_result.totals),
        non_adaptive=na_metrics,
    )
    return row, per_product


def run_compare(
    specs: list[ProductSpec],
    fm: FeatureModel,
    sample: list[Configuration],
    n_orders: int,
    seed: int,
    plan: Randomization,
    oracle_cfg: OracleConfig,
    adaptive_only: bool = False,
    jobs: int = 1,
    on_row=None,
) -> CompareOutcome:
    """Learn the whole sample under ``n_orders`` random orders with both the
    adaptive and the non-adaptive method (identical draws for both arms).

    With ``jobs`` > 1 the orders fan out over a process pool; results are
    merged in order-id order, so the outcome is scheduling-independent.
    ``on_row`` is invoked with each completed row in that order, which lets
    callers flush partial output before a later order can fail.
    """
    orders = generate_orders(len(specs), n_orders, rng.substream(seed, "orders"))
    tasks = [
        (
            order_id,
            order,
            specs,
            order_score(order, fm, sample).score,
            seed,
            plan,
            oracle_cfg,
            adaptive_only,
        )
        for order_id, order in enumerate(orders)
    ]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = pool.map(_compare_one_order, tasks)
            outcome = _collect_compare(results, on_row)
    else:
        outcome = _collect_compare(
            (_compare_one_order(task) for task in tasks), on_row
        )
    return outcome


def _collect_compare(results, on_row) -> CompareOutcome:
    outcome = CompareOutcome(rows=[])
    na_reference: dict[int, dict[str, int]] | None = None
    for row, per_product in results:
        if per_product is not None:
            if na_reference is None:
                na_reference = per_product
                outcome.per_product_non_adaptive = per_product
            elif per_product != na_reference:
                raise AssertionError(
                    "non-adaptive metrics changed across orders; "
                    "randomization draws leaked order state"
                )
        outcome.rows.append(row)
        if on_row is not None:
            on_row(row)
    return outcome


@dataclass
class SummaryLine:
    metric: str
    pl_mean: float
    pl_std: float
    na_mean: float
    improvement_pct: float
    t_statistic: float | None
    p_value: float | None


def summarize_compare(outcome: CompareOutcome) -> list[SummaryLine]:
    lines = []
    tested = {"rounds", "total_resets", "total_symbols"}
    for metric in METRIC_FIELDS:
        pl = outcome.column("pl", metric)
        na = outcome.column("na", metric)
        if len(pl) >= 2:
            pl_mean, pl_std = describe(pl)
        else:
            pl_mean, pl_std = pl[0], 0.0
        na_mean = sum(na) / len(na)
        improvement = (
            improvement_percentage(pl_mean, na_mean) if na_mean else float("nan")
        )
        t_stat = p_val = None
        if metric in tested:
            try:
                res = paired_t_one_sided(pl, na)
                t_stat, p_val = res.statistic, res.p_value
            except ValueError:
                pass  # degenerate series (e.g. single-product sample)
        lines.append(
            SummaryLine(metric, pl_mean, pl_std, na_mean, improvement, t_stat, p_val)
        )
    return lines


# --------------------------------------------------------------------------
# Order effect (repeated runs of two fixed orders)
# --------------------------------------------------------------------------

@dataclass
class OrderEffectOutcome:
    rows: list[tuple[str, int, dict[str, int]]]  # (label, repetition, metrics)
    tests: dict[str, object]

    def column(self, label: str, metric: str) -> list[float]:
        return [float(m[metric]) for lab, _, m in self.rows if lab == label]


def run_order_effect(
    specs: list[ProductSpec],
    order_a,
    order_b,
    repetitions: int,
    seed: int,
    plan: Randomization,
    oracle_cfg: OracleConfig,
    labels: tuple[str, str] = ("order1", "order2"),
    on_row=None,
) -> OrderEffectOutcome:
    """Adaptive learning repeated with fresh draws per repetition."""
    if repetitions < 2:
        raise ValueError("order-effect needs at least 2 repetitions")
    rows = []
    for label, order in zip(labels, (order_a, order_b)):
        for rep in range(repetitions):
            result = run_family(
                order, specs, seed, plan, oracle_cfg,
                adaptive=True, scope=f"rep{rep}/",
            )
            rows.append((label, rep, _metric_values(result.totals)))
            if on_row is not None:
                on_row(rows[-1])
    outcome = OrderEffectOutcome(rows=rows, tests={})
    for metric in ("rounds", "total_resets", "total_symbols"):
        a = outcome.column(labels[0], metric)
        b = outcome.column(labels[1], metric)
        try:
            outcome.tests[metric] = unpaired_t_two_sided(a, b)
        except ValueError as exc:
            outcome.tests[metric] = exc
    return outcome


# --------------------------------------------------------------------------
# Correlation of D with cost metrics
# --------------------------------------------------------------------------

def correlate_columns(d_scores, columns: dict[str, list[float]]):
    return {metric: pearson(d_scores, values) for metric, values in columns.items()}


# --------------------------------------------------------------------------
# File I/O
# --------------------------------------------------------------------------

def save_sample(fm: FeatureModel, sample: list[Configuration], path) -> None:
    doc = [configuration_to_json(fm, config) for config in sample]
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(doc, handle, indent=2)


def load_sample(fm: FeatureModel, path) -> list[Configuration]:
    with open(path, encoding="utf-8") as handle:
        doc = json.load(handle)
    sample = [configuration_from_json(fm, names) for names in doc]
    for config in sample:
        if not is_valid(fm, config):
            raise ValueError(
                f"sample contains invalid configuration {sorted(config.selected)}"
            )
    if len({c.selected for c in sample}) != len(sample):
        raise ValueError("sample contains duplicate configurations")
    return sample


def load_order(path, sample_size: int) -> tuple[int, ...]:
    with open(path, encoding="utf-8") as handle:
        ids = tuple(json.load(handle))
    if sorted(ids) != list(range(sample_size)):
        raise ValueError(f"order file {path} is not a permutation of the sample")
    return ids


def _format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return " ".join(str(v) for v in value)
    return str(value)


def write_csv(path, header, rows) -> None:
    """UTF-8, header row, LF newlines; floats via repr so identical runs
    produce byte-identical files."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(cell) for cell in row])


class CsvStream:
    """CSV writer that flushes after every row, so a run aborted by a
    mid-experiment error still leaves the completed rows on disk."""

    def __init__(self, path, header):
        self._handle = open(path, "w", encoding="utf-8", newline="")
        self._writer = csv.writer(self._handle, lineterminator="\n")
        self._writer.writerow(header)
        self._handle.flush()

    def append(self, row) -> None:
        self._writer.writerow([_format_cell(cell) for cell in row])
        self._handle.flush()

    def close(self) -> None:
        self._handle.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


def compare_row_tuple(row: CompareRow):
    return (
        (row.order_id, row.order, row.d_score)
        + tuple(row.adaptive[m] for m in METRIC_FIELDS)
        + tuple(row.non_adaptive[m] for m in METRIC_FIELDS)
    )


def compare_rows_for_csv(outcome: CompareOutcome):
    for row in outcome.rows:
        yield compare_row_tuple(row)


def summary_rows_for_csv(lines: list[SummaryLine]):
    for line in lines:
        yield (
            line.metric,
            line.pl_mean,
            line.pl_std,
            line.na_mean,
            line.improvement_pct,
            "" if line.t_statistic is None else line.t_statistic,
            "" if line.p_value is None else line.p_value,
        )
