"""Adaptive family learning over an observation-table repository.

After each product is learned its final prefix and suffix sets are appended
to the repository.  The next product's table starts from every stored
sequence that fits its alphabet; only sequences are reused, never observed
outputs, since outputs differ between products.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .learning import (
    EMPTY,
    LearningMetrics,
    LearnResult,
    MembershipOracle,
    TableInit,
    Word,
    lstar_learn,
)
from .spl import Configuration, FeatureModel


class TooManyOrdersRequested(ValueError):
    pass


@dataclass(frozen=True)
class StoredTable:
    """Final prefix/suffix sets of one completed learning run."""

    product_id: int
    alphabet: tuple[str, ...]
    prefixes: tuple[Word, ...]
    suffixes: tuple[Word, ...]


@dataclass
class OtRepository:
    """Ordered store of the final observation tables of learned products."""

    tables: list[StoredTable] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.tables)

    def add(self, product_id: int, alphabet, prefixes, suffixes) -> None:
        self.tables.append(
            StoredTable(
                product_id=product_id,
                alphabet=tuple(alphabet),
                prefixes=tuple(tuple(s) for s in prefixes),
                suffixes=tuple(tuple(e) for e in suffixes),
            )
        )

    def to_json(self) -> list[dict]:
        return [
            {
                "productId": t.product_id,
                "alphabet": list(t.alphabet),
                "prefixes": [list(s) for s in t.prefixes],
                "suffixes": [list(e) for e in t.suffixes],
            }
            for t in self.tables
        ]

    @classmethod
    def from_json(cls, doc: list[dict]) -> "OtRepository":
        repo = cls()
        for entry in doc:
            repo.add(
                entry["productId"],
                entry["alphabet"],
                [tuple(s) for s in entry["prefixes"]],
                [tuple(e) for e in entry["suffixes"]],
            )
        return repo

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.to_json(), handle, indent=2)

    @classmethod
    def load(cls, path) -> "OtRepository":
        with open(path, encoding="utf-8") as handle:
            return cls.from_json(json.load(handle))


def filter_sequences(seqs, alphabet) -> set[Word]:
    """Sequences made only of symbols from ``alphabet``.

    Prefix-closed inputs stay prefix-closed: every prefix of a surviving
    sequence survives too.
    """
    allowed = set(alphabet)
    return {tuple(s) for s in seqs if all(symbol in allowed for symbol in s)}


def _sorted_words(words, alphabet) -> list[Word]:
    position = {symbol: i for i, symbol in enumerate(alphabet)}
    return sorted(words, key=lambda w: (len(w), tuple(position[s] for s in w)))


def adaptive_init(repo: OtRepository, alphabet) -> TableInit:
    """Initial table seeded from every repository sequence that fits the
    product's alphabet.

    The suffix set always starts from the alphabet itself, so an empty
    repository reproduces the non-adaptive initialization exactly.  Sequences
    are ordered by (length, alphabet order); the experiment layer may shuffle
    them afterwards.
    """
    alphabet = tuple(alphabet)
    prefixes: set[Word] = {EMPTY}
    suffixes: set[Word] = {(a,) for a in alphabet}
    for table in repo.tables:
        prefixes |= filter_sequences(table.prefixes, alphabet)
        suffixes |= filter_sequences(table.suffixes, alphabet)
    return TableInit(
        prefixes=tuple(_sorted_words(prefixes, alphabet)),
        suffixes=tuple(_sorted_words(suffixes, alphabet)),
    )


# --------------------------------------------------------------------------
# Learning orders and the order-quality heuristic
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LearningOrder:
    """A permutation of sample positions with its novelty profile.

    ``new_feature_counts[i]`` is the number of non-mandatory features of the
    i-th product that no earlier product in the order contains; ``score`` sums
    the reciprocals of the non-zero counts (zero counts contribute nothing).
    """

    product_ids: tuple[int, ...]
    new_feature_counts: tuple[int, ...]
    score: float


def order_score(
    order, fm: FeatureModel, sample: list[Configuration]
) -> LearningOrder:
    ids = tuple(order)
    if sorted(ids) != list(range(len(sample))):
        raise ValueError("order must be a permutation of sample positions")
    non_mandatory = set(fm.non_mandatory_features())
    seen: set[str] = set()
    counts: list[int] = []
    for pid in ids:
        features = sample[pid].selected & non_mandatory
        counts.append(len(features - seen))
        seen |= features
    score = math.fsum(1.0 / c for c in counts if c != 0)
    return LearningOrder(ids, tuple(counts), score)


def generate_orders(sample_size: int, count: int, rng) -> list[tuple[int, ...]]:
    """``count`` distinct uniformly drawn permutations of range(sample_size)."""
    if count > math.factorial(sample_size):
        raise TooManyOrdersRequested(
            f"{count} distinct orders requested but only "
            f"{math.factorial(sample_size)} exist"
        )
    orders: list[tuple[int, ...]] = []
    seen: set[tuple[int, ...]] = set()
    while len(orders) < count:
        perm = rng.permutation(sample_size)
        if perm not in seen:
            seen.add(perm)
            orders.append(perm)
    return orders


# --------------------------------------------------------------------------
# Family learning
# --------------------------------------------------------------------------

@dataclass
class ProductRun:
    product_id: int
    result: LearnResult


@dataclass
class FamilyResult:
    runs: list[ProductRun]
    totals: LearningMetrics

    def metrics_of(self, product_id: int) -> LearningMetrics:
        for run in self.runs:
            if run.product_id == product_id:
                return run.result.metrics
        raise KeyError(product_id)


def learn_family(
    order,
    products,
    oracle_factory,
    adaptive: bool = True,
    init_transform=None,
    repository: OtRepository | None = None,
) -> FamilyResult:
    """Learn every product of ``products`` in the given order.

    ``products`` maps each product id to an (alphabet, machine) pair;
    ``oracle_factory(machine)`` builds the equivalence oracle for one run.
    With ``adaptive`` the table of each run is initialized from the
    repository of all earlier runs; otherwise every run starts from scratch
    (the repository is still populated, which keeps both arms comparable).
    ``init_transform(product_id, init)`` may reorder the initial sequences,
    e.g. to apply seeded shuffles.  A pre-loaded ``repository`` resumes an
    interrupted family run: products already present are skipped.
    """
    repo = repository if repository is not None else OtRepository()
    done = {t.product_id for t in repo.tables}
    runs: list[ProductRun] = []
    totals = LearningMetrics()
    for product_id in order:
        if product_id in done:
            continue
        alphabet, machine = products[product_id]
        init = adaptive_init(repo if adaptive else OtRepository(), alphabet)
        if init_transform is not None:
            init = init_transform(product_id, init)
        mq = MembershipOracle(machine)
        result = lstar_learn(mq, oracle_factory(machine), init=init, alphabet=alphabet)
        repo.add(product_id, alphabet, result.table.prefixes, result.table.suffixes)
        runs.append(ProductRun(product_id=product_id, result=result))
        totals.add(result.metrics)
    return FamilyResult(runs=runs, totals=totals)
