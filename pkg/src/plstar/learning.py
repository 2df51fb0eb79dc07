"""Observation tables and the L* learner for Mealy machines.

The table (S, E, T) holds transfer sequences S (prefix-closed, containing the
empty word), separating suffixes E (always a superset of the single-symbol
suffixes), and observed output suffixes T over (S union S.I) x E.  Every cell
is filled by exactly one membership query for the concatenated word, with no
caching or cross-cell reuse, so the query counters are an exact cost model.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .mealy import MealyMachine, Word, run

EMPTY: Word = ()


class RowNotPresent(KeyError):
    pass


class TableNotClosed(ValueError):
    pass


class TableNotConsistent(ValueError):
    pass


class NotACounterexample(ValueError):
    """The equivalence oracle returned a word both machines agree on."""


class RoundLimitExceeded(RuntimeError):
    """The learner posed far more equivalence queries than any correct run
    could need; indicates a bug in table handling or the oracle."""


@dataclass
class LearningMetrics:
    """Cost counters of one learning run (or a sum of runs)."""

    rounds: int = 0
    mq_resets: int = 0
    mq_symbols: int = 0
    eq_resets: int = 0
    eq_symbols: int = 0

    @property
    def total_resets(self) -> int:
        return self.mq_resets + self.eq_resets

    @property
    def total_symbols(self) -> int:
        return self.mq_symbols + self.eq_symbols

    def add(self, other: "LearningMetrics") -> None:
        self.rounds += other.rounds
        self.mq_resets += other.mq_resets
        self.mq_symbols += other.mq_symbols
        self.eq_resets += other.eq_resets
        self.eq_symbols += other.eq_symbols


class MembershipOracle:
    """Answers output queries against a system under learning.

    Every query costs one reset plus one symbol per input; the counters only
    ever increase.
    """

    def __init__(self, sul: MealyMachine):
        self.sul = sul
        self.resets = 0
        self.symbols = 0

    @property
    def alphabet(self) -> tuple[str, ...]:
        return self.sul.inputs

    def query(self, word: Word) -> Word:
        self.resets += 1
        self.symbols += len(word)
        return run(self.sul, word)


class ObservationTable:
    """(S, E, T) with deterministic scan orders.

    S and E keep insertion order; rows are scanned in S order crossed with
    alphabet order, which makes every learner action reproducible for a given
    alphabet permutation.
    """

    def __init__(self, alphabet, prefixes, suffixes, oracle: MembershipOracle):
        self.alphabet: tuple[str, ...] = tuple(alphabet)
        if not self.alphabet:
            raise ValueError("alphabet must be non-empty")
        self.oracle = oracle
        self.prefixes: list[Word] = []
        self.suffixes: list[Word] = []
        self.entries: dict[tuple[Word, Word], Word] = {}
        seen_prefix: set[Word] = set()
        for s in prefixes:
            s = tuple(s)
            if s not in seen_prefix:
                seen_prefix.add(s)
                self.prefixes.append(s)
        if EMPTY not in seen_prefix:
            raise ValueError("prefix set must contain the empty word")
        for s in self.prefixes:
            for i in range(len(s)):
                if s[:i] not in seen_prefix:
                    raise ValueError(f"prefix set not prefix-closed at {s[:i]!r}")
        seen_suffix: set[Word] = set()
        for e in suffixes:
            e = tuple(e)
            if not e:
                raise ValueError("suffixes must be non-empty words")
            if e not in seen_suffix:
                seen_suffix.add(e)
                self.suffixes.append(e)
        missing = set((a,) for a in self.alphabet) - seen_suffix
        if missing:
            raise ValueError(f"suffix set must contain every input symbol: {missing}")
        self.fill()

    # -- queries ------------------------------------------------------------

    def all_rows(self) -> list[Word]:
        """S then the S.I extensions, deduplicated, in scan order."""
        rows = list(self.prefixes)
        present = set(rows)
        for s in self.prefixes:
            for a in self.alphabet:
                extended = s + (a,)
                if extended not in present:
                    present.add(extended)
                    rows.append(extended)
        return rows

    def fill(self) -> None:
        """Totalize T with one membership query per missing cell."""
        for s in self.all_rows():
            for e in self.suffixes:
                if (s, e) not in self.entries:
                    outputs = self.oracle.query(s + e)
                    self.entries[(s, e)] = outputs[len(s):]

    def row(self, s: Word) -> tuple[Word, ...]:
        try:
            return tuple(self.entries[(s, e)] for e in self.suffixes)
        except KeyError:
            raise RowNotPresent(f"no row for {s!r}") from None

    # -- table conditions ----------------------------------------------------

    def find_unclosed(self) -> Word | None:
        """First extension in S.I (S order x alphabet order) whose row does
        not occur among the rows of S."""
        prefix_rows = {self.row(s) for s in self.prefixes}
        prefix_set = set(self.prefixes)
        for s in self.prefixes:
            for a in self.alphabet:
                extended = s + (a,)
                if extended in prefix_set:
                    continue
                if self.row(extended) not in prefix_rows:
                    return extended
        return None

    def find_inconsistent(self) -> tuple[Word, Word, str, Word] | None:
        """First (s1, s2, v, e1) with row(s1) = row(s2) but differing
        extension entries, scanning S pairs in order, then v, then e1."""
        rows = [self.row(s) for s in self.prefixes]
        for i, s1 in enumerate(self.prefixes):
            for j in range(i + 1, len(self.prefixes)):
                if rows[i] != rows[j]:
                    continue
                s2 = self.prefixes[j]
                for v in self.alphabet:
                    for e1 in self.suffixes:
                        if self.entries[(s1 + (v,), e1)] != self.entries[(s2 + (v,), e1)]:
                            return s1, s2, v, e1
        return None

    # -- mutation -------------------------------------------------------------

    def add_prefix(self, s: Word) -> None:
        """Add ``s`` and any missing ancestors to S, then re-totalize."""
        present = set(self.prefixes)
        for i in range(1, len(s) + 1):
            p = s[:i]
            if p not in present:
                present.add(p)
                self.prefixes.append(p)
        self.fill()

    def add_suffix(self, e: Word) -> None:
        if e not in self.suffixes:
            self.suffixes.append(e)
        self.fill()

    # -- hypothesis ------------------------------------------------------------

    def build_hypothesis(self) -> MealyMachine:
        """Quotient machine of the closed and consistent table."""
        unclosed = self.find_unclosed()
        if unclosed is not None:
            raise TableNotClosed(f"row {unclosed!r} missing from S")
        witness = self.find_inconsistent()
        if witness is not None:
            raise TableNotConsistent(f"witness {witness!r}")
        state_of: dict[tuple[Word, ...], str] = {}
        access: list[Word] = []
        for s in self.prefixes:
            r = self.row(s)
            if r not in state_of:
                state_of[r] = f"q{len(state_of)}"
                access.append(s)
        transitions: dict[tuple[str, str], tuple[str, str]] = {}
        outputs: list[str] = []
        for s in access:
            src = state_of[self.row(s)]
            for a in self.alphabet:
                dst = state_of[self.row(s + (a,))]
                out = self.entries[(s, (a,))][0]
                transitions[(src, a)] = (dst, out)
                if out not in outputs:
                    outputs.append(out)
        return MealyMachine(
            states=tuple(state_of[self.row(s)] for s in access),
            initial=state_of[self.row(EMPTY)],
            inputs=self.alphabet,
            outputs=tuple(outputs),
            transitions=transitions,
        )

    def process_counterexample(self, cex: Word) -> None:
        """Fold a counterexample into the table by adding all its prefixes.

        Raises NotACounterexample when, after refilling, the table's own
        observations agree with the current hypothesis on ``cex`` (which
        means the equivalence oracle was unsound).
        """
        hypothesis = self.build_hypothesis()
        hyp_out = run(hypothesis, cex)
        self.add_prefix(cex)
        sul_out = tuple(
            self.entries[(cex[:i], (cex[i],))][0] for i in range(len(cex))
        )
        if hyp_out == sul_out:
            raise NotACounterexample(f"machines agree on {cex!r}")

    # -- serialization ----------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "alphabet": list(self.alphabet),
            "prefixes": [list(s) for s in self.prefixes],
            "suffixes": [list(e) for e in self.suffixes],
            "entries": [
                {"prefix": list(s), "suffix": list(e), "outputs": list(out)}
                for (s, e), out in self.entries.items()
            ],
        }


def table_snapshot_to_json(table: ObservationTable) -> str:
    return json.dumps(table.to_json(), indent=2)


@dataclass(frozen=True)
class TableInit:
    """Initial prefix and suffix sets for a learning run."""

    prefixes: tuple[Word, ...]
    suffixes: tuple[Word, ...]


def classic_init(alphabet) -> TableInit:
    """S = {empty word}, E = the input alphabet."""
    return TableInit(prefixes=(EMPTY,), suffixes=tuple((a,) for a in alphabet))


@dataclass
class LearnResult:
    machine: MealyMachine
    table: ObservationTable
    metrics: LearningMetrics


def lstar_learn(
    oracle: MembershipOracle,
    eq_oracle,
    init: TableInit | None = None,
    alphabet=None,
    max_rounds: int | None = None,
) -> LearnResult:
    """Learn the oracle's machine with L* in CloseFirst order.

    Each round resolves every closedness defect, then rechecks consistency
    (adding the witness suffix) until the table is closed and consistent,
    builds a hypothesis, and poses an equivalence query.  Counterexamples are
    folded in as prefixes.  ``alphabet`` defaults to the SUL's input order; a
    permutation of it changes scan orders but never the learned machine.
    """
    alphabet = tuple(alphabet) if alphabet is not None else oracle.alphabet
    if set(alphabet) != set(oracle.alphabet):
        raise ValueError("learning alphabet must match the SUL alphabet")
    if init is None:
        init = classic_init(alphabet)
    if max_rounds is None:
        max_rounds = max(10, 10 * len(oracle.sul.states))
    mq_resets0, mq_symbols0 = oracle.resets, oracle.symbols
    eq_resets0, eq_symbols0 = eq_oracle.resets, eq_oracle.symbols

    table = ObservationTable(alphabet, init.prefixes, init.suffixes, oracle)
    rounds = 0
    while True:
        while True:
            unclosed = table.find_unclosed()
            while unclosed is not None:
                table.add_prefix(unclosed)
                unclosed = table.find_unclosed()
            witness = table.find_inconsistent()
            if witness is None:
                break
            _, _, v, e1 = witness
            table.add_suffix((v,) + e1)
        hypothesis = table.build_hypothesis()
        rounds += 1
        if rounds > max_rounds:
            raise RoundLimitExceeded(f"no convergence after {max_rounds} rounds")
        cex = eq_oracle.find_counterexample(hypothesis)
        if cex is None:
            break
        table.process_counterexample(cex)

    metrics = LearningMetrics(
        rounds=rounds,
        mq_resets=oracle.resets - mq_resets0,
        mq_symbols=oracle.symbols - mq_symbols0,
        eq_resets=eq_oracle.resets - eq_resets0,
        eq_symbols=eq_oracle.symbols - eq_symbols0,
    )
    return LearnResult(machine=hypothesis, table=table, metrics=metrics)
