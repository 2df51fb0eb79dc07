"""Equivalence oracles: the Wp conformance oracle and a perfect oracle.

The Wp suite is built from the hypothesis alone: a BFS state cover Q, the
transition cover P = Q.I, a characterization set W assembled by partition
refinement, and per-state identification sets Wi.  Phase one exercises
Q.I^{<=d}.W, phase two (P \\ Q).I^{<=d}.Wi(reached state).  Suite execution
charges one reset plus the word length per executed test and stops at the
first disagreement, so failing rounds only pay for the tests actually run.
"""

from __future__ import annotations

import itertools
from collections import deque

from .mealy import AlphabetMismatch, MealyMachine, Word, equivalent, run, run_from, state_after


def auto_depth(hypothesis: MealyMachine, known_sul_states: int | None = None) -> int:
    """Lookahead depth guaranteeing completeness for SULs of known size.

    With ``known_sul_states`` = n the Wp suite at depth n - |hypothesis| is
    exhaustive for any SUL with at most n states; without the bound the
    conservative default is 0.
    """
    if known_sul_states is None:
        return 0
    return max(0, known_sul_states - len(hypothesis.states))


def state_cover(m: MealyMachine) -> dict[str, Word]:
    """Shortest access sequence per reachable state (BFS, alphabet order)."""
    cover: dict[str, Word] = {m.initial: ()}
    queue: deque[str] = deque([m.initial])
    while queue:
        state = queue.popleft()
        for symbol in m.inputs:
            nxt = m.step_map[state][symbol][0]
            if nxt not in cover:
                cover[nxt] = cover[state] + (symbol,)
                queue.append(nxt)
    return cover


def _distinguishing_word(m: MealyMachine, s: str, t: str) -> Word | None:
    """Shortest word telling states ``s`` and ``t`` apart, if any."""
    seen = {(s, t)}
    queue: deque[tuple[str, str, Word]] = deque([(s, t, ())])
    while queue:
        a, b, path = queue.popleft()
        for symbol in m.inputs:
            na, oa = m.step_map[a][symbol]
            nb, ob = m.step_map[b][symbol]
            if oa != ob:
                return path + (symbol,)
            if (na, nb) not in seen:
                seen.add((na, nb))
                queue.append((na, nb, path + (symbol,)))
    return None


def characterization_set(m: MealyMachine) -> list[Word]:
    """Suffixes separating every pair of distinguishable states.

    The partition over states is refined by output signatures on the current
    suffix set; while a block still holds a distinguishable pair, the
    shortest splitter for its first such pair is appended.  Single-state
    machines keep the non-empty convention W = {first input symbol}.
    """
    states = list(state_cover(m))  # reachable states in BFS order
    if len(states) == 1:
        return [(m.inputs[0],)]
    suffixes: list[Word] = []
    while True:
        blocks: dict[tuple[Word, ...], list[str]] = {}
        for s in states:
            signature = tuple(run_from(m, s, w) for w in suffixes)
            blocks.setdefault(signature, []).append(s)
        splitter: Word | None = None
        for block in blocks.values():
            if len(block) < 2:
                continue
            for s, t in itertools.combinations(block, 2):
                word = _distinguishing_word(m, s, t)
                if word is not None:
                    splitter = word
                    break
            if splitter is not None:
                break
        if splitter is None:
            if not suffixes:  # all states equivalent; keep the suite non-empty
                suffixes.append((m.inputs[0],))
            return suffixes
        suffixes.append(splitter)


def identification_sets(
    m: MealyMachine, w_set: list[Word]
) -> dict[str, tuple[Word, ...]]:
    """Greedy per-state subset of W distinguishing the state from all others
    (up to behavioral equivalence)."""
    states = list(state_cover(m))
    responses = {
        s: {w: run_from(m, s, w) for w in w_set} for s in states
    }
    sets: dict[str, tuple[Word, ...]] = {}
    for s in states:
        chosen: list[Word] = []
        for t in states:
            if t == s:
                continue
            if any(responses[s][w] != responses[t][w] for w in chosen):
                continue
            for w in w_set:
                if responses[s][w] != responses[t][w]:
                    chosen.append(w)
                    break
        sets[s] = tuple(chosen) if chosen else tuple(w_set[:1])
    return sets


def _middles(alphabet: tuple[str, ...], depth: int):
    """All words of length 0..depth, by length then alphabet order."""
    for length in range(depth + 1):
        yield from itertools.product(alphabet, repeat=length)


def wp_suite_words(hypothesis: MealyMachine, depth: int):
    """Generate the Wp suite lazily, duplicates removed, first occurrence
    order preserved."""
    cover = state_cover(hypothesis)
    access = list(cover.values())
    access_set = set(access)
    w_set = characterization_set(hypothesis)
    ident = identification_sets(hypothesis, w_set)
    seen: set[Word] = set()
    for q in access:
        for middle in _middles(hypothesis.inputs, depth):
            for w in w_set:
                test = q + middle + w
                if test not in seen:
                    seen.add(test)
                    yield test
    for q in access:
        for symbol in hypothesis.inputs:
            p = q + (symbol,)
            if p in access_set:
                continue
            for middle in _middles(hypothesis.inputs, depth):
                target = state_after(hypothesis, p + middle)
                for w in ident[target]:
                    test = p + middle + w
                    if test not in seen:
                        seen.add(test)
                        yield test


def wp_test_suite(hypothesis: MealyMachine, depth: int) -> list[Word]:
    """Materialized Wp suite (use the generator form for large depths)."""
    return list(wp_suite_words(hypothesis, depth))


class WpOracle:
    """Equivalence oracle executing the Wp suite against the SUL.

    ``depth_floor`` is the minimum lookahead; when the SUL state count is
    known (the white-box experiment setting) the effective depth per query is
    max(depth_floor, known - |hypothesis|), which keeps the suite complete
    while the floor preserves a realistic conformance-testing budget.
    """

    kind = "wp"

    def __init__(
        self,
        sul: MealyMachine,
        depth_floor: int = 0,
        known_sul_states: int | None = None,
    ):
        self.sul = sul
        self.depth_floor = depth_floor
        self.known_sul_states = known_sul_states
        self.resets = 0
        self.symbols = 0

    def effective_depth(self, hypothesis: MealyMachine) -> int:
        return max(self.depth_floor, auto_depth(hypothesis, self.known_sul_states))

    def find_counterexample(self, hypothesis: MealyMachine) -> Word | None:
        if set(hypothesis.inputs) != set(self.sul.inputs):
            raise AlphabetMismatch("hypothesis alphabet differs from the SUL's")
        depth = self.effective_depth(hypothesis)
        for test in wp_suite_words(hypothesis, depth):
            self.resets += 1
            self.symbols += len(test)
            if run(self.sul, test) != run(hypothesis, test):
                return test
        return None


class PerfectOracle:
    """White-box oracle delegating to the exact product-search equivalence
    check; charges one reset per query plus the counterexample length."""

    kind = "perfect"

    def __init__(self, sul: MealyMachine):
        self.sul = sul
        self.resets = 0
        self.symbols = 0

    def find_counterexample(self, hypothesis: MealyMachine) -> Word | None:
        cex = equivalent(hypothesis, self.sul)
        self.resets += 1
        self.symbols += len(cex) if cex is not None else 0
        return cex


def make_oracle(
    kind: str,
    sul: MealyMachine,
    depth: str | int = "auto",
    known_sul_states: int | None = None,
):
    """Oracle factory for the experiment harness.

    ``depth`` is either "auto" (pure completeness depth) or an integer floor.
    """
    if kind == "perfect":
        return PerfectOracle(sul)
    if kind == "wp":
        floor = 0 if depth == "auto" else int(depth)
        return WpOracle(sul, depth_floor=floor, known_sul_states=known_sul_states)
    raise ValueError(f"unknown oracle kind {kind!r}")
