"""Shared test fixtures: small machines, generators, brute-force oracles."""

import itertools
import random

from plstar.mealy import MealyMachine, run


def toggle(input_symbol: str = "a", low: str = "0", high: str = "1") -> MealyMachine:
    """Two states alternating on one input: q0 -x/low-> q1 -x/high-> q0."""
    return MealyMachine.build(
        "q0",
        (input_symbol,),
        {
            ("q0", input_symbol): ("q1", low),
            ("q1", input_symbol): ("q0", high),
        },
    )


def cycle_machine(input_symbol: str, length: int, fire: str = "1", idle: str = "0") -> MealyMachine:
    """Counter emitting ``fire`` on every ``length``-th input, else ``idle``."""
    transitions = {}
    for i in range(length):
        out = fire if i == length - 1 else idle
        transitions[(f"c{i}", input_symbol)] = (f"c{(i + 1) % length}", out)
    return MealyMachine.build("c0", (input_symbol,), transitions)


def random_machine(
    rnd: random.Random,
    n_states: int,
    inputs,
    outputs=("0", "1"),
) -> MealyMachine:
    """Random total machine where every state is reachable by construction."""
    states = [f"s{i}" for i in range(n_states)]
    transitions = {}
    for i, state in enumerate(states):
        for k, symbol in enumerate(inputs):
            if i + 1 < n_states and k == 0:
                target = states[i + 1]  # spine keeps all states reachable
            else:
                target = rnd.choice(states)
            transitions[(state, symbol)] = (target, rnd.choice(outputs))
    return MealyMachine(
        states=tuple(states),
        initial=states[0],
        inputs=tuple(inputs),
        outputs=tuple(outputs),
        transitions=transitions,
    )


def all_words(alphabet, max_len: int):
    for length in range(max_len + 1):
        yield from itertools.product(alphabet, repeat=length)


def brute_force_counterexamples(a: MealyMachine, b: MealyMachine, max_len: int):
    """Every word up to ``max_len`` on which the machines disagree."""
    return [w for w in all_words(a.inputs, max_len) if run(a, w) != run(b, w)]


def minimize(m: MealyMachine) -> MealyMachine:
    """Reachable quotient by exact behavioral equivalence of states.

    Moore-style refinement: start from single-input output signatures and
    split blocks by successor blocks until stable.
    """
    reachable = [m.initial]
    seen = {m.initial}
    for state in reachable:
        for symbol in m.inputs:
            nxt = m.step_map[state][symbol][0]
            if nxt not in seen:
                seen.add(nxt)
                reachable.append(nxt)
    block = {s: tuple(m.step_map[s][a][1] for a in m.inputs) for s in reachable}
    while True:
        refined = {
            s: (block[s], tuple(block[m.step_map[s][a][0]] for a in m.inputs))
            for s in reachable
        }
        if len(set(refined.values())) == len(set(block.values())):
            break
        block = refined
    names = {}
    for s in reachable:
        if block[s] not in names:
            names[block[s]] = f"m{len(names)}"
    transitions = {}
    for s in reachable:
        for a in m.inputs:
            nxt, out = m.step_map[s][a]
            transitions[(names[block[s]], a)] = (names[block[nxt]], out)
    return MealyMachine.build(names[block[m.initial]], m.inputs, transitions)


def assert_behaviorally_equal(a: MealyMachine, b: MealyMachine, max_len: int):
    for w in all_words(a.inputs, max_len):
        assert run(a, w) == run(b, w), f"disagree on {w}"


__all__ = [
    "toggle",
    "cycle_machine",
    "random_machine",
    "all_words",
    "brute_force_counterexamples",
    "minimize",
    "assert_behaviorally_equal",
    "run",
]
