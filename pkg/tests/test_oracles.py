import itertools
import random

import pytest

from helpers import minimize, random_machine, toggle
from plstar.mealy import MealyMachine, equivalent, run
from plstar.oracles import (
    PerfectOracle,
    WpOracle,
    auto_depth,
    characterization_set,
    identification_sets,
    make_oracle,
    state_cover,
    wp_test_suite,
)


def constant_machine(out: str = "0") -> MealyMachine:
    return MealyMachine.build("q0", ("a",), {("q0", "a"): ("q0", out)})


def test_auto_depth():
    h3 = random_machine(random.Random(0), 3, ("a",))
    assert auto_depth(h3, 5) == 2
    assert auto_depth(h3, 3) == 0
    assert auto_depth(h3, 2) == 0
    assert auto_depth(h3, None) == 0


def test_state_cover_shortest_access():
    m = toggle()
    cover = state_cover(m)
    assert cover == {"q0": (), "q1": ("a",)}


def test_characterization_set_single_state_convention():
    w = characterization_set(constant_machine())
    assert w == [("a",)]


def test_characterization_set_separates_all_pairs():
    rnd = random.Random(5)
    for _ in range(30):
        m = minimize(random_machine(rnd, rnd.randint(2, 6), ("a", "b")))
        w = characterization_set(m)
        cover = state_cover(m)
        for s, t in itertools.combinations(cover, 2):
            assert any(
                run(m, cover[s] + suffix)[len(cover[s]):]
                != run(m, cover[t] + suffix)[len(cover[t]):]
                for suffix in w
            ), f"{s} and {t} not separated"


def test_identification_sets_identify_each_state():
    rnd = random.Random(6)
    m = minimize(random_machine(rnd, 5, ("a", "b")))
    w = characterization_set(m)
    ident = identification_sets(m, w)
    cover = state_cover(m)
    for s in cover:
        for t in cover:
            if s == t:
                continue
            assert any(
                run(m, cover[s] + suffix)[len(cover[s]):]
                != run(m, cover[t] + suffix)[len(cover[t]):]
                for suffix in ident[s]
            )


def test_wp_suite_single_state_depth0():
    suite = wp_test_suite(constant_machine(), 0)
    assert suite == [("a",), ("a", "a")]


def test_wp_suite_depth_monotone():
    h = toggle()
    small = set(wp_test_suite(h, 0))
    large = set(wp_test_suite(h, 1))
    assert small <= large
    larger = set(wp_test_suite(h, 2))
    assert large <= larger


def test_wp_suite_deduplicated_in_order():
    suite = wp_test_suite(toggle(), 1)
    assert len(suite) == len(set(suite))


def test_wp_depth0_kills_all_two_state_mutants():
    # every 2-state machine over {a} with outputs {0,1} that differs from the
    # toggle must fail some suite word (exhaustive mutant check)
    h = toggle()
    suite = wp_test_suite(h, 0)
    for bits in itertools.product("01", repeat=2):
        for targets in itertools.product(("q0", "q1"), repeat=2):
            mutant = MealyMachine.build(
                "q0",
                ("a",),
                {
                    ("q0", "a"): (targets[0], bits[0]),
                    ("q1", "a"): (targets[1], bits[1]),
                },
            )
            truly_different = equivalent(h, mutant) is not None
            suite_catches = any(run(h, w) != run(mutant, w) for w in suite)
            assert suite_catches == truly_different


def test_find_counterexample_none_when_equivalent_charges_full_suite():
    sul = toggle()
    oracle = WpOracle(sul)
    h = toggle()
    suite = wp_test_suite(h, 0)
    assert oracle.find_counterexample(h) is None
    assert oracle.resets == len(suite)
    assert oracle.symbols == sum(len(w) for w in suite)


def test_find_counterexample_collapsed_toggle():
    sul = toggle()
    oracle = WpOracle(sul, depth_floor=1)
    collapsed = constant_machine()
    cex = oracle.find_counterexample(collapsed)
    assert cex is not None
    assert run(sul, cex) != run(collapsed, cex)


def test_failing_run_charges_only_executed_tests():
    sul = toggle()
    oracle = WpOracle(sul, depth_floor=1)
    collapsed = constant_machine()
    cex = oracle.find_counterexample(collapsed)
    suite = wp_test_suite(collapsed, 1)
    executed = suite.index(cex) + 1
    assert oracle.resets == executed
    assert oracle.symbols == sum(len(w) for w in suite[:executed])


def test_perfect_oracle_delegates_to_equivalence():
    sul = toggle()
    flipped = MealyMachine.build(
        "q0", ("a",), {("q0", "a"): ("q1", "0"), ("q1", "a"): ("q0", "0")}
    )
    oracle = PerfectOracle(sul)
    cex = oracle.find_counterexample(flipped)
    assert cex == equivalent(flipped, sul)
    assert oracle.resets == 1
    assert oracle.symbols == len(cex)
    ok = PerfectOracle(sul)
    assert ok.find_counterexample(toggle()) is None
    assert ok.resets == 1
    assert ok.symbols == 0


def test_wp_completeness_matches_perfect_oracle():
    # for pools of small machines over a shared alphabet, Wp at the state-gap
    # depth finds a counterexample exactly when the exact check does
    rnd = random.Random(77)
    pool = [
        minimize(random_machine(rnd, rnd.randint(1, 5), ("a", "b")))
        for _ in range(8)
    ]
    for h in pool:
        for sul in pool:
            depth = max(0, len(sul.states) - len(h.states))
            oracle = WpOracle(sul, depth_floor=depth)
            cex = oracle.find_counterexample(h)
            exact = equivalent(h, sul)
            assert (cex is None) == (exact is None)
            if cex is not None:
                assert run(h, cex) != run(sul, cex)


def test_make_oracle():
    sul = toggle()
    assert isinstance(make_oracle("perfect", sul), PerfectOracle)
    wp = make_oracle("wp", sul, depth="auto", known_sul_states=4)
    assert isinstance(wp, WpOracle)
    assert wp.effective_depth(constant_machine()) == 3
    floored = make_oracle("wp", sul, depth=2, known_sul_states=2)
    assert floored.effective_depth(toggle()) == 2
    with pytest.raises(ValueError):
        make_oracle("nope", sul)
