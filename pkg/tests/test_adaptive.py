import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import cycle_machine, toggle
from plstar.adaptive import (
    OtRepository,
    TooManyOrdersRequested,
    adaptive_init,
    filter_sequences,
    generate_orders,
    learn_family,
    order_score,
)
from plstar.learning import EMPTY
from plstar.mealy import compose, equivalent
from plstar.oracles import PerfectOracle, WpOracle
from plstar.rng import Stream
from plstar.spl import Configuration, Feature, FeatureModel


def test_filter_sequences_definition():
    seqs = {(), ("a",), ("a", "b"), ("c",)}
    assert filter_sequences(seqs, ("a", "b")) == {(), ("a",), ("a", "b")}
    assert filter_sequences(seqs, ("a", "b", "c")) == seqs
    assert filter_sequences(seqs, ()) == {()}
    assert filter_sequences({("a",)}, ()) == set()


def test_filter_preserves_prefix_closure():
    closed = {(), ("a",), ("a", "b"), ("a", "b", "c")}
    filtered = filter_sequences(closed, ("a", "b"))
    for seq in filtered:
        for i in range(len(seq)):
            assert seq[:i] in filtered


@given(
    st.lists(st.lists(st.sampled_from("abcd"), max_size=5), max_size=12),
    st.sets(st.sampled_from("abcd")),
)
@settings(max_examples=80, deadline=None)
def test_filter_closure_property(words, alphabet):
    closed = {()}
    for word in words:
        for i in range(len(word) + 1):
            closed.add(tuple(word[:i]))
    filtered = filter_sequences(closed, tuple(alphabet))
    for seq in filtered:
        assert all(symbol in alphabet for symbol in seq)
        for i in range(len(seq)):
            assert seq[:i] in filtered


def test_adaptive_init_empty_repo_is_classic():
    init = adaptive_init(OtRepository(), ("b", "a"))
    assert init.prefixes == (EMPTY,)
    assert init.suffixes == (("b",), ("a",))  # alphabet order preserved


def test_adaptive_init_filters_stored_table():
    repo = OtRepository()
    repo.add(
        0,
        ("a", "b", "c"),
        [(), ("a",), ("a", "b")],
        [("a",), ("b",), ("c", "a")],
    )
    init = adaptive_init(repo, ("a", "b"))
    assert set(init.prefixes) == {(), ("a",), ("a", "b")}
    assert set(init.suffixes) == {("a",), ("b",)}


def test_adaptive_init_union_dedup_and_order():
    repo = OtRepository()
    repo.add(0, ("a",), [(), ("a",)], [("a",)])
    repo.add(1, ("a", "b"), [(), ("a",), ("b",)], [("a",), ("b",), ("a", "b")])
    init = adaptive_init(repo, ("a", "b"))
    assert init.prefixes == ((), ("a",), ("b",))
    assert init.suffixes == (("a",), ("b",), ("a", "b"))


def test_adaptive_init_satisfies_learner_preconditions():
    repo = OtRepository()
    repo.add(0, ("a", "b"), [(), ("a",), ("a", "b"), ("b",)], [("a",), ("b",)])
    init = adaptive_init(repo, ("a",))
    assert EMPTY in init.prefixes
    present = set(init.prefixes)
    for seq in init.prefixes:
        for i in range(len(seq)):
            assert seq[:i] in present
    assert {("a",)} <= set(init.suffixes)


# -- learning orders -----------------------------------------------------------


def family_model():
    return FeatureModel(
        [
            Feature("root", None, "mandatory", None),
            Feature("P", "root", "optional", None),
            Feature("Q", "root", "optional", None),
            Feature("R", "root", "optional", None),
        ]
    )


def cfg(*names):
    return Configuration(frozenset({"root", *names}))


def test_order_score_hand_values():
    fm = family_model()
    sample = [cfg("P", "Q", "R"), cfg("P"), cfg("Q", "R")]
    # F = [3, 0, 0]: everything new at step 1, nothing after
    order = order_score((0, 1, 2), fm, sample)
    assert order.new_feature_counts == (3, 0, 0)
    assert order.score == pytest.approx(1 / 3)
    # F = [1, 2, 0]
    order = order_score((1, 2, 0), fm, sample)
    assert order.new_feature_counts == (1, 2, 0)
    assert order.score == pytest.approx(1 + 0.5)


def test_order_score_reciprocal_sum():
    fm = FeatureModel(
        [Feature("root", None, "mandatory", None)]
        + [Feature(f"f{i}", "root", "optional", None) for i in range(6)]
    )
    sample = [
        Configuration(frozenset({"root", "f0", "f1", "f2"})),
        Configuration(frozenset({"root", "f3"})),
        Configuration(frozenset({"root", "f4", "f5"})),
    ]
    order = order_score((0, 1, 2), fm, sample)
    assert order.new_feature_counts == (3, 1, 2)
    assert order.score == pytest.approx(1 / 3 + 1 + 1 / 2)


def test_order_score_all_mandatory_products():
    fm = FeatureModel(
        [
            Feature("root", None, "mandatory", None),
            Feature("M", "root", "mandatory", None),
        ]
    )
    sample = [Configuration(frozenset({"root", "M"}))]
    assert order_score((0,), fm, sample).score == 0.0


def test_order_score_rejects_non_permutation():
    fm = family_model()
    sample = [cfg("P"), cfg("Q")]
    with pytest.raises(ValueError):
        order_score((0, 0), fm, sample)


def test_generate_orders():
    assert generate_orders(1, 1, Stream(0)) == [(0,)]
    a = generate_orders(15, 200, Stream(99))
    b = generate_orders(15, 200, Stream(99))
    assert a == b
    assert len(set(a)) == 200
    with pytest.raises(TooManyOrdersRequested):
        generate_orders(3, 7, Stream(0))


# -- family learning -----------------------------------------------------------


def products_fixture():
    """Three products over shared toggle components."""
    t_a, t_b, t_c = toggle("a"), toggle("b"), cycle_machine("c", 3)
    return {
        0: (("a", "b"), compose([t_a, t_b])),
        1: (("a", "c"), compose([t_a, t_c])),
        2: (("a", "b", "c"), compose([t_a, t_b, t_c])),
    }


def test_family_single_product_equals_non_adaptive():
    products = {0: products_fixture()[0]}
    adaptive = learn_family([0], products, PerfectOracle, adaptive=True)
    plain = learn_family([0], products, PerfectOracle, adaptive=False)
    assert adaptive.totals == plain.totals


def test_family_identical_machines_second_run_one_round():
    alphabet, machine = products_fixture()[1]
    products = {0: (alphabet, machine), 1: (alphabet, machine)}
    result = learn_family([0, 1], products, PerfectOracle, adaptive=True)
    assert result.metrics_of(1).rounds == 1


def test_family_learns_all_products_correctly_any_order():
    products = products_fixture()
    for order in ((0, 1, 2), (2, 1, 0), (1, 0, 2)):
        result = learn_family(order, products, PerfectOracle, adaptive=True)
        assert [run.product_id for run in result.runs] == list(order)
        for run in result.runs:
            _, machine = products[run.product_id]
            assert equivalent(run.result.machine, machine) is None


def test_family_totals_are_sums():
    products = products_fixture()
    result = learn_family([0, 1, 2], products, PerfectOracle, adaptive=True)
    assert result.totals.rounds == sum(r.result.metrics.rounds for r in result.runs)
    assert result.totals.total_resets == sum(
        r.result.metrics.total_resets for r in result.runs
    )


def test_family_adaptive_beats_non_adaptive_on_rounds_here():
    products = products_fixture()
    wp = lambda m: WpOracle(m, depth_floor=1, known_sul_states=len(m.states))
    adaptive = learn_family([1, 2, 0], products, wp, adaptive=True)
    plain = learn_family([1, 2, 0], products, wp, adaptive=False)
    assert adaptive.totals.rounds <= plain.totals.rounds


def test_family_resume_skips_done_products():
    products = products_fixture()
    first = OtRepository()
    learn_family([0, 1], products, PerfectOracle, repository=first)
    assert len(first) == 2
    resumed = learn_family([0, 1, 2], products, PerfectOracle, repository=first)
    assert [run.product_id for run in resumed.runs] == [2]
    assert len(first) == 3


def test_repository_round_trip(tmp_path):
    repo = OtRepository()
    repo.add(3, ("a", "b"), [(), ("a",)], [("a",), ("b",)])
    path = tmp_path / "repo.json"
    repo.save(path)
    again = OtRepository.load(path)
    assert again.tables == repo.tables


def test_repository_grows_once_per_product():
    products = products_fixture()
    repo = OtRepository()
    learn_family([2, 0, 1], products, PerfectOracle, repository=repo)
    assert [t.product_id for t in repo.tables] == [2, 0, 1]
