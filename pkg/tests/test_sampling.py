import itertools
import random

import pytest

from test_spl import _random_model, sample_spl
from plstar.sampling import (
    SamplingSpec,
    chvatal_sample,
    covers,
    default_spec,
    enumerate_valid_tuples,
)
from plstar.spl import Feature, FeatureModel, valid_configurations


def optionals(n: int) -> FeatureModel:
    return FeatureModel(
        [Feature("root", None, "mandatory", None)]
        + [Feature(f"o{i}", "root", "optional", None) for i in range(n)]
    )


def brute_tuples(fm, spec):
    """Independent enumeration: project every valid config onto every combo."""
    combos = list(itertools.combinations(spec.feature_universe, spec.t))
    seen = set()
    for config in valid_configurations(fm):
        for combo in combos:
            seen.add(tuple((f, f in config.selected) for f in combo))
    return seen


def test_spec_validation():
    with pytest.raises(ValueError):
        SamplingSpec(t=0, feature_universe=("a",))
    with pytest.raises(ValueError):
        SamplingSpec(t=3, feature_universe=("a", "b"))


def test_single_optional_feature_tuples():
    fm = optionals(1)
    spec = SamplingSpec(t=1, feature_universe=("o0",))
    assert enumerate_valid_tuples(fm, spec) == {(("o0", True),), (("o0", False),)}


def test_alternative_pair_excludes_joint_selection():
    fm = sample_spl()
    spec = SamplingSpec(t=2, feature_universe=("D", "E"))
    tuples = enumerate_valid_tuples(fm, spec)
    assert (("D", True), ("E", True)) not in tuples
    assert (("D", True), ("E", False)) in tuples
    assert (("D", False), ("E", True)) in tuples
    assert (("D", False), ("E", False)) not in tuples  # exactly-one group


def test_sample_spl_pairwise_tuples_match_brute_force():
    fm = sample_spl()
    spec = default_spec(fm, t=2)
    assert enumerate_valid_tuples(fm, spec) == brute_tuples(fm, spec)


def test_chvatal_three_independent_optionals_t1():
    fm = optionals(3)
    spec = default_spec(fm, t=1)
    sample = chvatal_sample(fm, spec)
    # hand-traced greedy: every config covers 3 of the 6 single-feature
    # tuples, so the tie-break picks the smallest config (root only), after
    # which only the all-selected config covers the remaining 3
    assert len(sample) == 2
    assert sample[0].selected == frozenset({"root"})
    assert sample[1].selected == frozenset({"root", "o0", "o1", "o2"})


def test_chvatal_full_strength_needs_every_projection():
    fm = optionals(2)
    spec = default_spec(fm, t=2)
    sample = chvatal_sample(fm, spec)
    projections = {tuple(sorted(c.selected - {"root"})) for c in sample}
    assert len(sample) == 4
    assert projections == {(), ("o0",), ("o1",), ("o0", "o1")}


def test_chvatal_covers_all_tuples_on_sample_spl():
    fm = sample_spl()
    for t in (1, 2, 3):
        spec = default_spec(fm, t=t)
        sample = chvatal_sample(fm, spec)
        for interaction in brute_tuples(fm, spec):
            assert any(covers(c, interaction) for c in sample)
        assert len(sample) <= len(enumerate_valid_tuples(fm, spec))
        assert len(set(c.selected for c in sample)) == len(sample)


def test_chvatal_deterministic():
    fm = sample_spl()
    spec = default_spec(fm, t=3)
    a = chvatal_sample(fm, spec)
    b = chvatal_sample(fm, spec)
    assert [c.selected for c in a] == [c.selected for c in b]


def test_chvatal_random_models_coverage():
    rnd = random.Random(1234)
    checked = 0
    while checked < 10:
        fm = _random_model(rnd)
        universe = fm.non_mandatory_features()
        if not universe:
            continue
        checked += 1
        for t in (1, 2, 3):
            if t > len(universe):
                continue
            spec = SamplingSpec(t=t, feature_universe=universe)
            sample = chvatal_sample(fm, spec)
            for interaction in brute_tuples(fm, spec):
                assert any(covers(c, interaction) for c in sample)
