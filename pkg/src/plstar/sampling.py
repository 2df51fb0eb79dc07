"""T-wise product sampling via greedy set cover.

A t-tuple is an assignment of t distinct non-mandatory features to
selected/deselected.  The sampler repeatedly picks the valid configuration
covering the most still-uncovered tuples (ties broken by the smallest
configuration under the model's feature order), which is the classic greedy
set-cover heuristic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .spl import (
    Configuration,
    FeatureModel,
    configuration_sort_key,
    valid_configurations,
)

# A t-tuple is a tuple of (feature, selected?) pairs, features in model order.
Interaction = tuple[tuple[str, bool], ...]


@dataclass(frozen=True)
class SamplingSpec:
    t: int
    feature_universe: tuple[str, ...]

    def __post_init__(self):
        if not 1 <= self.t <= len(self.feature_universe):
            raise ValueError(
                f"t={self.t} out of range for a universe of "
                f"{len(self.feature_universe)} features"
            )


def default_spec(fm: FeatureModel, t: int = 3) -> SamplingSpec:
    """Interaction strength ``t`` over the model's non-mandatory features."""
    return SamplingSpec(t=t, feature_universe=fm.non_mandatory_features())


def _interactions_of(config: Configuration, combos) -> set[Interaction]:
    selected = config.selected
    return {tuple((f, f in selected) for f in combo) for combo in combos}


def enumerate_valid_tuples(fm: FeatureModel, spec: SamplingSpec) -> set[Interaction]:
    """Every t-assignment witnessed by at least one valid configuration."""
    combos = list(itertools.combinations(spec.feature_universe, spec.t))
    tuples: set[Interaction] = set()
    for config in valid_configurations(fm):
        tuples |= _interactions_of(config, combos)
    return tuples


def chvatal_sample(fm: FeatureModel, spec: SamplingSpec) -> list[Configuration]:
    """Greedy cover of all valid t-tuples by valid configurations.

    Deterministic: candidates are pre-sorted by configuration order, and the
    first candidate with maximal uncovered-tuple count wins each round.
    """
    combos = list(itertools.combinations(spec.feature_universe, spec.t))
    candidates = valid_configurations(fm)  # sorted by configuration_sort_key
    candidate_tuples = [_interactions_of(c, combos) for c in candidates]
    uncovered: set[Interaction] = set()
    for tuples in candidate_tuples:
        uncovered |= tuples

    sample: list[Configuration] = []
    chosen = [False] * len(candidates)
    while uncovered:
        best = -1
        best_gain = 0
        for i, tuples in enumerate(candidate_tuples):
            if chosen[i]:
                continue
            gain = len(tuples & uncovered)
            if gain > best_gain:
                best, best_gain = i, gain
        if best < 0:  # pragma: no cover - every tuple has a witness
            raise AssertionError("uncoverable tuples remain")
        chosen[best] = True
        sample.append(candidates[best])
        uncovered -= candidate_tuples[best]
    return sample


def covers(config: Configuration, interaction: Interaction) -> bool:
    return all((feature in config.selected) == value for feature, value in interaction)


def sample_sort_keys(fm: FeatureModel, sample: list[Configuration]):
    return [configuration_sort_key(fm, c) for c in sample]
