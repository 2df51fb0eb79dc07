"""Active automata learning for software product lines.

Subpackages cover deterministic Mealy machines, feature models and featured
transition systems, t-wise product sampling, the L* learner for Mealy
machines with an adaptive observation-table repository, Wp-method
equivalence oracles, from-scratch statistics, and an experiment CLI.
"""

__version__ = "0.1.0"
