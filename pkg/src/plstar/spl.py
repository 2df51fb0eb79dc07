"""Structural and behavioral variability models.

Feature models define which configurations are valid; featured transition
systems carry guard-annotated transitions plus a feature-to-alphabet map and
project to one deterministic Mealy machine per valid configuration.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

from .mealy import MealyMachine

MAX_ENUMERATED_FEATURES = 30
QUIESCENT_OUTPUT = "0"

MANDATORY = "mandatory"
OPTIONAL = "optional"
ALTERNATIVE = "alternative"
OR = "or"
_KINDS = (MANDATORY, OPTIONAL, ALTERNATIVE, OR)


class TooManyFeatures(ValueError):
    pass


class UnknownFeature(ValueError):
    pass


class NondeterministicProjection(ValueError):
    pass


class GuardSyntaxError(ValueError):
    pass


class ModelFormatError(ValueError):
    """A feature-model or FTS document is malformed."""


# --------------------------------------------------------------------------
# Feature expressions
# --------------------------------------------------------------------------

class FeatureExpr:
    """Boolean guard over feature names: ``!``, ``&``, ``|``, ``true``.

    ``&`` and ``|`` share one precedence level and associate left, so
    ``a & b | c`` reads as ``(a & b) | c``.
    """

    __slots__ = ("_node",)

    def __init__(self, node):
        self._node = node

    @classmethod
    def true(cls) -> "FeatureExpr":
        return cls(("true",))

    @classmethod
    def var(cls, name: str) -> "FeatureExpr":
        return cls(("var", name))

    @classmethod
    def parse(cls, text: str) -> "FeatureExpr":
        tokens = _tokenize_guard(text)
        node, pos = _parse_expr(tokens, 0)
        if pos != len(tokens):
            raise GuardSyntaxError(f"trailing input in guard: {text!r}")
        return cls(node)

    def evaluate(self, selected) -> bool:
        return _eval_node(self._node, selected)

    def features(self) -> set[str]:
        out: set[str] = set()
        _collect_vars(self._node, out)
        return out

    def __str__(self) -> str:
        return _format_node(self._node)

    def __repr__(self) -> str:
        return f"FeatureExpr({str(self)!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, FeatureExpr) and self._node == other._node

    def __hash__(self) -> int:
        return hash(self._node)


def _tokenize_guard(text: str) -> list[str]:
    tokens: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "!&|()":
            tokens.append(ch)
            i += 1
        elif ch.isalnum() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(text[i:j])
            i = j
        else:
            raise GuardSyntaxError(f"unexpected character {ch!r} in guard {text!r}")
    return tokens


def _parse_expr(tokens: list[str], pos: int):
    node, pos = _parse_term(tokens, pos)
    while pos < len(tokens) and tokens[pos] in ("&", "|"):
        op = "and" if tokens[pos] == "&" else "or"
        right, pos = _parse_term(tokens, pos + 1)
        node = (op, node, right)
    return node, pos


def _parse_term(tokens: list[str], pos: int):
    if pos >= len(tokens):
        raise GuardSyntaxError("unexpected end of guard")
    tok = tokens[pos]
    if tok == "!":
        node, pos = _parse_term(tokens, pos + 1)
        return ("not", node), pos
    if tok == "(":
        node, pos = _parse_expr(tokens, pos + 1)
        if pos >= len(tokens) or tokens[pos] != ")":
            raise GuardSyntaxError("unbalanced parenthesis in guard")
        return node, pos + 1
    if tok in ("&", "|", ")"):
        raise GuardSyntaxError(f"unexpected token {tok!r} in guard")
    if tok == "true":
        return ("true",), pos + 1
    return ("var", tok), pos + 1


def _eval_node(node, selected) -> bool:
    tag = node[0]
    if tag == "true":
        return True
    if tag == "var":
        return node[1] in selected
    if tag == "not":
        return not _eval_node(node[1], selected)
    if tag == "and":
        return _eval_node(node[1], selected) and _eval_node(node[2], selected)
    return _eval_node(node[1], selected) or _eval_node(node[2], selected)


def _collect_vars(node, out: set[str]) -> None:
    tag = node[0]
    if tag == "var":
        out.add(node[1])
    elif tag == "not":
        _collect_vars(node[1], out)
    elif tag in ("and", "or"):
        _collect_vars(node[1], out)
        _collect_vars(node[2], out)


def _format_node(node) -> str:
    tag = node[0]
    if tag == "true":
        return "true"
    if tag == "var":
        return node[1]
    if tag == "not":
        return f"!{_format_node(node[1])}"
    op = "&" if tag == "and" else "|"
    return f"({_format_node(node[1])} {op} {_format_node(node[2])})"


# --------------------------------------------------------------------------
# Feature model
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Feature:
    name: str
    parent: str | None
    kind: str
    group: str | None  # group id for alternative/or members


@dataclass(frozen=True)
class Configuration:
    selected: frozenset[str]

    def __contains__(self, feature: str) -> bool:
        return feature in self.selected


class FeatureModel:
    """Feature tree with mandatory/optional/alternative/or variability and
    optional cross-tree constraints."""

    def __init__(self, features: list[Feature], constraints: list[FeatureExpr] = ()):
        self.features: dict[str, Feature] = {}
        self.order: tuple[str, ...] = tuple(f.name for f in features)
        roots = [f for f in features if f.parent is None]
        if len(roots) != 1:
            raise ModelFormatError("feature model needs exactly one root")
        self.root = roots[0].name
        for f in features:
            if f.name in self.features:
                raise ModelFormatError(f"duplicate feature {f.name!r}")
            if f.kind not in _KINDS:
                raise ModelFormatError(f"unknown variability kind {f.kind!r}")
            self.features[f.name] = f
        for f in features:
            if f.parent is not None and f.parent not in self.features:
                raise ModelFormatError(f"{f.name!r} has unknown parent {f.parent!r}")
        self.children: dict[str, list[str]] = {name: [] for name in self.features}
        for f in features:
            if f.parent is not None:
                self.children[f.parent].append(f.name)
        self._check_acyclic()
        # group id -> (parent, kind, members in declaration order)
        self.groups: dict[str, tuple[str, str, tuple[str, ...]]] = {}
        grouped: dict[str, list[Feature]] = {}
        for f in features:
            if f.kind in (ALTERNATIVE, OR):
                gid = f.group or f"{f.parent}:{f.kind}"
                grouped.setdefault(gid, []).append(f)
        for gid, members in grouped.items():
            parents = {m.parent for m in members}
            kinds = {m.kind for m in members}
            if len(parents) != 1 or len(kinds) != 1:
                raise ModelFormatError(f"group {gid!r} mixes parents or kinds")
            if len(members) < 2:
                raise ModelFormatError(f"group {gid!r} needs at least 2 members")
            self.groups[gid] = (
                members[0].parent,
                members[0].kind,
                tuple(m.name for m in members),
            )
        self.constraints: tuple[FeatureExpr, ...] = tuple(constraints)
        for expr in self.constraints:
            unknown = expr.features() - set(self.features)
            if unknown:
                raise UnknownFeature(
                    f"constraint references unknown features {sorted(unknown)}"
                )

    def _check_acyclic(self) -> None:
        for name in self.features:
            seen = set()
            cur: str | None = name
            while cur is not None:
                if cur in seen:
                    raise ModelFormatError(f"parent cycle through {name!r}")
                seen.add(cur)
                cur = self.features[cur].parent

    def feature_index(self, name: str) -> int:
        return self.order.index(name)

    def core_features(self) -> frozenset[str]:
        """Features present in every configuration by tree structure alone:
        the root and, transitively, mandatory children of core features."""
        core = {self.root}
        changed = True
        while changed:
            changed = False
            for name, f in self.features.items():
                if (
                    name not in core
                    and f.kind == MANDATORY
                    and f.parent in core
                ):
                    core.add(name)
                    changed = True
        return frozenset(core)

    def non_mandatory_features(self) -> tuple[str, ...]:
        core = self.core_features()
        return tuple(name for name in self.order if name not in core)


def is_valid(fm: FeatureModel, config: Configuration) -> bool:
    """Direct rule check of tree semantics plus cross constraints."""
    selected = config.selected
    unknown = selected - set(fm.features)
    if unknown:
        raise UnknownFeature(f"unknown features {sorted(unknown)}")
    if fm.root not in selected:
        return False
    for name in selected:
        parent = fm.features[name].parent
        if parent is not None and parent not in selected:
            return False
    for name, f in fm.features.items():
        if f.kind == MANDATORY and f.parent is not None:
            if (f.parent in selected) != (name in selected):
                return False
    for parent, kind, members in fm.groups.values():
        count = sum(1 for m in members if m in selected)
        if parent in selected:
            if kind == ALTERNATIVE and count != 1:
                return False
            if kind == OR and count < 1:
                return False
        elif count != 0:
            return False
    return all(expr.evaluate(selected) for expr in fm.constraints)


def valid_configurations(fm: FeatureModel) -> list[Configuration]:
    """All valid configurations, ordered by selected-feature index tuples.

    Candidates are generated recursively along the tree (so only tree-valid
    subsets are materialized) and then filtered by the cross constraints.
    """
    if len(fm.features) > MAX_ENUMERATED_FEATURES:
        raise TooManyFeatures(
            f"{len(fm.features)} features exceeds the enumeration bound "
            f"of {MAX_ENUMERATED_FEATURES}"
        )

    def expand(name: str) -> list[frozenset[str]]:
        """Subtree selections given that ``name`` is selected."""
        alternatives: list[list[frozenset[str]]] = []
        free_children = [
            c for c in fm.children[name] if fm.features[c].kind in (MANDATORY, OPTIONAL)
        ]
        for child in free_children:
            options = expand(child)
            if fm.features[child].kind == OPTIONAL:
                options = [frozenset()] + options
            alternatives.append(options)
        child_groups = [
            gid for gid, (parent, _, _) in fm.groups.items() if parent == name
        ]
        for gid in child_groups:
            _, kind, members = fm.groups[gid]
            options: list[frozenset[str]] = []
            if kind == ALTERNATIVE:
                for member in members:
                    options.extend(expand(member))
            else:  # or-group: every non-empty member subset
                for r in range(1, len(members) + 1):
                    for chosen in itertools.combinations(members, r):
                        for parts in itertools.product(*(expand(m) for m in chosen)):
                            options.append(frozenset().union(*parts))
            alternatives.append(options)
        results: list[frozenset[str]] = []
        for parts in itertools.product(*alternatives) if alternatives else [()]:
            results.append(frozenset({name}).union(*parts))
        return results

    configs = [
        Configuration(sel)
        for sel in expand(fm.root)
        if all(expr.evaluate(sel) for expr in fm.constraints)
    ]
    configs.sort(key=lambda c: configuration_sort_key(fm, c))
    return configs


def configuration_sort_key(fm: FeatureModel, config: Configuration) -> tuple[int, ...]:
    return tuple(sorted(fm.feature_index(f) for f in config.selected))


# --------------------------------------------------------------------------
# Featured transition system
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FtsTransition:
    source: str
    input: str
    guard: FeatureExpr
    output: str
    target: str


@dataclass(frozen=True)
class FeaturedTransitionSystem:
    states: tuple[str, ...]
    initial: str
    inputs: tuple[str, ...]
    transitions: tuple[FtsTransition, ...]
    feature_alphabet: dict[str, tuple[str, ...]] = field(hash=False)

    def __post_init__(self):
        owned: dict[str, str] = {}
        for feature, symbols in self.feature_alphabet.items():
            for symbol in symbols:
                if symbol in owned:
                    raise ModelFormatError(
                        f"input {symbol!r} owned by both {owned[symbol]!r} "
                        f"and {feature!r}"
                    )
                if symbol not in self.inputs:
                    raise ModelFormatError(f"alphabet entry {symbol!r} not an input")
                owned[symbol] = feature
        missing = set(self.inputs) - set(owned)
        if missing:
            raise ModelFormatError(
                f"inputs {sorted(missing)} not assigned to any feature"
            )
        for t in self.transitions:
            if t.source not in self.states or t.target not in self.states:
                raise ModelFormatError("transition references unknown state")
            if t.input not in self.inputs:
                raise ModelFormatError(f"transition on unknown input {t.input!r}")


def product_alphabet(fts: FeaturedTransitionSystem, config: Configuration) -> tuple[str, ...]:
    """Inputs owned by the configuration's features, in global input order."""
    symbols: set[str] = set()
    for feature in config.selected:
        symbols.update(fts.feature_alphabet.get(feature, ()))
    return tuple(s for s in fts.inputs if s in symbols)


def derive(fts: FeaturedTransitionSystem, config: Configuration) -> MealyMachine:
    """Project the FTS onto one configuration.

    Keeps transitions whose guard holds and whose input is in the product
    alphabet, restricts to reachable states, and completes missing
    (state, input) pairs with a quiescent self-loop emitting "0".
    """
    alphabet = product_alphabet(fts, config)
    alphabet_set = set(alphabet)
    selected = config.selected
    kept: dict[tuple[str, str], tuple[str, str]] = {}
    for t in fts.transitions:
        if t.input not in alphabet_set or not t.guard.evaluate(selected):
            continue
        key = (t.source, t.input)
        if key in kept:
            raise NondeterministicProjection(
                f"two enabled transitions for {key} in configuration "
                f"{sorted(selected)}"
            )
        kept[key] = (t.target, t.output)

    reachable = [fts.initial]
    seen = {fts.initial}
    idx = 0
    while idx < len(reachable):
        state = reachable[idx]
        idx += 1
        for symbol in alphabet:
            nxt = kept.get((state, symbol), (state, QUIESCENT_OUTPUT))[0]
            if nxt not in seen:
                seen.add(nxt)
                reachable.append(nxt)

    transitions: dict[tuple[str, str], tuple[str, str]] = {}
    outputs: list[str] = []
    for state in reachable:
        for symbol in alphabet:
            nxt, out = kept.get((state, symbol), (state, QUIESCENT_OUTPUT))
            transitions[(state, symbol)] = (nxt, out)
            if out not in outputs:
                outputs.append(out)
    return MealyMachine(
        states=tuple(reachable),
        initial=fts.initial,
        inputs=alphabet,
        outputs=tuple(outputs),
        transitions=transitions,
    )


# --------------------------------------------------------------------------
# JSON loaders
# --------------------------------------------------------------------------

def feature_model_from_json(doc: dict) -> FeatureModel:
    if "features" not in doc:
        raise ModelFormatError("feature model document needs a 'features' tree")
    features: list[Feature] = []

    def walk(node: dict, parent: str | None) -> None:
        if "name" not in node:
            raise ModelFormatError("feature node without a name")
        kind = node.get("kind", MANDATORY)
        features.append(
            Feature(
                name=node["name"],
                parent=parent,
                kind=kind if parent is not None else MANDATORY,
                group=node.get("group"),
            )
        )
        for child in node.get("children", []):
            walk(child, node["name"])

    walk(doc["features"], None)
    constraints = [FeatureExpr.parse(text) for text in doc.get("constraints", [])]
    return FeatureModel(features, constraints)


def load_feature_model(path) -> FeatureModel:
    with open(path, encoding="utf-8") as handle:
        return feature_model_from_json(json.load(handle))


def fts_from_json(doc: dict) -> FeaturedTransitionSystem:
    try:
        transitions = tuple(
            FtsTransition(
                source=t["from"],
                input=t["input"],
                guard=FeatureExpr.parse(t.get("guard", "true")),
                output=str(t["output"]),
                target=t["to"],
            )
            for t in doc["transitions"]
        )
        return FeaturedTransitionSystem(
            states=tuple(doc["states"]),
            initial=doc["initial"],
            inputs=tuple(doc["inputs"]),
            transitions=transitions,
            feature_alphabet={
                f: tuple(symbols) for f, symbols in doc["featureAlphabet"].items()
            },
        )
    except KeyError as exc:
        raise ModelFormatError(f"FTS document missing key {exc}") from exc


def load_fts(path) -> FeaturedTransitionSystem:
    with open(path, encoding="utf-8") as handle:
        return fts_from_json(json.load(handle))


def configuration_to_json(fm: FeatureModel, config: Configuration) -> list[str]:
    return [f for f in fm.order if f in config.selected]


def configuration_from_json(fm: FeatureModel, names: list[str]) -> Configuration:
    unknown = set(names) - set(fm.features)
    if unknown:
        raise UnknownFeature(f"unknown features {sorted(unknown)}")
    return Configuration(frozenset(names))
