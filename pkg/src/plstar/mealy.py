"""Deterministic Mealy machines: simulation, equivalence, composition, I/O.

A machine is a total deterministic transducer: every (state, input) pair has
exactly one successor state and one output symbol.  Machines are immutable
after construction and all operations here are pure functions, so values can
be shared freely between learner instances and worker processes.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

Word = tuple[str, ...]


class UnknownInputSymbol(ValueError):
    """An input word contains a symbol outside the machine's alphabet."""


class AlphabetMismatch(ValueError):
    """Two machines with different input alphabets were compared."""


class OverlappingAlphabets(ValueError):
    """Components for parallel composition must have disjoint alphabets."""


class ValidationError(ValueError):
    """A machine definition violates totality, determinism, or closure."""


class ParseError(ValueError):
    """A ``.fsm`` document is syntactically malformed."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class MealyMachine:
    """A total deterministic Mealy machine.

    ``transitions`` maps (state, input) to (next state, output).  The state
    and output sets are derived at construction and the definition is
    validated once; instances are then treated as immutable.
    """

    states: tuple[str, ...]
    initial: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    transitions: dict[tuple[str, str], tuple[str, str]]
    # (state -> input -> (next, output)) view for the hot simulation path.
    step_map: dict[str, dict[str, tuple[str, str]]] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self):
        states = set(self.states)
        if len(self.states) != len(states):
            raise ValidationError("duplicate state ids")
        if self.initial not in states:
            raise ValidationError(f"initial state {self.initial!r} not a state")
        if len(set(self.inputs)) != len(self.inputs):
            raise ValidationError("duplicate input symbols")
        outputs = set(self.outputs)
        step_map: dict[str, dict[str, tuple[str, str]]] = {s: {} for s in self.states}
        for (state, inp), (nxt, out) in self.transitions.items():
            if state not in states:
                raise ValidationError(f"transition from unknown state {state!r}")
            if inp not in self.inputs:
                raise ValidationError(f"transition on unknown input {inp!r}")
            if nxt not in states:
                raise ValidationError(f"transition to unknown state {nxt!r}")
            if out not in outputs:
                raise ValidationError(f"transition with unknown output {out!r}")
            step_map[state][inp] = (nxt, out)
        for state in self.states:
            for inp in self.inputs:
                if inp not in step_map[state]:
                    raise ValidationError(f"missing transition ({state!r}, {inp!r})")
        object.__setattr__(self, "step_map", step_map)

    @classmethod
    def build(
        cls,
        initial: str,
        inputs: tuple[str, ...] | list[str],
        transitions: dict[tuple[str, str], tuple[str, str]],
    ) -> "MealyMachine":
        """Construct a machine, inferring state and output sets.

        States are ordered initial-first then by first appearance in the
        transition map; outputs by first appearance.
        """
        states: list[str] = [initial]
        outputs: list[str] = []
        for (src, _), (dst, out) in transitions.items():
            for s in (src, dst):
                if s not in states:
                    states.append(s)
            if out not in outputs:
                outputs.append(out)
        return cls(
            states=tuple(states),
            initial=initial,
            inputs=tuple(inputs),
            outputs=tuple(outputs),
            transitions=dict(transitions),
        )


def run(m: MealyMachine, word) -> Word:
    """Outputs produced by ``word`` from the initial state."""
    state = m.initial
    out: list[str] = []
    step = m.step_map
    for symbol in word:
        try:
            state, o = step[state][symbol]
        except KeyError:
            raise UnknownInputSymbol(f"symbol {symbol!r} not in alphabet") from None
        out.append(o)
    return tuple(out)


def run_from(m: MealyMachine, state: str, word) -> Word:
    """Outputs produced by ``word`` starting at ``state``."""
    out: list[str] = []
    step = m.step_map
    for symbol in word:
        state, o = step[state][symbol]
        out.append(o)
    return tuple(out)


def state_after(m: MealyMachine, word, start: str | None = None) -> str:
    state = m.initial if start is None else start
    for symbol in word:
        state = m.step_map[state][symbol][0]
    return state


def equivalent(a: MealyMachine, b: MealyMachine) -> Word | None:
    """Return None if ``a`` and ``b`` agree on every word, else a shortest
    distinguishing input sequence.

    Breadth-first search over reachable state pairs; the queue is expanded in
    the order of ``a.inputs``, so among shortest counterexamples the first in
    the alphabet-induced lexicographic order is returned.
    """
    if set(a.inputs) != set(b.inputs):
        raise AlphabetMismatch(
            f"alphabets differ: {sorted(a.inputs)} vs {sorted(b.inputs)}"
        )
    inputs = a.inputs
    start = (a.initial, b.initial)
    seen = {start}
    queue: deque[tuple[str, str, Word]] = deque([(a.initial, b.initial, ())])
    while queue:
        sa, sb, path = queue.popleft()
        for symbol in inputs:
            na, oa = a.step_map[sa][symbol]
            nb, ob = b.step_map[sb][symbol]
            if oa != ob:
                return path + (symbol,)
            pair = (na, nb)
            if pair not in seen:
                seen.add(pair)
                queue.append((na, nb, path + (symbol,)))
    return None


def compose(components: list[MealyMachine]) -> MealyMachine:
    """Interleaving parallel composition of components with disjoint inputs.

    On a symbol owned by component k, that component moves and emits its
    output while all others hold their state.  Only tuples reachable from the
    tuple of initial states are materialized; the composed alphabet is the
    concatenation of component alphabets in list order.
    """
    if not components:
        raise ValueError("compose requires at least one component")
    owner: dict[str, int] = {}
    inputs: list[str] = []
    for k, comp in enumerate(components):
        for symbol in comp.inputs:
            if symbol in owner:
                raise OverlappingAlphabets(f"symbol {symbol!r} owned by two components")
            owner[symbol] = k
            inputs.append(symbol)

    def name(parts: tuple[str, ...]) -> str:
        return "|".join(parts)

    initial = tuple(c.initial for c in components)
    seen = {initial}
    queue: deque[tuple[str, ...]] = deque([initial])
    transitions: dict[tuple[str, str], tuple[str, str]] = {}
    order: list[tuple[str, ...]] = [initial]
    while queue:
        current = queue.popleft()
        for symbol in inputs:
            k = owner[symbol]
            nxt_k, out = components[k].step_map[current[k]][symbol]
            nxt = current[:k] + (nxt_k,) + current[k + 1 :]
            transitions[(name(current), symbol)] = (name(nxt), out)
            if nxt not in seen:
                seen.add(nxt)
                order.append(nxt)
                queue.append(nxt)
    outputs: list[str] = []
    for (_, _), (_, out) in transitions.items():
        if out not in outputs:
            outputs.append(out)
    return MealyMachine(
        states=tuple(name(t) for t in order),
        initial=name(initial),
        inputs=tuple(inputs),
        outputs=tuple(outputs),
        transitions=transitions,
    )


def _bfs_order(m: MealyMachine) -> list[str]:
    seen = {m.initial}
    order = [m.initial]
    queue = deque([m.initial])
    while queue:
        state = queue.popleft()
        for symbol in m.inputs:
            nxt = m.step_map[state][symbol][0]
            if nxt not in seen:
                seen.add(nxt)
                order.append(nxt)
                queue.append(nxt)
    return order


def canonical(m: MealyMachine, prefix: str = "s") -> MealyMachine:
    """Rename states to ``s0..sN`` in BFS order from the initial state.

    Unreachable states are dropped; the result is behaviorally identical.
    """
    order = _bfs_order(m)
    rename = {state: f"{prefix}{i}" for i, state in enumerate(order)}
    transitions = {
        (rename[s], a): (rename[n], o)
        for (s, a), (n, o) in m.transitions.items()
        if s in rename
    }
    outputs: list[str] = []
    for (_, _), (_, out) in sorted(transitions.items()):
        if out not in outputs:
            outputs.append(out)
    return MealyMachine(
        states=tuple(rename[s] for s in order),
        initial=rename[m.initial],
        inputs=m.inputs,
        outputs=tuple(outputs),
        transitions=transitions,
    )


def write_fsm(m: MealyMachine) -> str:
    """Serialize to the line-based ``.fsm`` format in canonical order."""
    m = canonical(m)
    lines = [f"inputs {' '.join(m.inputs)}", f"initial {m.initial}"]
    for state in m.states:
        for symbol in m.inputs:
            nxt, out = m.step_map[state][symbol]
            lines.append(f"{state} {symbol} / {out} -> {nxt}")
    return "\n".join(lines) + "\n"


def read_fsm(text: str) -> MealyMachine:
    """Parse the ``.fsm`` format.

    Syntax errors raise ParseError with the offending line number; a
    syntactically valid document describing a non-total machine raises
    ValidationError.
    """
    inputs: list[str] | None = None
    initial: str | None = None
    transitions: dict[tuple[str, str], tuple[str, str]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if inputs is None:
            if tokens[0] != "inputs" or len(tokens) < 2:
                raise ParseError("expected 'inputs <symbol>...'", lineno)
            inputs = tokens[1:]
            if len(set(inputs)) != len(inputs):
                raise ParseError("duplicate input symbol", lineno)
            continue
        if initial is None:
            if tokens[0] != "initial" or len(tokens) != 2:
                raise ParseError("expected 'initial <state>'", lineno)
            initial = tokens[1]
            continue
        # transition: <from> <input> / <output> -> <to>
        if len(tokens) != 6 or tokens[2] != "/" or tokens[4] != "->":
            raise ParseError("expected '<from> <input> / <output> -> <to>'", lineno)
        src, symbol, _, out, _, dst = tokens
        if symbol not in inputs:
            raise ParseError(f"undeclared input {symbol!r}", lineno)
        if (src, symbol) in transitions:
            raise ParseError(f"duplicate transition for ({src!r}, {symbol!r})", lineno)
        transitions[(src, symbol)] = (dst, out)
    if inputs is None:
        raise ParseError("missing 'inputs' line", 1)
    if initial is None:
        raise ParseError("missing 'initial' line", 1)
    try:
        return MealyMachine.build(initial, tuple(inputs), transitions)
    except ValidationError:
        raise
    except ValueError as exc:  # pragma: no cover - build only raises ValidationError
        raise ValidationError(str(exc)) from exc


def read_fsm_file(path) -> MealyMachine:
    with open(path, encoding="utf-8") as handle:
        return read_fsm(handle.read())


def write_fsm_file(m: MealyMachine, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(write_fsm(m))


def to_dot(m: MealyMachine, name: str = "mealy") -> str:
    """GraphViz export, one edge per transition labeled ``input/output``."""
    lines = [f"digraph {name} {{", "  rankdir=LR;", "  node [shape=circle];"]
    lines.append("  __start__ [shape=point];")
    lines.append(f'  __start__ -> "{m.initial}";')
    for state in m.states:
        for symbol in m.inputs:
            nxt, out = m.step_map[state][symbol]
            lines.append(f'  "{state}" -> "{nxt}" [label="{symbol}/{out}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
