"""Deterministic finite automata over controllability-partitioned alphabets.

Every automaton here is an immutable value: a dense range of integer states,
a partial transition function stored as one ``{event name: target}`` dict per
state, an initial state and a set of marker states.  All constructions return
fresh automata whose states are renumbered in breadth-first order from the
initial state (events visited in name order), so equal inputs always give
identical outputs.

The automaton with zero states is the canonical empty automaton; it generates
and marks the empty language.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence


class AutomatonError(ValueError):
    """Raised for malformed automata or inputs outside an operation's domain."""


@dataclass(frozen=True, order=True)
class Event:
    """An event label.  Identity (equality, hashing, order) is the name only."""

    name: str
    controllable: bool = field(default=True, compare=False)
    owner: int | None = field(default=None, compare=False)

    def __str__(self) -> str:
        return self.name


EventLike = Event | str


def merge_alphabets(*alphabets: Iterable[Event]) -> frozenset[Event]:
    """Union of alphabets; shared names must agree on controllability."""
    seen: dict[str, Event] = {}
    for alphabet in alphabets:
        for ev in alphabet:
            prev = seen.get(ev.name)
            if prev is None:
                seen[ev.name] = ev
            elif prev.controllable != ev.controllable:
                raise AutomatonError(f"event {ev.name!r} has conflicting controllability")
            elif prev.owner is None and ev.owner is not None:
                seen[ev.name] = ev
    return frozenset(seen.values())


def event_names(events: Iterable[EventLike]) -> frozenset[str]:
    return frozenset(e.name if isinstance(e, Event) else e for e in events)


class Automaton:
    __slots__ = ("alphabet", "delta", "initial", "marked", "name", "labels", "_events")

    def __init__(
        self,
        alphabet: Iterable[Event],
        delta: Sequence[Mapping[str, int]],
        initial: int | None,
        marked: Iterable[int] = (),
        name: str = "",
        labels: Sequence[object] | None = None,
    ):
        self.alphabet = merge_alphabets(alphabet)
        self._events = {e.name: e for e in self.alphabet}
        self.delta = tuple(dict(row) for row in delta)
        self.initial = initial
        self.marked = frozenset(marked)
        self.name = name
        self.labels = tuple(labels) if labels is not None else None
        n = len(self.delta)
        if n == 0:
            if initial is not None or self.marked:
                raise AutomatonError("empty automaton cannot have initial or marked states")
            return
        if initial is None or not 0 <= initial < n:
            raise AutomatonError(f"initial state {initial} out of range")
        for x in self.marked:
            if not 0 <= x < n:
                raise AutomatonError(f"marked state {x} out of range")
        for x, row in enumerate(self.delta):
            for ev, y in row.items():
                if ev not in self._events:
                    raise AutomatonError(f"transition ({x}, {ev}) uses an event outside the alphabet")
                if not 0 <= y < n:
                    raise AutomatonError(f"transition ({x}, {ev}) targets unknown state {y}")

    @classmethod
    def from_transitions(
        cls,
        alphabet: Iterable[Event],
        transitions: Iterable[tuple[int, EventLike, int]],
        n_states: int,
        initial: int = 0,
        marked: Iterable[int] = (),
        name: str = "",
    ) -> "Automaton":
        delta: list[dict[str, int]] = [{} for _ in range(n_states)]
        for x, ev, y in transitions:
            ev = ev.name if isinstance(ev, Event) else ev
            if not 0 <= x < n_states:
                raise AutomatonError(f"transition source {x} out of range")
            if ev in delta[x] and delta[x][ev] != y:
                raise AutomatonError(f"nondeterministic transition ({x}, {ev})")
            delta[x][ev] = y
        return cls(alphabet, delta, initial if n_states else None, marked, name)

    @classmethod
    def empty(cls, alphabet: Iterable[Event] = (), name: str = "") -> "Automaton":
        return cls(alphabet, (), None, (), name)

    @property
    def n_states(self) -> int:
        return len(self.delta)

    @property
    def n_transitions(self) -> int:
        return sum(len(row) for row in self.delta)

    @property
    def is_empty(self) -> bool:
        return not self.delta

    @property
    def events(self) -> Mapping[str, Event]:
        return self._events

    @property
    def event_names(self) -> frozenset[str]:
        return frozenset(self._events)

    @property
    def controllable(self) -> frozenset[str]:
        return frozenset(n for n, e in self._events.items() if e.controllable)

    @property
    def uncontrollable(self) -> frozenset[str]:
        return frozenset(n for n, e in self._events.items() if not e.controllable)

    def transitions(self) -> Iterable[tuple[int, str, int]]:
        for x, row in enumerate(self.delta):
            for ev in sorted(row):
                yield x, ev, row[ev]

    def stats(self) -> str:
        return f"{self.n_states} states, {self.n_transitions} transitions"

    def with_name(self, name: str) -> "Automaton":
        return Automaton(self.alphabet, self.delta, self.initial, self.marked, name, self.labels)

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"<Automaton{label}: {self.stats()}, {len(self.alphabet)} events>"


class Membership(Enum):
    OUTSIDE = "outside"
    IN_CLOSED = "in_closed"
    IN_MARKED = "in_marked"


# ---------------------------------------------------------------------------
# reachability and trimming


def reachable_states(a: Automaton) -> set[int]:
    if a.is_empty:
        return set()
    seen = {a.initial}
    stack = [a.initial]
    while stack:
        x = stack.pop()
        for y in a.delta[x].values():
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return seen


def coreachable_states(a: Automaton, within: set[int] | None = None) -> set[int]:
    """States from which a marker state is reachable (optionally inside ``within``)."""
    preds: list[list[int]] = [[] for _ in range(a.n_states)]
    for x, row in enumerate(a.delta):
        if within is not None and x not in within:
            continue
        for y in row.values():
            preds[y].append(x)
    start = [x for x in a.marked if within is None or x in within]
    seen = set(start)
    while start:
        y = start.pop()
        for x in preds[y]:
            if x not in seen:
                seen.add(x)
                start.append(x)
    return seen


def restrict(a: Automaton, keep: Iterable[int], name: str | None = None) -> Automaton:
    """Sub-automaton on ``keep`` (transitions leaving ``keep`` dropped), renumbered."""
    keep = set(keep)
    if a.is_empty or a.initial not in keep:
        return Automaton.empty(a.alphabet, a.name if name is None else name)
    order = [a.initial]
    index = {a.initial: 0}
    i = 0
    while i < len(order):
        x = order[i]
        i += 1
        row = a.delta[x]
        for ev in sorted(row):
            y = row[ev]
            if y in keep and y not in index:
                index[y] = len(order)
                order.append(y)
    delta = []
    for x in order:
        row = a.delta[x]
        delta.append({ev: index[y] for ev, y in row.items() if y in index})
    labels = [a.labels[x] for x in order] if a.labels is not None else None
    return Automaton(
        a.alphabet,
        delta,
        0,
        (index[x] for x in a.marked if x in index),
        a.name if name is None else name,
        labels,
    )


def accessible(a: Automaton) -> Automaton:
    return restrict(a, reachable_states(a))


def trim(a: Automaton) -> Automaton:
    """Keep states that are both reachable and coreachable."""
    reach = reachable_states(a)
    keep = coreachable_states(a, reach)
    return restrict(a, keep)


def is_nonblocking(a: Automaton) -> bool:
    reach = reachable_states(a)
    return reach <= coreachable_states(a, reach)


def blocking_states(a: Automaton) -> set[int]:
    reach = reachable_states(a)
    return reach - coreachable_states(a, reach)


# ---------------------------------------------------------------------------
# synchronous product


def product_with_pairs(a: Automaton, b: Automaton) -> tuple[Automaton, list[tuple[int, int]]]:
    """Reachable synchronous product plus the (state of a, state of b) pair of each state."""
    alphabet = merge_alphabets(a.alphabet, b.alphabet)
    name = f"({a.name}||{b.name})" if a.name or b.name else ""
    if a.is_empty or b.is_empty:
        return Automaton.empty(alphabet, name), []
    shared = a.event_names & b.event_names
    start = (a.initial, b.initial)
    index = {start: 0}
    pairs = [start]
    delta: list[dict[str, int]] = []
    i = 0
    while i < len(pairs):
        xa, xb = pairs[i]
        i += 1
        ra, rb = a.delta[xa], b.delta[xb]
        moves: dict[str, tuple[int, int]] = {}
        for ev, ya in ra.items():
            if ev in shared:
                yb = rb.get(ev)
                if yb is not None:
                    moves[ev] = (ya, yb)
            else:
                moves[ev] = (ya, xb)
        for ev, yb in rb.items():
            if ev not in shared:
                moves[ev] = (xa, yb)
        row = {}
        for ev in sorted(moves):
            nxt = moves[ev]
            j = index.get(nxt)
            if j is None:
                j = index[nxt] = len(pairs)
                pairs.append(nxt)
            row[ev] = j
        delta.append(row)
    marked = [j for j, (xa, xb) in enumerate(pairs) if xa in a.marked and xb in b.marked]
    return Automaton(alphabet, delta, 0, marked, name), pairs


def sync_product(a: Automaton, b: Automaton) -> Automaton:
    return product_with_pairs(a, b)[0]


def product(*automata: Automaton) -> Automaton:
    """Left fold of ``sync_product``; at least one operand is required."""
    if not automata:
        raise AutomatonError("product of zero automata")
    result = automata[0]
    for other in automata[1:]:
        result = sync_product(result, other)
    return result


def selfloop(a: Automaton, events: Iterable[Event]) -> Automaton:
    """Add a self-loop on every new event at every state."""
    events = [e for e in events if e.name not in a.events]
    alphabet = merge_alphabets(a.alphabet, events)
    if a.is_empty:
        return Automaton.empty(alphabet, a.name)
    delta = []
    for row in a.delta:
        row = dict(row)
        for x_ev in events:
            row[x_ev.name] = len(delta)
        delta.append(row)
    return Automaton(alphabet, delta, a.initial, a.marked, a.name)


def universal(sigma: Iterable[Event], name: str = "") -> Automaton:
    """One marked state with every event of ``sigma`` self-looped."""
    sigma = list(sigma)
    if not sigma:
        raise AutomatonError("universal automaton needs a nonempty alphabet")
    return Automaton(sigma, [{e.name: 0 for e in sigma}], 0, [0], name)


# ---------------------------------------------------------------------------
# minimization, projection and equivalence


def minimize(a: Automaton) -> Automaton:
    """Minimal DFA with the same closed and marked languages.

    Moore-style refinement on the accessible part; a missing transition is its
    own distinguishing value, so no completion to a dead state is needed.
    """
    a = accessible(a)
    if a.is_empty:
        return a
    n = a.n_states
    block = [1 if x in a.marked else 0 for x in range(n)]
    n_blocks = len(set(block))
    while True:
        signatures: dict[tuple, int] = {}
        new_block = []
        for x in range(n):
            row = a.delta[x]
            sig = (block[x], tuple(sorted((ev, block[y]) for ev, y in row.items())))
            new_block.append(signatures.setdefault(sig, len(signatures)))
        block = new_block
        if len(signatures) == n_blocks:
            break
        n_blocks = len(signatures)
    delta: list[dict[str, int]] = [{} for _ in range(n_blocks)]
    marked = set()
    for x in range(n):
        b = block[x]
        delta[b] = {ev: block[y] for ev, y in a.delta[x].items()}
        if x in a.marked:
            marked.add(b)
    quotient = Automaton(a.alphabet, delta, block[a.initial], marked, a.name)
    return accessible(quotient)


def _closure(a: Automaton, states: Iterable[int], hidden: frozenset[str]) -> frozenset[int]:
    seen = set(states)
    stack = list(seen)
    while stack:
        x = stack.pop()
        for ev, y in a.delta[x].items():
            if ev in hidden and y not in seen:
                seen.add(y)
                stack.append(y)
    return frozenset(seen)


def subset_projection(a: Automaton, sigma: Iterable[EventLike]) -> tuple[Automaton, list[frozenset[int]]]:
    """Unminimized subset construction for the projection onto ``sigma``.

    Returns the deterministic automaton together with the set of states of
    ``a`` that each of its states stands for.
    """
    keep = event_names(sigma)
    if not keep <= a.event_names:
        raise AutomatonError(f"projection events {sorted(keep - a.event_names)} not in alphabet")
    alphabet = [a.events[n] for n in keep]
    if a.is_empty:
        return Automaton.empty(alphabet), []
    hidden = a.event_names - keep
    start = _closure(a, [a.initial], hidden)
    index = {start: 0}
    subsets = [start]
    delta: list[dict[str, int]] = []
    i = 0
    while i < len(subsets):
        cur = subsets[i]
        i += 1
        moves: dict[str, set[int]] = {}
        for x in cur:
            for ev, y in a.delta[x].items():
                if ev in keep:
                    moves.setdefault(ev, set()).add(y)
        row = {}
        for ev in sorted(moves):
            nxt = _closure(a, moves[ev], hidden)
            j = index.get(nxt)
            if j is None:
                j = index[nxt] = len(subsets)
                subsets.append(nxt)
            row[ev] = j
        delta.append(row)
    marked = [j for j, s in enumerate(subsets) if s & a.marked]
    return Automaton(alphabet, delta, 0, marked, a.name), subsets


def natural_projection(a: Automaton, sigma: Iterable[EventLike]) -> Automaton:
    """Minimal DFA generating P(L(a)) and marking P(L_m(a)) over ``sigma``."""
    proj, _ = subset_projection(a, sigma)
    name = f"P({a.name})" if a.name else ""
    return minimize(proj).with_name(name)


def canonical_form(a: Automaton) -> tuple | None:
    """Hashable normal form; equal iff closed and marked languages are equal."""
    m = minimize(a)
    if m.is_empty:
        return None
    rows = tuple(tuple(sorted(row.items())) for row in m.delta)
    return rows, tuple(sorted(m.marked))


def language_equivalent(a: Automaton, b: Automaton) -> bool:
    """L(a) = L(b) and L_m(a) = L_m(b).

    Alphabets are not compared: an event absent from both languages does not
    distinguish them.
    """
    return canonical_form(a) == canonical_form(b)


def isomorphic(a: Automaton, b: Automaton) -> bool:
    """Equal up to state renumbering (accessible parts only)."""
    ra, rb = accessible(a), accessible(b)
    return (
        [dict(r) for r in ra.delta] == [dict(r) for r in rb.delta]
        and ra.marked == rb.marked
    )


def accepts(a: Automaton, s: Iterable[EventLike]) -> Membership:
    names = [e.name if isinstance(e, Event) else e for e in s]
    for ev in names:
        if ev not in a.events:
            raise AutomatonError(f"unknown event {ev!r}")
    if a.is_empty:
        return Membership.OUTSIDE
    x = a.initial
    for ev in names:
        x = a.delta[x].get(ev)
        if x is None:
            return Membership.OUTSIDE
    return Membership.IN_MARKED if x in a.marked else Membership.IN_CLOSED


def run(a: Automaton, s: Iterable[str], start: int | None = None) -> int | None:
    """State reached from ``start`` (default: initial) by ``s``, or None."""
    x = a.initial if start is None else start
    for ev in s:
        if x is None:
            return None
        x = a.delta[x].get(ev)
    return x


def shortest_path(a: Automaton, targets: Iterable[int], start: int | None = None) -> list[str] | None:
    """Event names of a shortest path from ``start`` to any of ``targets``."""
    targets = set(targets)
    if a.is_empty:
        return None
    start = a.initial if start is None else start
    parent: dict[int, tuple[int, str] | None] = {start: None}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        if x in targets:
            path = []
            while parent[x] is not None:
                x, ev = parent[x]
                path.append(ev)
            return path[::-1]
        row = a.delta[x]
        for ev in sorted(row):
            y = row[ev]
            if y not in parent:
                parent[y] = (x, ev)
                queue.append(y)
    return None
