"""Agents, inter-agent constraints and the networks built from them.

Agents and constraints are numbered from 1, as in the ``.dcsn`` file format.
A subnet is just a set of constraint numbers tied to its network.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

from .automata import Automaton, AutomatonError, Event, is_nonblocking


@dataclass(frozen=True)
class Constraint:
    index: int
    agents: frozenset[int]
    automaton: Automaton


@dataclass(frozen=True, eq=False)
class Dcsn:
    agents: tuple[Automaton, ...]
    constraints: tuple[Constraint, ...]

    @classmethod
    def build(
        cls,
        agents: Sequence[Automaton],
        constraints: Iterable[tuple[Iterable[int], Automaton]],
    ) -> "Dcsn":
        """Constraints are numbered 1.. in the given order."""
        cons = tuple(
            Constraint(k, frozenset(j), c) for k, (j, c) in enumerate(constraints, start=1)
        )
        return cls(tuple(agents), cons)

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def m(self) -> int:
        return len(self.constraints)

    def agent(self, i: int) -> Automaton:
        return self.agents[i - 1]

    def constraint(self, k: int) -> Constraint:
        if not 1 <= k <= self.m:
            raise KeyError(f"no constraint {k}")
        return self.constraints[k - 1]

    def subnet(self, members: Iterable[int]) -> "Subnet":
        return Subnet(frozenset(members), self)

    def full(self) -> "Subnet":
        return self.subnet(range(1, self.m + 1))

    def owner_of(self, event: str) -> int | None:
        for i, a in enumerate(self.agents, start=1):
            if event in a.events:
                return i
        return None


@dataclass(frozen=True)
class Subnet:
    members: frozenset[int]
    parent: Dcsn = field(compare=False, repr=False)

    def __post_init__(self):
        if not self.members:
            raise ValueError("a subnet needs at least one constraint")
        bad = [k for k in self.members if not 1 <= k <= self.parent.m]
        if bad:
            raise ValueError(f"constraint indices {sorted(bad)} out of range")

    @property
    def is_basic(self) -> bool:
        return len(self.members) == 1

    @property
    def agents(self) -> frozenset[int]:
        return frozenset().union(*(self.parent.constraint(k).agents for k in self.members))

    def label(self) -> str:
        return "-".join(str(k) for k in sorted(self.members))

    def as_dcsn(self) -> Dcsn:
        """The subnet as a network of its own (agents renumbered densely)."""
        order = sorted(self.agents)
        renum = {i: n for n, i in enumerate(order, start=1)}
        cons = [
            ([renum[i] for i in self.parent.constraint(k).agents], self.parent.constraint(k).automaton)
            for k in sorted(self.members)
        ]
        return Dcsn.build([_retag(self.parent.agent(i), renum[i]) for i in order], cons)


def _retag(a: Automaton, owner: int) -> Automaton:
    alphabet = [Event(e.name, e.controllable, owner) for e in a.alphabet]
    return Automaton(alphabet, a.delta, a.initial, a.marked, a.name)


def _same_parent(a: Subnet, b: Subnet) -> None:
    if a.parent is not b.parent:
        raise ValueError("subnets belong to different networks")


def subnet_union(a: Subnet, b: Subnet) -> Subnet:
    _same_parent(a, b)
    return Subnet(a.members | b.members, a.parent)


def subnet_intersection(a: Subnet, b: Subnet) -> Subnet | None:
    _same_parent(a, b)
    common = a.members & b.members
    return Subnet(common, a.parent) if common else None


def validate(d: Dcsn) -> list[str]:
    """All violated well-formedness conditions; empty when the network is valid."""
    problems: list[str] = []
    if not d.agents:
        problems.append("network has no agents")
    for (i, a), (j, b) in combinations(enumerate(d.agents, start=1), 2):
        shared = a.event_names & b.event_names
        if shared:
            problems.append(f"agents {i} and {j} share events {sorted(shared)}")
    for i, a in enumerate(d.agents, start=1):
        for ev in sorted(a.alphabet):
            if ev.owner is not None and ev.owner != i:
                problems.append(f"agent {i}: event {ev.name} declares owner {ev.owner}")
        if a.is_empty:
            problems.append(f"agent {i} is empty")
        elif not is_nonblocking(a):
            problems.append(f"agent {i} is blocking")
    covered: set[int] = set()
    for c in d.constraints:
        k = c.index
        if not c.agents:
            problems.append(f"constraint {k} lists no agents")
        for i in sorted(c.agents):
            if not 1 <= i <= d.n:
                problems.append(f"constraint {k} names unknown agent {i}")
                continue
            covered.add(i)
            if not d.agent(i).event_names & c.automaton.event_names:
                problems.append(f"constraint {k} shares no event with agent {i}")
        group = {e.name: e for i in c.agents if 1 <= i <= d.n for e in d.agent(i).alphabet}
        for ev in sorted(c.automaton.alphabet):
            other = group.get(ev.name)
            if other is None:
                problems.append(f"constraint {k}: event {ev.name} is not an event of its agents")
            elif other.controllable != ev.controllable:
                problems.append(f"constraint {k}: event {ev.name} has conflicting controllability")
    missing = set(range(1, d.n + 1)) - covered
    if missing:
        problems.append(f"agents {sorted(missing)} belong to no constraint")
    return problems


@dataclass(frozen=True)
class Crn:
    """Constraint relational network: constraints linked by shared agents."""

    vertices: tuple[int, ...]
    edges: dict[tuple[int, int], frozenset[int]]

    def neighbours(self, v: int) -> list[int]:
        out = []
        for a, b in self.edges:
            if a == v:
                out.append(b)
            elif b == v:
                out.append(a)
        return sorted(out)


def build_crn(s: Subnet) -> Crn:
    members = sorted(s.members)
    edges = {}
    for k, h in combinations(members, 2):
        overlap = s.parent.constraint(k).agents & s.parent.constraint(h).agents
        if overlap:
            edges[(k, h)] = overlap
    return Crn(tuple(members), edges)


def components(vertices: Iterable[int], edges: Iterable[tuple[int, int]]) -> list[frozenset[int]]:
    """Connected components (sorted by smallest vertex)."""
    parent = {v: v for v in vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, set[int]] = {}
    for v in parent:
        groups.setdefault(find(v), set()).add(v)
    return sorted((frozenset(g) for g in groups.values()), key=min)


def is_constraint_connected(s: Subnet) -> bool:
    crn = build_crn(s)
    return len(components(crn.vertices, crn.edges)) == 1


def check(d: Dcsn) -> Dcsn:
    problems = validate(d)
    if problems:
        raise AutomatonError("; ".join(problems))
    return d
