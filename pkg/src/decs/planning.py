"""Conflict-resolution planning over AND/OR graphs of subnets.

Nodes are constraint-index sets.  A hyper-edge splits a node into two
disjoint constraint-connected halves along a cut-set of its relational
network.  Plans are binary trees over these splits; their depth measures how
many rounds of pairwise composition are needed when independent compositions
run side by side.
"""

from __future__ import annotations

import heapq
import itertools
import math
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

from .dcsn import Crn, Dcsn, build_crn, components

Node = frozenset  # frozenset[int] of constraint indices


class PlanningError(ValueError):
    pass


def node_key(n: Iterable[int]) -> tuple[int, ...]:
    return tuple(sorted(n))


def fmt_node(n: Iterable[int]) -> str:
    return "[" + ",".join(str(k) for k in node_key(n)) + "]"


# ---------------------------------------------------------------------------
# cut-sets


@dataclass(frozen=True)
class CutSet:
    left: frozenset[int]
    right: frozenset[int]
    edges: frozenset[tuple[int, int]]

    @classmethod
    def of(cls, part: Iterable[int], vertices: Iterable[int], edges: Iterable[tuple[int, int]]):
        a = frozenset(part)
        b = frozenset(vertices) - a
        if node_key(b) < node_key(a):
            a, b = b, a
        crossing = frozenset(e for e in edges if (e[0] in a) != (e[1] in a))
        return cls(a, b, crossing)


CutsetFilter = Callable[[CutSet], bool]


def _spanning_tree(vertices: list[int], adj: dict[int, list[int]]) -> list[tuple[int, int]]:
    root = vertices[0]
    seen = {root}
    queue = deque([root])
    tree = []
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                tree.append((v, w))
                queue.append(w)
    return tree


def all_cutsets(g: Crn) -> list[CutSet]:
    """Every cut-set of a connected graph, sorted by (left, right).

    Fundamental cut-sets of a BFS spanning tree are combined by ring sum over
    every nonempty subset; each candidate is kept only if deleting it leaves
    exactly two connected parts.
    """
    vertices = sorted(g.vertices)
    if len(vertices) < 2:
        raise PlanningError("cut-sets need at least two vertices")
    edges = sorted(g.edges)
    if len(components(vertices, edges)) != 1:
        raise PlanningError("cut-sets need a connected graph")
    adj: dict[int, list[int]] = {v: [] for v in vertices}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    for v in adj:
        adj[v].sort()
    bit = {e: 1 << i for i, e in enumerate(edges)}
    tree = _spanning_tree(vertices, adj)
    fundamental = []
    for t in tree:
        rest = [e for e in tree if e != t]
        side = next(c for c in components(vertices, rest) if t[0] in c)
        mask = 0
        for e in edges:
            if (e[0] in side) != (e[1] in side):
                mask |= bit[e]
        fundamental.append(mask)
    found: dict[tuple, CutSet] = {}
    for size in range(1, len(fundamental) + 1):
        for combo in itertools.combinations(fundamental, size):
            mask = 0
            for m in combo:
                mask ^= m
            kept = [e for e in edges if not mask & bit[e]]
            parts = components(vertices, kept)
            if len(parts) != 2:
                continue
            cut = CutSet.of(parts[0], vertices, edges)
            if cut.edges != frozenset(e for e in edges if mask & bit[e]):
                continue
            found.setdefault((node_key(cut.left), node_key(cut.right)), cut)
    return [found[k] for k in sorted(found)]


# ---------------------------------------------------------------------------
# AND/OR graph


@dataclass
class AndOrGraph:
    root: frozenset[int]
    nodes: set[frozenset[int]] = field(default_factory=set)
    hyper_edges: dict[frozenset[int], list[tuple[frozenset[int], frozenset[int]]]] = field(
        default_factory=dict
    )
    diagnostics: list[str] = field(default_factory=list)

    @property
    def is_empty(self) -> bool:
        return not any(self.hyper_edges.values())

    @property
    def n_hyper_edges(self) -> int:
        return sum(len(v) for v in self.hyper_edges.values())

    def out_degree(self, n: Iterable[int]) -> int:
        return len(self.hyper_edges.get(frozenset(n), ()))

    def stats(self) -> str:
        return f"{len(self.nodes)} nodes, {self.n_hyper_edges} hyper-edges"


def generate_andor_graph(
    d: Dcsn,
    members: Iterable[int] | None = None,
    cutset_filter: CutsetFilter | None = None,
) -> AndOrGraph:
    """Decompose the network (or the subnet ``members``) recursively along
    cut-sets, expanding each subnet once."""
    root = frozenset(members) if members is not None else frozenset(range(1, d.m + 1))
    g = AndOrGraph(root)
    g.nodes.add(root)
    if len(root) == 1:
        return g
    crn = build_crn(d.subnet(root))
    if len(components(crn.vertices, crn.edges)) != 1:
        raise PlanningError(f"subnet {fmt_node(root)} is not constraint-connected")
    stack = [root]
    expanded = set()
    while stack:
        n = stack.pop()
        if n in expanded or len(n) == 1:
            continue
        expanded.add(n)
        cuts = all_cutsets(build_crn(d.subnet(n)))
        if cutset_filter is not None:
            cuts = [c for c in cuts if cutset_filter(c)]
        if not cuts:
            g.diagnostics.append(f"every cut-set of {fmt_node(n)} was rejected")
        edges = []
        for c in cuts:
            edges.append((c.left, c.right))
            for child in (c.left, c.right):
                if child not in g.nodes:
                    g.nodes.add(child)
                    stack.append(child)
        g.hyper_edges[n] = edges
    return g


# ---------------------------------------------------------------------------
# plan trees


@dataclass(frozen=True)
class Leaf:
    node: frozenset[int]


@dataclass(frozen=True)
class Branch:
    node: frozenset[int]
    left: "PlanTree"
    right: "PlanTree"

    @property
    def split(self) -> tuple[frozenset[int], frozenset[int]]:
        return self.left.node, self.right.node


PlanTree = Leaf | Branch


def depth(t: PlanTree) -> int:
    if isinstance(t, Leaf):
        return 0
    return 1 + max(depth(t.left), depth(t.right))


def h_p(t: PlanTree) -> float:
    """Admissible estimate of the depth of any completion of ``t``."""
    if isinstance(t, Leaf):
        return math.log2(len(t.node))
    return 1 + max(h_p(t.left), h_p(t.right))


def leaves(t: PlanTree) -> list[frozenset[int]]:
    if isinstance(t, Leaf):
        return [t.node]
    return leaves(t.left) + leaves(t.right)


def branches(t: PlanTree) -> list[Branch]:
    if isinstance(t, Leaf):
        return []
    return branches(t.left) + branches(t.right) + [t]


def is_complete(t: PlanTree) -> bool:
    return all(len(n) == 1 for n in leaves(t))


def tree_key(t: PlanTree) -> frozenset:
    return frozenset((b.node, b.left.node, b.right.node) for b in branches(t))


def _expand(t: PlanTree, target: frozenset[int], split) -> PlanTree:
    if isinstance(t, Leaf):
        if t.node == target:
            return Branch(t.node, Leaf(split[0]), Leaf(split[1]))
        return t
    if target <= t.left.node:
        return Branch(t.node, _expand(t.left, target, split), t.right)
    if target <= t.right.node:
        return Branch(t.node, t.left, _expand(t.right, target, split))
    return t


def _terminal(t: PlanTree) -> frozenset[int]:
    open_nodes = [n for n in leaves(t) if len(n) > 1]
    return min(open_nodes, key=lambda n: (-len(n), node_key(n)))


def heuristic_plan_selection(
    g: AndOrGraph,
    h: Callable[[PlanTree], float] = h_p,
    trace: list | None = None,
) -> PlanTree:
    """Best-first search over partial trees ranked by ``h``.

    Ties are broken first-in first-out; the expanded terminal is the open
    node with the most constraints.  Structurally identical partial trees
    are queued once.  If ``trace`` is a list, every extracted tree is
    appended to it.
    """
    start = Leaf(g.root)
    counter = itertools.count()
    queue = [(round(h(start), 9), next(counter), start)]
    seen = {tree_key(start)}
    while queue:
        _, _, t = heapq.heappop(queue)
        if trace is not None:
            trace.append(t)
        if is_complete(t):
            return t
        n = _terminal(t)
        for split in g.hyper_edges.get(n, ()):
            child = _expand(t, n, split)
            key = tree_key(child)
            if key in seen:
                continue
            seen.add(key)
            heapq.heappush(queue, (round(h(child), 9), next(counter), child))
    raise PlanningError(f"no complete plan exists for {fmt_node(g.root)}")


def complete_trees(g: AndOrGraph, n: frozenset[int] | None = None) -> Iterator[PlanTree]:
    """Every complete tree rooted at ``n`` (default: the root)."""
    n = g.root if n is None else n
    if len(n) == 1:
        yield Leaf(n)
        return
    for a, b in g.hyper_edges.get(n, ()):
        for left in complete_trees(g, a):
            for right in complete_trees(g, b):
                yield Branch(n, left, right)


def schedule_from_plan(t: PlanTree) -> list[list[Branch]]:
    """Compositions grouped by height: level k holds the branches of depth k."""
    levels: list[list[Branch]] = [[] for _ in range(depth(t))]
    for b in branches(t):
        levels[depth(b) - 1].append(b)
    for level in levels:
        level.sort(key=lambda b: node_key(b.node))
    return levels


# ---------------------------------------------------------------------------
# plan text format:  (node)  |  (node, [left|right], tree, tree)


def format_plan(t: PlanTree) -> str:
    if isinstance(t, Leaf):
        return f"({fmt_node(t.node)})"
    return (
        f"({fmt_node(t.node)}, [{fmt_node(t.left.node)}|{fmt_node(t.right.node)}], "
        f"{format_plan(t.left)}, {format_plan(t.right)})"
    )


_TOKEN = re.compile(r"\s*(?:(\d+)|(.))")


def parse_plan(text: str) -> PlanTree:
    tokens = []
    for m in _TOKEN.finditer(text.strip()):
        if m.group(1) is not None:
            tokens.append(int(m.group(1)))
        elif not m.group(2).isspace():
            tokens.append(m.group(2))
    pos = 0

    def expect(tok):
        nonlocal pos
        if pos >= len(tokens) or tokens[pos] != tok:
            got = tokens[pos] if pos < len(tokens) else "end of input"
            raise PlanningError(f"plan syntax: expected {tok!r}, got {got!r} at token {pos}")
        pos += 1

    def node():
        nonlocal pos
        expect("[")
        out = []
        while pos < len(tokens) and isinstance(tokens[pos], int):
            out.append(tokens[pos])
            pos += 1
            if pos < len(tokens) and tokens[pos] == ",":
                pos += 1
        expect("]")
        if not out:
            raise PlanningError("plan syntax: empty node")
        return frozenset(out)

    def tree():
        nonlocal pos
        expect("(")
        n = node()
        if pos < len(tokens) and tokens[pos] == ")":
            pos += 1
            return Leaf(n)
        expect(",")
        expect("[")
        a = node()
        expect("|")
        b = node()
        expect("]")
        expect(",")
        left = tree()
        expect(",")
        right = tree()
        expect(")")
        if (left.node, right.node) != (a, b):
            raise PlanningError(f"plan: subtrees of {fmt_node(n)} do not match its split")
        if a | b != n or a & b:
            raise PlanningError(f"plan: split of {fmt_node(n)} is not a partition")
        return Branch(n, left, right)

    t = tree()
    if pos != len(tokens):
        raise PlanningError(f"plan syntax: trailing input at token {pos}")
    return t


def check_plan(t: PlanTree, g: AndOrGraph) -> None:
    """Raise unless ``t`` is a complete tree of ``g``."""
    if t.node != g.root:
        raise PlanningError(f"plan root {fmt_node(t.node)} is not {fmt_node(g.root)}")
    if not is_complete(t):
        raise PlanningError("plan is not complete")
    for b in branches(t):
        if b.split not in g.hyper_edges.get(b.node, ()):
            raise PlanningError(f"split {fmt_node(b.left.node)}|{fmt_node(b.right.node)} is not a hyper-edge")


def plan_network(d: Dcsn, cutset_filter: CutsetFilter | None = None) -> list[PlanTree]:
    """One selected plan per constraint-connected component of the network."""
    crn = build_crn(d.full())
    plans = []
    for comp in components(crn.vertices, crn.edges):
        g = generate_andor_graph(d, comp, cutset_filter)
        plans.append(heuristic_plan_selection(g))
    return plans
