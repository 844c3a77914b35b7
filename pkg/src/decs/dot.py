"""Graphviz DOT renderings."""

from __future__ import annotations

from .automata import Automaton
from .dcsn import Crn, Dcsn
from .planning import AndOrGraph, Leaf, PlanTree, fmt_node, node_key


def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def automaton_dot(a: Automaton) -> str:
    out = [f"digraph {_q(a.name or 'automaton')} {{", "  rankdir=LR;"]
    if a.initial is not None:
        out.append('  __init [shape=point, label=""];')
    for x in range(a.n_states):
        shape = "doublecircle" if x in a.marked else "circle"
        out.append(f"  {x} [shape={shape}];")
    if a.initial is not None:
        out.append(f"  __init -> {a.initial};")
    for x, ev, y in sorted(a.transitions()):
        style = "" if a.events[ev].controllable else ", style=dashed"
        out.append(f"  {x} -> {y} [label={_q(ev)}{style}];")
    out.append("}")
    return "\n".join(out) + "\n"


def dcsn_dot(d: Dcsn) -> str:
    out = ["graph dcsn {"]
    for i, a in enumerate(d.agents, start=1):
        out.append(f"  A{i} [shape=box, label={_q(a.name or f'A{i}')}];")
    for c in d.constraints:
        out.append(f"  C{c.index} [shape=oval, label={_q(c.automaton.name or f'C{c.index}')}];")
        for i in sorted(c.agents):
            out.append(f"  C{c.index} -- A{i};")
    out.append("}")
    return "\n".join(out) + "\n"


def crn_dot(g: Crn) -> str:
    out = ["graph crn {"]
    for v in g.vertices:
        out.append(f"  C{v} [shape=oval];")
    for (a, b), label in sorted(g.edges.items()):
        out.append(f"  C{a} -- C{b} [label={_q(','.join(map(str, sorted(label))))}];")
    out.append("}")
    return "\n".join(out) + "\n"


def _nid(n) -> str:
    return "n_" + "_".join(map(str, node_key(n)))


def andor_dot(g: AndOrGraph) -> str:
    out = ["digraph andor {", "  node [shape=box];"]
    for n in sorted(g.nodes, key=lambda n: (-len(n), node_key(n))):
        out.append(f"  {_nid(n)} [label={_q(fmt_node(n))}];")
    j = 0
    for parent in sorted(g.hyper_edges, key=lambda n: (-len(n), node_key(n))):
        for a, b in g.hyper_edges[parent]:
            out.append(f'  h{j} [shape=point, label=""];')
            out.append(f"  {_nid(parent)} -> h{j} [arrowhead=none];")
            out.append(f"  h{j} -> {_nid(a)};")
            out.append(f"  h{j} -> {_nid(b)};")
            j += 1
    out.append("}")
    return "\n".join(out) + "\n"


def plan_dot(t: PlanTree) -> str:
    out = ["digraph plan {", "  node [shape=box];"]
    counter = [0]

    def walk(node: PlanTree) -> str:
        name = f"t{counter[0]}"
        counter[0] += 1
        out.append(f"  {name} [label={_q(fmt_node(node.node))}];")
        if not isinstance(node, Leaf):
            for child in (node.left, node.right):
                out.append(f"  {name} -> {walk(child)};")
        return name

    walk(t)
    out.append("}")
    return "\n".join(out) + "\n"
