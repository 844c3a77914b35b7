"""Independent reference implementations used to check the package.

Everything here works from first principles: explicit string enumeration,
fixed-point state sets and exhaustive search.  Only the raw automaton data
(``delta``, ``initial``, ``marked``, ``alphabet``) is read from the package.
"""

from __future__ import annotations

import itertools
from collections import deque
from functools import lru_cache


# ---------------------------------------------------------------------------
# strings and languages


def step(a, x, ev):
    if x is None:
        return None
    return a.delta[x].get(ev)


def walk(a, s, start=None):
    if a.n_states == 0:
        return None
    x = a.initial if start is None else start
    for ev in s:
        x = step(a, x, ev)
        if x is None:
            return None
    return x


def strings(alphabet, max_len):
    alphabet = sorted(alphabet)
    for n in range(max_len + 1):
        yield from itertools.product(alphabet, repeat=n)


def language(a, max_len):
    """(closed, marked) sets of strings of length ≤ max_len, by DFS."""
    closed, marked = set(), set()
    if a.n_states == 0:
        return closed, marked

    def go(x, s):
        closed.add(s)
        if x in a.marked:
            marked.add(s)
        if len(s) == max_len:
            return
        for ev, y in a.delta[x].items():
            go(y, s + (ev,))

    go(a.initial, ())
    return closed, marked


def coreachable_fixpoint(a):
    """States that can reach a marked state (naive fixed point)."""
    good = set(a.marked)
    changed = True
    while changed:
        changed = False
        for x, row in enumerate(a.delta):
            if x not in good and any(y in good for y in row.values()):
                good.add(x)
                changed = True
    return good


def reachable_fixpoint(a):
    if a.n_states == 0:
        return set()
    seen = {a.initial}
    changed = True
    while changed:
        changed = False
        for x in list(seen):
            for y in a.delta[x].values():
                if y not in seen:
                    seen.add(y)
                    changed = True
    return seen


def in_prefix_closure(a, s):
    """s ∈ closure(L_m(a))."""
    x = walk(a, s)
    return x is not None and x in coreachable_fixpoint(a)


def erase(s, keep):
    return tuple(ev for ev in s if ev in keep)


def interleavings(s, t):
    if not s:
        yield t
        return
    if not t:
        yield s
        return
    for rest in interleavings(s[1:], t):
        yield (s[0],) + rest
    for rest in interleavings(s, t[1:]):
        yield (t[0],) + rest


def in_product(a, b, s):
    """Membership of s in L(a∥b) straight from the inverse-projection identity."""
    xa = walk(a, erase(s, a.event_names))
    xb = walk(b, erase(s, b.event_names))
    if xa is None or xb is None:
        return None
    return xa in a.marked and xb in b.marked


def languages_equal_bounded(a, b, max_len):
    return language(a, max_len) == language(b, max_len)


# ---------------------------------------------------------------------------
# product and supcon oracle


def pair_product(a, b):
    """Plain reachable product as (states list, transitions dict, marked set)."""
    start = (a.initial, b.initial)
    states = [start]
    index = {start: 0}
    trans = {}
    i = 0
    while i < len(states):
        xa, xb = states[i]
        for ev in sorted(a.event_names | b.event_names):
            ya = a.delta[xa].get(ev) if ev in a.event_names else xa
            yb = b.delta[xb].get(ev) if ev in b.event_names else xb
            if ya is None or yb is None:
                continue
            nxt = (ya, yb)
            if nxt not in index:
                index[nxt] = len(states)
                states.append(nxt)
            trans[(i, ev)] = index[nxt]
        i += 1
    marked = {j for j, (xa, xb) in enumerate(states) if xa in a.marked and xb in b.marked}
    return states, trans, marked


def brute_supcon_states(plant, spec):
    """Largest set of product states that contains the initial state, is
    closed under uncontrollable plant moves and is nonblocking inside itself.

    Found by checking every subset of the product's states; the union of all
    valid subsets is valid again, so the maximum is unique.
    """
    lifted_events = plant.event_names - spec.event_names
    states, trans, marked = pair_product(plant, _SelfLooped(spec, lifted_events))
    n = len(states)
    unctl = plant.uncontrollable
    best = frozenset()
    for mask in range(1, 1 << n):
        if not mask & 1:
            continue
        sub = {j for j in range(n) if mask >> j & 1}
        ok = True
        for j in sub:
            xa = states[j][0]
            for ev in plant.delta[xa]:
                if ev in unctl and trans.get((j, ev)) not in sub:
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            continue
        # reachable within sub
        reach = {0}
        frontier = [0]
        while frontier:
            j = frontier.pop()
            for (src, ev), dst in trans.items():
                if src == j and dst in sub and dst not in reach:
                    reach.add(dst)
                    frontier.append(dst)
        if reach != sub:
            continue
        good = sub & marked
        changed = True
        while changed:
            changed = False
            for (src, ev), dst in trans.items():
                if src in sub and dst in good and src not in good:
                    good.add(src)
                    changed = True
        if good != sub:
            continue
        best = best | frozenset(sub)
    return states, trans, marked, best


class _SelfLooped:
    """Read-only view of ``a`` with ``extra`` events self-looped everywhere."""

    def __init__(self, a, extra):
        self.initial = a.initial
        self.marked = a.marked
        self.delta = [dict(row, **{ev: x for ev in extra}) for x, row in enumerate(a.delta)]
        self.event_names = a.event_names | frozenset(extra)
        self.n_states = a.n_states


def sub_language(states, trans, marked, keep, max_len):
    closed, mk = set(), set()
    if 0 not in keep:
        return closed, mk

    def go(j, s):
        closed.add(s)
        if j in marked:
            mk.add(s)
        if len(s) == max_len:
            return
        for (src, ev), dst in trans.items():
            if src == j and dst in keep:
                go(dst, s + (ev,))

    go(0, ())
    return closed, mk


def controllable_bounded(k, a, max_len):
    """Definition-level controllability over strings of closure(L_m(k))."""
    unctl = a.uncontrollable
    events = sorted(k.event_names)
    frontier = [()] if in_prefix_closure(k, ()) else []
    for n in range(max_len + 1):
        nxt = []
        for s in frontier:
            for ev in unctl:
                if walk(a, s + (ev,)) is not None and not in_prefix_closure(k, s + (ev,)):
                    return False
            if n < max_len:
                nxt.extend(s + (ev,) for ev in events if in_prefix_closure(k, s + (ev,)))
        frontier = nxt
    return True


# ---------------------------------------------------------------------------
# observability (paired strings)


def observability_violation(k, a, obs, max_len):
    """A violating (s, s', what) with |s|, |s'| ≤ max_len, or None."""
    obs = frozenset(obs)
    prefixes = [s for s in strings(k.event_names, max_len) if in_prefix_closure(k, s)]
    groups = {}
    for s in prefixes:
        groups.setdefault(erase(s, obs), []).append(s)
    for group in groups.values():
        for s in group:
            for s2 in group:
                v = pair_violation(k, a, s, s2)
                if v is not None:
                    return s, s2, v
    return None


def pair_violation(k, a, s, s2):
    for ev in sorted(k.event_names):
        if (
            in_prefix_closure(k, s + (ev,))
            and walk(a, s2 + (ev,)) is not None
            and not in_prefix_closure(k, s2 + (ev,))
        ):
            return ev
    xk, x2 = walk(k, s), walk(k, s2)
    xa2 = walk(a, s2)
    if xk in k.marked and xa2 is not None and xa2 in a.marked and x2 not in k.marked:
        return "marking"
    return None


def certify_observability_witness(k, a, obs, witness):
    s, s2 = tuple(witness["s"]), tuple(witness["s_prime"])
    if erase(s, obs) != erase(s2, obs):
        return False
    if not (in_prefix_closure(k, s) and in_prefix_closure(k, s2)):
        return False
    return pair_violation(k, a, s, s2) is not None


# ---------------------------------------------------------------------------
# observer (definition with an exact completion search)


def completes(a, x, target, keep):
    """Is there u from state x with marking at the end and P(u) = target?"""
    target = tuple(target)
    start = (x, 0)
    seen = {start}
    queue = deque([start])
    while queue:
        y, i = queue.popleft()
        if i == len(target) and y in a.marked:
            return True
        for ev, z in a.delta[y].items():
            if ev in keep:
                if i < len(target) and target[i] == ev:
                    nxt = (z, i + 1)
                else:
                    continue
            else:
                nxt = (z, i)
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return False


def observer_violation(a, keep, max_len):
    keep = frozenset(keep)
    closed, marked = language(a, max_len)
    targets = {erase(t, keep) for t in marked}
    for s in sorted(closed, key=len):
        ps = erase(s, keep)
        x = walk(a, s)
        for t in targets:
            if t[: len(ps)] == ps and not completes(a, x, t[len(ps):], keep):
                return s, t
    return None


def certify_observer_witness(a, keep, witness):
    keep = frozenset(keep)
    s = tuple(witness["s"])
    x = walk(a, s)
    if x is None:
        return False
    t = erase(s, keep) + tuple(witness["t"])
    if not completes(a, a.initial, t, keep):
        return False  # t is not in P(L_m(a))
    return not completes(a, x, tuple(witness["t"]), keep)


# ---------------------------------------------------------------------------
# OCC (path enumeration)


def occ_violation(a, keep, max_len):
    keep = frozenset(keep)
    unctl = a.uncontrollable
    closed, _ = language(a, max_len)
    for s in sorted(closed, key=len):
        if not s or s[-1] not in keep or s[-1] not in unctl:
            continue
        j = len(s) - 1
        while j > 0 and s[j - 1] not in keep:
            j -= 1
        segment = s[j:]
        if any(ev not in unctl for ev in segment):
            return s
    return None


def certify_occ_witness(a, keep, witness):
    s = tuple(witness["prefix"]) + tuple(witness["segment"])
    if walk(a, s) is None:
        return False
    seg = tuple(witness["segment"])
    prefix = tuple(witness["prefix"])
    if prefix and prefix[-1] not in keep:
        return False
    if seg[-1] not in keep or seg[-1] not in a.uncontrollable:
        return False
    if any(ev in keep for ev in seg[:-1]):
        return False
    return any(ev not in a.uncontrollable for ev in seg)


# ---------------------------------------------------------------------------
# graphs and plans


def connected(vertices, edges):
    vertices = set(vertices)
    if not vertices:
        return False
    start = min(vertices)
    seen = {start}
    frontier = [start]
    while frontier:
        v = frontier.pop()
        for a, b in edges:
            for p, q in ((a, b), (b, a)):
                if p == v and q in vertices and q not in seen:
                    seen.add(q)
                    frontier.append(q)
    return seen == vertices


def connected_bipartitions(vertices, edges):
    """Every split of ``vertices`` into two connected halves, smaller-key side first."""
    vertices = sorted(vertices)
    out = set()
    for r in range(1, len(vertices)):
        for left in itertools.combinations(vertices, r):
            right = tuple(v for v in vertices if v not in left)
            if connected(left, edges) and connected(right, edges):
                out.add(min((left, right), (right, left)))
    return sorted(out)


def overlap_edges(groups):
    """Edges between constraints (1-based) whose agent groups intersect."""
    return [
        (k, h)
        for k, h in itertools.combinations(sorted(groups), 2)
        if groups[k] & groups[h]
    ]


def all_plan_depths(groups):
    """Depth of every complete plan tree, by direct recursion over splits."""
    edges = overlap_edges(groups)

    @lru_cache(maxsize=None)
    def depths(node):
        if len(node) == 1:
            return (0,)
        out = []
        for left, right in connected_bipartitions(node, edges):
            for dl in depths(tuple(left)):
                for dr in depths(tuple(right)):
                    out.append(1 + max(dl, dr))
        return tuple(out)

    return depths(tuple(sorted(groups)))


def completion_depths(tree, groups):
    """Depths of every complete tree extending a partial plan tree."""
    from decs.planning import Leaf

    edges = overlap_edges(groups)

    @lru_cache(maxsize=None)
    def node_depths(node):
        if len(node) == 1:
            return frozenset({0})
        out = set()
        for left, right in connected_bipartitions(node, edges):
            for dl in node_depths(tuple(left)):
                for dr in node_depths(tuple(right)):
                    out.add(1 + max(dl, dr))
        return frozenset(out)

    def go(t):
        if isinstance(t, Leaf):
            return node_depths(tuple(sorted(t.node)))
        return frozenset(1 + max(a, b) for a in go(t.left) for b in go(t.right))

    return go(tree)
