"""Supervisory-control computations recast for coordination modules (CMs).

Checks that can fail return a :class:`Verdict`, which is truthy when the
property holds and otherwise carries a shortest counterexample.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .automata import (
    Automaton,
    AutomatonError,
    EventLike,
    coreachable_states,
    event_names,
    natural_projection,
    product,
    product_with_pairs,
    reachable_states,
    restrict,
    selfloop,
    shortest_path,
    subset_projection,
    trim,
)


@dataclass(frozen=True)
class Verdict:
    holds: bool
    witness: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.holds


OK = Verdict(True)


def _walk_back(parent: dict, node) -> list:
    steps = []
    while parent[node] is not None:
        node, step = parent[node]
        steps.append(step)
    return steps[::-1]


def _require_same_alphabet(k: Automaton, a: Automaton) -> None:
    if k.event_names != a.event_names:
        raise AutomatonError(
            "alphabet mismatch: "
            f"only in first {sorted(k.event_names - a.event_names)}, "
            f"only in second {sorted(a.event_names - k.event_names)}"
        )


# ---------------------------------------------------------------------------
# controllability and supremal controllable sublanguage


def is_controllable(k: Automaton, a: Automaton) -> Verdict:
    """Is L_m(k) controllable w.r.t. the plant ``a``?

    The witness is ``{"string": s, "event": sigma}`` with ``s`` of minimal length.
    """
    _require_same_alphabet(k, a)
    k = trim(k)
    if k.is_empty or a.is_empty:
        return OK
    unctl = a.uncontrollable
    start = (k.initial, a.initial)
    parent = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        xk, xa = node
        rk, ra = k.delta[xk], a.delta[xa]
        for ev in sorted(ra):
            if ev in unctl and ev not in rk:
                return Verdict(False, {"string": _walk_back(parent, node), "event": ev})
        for ev in sorted(rk):
            ya = ra.get(ev)
            if ya is None:
                continue
            nxt = (rk[ev], ya)
            if nxt not in parent:
                parent[nxt] = (node, ev)
                queue.append(nxt)
    return OK


def supcon(c: Automaton, a: Automaton, name: str = "") -> Automaton:
    """Nonblocking automaton marking the supremal controllable sublanguage of
    L_m(a) ∩ L_m(c) w.r.t. ``a``.

    ``c`` is lifted to the plant alphabet by self-looping the plant events it
    does not mention.  States of the product are pruned until no state lets an
    uncontrollable plant event escape and every state is coreachable.
    """
    extra = c.event_names - a.event_names
    if extra:
        raise AutomatonError(f"constraint events {sorted(extra)} are not plant events")
    lifted = selfloop(c, [e for e in a.alphabet if e.name not in c.events])
    prod, pairs = product_with_pairs(a, lifted)
    if prod.is_empty:
        return prod.with_name(name)
    unctl = a.uncontrollable
    good = reachable_states(prod)
    while True:
        keep = set()
        for x in good:
            row = prod.delta[x]
            if all(row.get(ev) in good for ev in a.delta[pairs[x][0]] if ev in unctl):
                keep.add(x)
        keep = coreachable_states(prod, keep)
        keep = reachable_states(restrict_view(prod, keep)) if prod.initial in keep else set()
        if keep == good:
            break
        good = keep
    return restrict(prod, good, name)


def restrict_view(a: Automaton, keep: set[int]) -> Automaton:
    """Like :func:`restrict` but keeps original state numbers (for set arithmetic)."""
    if a.is_empty or a.initial not in keep:
        return Automaton.empty(a.alphabet)
    delta = [
        {ev: y for ev, y in row.items() if y in keep} if x in keep else {}
        for x, row in enumerate(a.delta)
    ]
    return Automaton(a.alphabet, delta, a.initial, a.marked & keep)


# ---------------------------------------------------------------------------
# observability and coordinability


def is_observable(k: Automaton, a: Automaton, sigma_o: Iterable[EventLike]) -> Verdict:
    """Is L_m(k) observable w.r.t. plant ``a`` and the projection onto ``sigma_o``?

    Explores triples (state of k after s, state of k after s', state of a after
    s') over string pairs with equal projections.  The witness names the two
    strings and either the offending event or ``"marking"``.
    """
    _require_same_alphabet(k, a)
    obs = event_names(sigma_o)
    if not obs <= a.event_names:
        raise AutomatonError(f"observed events {sorted(obs - a.event_names)} not in alphabet")
    k = trim(k)
    if k.is_empty or a.is_empty:
        return OK
    start = (k.initial, k.initial, a.initial)
    parent = {start: None}
    queue = deque([start])
    kd, ad = k.delta, a.delta
    while queue:
        node = queue.popleft()
        x, y, q = node
        rx, ry, rq = kd[x], kd[y], ad[q]
        for ev in rx:
            if ev not in ry and ev in rq:
                return _observability_witness(parent, node, ev)
        if x in k.marked and q in a.marked and y not in k.marked:
            return _observability_witness(parent, node, "marking")
        for ev, x2 in rx.items():
            if ev in obs:
                y2 = ry.get(ev)
                q2 = rq.get(ev)
                if y2 is None or q2 is None:
                    continue
                nxt, step = (x2, y2, q2), ("both", ev)
            else:
                nxt, step = (x2, y, q), ("left", ev)
            if nxt not in parent:
                parent[nxt] = (node, step)
                queue.append(nxt)
        for ev, y2 in ry.items():
            if ev in obs:
                continue
            q2 = rq.get(ev)
            if q2 is None:
                continue
            nxt = (x, y2, q2)
            if nxt not in parent:
                parent[nxt] = (node, ("right", ev))
                queue.append(nxt)
    return OK


def _observability_witness(parent: dict, node, what: str) -> Verdict:
    steps = _walk_back(parent, node)
    s = [ev for side, ev in steps if side in ("left", "both")]
    s2 = [ev for side, ev in steps if side in ("right", "both")]
    return Verdict(False, {"s": s, "s_prime": s2, "violation": what})


def is_coordinable(
    k: Automaton,
    agents: Sequence[Automaton],
    sigma_com: Iterable[EventLike],
    plant: Automaton | None = None,
) -> Verdict:
    """Controllable w.r.t. the free product of ``agents`` and observable through
    every agent's own events plus ``sigma_com``."""
    plant = product(*agents) if plant is None else plant
    com = event_names(sigma_com)
    verdict = is_controllable(k, plant)
    if not verdict:
        return Verdict(False, {"controllability": verdict.witness})
    for i, agent in enumerate(agents):
        verdict = is_observable(k, plant, agent.event_names | com)
        if not verdict:
            return Verdict(False, {"agent": i, "observability": verdict.witness})
    return OK


def min_sys_com_set(k: Automaton, agents: Sequence[Automaton]) -> frozenset[str]:
    """Smallest communication set making ``k`` coordinable.

    Candidates are enumerated by increasing size and, within a size, in
    lexicographic order of sorted event names; the first success is returned.
    """
    plant = product(*agents)
    if not is_controllable(k, plant):
        raise AutomatonError("language is not controllable; no communication set helps")
    pool = sorted(plant.event_names & k.event_names)
    own = [a.event_names for a in agents]
    memo: dict[tuple[int, frozenset[str]], bool] = {}

    def agent_ok(i: int, com: frozenset[str]) -> bool:
        key = (i, com - own[i])
        if key not in memo:
            memo[key] = bool(is_observable(k, plant, own[i] | key[1]))
        return memo[key]

    for size in range(len(pool) + 1):
        for combo in itertools.combinations(pool, size):
            com = frozenset(combo)
            if all(agent_ok(i, com) for i in range(len(agents))):
                return com
    raise AutomatonError("language is not observable even under full communication")


# ---------------------------------------------------------------------------
# observer and output-control-consistency


def is_observer(sup: Automaton, sigma: Iterable[EventLike]) -> Verdict:
    """Is the projection onto ``sigma`` an L_m(sup)-observer?

    For every state x reached by s and abstract state d reached by P(s), every
    marked continuation of d must be realisable from x.  The witness holds the
    concrete string ``s`` and the abstract continuation ``t`` that cannot be
    realised.
    """
    keep = event_names(sigma)
    abstract, subsets = subset_projection(sup, keep)
    if abstract.is_empty:
        return OK
    hidden = sup.event_names - keep
    live = coreachable_states(abstract, reachable_states(abstract))

    def closure(states):
        seen = set(states)
        stack = list(seen)
        while stack:
            x = stack.pop()
            for ev, y in sup.delta[x].items():
                if ev in hidden and y not in seen:
                    seen.add(y)
                    stack.append(y)
        return frozenset(seen)

    joint, pairs = product_with_pairs(sup, abstract)
    visited: set = set()
    for j in range(joint.n_states):
        x, d = pairs[j]
        if d not in live:
            continue
        start = (d, closure([x]))
        if start in visited:
            continue
        parent = {start: None}
        queue = deque([start])
        while queue:
            node = queue.popleft()
            d1, cur = node
            failed = None
            if d1 in abstract.marked and not (cur & sup.marked):
                failed = node
            else:
                row = abstract.delta[d1]
                for ev in sorted(row):
                    d2 = row[ev]
                    if d2 not in live:
                        continue
                    succ = {sup.delta[z][ev] for z in cur if ev in sup.delta[z]}
                    nxt = (d2, closure(succ))
                    if not succ:
                        parent[nxt] = (node, ev)
                        failed = nxt
                        break
                    if nxt not in parent and nxt not in visited:
                        parent[nxt] = (node, ev)
                        queue.append(nxt)
            if failed is not None:
                s = shortest_path(joint, [j])
                # finish t inside the abstract marked language
                rest = _path_to_marked(abstract, failed[0])
                return Verdict(False, {
                    "s": s,
                    "t": _walk_back(parent, failed) + rest,
                    "state": x,
                })
        visited.update(parent)
    return OK


def _path_to_marked(a: Automaton, start: int) -> list[str]:
    parent = {start: None}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        if x in a.marked:
            out = []
            while parent[x] is not None:
                x, ev = parent[x]
                out.append(ev)
            return out[::-1]
        for ev in sorted(a.delta[x]):
            y = a.delta[x][ev]
            if y not in parent:
                parent[y] = (x, ev)
                queue.append(y)
    raise AssertionError("state is not coreachable")


def is_occ(a: Automaton, sigma: Iterable[EventLike]) -> Verdict:
    """Is the projection onto ``sigma`` output-control-consistent for L(a)?

    Searches, from the initial state and from every target of an observable
    transition, unobservable paths that use a controllable event and end at a
    state enabling an observable uncontrollable event.  The witness gives the
    path ``prefix`` to the segment start and the offending ``segment``.
    """
    keep = event_names(sigma)
    if a.is_empty:
        return OK
    reach = reachable_states(a)
    entries = {a.initial}
    for x in reach:
        for ev, y in a.delta[x].items():
            if ev in keep:
                entries.add(y)
    unctl = a.uncontrollable
    for e in sorted(entries):
        start = (e, False)
        parent = {start: None}
        queue = deque([start])
        while queue:
            node = queue.popleft()
            x, tainted = node
            row = a.delta[x]
            if tainted:
                for ev in sorted(row):
                    if ev in keep and ev in unctl:
                        segment = _walk_back(parent, node) + [ev]
                        return Verdict(False, {
                            "prefix": _entry_path(a, e, keep),
                            "segment": segment,
                        })
            for ev in sorted(row):
                if ev in keep:
                    continue
                nxt = (row[ev], tainted or ev not in unctl)
                if nxt not in parent:
                    parent[nxt] = (node, ev)
                    queue.append(nxt)
    return OK


def _entry_path(a: Automaton, e: int, keep: frozenset[str]) -> list[str]:
    """Shortest string reaching ``e`` that is empty or ends with an event of ``keep``."""
    if e == a.initial:
        return []
    best = None
    for x in sorted(reachable_states(a)):
        for ev in sorted(a.delta[x]):
            if ev in keep and a.delta[x][ev] == e:
                path = shortest_path(a, [x]) + [ev]
                if best is None or len(path) < len(best):
                    best = path
    return best


def _hint_events(prop: str, auto: Automaton, sigma: frozenset[str], witness: dict) -> set[str]:
    """Erased events implicated by a failed observer/OCC check."""
    hidden = auto.event_names - sigma
    if prop == "occ":
        seg = witness["segment"][:-1]
        picked = {ev for ev in seg if ev in hidden and ev in auto.controllable}
        return picked or {ev for ev in seg if ev in hidden}
    s = witness["s"]
    tail = []
    for ev in reversed(s):
        if ev in sigma:
            break
        tail.append(ev)
    picked = {ev for ev in tail if ev in hidden}
    if not picked:
        picked = {ev for ev in s if ev in hidden}
    if not picked:
        x = witness["state"]
        picked = {ev for ev in auto.delta[x] if ev in hidden}
    return picked


CHECKS = {"observer": is_observer, "occ": is_occ}


def enlarge_event_set(
    base: Iterable[EventLike],
    requirements: Sequence[tuple[Automaton, str]],
) -> frozenset[str]:
    """Grow ``base`` until every (automaton, "observer"|"occ") requirement holds
    for the projection onto the set restricted to that automaton's alphabet.

    Growth is counterexample driven; a final pass drops added events one at a
    time while all requirements keep holding.
    """
    base = event_names(base)
    universe = frozenset().union(*(auto.event_names for auto, _ in requirements)) | base
    for _, prop in requirements:
        if prop not in CHECKS:
            raise ValueError(f"unknown requirement {prop!r}")

    def failure(sigma: frozenset[str]):
        for auto, prop in requirements:
            local = sigma & auto.event_names
            verdict = CHECKS[prop](auto, local)
            if not verdict:
                return auto, prop, local, verdict.witness
        return None

    sigma = base
    while True:
        failed = failure(sigma)
        if failed is None:
            break
        auto, prop, local, witness = failed
        add = _hint_events(prop, auto, local, witness) - sigma
        if not add:
            rest = sorted((auto.event_names - sigma) or (universe - sigma))
            add = {rest[0]}
        sigma = sigma | add
    for ev in sorted(sigma - base, reverse=True):
        smaller = sigma - {ev}
        if failure(smaller) is None:
            sigma = smaller
    return sigma


# ---------------------------------------------------------------------------
# coordination modules


def cm_from(sup: Automaton, sigma: Iterable[EventLike], name: str = "") -> Automaton:
    """CM over ``sigma``: the minimal DFA of the projection of ``sup``."""
    return natural_projection(sup, sigma).with_name(name)


def _control_data(s: Automaton, a: Automaton):
    own = a.controllable & s.event_names
    joint, pairs = product_with_pairs(a, s)
    seen = sorted({x for _, x in pairs})
    enabled = {x: frozenset(s.delta[x]) for x in seen}
    disabled = {x: set() for x in seen}
    tmark = {x: False for x in seen}
    for q, x in pairs:
        for ev in a.delta[q]:
            if ev in own and ev not in s.delta[x]:
                disabled[x].add(ev)
        if q in a.marked:
            tmark[x] = True
    return seen, enabled, disabled, tmark


def cm_reduce(s: Automaton, a: Automaton, name: str | None = None) -> Automaton:
    """Merge states of CM ``s`` that never disagree on what agent ``a`` must do.

    Two states are compatible when neither enables a controllable event of
    ``a`` that the other must disable (judged on the reachable part of
    a ∥ s), and they agree on marking wherever ``a`` is marked.  Merges are
    tried pairwise in state order together with every merge they force; the
    first consistent one is kept.  The quotient is verified against ``s`` on
    a ∥ s before it is returned; ``s`` itself is returned otherwise.
    """
    name = s.name if name is None else name
    if s.is_empty:
        return s
    seen, enabled, disabled, tmark = _control_data(s, a)
    s = restrict(s, seen)
    seen, enabled, disabled, tmark = _control_data(s, a)
    n = s.n_states
    marked = s.marked

    def compatible(x: int, y: int) -> bool:
        if enabled[x] & disabled[y] or enabled[y] & disabled[x]:
            return False
        if tmark[x] and tmark[y] and ((x in marked) != (y in marked)):
            return False
        return True

    # blocks are named by their smallest state; bit masks make the
    # block-vs-block compatibility test a single AND
    bad = [0] * n
    for x in range(n):
        for y in range(x + 1, n):
            if not compatible(x, y):
                bad[x] |= 1 << y
                bad[y] |= 1 << x
    block = list(range(n))
    members = {x: [x] for x in range(n)}
    bmask = [1 << x for x in range(n)]
    succ = [dict(s.delta[x]) for x in range(n)]

    def undo(log):
        for lo, hi, size, mask, bd, sc in reversed(log):
            for y in members[lo][size:]:
                block[y] = hi
            members[hi] = members[lo][size:]
            del members[lo][size:]
            bmask[lo], bad[lo], succ[lo] = mask, bd, sc

    def try_merge(i: int, j: int) -> bool:
        log = []
        pending = [(i, j)]
        while pending:
            u, v = pending.pop()
            bu, bv = block[u], block[v]
            if bu == bv:
                continue
            if bad[bu] & bmask[bv]:
                undo(log)
                return False
            lo, hi = min(bu, bv), max(bu, bv)
            log.append((lo, hi, len(members[lo]), bmask[lo], bad[lo], succ[lo]))
            for y in members[hi]:
                block[y] = lo
            members[lo].extend(members.pop(hi))
            bmask[lo] |= bmask[hi]
            bad[lo] |= bad[hi]
            merged = dict(succ[lo])
            for ev, y in succ[hi].items():
                x = merged.setdefault(ev, y)
                if block[x] != block[y]:
                    pending.append((x, y))
            succ[lo] = merged
        return True

    for i in range(n):
        for j in range(i + 1, n):
            if block[i] != block[j]:
                try_merge(i, j)

    if len(members) == n:
        return s.with_name(name)
    delta: list[dict[str, int]] = [{} for _ in range(n)]
    for x in range(n):
        for ev, y in s.delta[x].items():
            delta[block[x]][ev] = block[y]
    quotient = restrict(
        Automaton(s.alphabet, delta, block[s.initial], {block[x] for x in marked}),
        set(members),
        name,
    )
    if _preserves_decisions(s, quotient, a):
        return quotient
    return s.with_name(name)


def _preserves_decisions(s: Automaton, r: Automaton, a: Automaton) -> bool:
    own = a.controllable & s.event_names
    start = (a.initial, s.initial, r.initial)
    seen = {start}
    stack = [start]
    while stack:
        q, x, z = stack.pop()
        rq, rx, rz = a.delta[q], s.delta[x], r.delta[z]
        for ev in rx:
            if ev not in rz:
                return False
        for ev in own:
            if ev in rq and (ev in rx) != (ev in rz):
                return False
        if q in a.marked and (x in s.marked) != (z in r.marked):
            return False
        moves = []
        for ev, x2 in rx.items():
            if ev in a.events:
                q2 = rq.get(ev)
                if q2 is None:
                    continue
            else:
                q2 = q
            moves.append((q2, x2, rz[ev]))
        for ev, q2 in rq.items():
            if ev not in s.events:
                moves.append((q2, x, z))
        for nxt in moves:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return True


def is_valid_cm(
    s: Automaton,
    a: Automaton,
    system: Automaton,
    behavior: Automaton | None = None,
) -> Verdict:
    """CM validity: s covers the agent's events and never blocks an event
    outside the agent's controllable set that ``system`` allows.

    When ``behavior`` (the coordinated closed loop) is given, only strings of
    L(behavior) are examined instead of all of L(s ∥ system).
    """
    if not a.event_names <= s.event_names:
        return Verdict(False, {"missing": sorted(a.event_names - s.event_names)})
    guarded = s.event_names - a.controllable
    if behavior is None:
        driver = system
    else:
        driver = behavior
    joint, pairs = product_with_pairs(system, driver)
    if joint.is_empty:
        return OK
    # walk joint ∥ s tracking the system state, the driver state and the CM state
    start = (0, s.initial)
    parent = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        j, x = node
        p = pairs[j][0]
        row = s.delta[x]
        for ev in sorted(system.delta[p]):
            if ev in guarded and ev not in row and ev in joint.delta[j]:
                return Verdict(False, {"string": _walk_back(parent, node), "event": ev})
            if ev in guarded and ev not in row and behavior is not None:
                return Verdict(False, {"string": _walk_back(parent, node), "event": ev})
        for ev, j2 in joint.delta[j].items():
            if ev in s.events:
                x2 = row.get(ev)
                if x2 is None:
                    continue
            else:
                x2 = x
            nxt = (j2, x2)
            if nxt not in parent:
                parent[nxt] = (node, ev)
                queue.append(nxt)
    return OK


def enabling_completion(
    s: Automaton,
    a: Automaton,
    system: Automaton,
    behavior: Automaton,
) -> Automaton:
    """Self-loop, at each CM state, the non-agent-controllable events that the
    free ``system`` allows there but the closed loop ``behavior`` never takes.

    Leaves the closed loop unchanged and makes ``s`` pass :func:`is_valid_cm`.
    """
    guarded = s.event_names - a.controllable
    joint, pairs = product_with_pairs(system, behavior)
    if joint.is_empty:
        return s
    add: dict[int, set[str]] = {}
    start = (0, s.initial)
    seen = {start}
    stack = [start]
    while stack:
        j, x = stack.pop()
        row = s.delta[x]
        for ev in system.delta[pairs[j][0]]:
            if ev in guarded and ev not in row:
                add.setdefault(x, set()).add(ev)
        for ev, j2 in joint.delta[j].items():
            if ev in s.events:
                x2 = row.get(ev)
                if x2 is None:
                    continue
            else:
                x2 = x
            if (j2, x2) not in seen:
                seen.add((j2, x2))
                stack.append((j2, x2))
    if not add:
        return s
    delta = [dict(row) for row in s.delta]
    for x, evs in add.items():
        for ev in evs:
            delta[x][ev] = x
    return Automaton(s.alphabet, delta, s.initial, s.marked, s.name)
