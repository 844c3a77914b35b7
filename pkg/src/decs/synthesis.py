"""Compositional CM synthesis: basic subnets first, then pairwise deconfliction
bottom-up along a plan tree."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .automata import (
    Automaton,
    is_nonblocking,
    language_equivalent,
    natural_projection,
    product,
    selfloop,
    sync_product,
    trim,
    universal,
)
from .dcsn import Dcsn, Subnet, subnet_union
from .planning import Branch, Leaf, PlanTree, leaves, schedule_from_plan
from .supervisory import (
    cm_from,
    cm_reduce,
    enabling_completion,
    enlarge_event_set,
    is_valid_cm,
    min_sys_com_set,
    supcon,
)

log = logging.getLogger(__name__)


class SynthesisError(RuntimeError):
    """A subnet (or a pair being joined) admits no nonblocking coordinated behavior."""


@dataclass
class SubnetSolution:
    subnet: Subnet
    sup: Automaton
    local_cms: dict[int, list[tuple[str, Automaton]]] = field(default_factory=dict)
    decon_cms: dict[int, list[tuple[str, Automaton]]] = field(default_factory=dict)
    comm_sets: dict[int, dict[int, frozenset[str]]] = field(default_factory=dict)
    # unreduced CMs of basic subnets, kept for reporting
    raw_cms: dict[int, Automaton] = field(default_factory=dict)
    cr_events: frozenset[str] | None = None

    @property
    def agents(self) -> frozenset[int]:
        return self.subnet.agents

    def cms_of(self, i: int) -> list[Automaton]:
        return [a for _, a in self.local_cms.get(i, [])] + [a for _, a in self.decon_cms.get(i, [])]

    def composed(self) -> Automaton:
        """∥ over member agents of (A_i ∥ CM_i)."""
        d = self.subnet.parent
        parts = []
        for i in sorted(self.agents):
            parts.append(d.agent(i))
            parts.extend(self.cms_of(i))
        return product(*parts)


def agents_product(d: Dcsn, agents: Iterable[int]) -> Automaton:
    return product(*(d.agent(i) for i in sorted(agents)))


def agent_alphabet(d: Dcsn, agents: Iterable[int]) -> frozenset[str]:
    return frozenset().union(*(d.agent(i).event_names for i in agents))


def _finish_cm(cm: Automaton, agent: Automaton, plant: Automaton, closed_loop: Automaton) -> Automaton:
    if is_valid_cm(cm, agent, plant, closed_loop):
        return cm
    return enabling_completion(cm, agent, plant, closed_loop)


def cm_basic_subnet(s: Subnet) -> SubnetSolution:
    """Supcon of the constraint over its agents, a minimum communication set,
    then one projected and reduced CM per agent."""
    if not s.is_basic:
        raise ValueError("cm_basic_subnet needs a single-constraint subnet")
    d = s.parent
    (k,) = s.members
    c = d.constraint(k)
    members = sorted(c.agents)
    agents = [d.agent(i) for i in members]
    plant = product(*agents)
    sup = supcon(c.automaton, plant, name=f"SUP{k}")
    if sup.is_empty:
        raise SynthesisError(f"constraint {k} admits no nonblocking controllable behavior")
    com = min_sys_com_set(sup, agents)
    sol = SubnetSolution(s, sup, comm_sets={k: {}})
    for i, agent in zip(members, agents):
        sol.comm_sets[k][i] = com - agent.event_names
        raw = cm_from(sup, agent.event_names | com, name=f"S{k}_{i}")
        reduced = cm_reduce(raw, agent)
        sol.raw_cms[i] = raw
        sol.local_cms[i] = [(f"c{k}", _finish_cm(reduced, agent, plant, sup))]
        log.debug("constraint %s agent %s: CM %s -> %s", k, i, raw.stats(), reduced.stats())
    return sol


def _cr_requirements(x: SubnetSolution, y: SubnetSolution, with_occ: bool):
    reqs = [(x.sup, "observer"), (y.sup, "observer")]
    if with_occ:
        d = x.subnet.parent
        reqs += [(d.agent(i), "occ") for i in sorted(x.agents | y.agents)]
    return reqs


def _abstraction(x: SubnetSolution, y: SubnetSolution, sigma: frozenset[str]) -> Automaton:
    px = natural_projection(x.sup, sigma & x.sup.event_names)
    py = natural_projection(y.sup, sigma & y.sup.event_names)
    return sync_product(px, py)


def nonconflict_test(x: SubnetSolution, y: SubnetSolution) -> tuple[bool, frozenset[str]]:
    """(nonconflicting?, Σ_CR used).  The test runs on observer abstractions
    of the two sups over the events of their common agents."""
    d = x.subnet.parent
    shared = x.agents & y.agents
    if not shared:
        return True, frozenset()
    base = agent_alphabet(d, shared)
    sigma = enlarge_event_set(base, _cr_requirements(x, y, with_occ=False))
    return is_nonblocking(_abstraction(x, y, sigma)), sigma


def conflict_resolution(
    x: SubnetSolution, y: SubnetSolution, sigma: Iterable[str] | None = None
) -> tuple[Automaton, frozenset[str]]:
    """CR over Σ_CR with CR ∥ SUP^x ∥ SUP^y equivalent to the joined Supcon.

    Σ_CR is grown from ``sigma`` (default: events of the common agents) until
    both abstractions are observers and every member agent's projection is
    output-control-consistent.
    """
    d = x.subnet.parent
    base = frozenset(sigma) if sigma is not None else agent_alphabet(d, x.agents & y.agents)
    sigma_cr = enlarge_event_set(base, _cr_requirements(x, y, with_occ=True))
    abstract = _abstraction(x, y, sigma_cr)
    events = [e for e in abstract.alphabet]
    name = f"CR{x.subnet.label()}+{y.subnet.label()}"
    cr = supcon(universal(events), abstract, name=name)
    if cr.is_empty:
        raise SynthesisError(
            f"subnets {x.subnet.label()} and {y.subnet.label()} cannot be deconflicted"
        )
    return cr, sigma_cr


def deconflict_subnets(x: SubnetSolution, y: SubnetSolution) -> SubnetSolution:
    d = x.subnet.parent
    joined = subnet_union(x.subnet, y.subnet)
    local = {i: list(x.local_cms.get(i, [])) + list(y.local_cms.get(i, [])) for i in joined.agents}
    decon = {i: list(x.decon_cms.get(i, [])) + list(y.decon_cms.get(i, [])) for i in joined.agents}
    comm = {**x.comm_sets, **y.comm_sets}
    ok, sigma = nonconflict_test(x, y)
    if ok:
        sup = trim(sync_product(x.sup, y.sup)).with_name(f"SUP{joined.label()}")
        log.info("subnets %s and %s are nonconflicting", x.subnet.label(), y.subnet.label())
        return SubnetSolution(joined, sup, local, decon, comm)
    cr, sigma_cr = conflict_resolution(x, y, sigma)
    log.info(
        "subnets %s and %s conflict; CR over %d events: %s",
        x.subnet.label(), y.subnet.label(), len(sigma_cr), cr.stats(),
    )
    sup = trim(product(cr, x.sup, y.sup)).with_name(f"SUP{joined.label()}")
    if sup.is_empty:
        raise SynthesisError(f"subnet {joined.label()} admits no nonblocking behavior")
    plant = agents_product(d, joined.agents)
    for i in sorted(joined.agents):
        agent = d.agent(i)
        if not cr.event_names & agent.event_names:
            continue
        lifted = selfloop(cr, [e for e in agent.alphabet if e.name not in cr.events])
        cm = cm_reduce(lifted, agent, name=f"D{joined.label()}_{i}")
        decon[i].append((f"n{joined.label()}", _finish_cm(cm, agent, plant, sup)))
    return SubnetSolution(joined, sup, local, decon, comm, cr_events=sigma_cr)


def monolithic_sup(d: Dcsn, members: Iterable[int] | None = None) -> Automaton:
    """Supcon of all (member) constraints over all their agents at once."""
    members = sorted(members) if members is not None else list(range(1, d.m + 1))
    agents = frozenset().union(*(d.constraint(k).agents for k in members))
    spec = product(*(d.constraint(k).automaton for k in members))
    return supcon(spec, agents_product(d, agents), name="SUP")


@dataclass
class SynthesisResult:
    dcsn: Dcsn
    solutions: list[SubnetSolution]
    schedule: list[list[list[str]]]
    verified: bool | None = None

    def cms(self) -> dict[int, list[tuple[str, str, Automaton]]]:
        """agent → [(kind, tag, CM)] with kind in {"local", "decon"}."""
        out: dict[int, list[tuple[str, str, Automaton]]] = {i: [] for i in range(1, self.dcsn.n + 1)}
        for sol in self.solutions:
            for i, items in sol.local_cms.items():
                out[i] += [("local", tag, cm) for tag, cm in items]
            for i, items in sol.decon_cms.items():
                out[i] += [("decon", tag, cm) for tag, cm in items]
        return out

    def comm_sets(self) -> dict[int, dict[int, frozenset[str]]]:
        merged: dict[int, dict[int, frozenset[str]]] = {}
        for sol in self.solutions:
            merged.update(sol.comm_sets)
        return dict(sorted(merged.items()))

    def composed(self) -> Automaton:
        parts = []
        cms = self.cms()
        for i in range(1, self.dcsn.n + 1):
            parts.append(self.dcsn.agent(i))
            parts.extend(cm for _, _, cm in cms[i])
        return product(*parts)


def _run_plan(d: Dcsn, plan: PlanTree, pool: ThreadPoolExecutor | None) -> tuple[SubnetSolution, list]:
    basics = sorted(leaves(plan), key=lambda n: sorted(n))
    mapper = pool.map if pool is not None else map
    solved: dict[frozenset[int], SubnetSolution] = {}
    for node, sol in zip(basics, mapper(lambda n: cm_basic_subnet(d.subnet(n)), basics)):
        solved[node] = sol
    used = []
    for level in schedule_from_plan(plan):
        results = list(mapper(lambda b: deconflict_subnets(solved[b.left.node], solved[b.right.node]), level))
        for b, sol in zip(level, results):
            solved[b.node] = sol
        used.append(["-".join(map(str, sorted(b.node))) for b in level])
    return solved[plan.node], used


def solve_dcsn(
    d: Dcsn,
    plans: PlanTree | Sequence[PlanTree],
    verify: bool = False,
    parallel: bool = False,
) -> SynthesisResult:
    """Execute one plan per constraint-connected component and collect all CMs.

    With ``verify`` the composed system ∥(A_i ∥ CM_i) is compared against the
    monolithic Supcon of the whole network.
    """
    if isinstance(plans, (Leaf, Branch)):
        plans = [plans]
    covered = sorted(k for p in plans for k in p.node)
    if covered != list(range(1, d.m + 1)):
        raise ValueError("plans must cover every constraint exactly once")
    pool = ThreadPoolExecutor() if parallel else None
    try:
        solutions, schedule = [], []
        for p in plans:
            sol, used = _run_plan(d, p, pool)
            solutions.append(sol)
            schedule.append(used)
    finally:
        if pool is not None:
            pool.shutdown()
    result = SynthesisResult(d, solutions, schedule)
    if verify:
        result.verified = language_equivalent(result.composed(), monolithic_sup(d))
    return result


def check_solution(sol: SubnetSolution) -> list[str]:
    """Invariant breaches of a subnet solution (empty when sound)."""
    d = sol.subnet.parent
    problems = []
    plant = agents_product(d, sol.agents)
    for i in sorted(sol.agents):
        for cm in sol.cms_of(i):
            if not is_valid_cm(cm, d.agent(i), plant, sol.sup):
                problems.append(f"CM {cm.name} of agent {i} is not enabling")
    if not language_equivalent(sol.composed(), sol.sup):
        problems.append(f"composed CMs of subnet {sol.subnet.label()} differ from its sup")
    return problems


__all__ = [
    "SubnetSolution",
    "SynthesisError",
    "SynthesisResult",
    "check_solution",
    "cm_basic_subnet",
    "conflict_resolution",
    "deconflict_subnets",
    "monolithic_sup",
    "nonconflict_test",
    "solve_dcsn",
]
