"""Command-line interface: ``decs validate|synth-basic|plan|solve``.

Exit codes: 0 success, 1 domain failure, 2 I/O or parse error,
3 internal invariant breach.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .automata import AutomatonError, language_equivalent, universal
from .dcsn import build_crn, components, validate
from .dot import andor_dot, plan_dot
from .formats import FormatError, load_dcsn, save_aut
from .planning import (
    PlanningError,
    check_plan,
    complete_trees,
    depth,
    fmt_node,
    format_plan,
    generate_andor_graph,
    heuristic_plan_selection,
    parse_plan,
)
from .synthesis import SynthesisError, cm_basic_subnet, solve_dcsn

log = logging.getLogger("decs")

EXIT_OK, EXIT_DOMAIN, EXIT_IO, EXIT_BREACH = 0, 1, 2, 3


class Failure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _setup_logging() -> None:
    level = {"quiet": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("DECS_LOG", "quiet").lower(), logging.ERROR
    )
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("decs")
    root.handlers[:] = [handler]
    root.setLevel(level)


def _load(path: str, check: bool = True):
    d = load_dcsn(path)
    if check:
        problems = validate(d)
        if problems:
            raise Failure(EXIT_DOMAIN, "invalid network:\n  " + "\n  ".join(problems))
    return d


def cmd_validate(args) -> int:
    d = _load(args.dcsn, check=False)
    problems = validate(d)
    print(f"{d.n} agents, {d.m} constraints")
    if problems:
        for p in problems:
            print(f"violation: {p}")
        return EXIT_DOMAIN
    print("ok")
    return EXIT_OK


def cmd_synth_basic(args) -> int:
    d = _load(args.dcsn)
    k = args.constraint
    if not 1 <= k <= d.m:
        raise Failure(EXIT_DOMAIN, f"no constraint {k} (network has {d.m})")
    sol = cm_basic_subnet(d.subnet([k]))
    agents = sorted(sol.agents)
    print(f"constraint {k}: agents {','.join(map(str, agents))}")
    print(f"SUP: {sol.sup.stats()}")
    vacuous = True
    for i in agents:
        cm = sol.local_cms[i][0][1]
        received = " ".join(sorted(sol.comm_sets[k][i])) or "(none)"
        print(f"agent {i} receives: {received}")
        print(f"agent {i} CM: {sol.raw_cms[i].stats()}")
        print(f"agent {i} reduced CM: {cm.stats()}")
        if not language_equivalent(cm, universal(cm.alphabet)):
            vacuous = False
    if vacuous:
        print("constraint is vacuous: every CM is universal")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        save_aut(sol.sup, out / f"SUP{k}.aut")
        for i in agents:
            save_aut(sol.raw_cms[i], out / f"agent{i}_cm_c{k}.aut")
            save_aut(sol.local_cms[i][0][1], out / f"agent{i}_local_c{k}.aut")
        comm = {str(i): sorted(v) for i, v in sol.comm_sets[k].items()}
        (out / "comm.json").write_text(json.dumps(comm, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _component_graphs(d):
    crn = build_crn(d.full())
    return [generate_andor_graph(d, comp) for comp in components(crn.vertices, crn.edges)]


def cmd_plan(args) -> int:
    d = _load(args.dcsn)
    plans = []
    dots = []
    for g in _component_graphs(d):
        print(f"component {fmt_node(g.root)}: AND/OR graph {g.stats()}")
        print(f"root out-degree: {g.out_degree(g.root)}")
        for msg in g.diagnostics:
            print(f"note: {msg}")
        t = heuristic_plan_selection(g)
        plans.append(t)
        print(f"selected plan (depth {depth(t)}): {format_plan(t)}")
        if args.all_trees:
            trees = list(complete_trees(g))
            print(f"complete trees: {len(trees)}")
            for tree in trees:
                print(f"  depth {depth(tree)}: {format_plan(tree)}")
            print(f"minimum depth: {min(depth(tree) for tree in trees)}")
        dots.append(andor_dot(g))
        dots.append(plan_dot(t))
    if args.dot:
        Path(args.dot).write_text("".join(dots), encoding="utf-8")
    if args.out:
        Path(args.out).write_text("".join(format_plan(t) + "\n" for t in plans), encoding="utf-8")
    return EXIT_OK


def _read_plans(path: str, d):
    graphs = _component_graphs(d)
    text = Path(path).read_text(encoding="utf-8")
    plans = [parse_plan(line) for line in text.splitlines() if line.strip() and not line.startswith("#")]
    by_root = {g.root: g for g in graphs}
    for t in plans:
        g = by_root.get(t.node)
        if g is None:
            raise Failure(EXIT_DOMAIN, f"plan root {fmt_node(t.node)} is not a component of the network")
        check_plan(t, g)
    if sorted(fmt_node(t.node) for t in plans) != sorted(fmt_node(g.root) for g in graphs):
        raise Failure(EXIT_DOMAIN, "plan file must give exactly one plan per component")
    return plans


def cmd_solve(args) -> int:
    d = _load(args.dcsn)
    if args.plan:
        plans = _read_plans(args.plan, d)
    else:
        plans = [heuristic_plan_selection(g) for g in _component_graphs(d)]
    result = solve_dcsn(d, plans, verify=args.verify, parallel=args.parallel)
    for t, levels in zip(plans, result.schedule):
        print(f"plan: {format_plan(t)}")
        for n, level in enumerate(levels, start=1):
            print(f"  level {n}: {' '.join(level)}")
    cms = result.cms()
    manifest_cms = []
    for i in sorted(cms):
        for kind, tag, cm in cms[i]:
            fname = f"agent{i}_{kind}_{tag}.aut"
            print(f"agent {i} {kind} {tag}: {cm.stats()}")
            manifest_cms.append({
                "agent": i, "kind": kind, "tag": tag, "file": fname,
                "states": cm.n_states, "transitions": cm.n_transitions,
            })
    verdict = "SKIPPED" if result.verified is None else ("PASS" if result.verified else "FAIL")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for i in sorted(cms):
            for kind, tag, cm in cms[i]:
                save_aut(cm, out / f"agent{i}_{kind}_{tag}.aut")
        manifest = {
            "network": Path(args.dcsn).name,
            "plans": [format_plan(t) for t in plans],
            "schedule": result.schedule,
            "comm_sets": {
                str(k): {str(i): sorted(v) for i, v in sorted(per.items())}
                for k, per in result.comm_sets().items()
            },
            "cms": manifest_cms,
            "verification": verdict,
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    if result.verified is not None:
        print(f"verification: {verdict}")
        if not result.verified:
            composed = result.composed()
            raise Failure(
                EXIT_BREACH,
                f"composed CMs ({composed.stats()}) differ from the monolithic supervisor",
            )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="decs", description="Distributed coordination-module synthesis.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a .dcsn network")
    v.add_argument("dcsn")
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("synth-basic", help="synthesize CMs for one constraint")
    s.add_argument("dcsn")
    s.add_argument("--constraint", "-k", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_synth_basic)

    pl = sub.add_parser("plan", help="build the AND/OR graph and select a plan")
    pl.add_argument("dcsn")
    pl.add_argument("--metric", choices=["depth"], default="depth")
    pl.add_argument("--dot")
    pl.add_argument("--all-trees", action="store_true")
    pl.add_argument("--out", help="write the selected plan(s) to this file")
    pl.set_defaults(func=cmd_plan)

    so = sub.add_parser("solve", help="run the full compositional synthesis")
    so.add_argument("dcsn")
    so.add_argument("--plan")
    so.add_argument("--verify", action="store_true")
    so.add_argument("--parallel", action="store_true")
    so.add_argument("--out")
    so.set_defaults(func=cmd_solve)
    return p


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Failure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (FormatError, PlanningError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SynthesisError, AutomatonError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
