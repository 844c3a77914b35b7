"""Text formats: ``.aut`` automata and ``.dcsn`` network descriptions.

``.aut`` (one directive per line, ``#`` starts a comment)::

    states 3
    initial 0
    marked 0 2
    event go c 1        # name, c|u, optional owning agent
    trans 0 go 1

``.dcsn``::

    agent A1.aut
    agent A2.aut
    constraint 1 agents 1,2 E1.aut

Paths in a ``.dcsn`` file are relative to the file itself.
"""

from __future__ import annotations

from pathlib import Path

from .automata import Automaton, AutomatonError, Event
from .dcsn import Constraint, Dcsn


class FormatError(ValueError):
    def __init__(self, source: str, line: int, message: str):
        super().__init__(f"{source}:{line}: {message}")
        self.source = source
        self.line = line


def _int(tok: str, source: str, lineno: int, what: str) -> int:
    try:
        value = int(tok)
    except ValueError:
        raise FormatError(source, lineno, f"{what} must be an integer, got {tok!r}") from None
    if value < 0:
        raise FormatError(source, lineno, f"{what} must be nonnegative")
    return value


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def parse_aut(text: str, source: str = "<string>", name: str = "") -> Automaton:
    n_states = None
    initial = None
    marked: list[int] = []
    events: dict[str, Event] = {}
    trans: list[tuple[int, str, int, int]] = []
    for lineno, tok in _lines(text):
        kind, args = tok[0], tok[1:]
        if kind == "states":
            if len(args) != 1:
                raise FormatError(source, lineno, "usage: states <n>")
            if n_states is not None:
                raise FormatError(source, lineno, "duplicate 'states' line")
            n_states = _int(args[0], source, lineno, "state count")
        elif kind == "initial":
            if len(args) != 1:
                raise FormatError(source, lineno, "usage: initial <id>")
            if initial is not None:
                raise FormatError(source, lineno, "duplicate 'initial' line")
            initial = (_int(args[0], source, lineno, "initial state"), lineno)
        elif kind == "marked":
            marked += [_int(a, source, lineno, "marked state") for a in args]
        elif kind == "event":
            if len(args) not in (2, 3) or args[1] not in ("c", "u"):
                raise FormatError(source, lineno, "usage: event <name> <c|u> [owner]")
            if args[0] in events:
                raise FormatError(source, lineno, f"event {args[0]!r} declared twice")
            owner = _int(args[2], source, lineno, "owner") if len(args) == 3 else None
            events[args[0]] = Event(args[0], args[1] == "c", owner)
        elif kind == "trans":
            if len(args) != 3:
                raise FormatError(source, lineno, "usage: trans <from> <event> <to>")
            x = _int(args[0], source, lineno, "source state")
            y = _int(args[2], source, lineno, "target state")
            trans.append((x, args[1], y, lineno))
        else:
            raise FormatError(source, lineno, f"unknown directive {kind!r}")
    if n_states is None:
        raise FormatError(source, 0, "missing 'states' line")
    delta: list[dict[str, int]] = [{} for _ in range(n_states)]
    for x, ev, y, lineno in trans:
        if ev not in events:
            raise FormatError(source, lineno, f"undeclared event {ev!r}")
        if x >= n_states or y >= n_states:
            raise FormatError(source, lineno, f"state out of range (have {n_states})")
        if ev in delta[x]:
            raise FormatError(source, lineno, f"duplicate transition from {x} on {ev!r}")
        delta[x][ev] = y
    for x in marked:
        if x >= n_states:
            raise FormatError(source, 0, f"marked state {x} out of range")
    if n_states == 0:
        if initial is not None or marked:
            raise FormatError(source, 0, "an automaton with no states has no initial or marked states")
        return Automaton.empty(events.values(), name)
    if initial is None:
        raise FormatError(source, 0, "missing 'initial' line")
    if initial[0] >= n_states:
        raise FormatError(source, initial[1], f"initial state {initial[0]} out of range")
    try:
        return Automaton(events.values(), delta, initial[0], marked, name)
    except AutomatonError as exc:
        raise FormatError(source, 0, str(exc)) from None


def dump_aut(a: Automaton) -> str:
    out = []
    if a.name:
        out.append(f"# {a.name}")
    out.append(f"states {a.n_states}")
    if a.initial is not None:
        out.append(f"initial {a.initial}")
    out.append(" ".join(["marked"] + [str(x) for x in sorted(a.marked)]))
    for ev in sorted(a.alphabet):
        owner = "" if ev.owner is None else f" {ev.owner}"
        out.append(f"event {ev.name} {'c' if ev.controllable else 'u'}{owner}")
    for x, ev, y in sorted(a.transitions()):
        out.append(f"trans {x} {ev} {y}")
    return "\n".join(out) + "\n"


def load_aut(path: str | Path) -> Automaton:
    path = Path(path)
    return parse_aut(path.read_text(encoding="utf-8"), str(path), path.stem)


def save_aut(a: Automaton, path: str | Path) -> None:
    Path(path).write_text(dump_aut(a), encoding="utf-8")


def parse_dcsn(text: str, base: str | Path = ".", source: str = "<string>") -> Dcsn:
    base = Path(base)
    agents: list[Automaton] = []
    constraints: dict[int, Constraint] = {}
    for lineno, tok in _lines(text):
        if tok[0] == "agent":
            if len(tok) != 2:
                raise FormatError(source, lineno, "usage: agent <file>")
            if constraints:
                raise FormatError(source, lineno, "agents must be listed before constraints")
            agents.append(load_aut(base / tok[1]))
        elif tok[0] == "constraint":
            if len(tok) != 5 or tok[2] != "agents":
                raise FormatError(source, lineno, "usage: constraint <k> agents <i,j,...> <file>")
            k = _int(tok[1], source, lineno, "constraint index")
            if k in constraints:
                raise FormatError(source, lineno, f"constraint {k} defined twice")
            group = frozenset(_int(t, source, lineno, "agent index") for t in tok[3].split(",") if t)
            constraints[k] = Constraint(k, group, load_aut(base / tok[4]))
        else:
            raise FormatError(source, lineno, f"unknown directive {tok[0]!r}")
    if sorted(constraints) != list(range(1, len(constraints) + 1)):
        raise FormatError(source, 0, "constraints must be numbered 1..m")
    return Dcsn(tuple(agents), tuple(constraints[k] for k in sorted(constraints)))


def load_dcsn(path: str | Path) -> Dcsn:
    path = Path(path)
    return parse_dcsn(path.read_text(encoding="utf-8"), path.parent, str(path))


def save_dcsn(d: Dcsn, directory: str | Path, name: str = "network") -> Path:
    """Write every automaton plus ``<name>.dcsn`` into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = []
    for i, a in enumerate(d.agents, start=1):
        fname = f"{a.name or f'A{i}'}.aut"
        save_aut(a, directory / fname)
        lines.append(f"agent {fname}")
    for c in d.constraints:
        fname = f"{c.automaton.name or f'C{c.index}'}.aut"
        save_aut(c.automaton, directory / fname)
        group = ",".join(str(i) for i in sorted(c.agents))
        lines.append(f"constraint {c.index} agents {group} {fname}")
    path = directory / f"{name}.dcsn"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
