"""Bundled example networks."""

from __future__ import annotations

from pathlib import Path

from ..automata import Automaton, Event
from ..dcsn import Dcsn


def _agent(i: int) -> Automaton:
    names = ["take1", "take2", "produce", "return", "move", "place"]
    ctl = {"take1", "take2", "move"}
    alphabet = [Event(f"{i}{n}", n in ctl, i) for n in names]
    e = lambda n: f"{i}{n}"  # noqa: E731
    trans = [
        (0, e("take1"), 1), (0, e("take2"), 2),
        (1, e("take2"), 3), (2, e("take1"), 3),
        (3, e("produce"), 4), (4, e("return"), 5),
        (5, e("move"), 6), (6, e("place"), 0),
    ]
    return Automaton.from_transitions(alphabet, trans, 7, 0, [0], f"A{i}")


def _assembler() -> Automaton:
    alphabet = [
        Event("3take1", True, 3), Event("3take2", True, 3),
        Event("3process", False, 3), Event("3deliver", False, 3),
    ]
    trans = [(0, "3take1", 1), (0, "3take2", 1), (1, "3process", 2), (2, "3deliver", 0)]
    return Automaton.from_transitions(alphabet, trans, 3, 0, [0], "A3")


def _tool(k: int, agents: list[Automaton]) -> Automaton:
    ev = {e.name: e for a in agents for e in a.alphabet}
    trans = [
        (0, f"1take{k}", 1), (1, "1return", 0),
        (0, f"2take{k}", 2), (2, "2return", 0),
    ]
    alphabet = [ev[f"1take{k}"], ev["1return"], ev[f"2take{k}"], ev["2return"]]
    return Automaton.from_transitions(alphabet, trans, 3, 0, [0], f"E{k}")


def _buffer(k: int, producer: int, take: str, agents: list[Automaton]) -> Automaton:
    ev = {e.name: e for a in agents for e in a.alphabet}
    place = f"{producer}place"
    trans = [(0, place, 1), (1, take, 0)]
    return Automaton.from_transitions([ev[place], ev[take]], trans, 2, 0, [0], f"B{k}")


def transfer_line():
    """Three machines sharing two tools and two one-slot buffers.

    Machines 1 and 2 each grab both tools (any order), produce, return the
    tools, move the part and place it in their own buffer; machine 3 takes a
    part from either buffer, processes and delivers it.

    Constraint 1 and 2 are the tools, 3 and 4 the buffers.
    """
    agents = [_agent(1), _agent(2), _assembler()]
    constraints = [
        ((1, 2), _tool(1, agents)),
        ((1, 2), _tool(2, agents)),
        ((1, 3), _buffer(3, 1, "3take1", agents)),
        ((2, 3), _buffer(4, 2, "3take2", agents)),
    ]
    return Dcsn.build(agents, constraints)


def transfer_line_path() -> Path:
    """Location of the bundled ``.dcsn`` file for :func:`transfer_line`."""
    return Path(__file__).with_name("transfer_line") / "transfer_line.dcsn"
