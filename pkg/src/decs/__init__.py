"""Coordination-module synthesis for networks of discrete-event agents."""

from .automata import (
    Automaton,
    AutomatonError,
    Event,
    Membership,
    accepts,
    is_nonblocking,
    language_equivalent,
    natural_projection,
    product,
    sync_product,
    trim,
    universal,
)
from .dcsn import Dcsn, Subnet, build_crn, is_constraint_connected, validate
from .planning import generate_andor_graph, heuristic_plan_selection
from .supervisory import cm_from, cm_reduce, is_controllable, is_observable, supcon
from .synthesis import cm_basic_subnet, deconflict_subnets, solve_dcsn

__all__ = [
    "Automaton",
    "AutomatonError",
    "Dcsn",
    "Event",
    "Membership",
    "Subnet",
    "accepts",
    "build_crn",
    "cm_basic_subnet",
    "cm_from",
    "cm_reduce",
    "deconflict_subnets",
    "generate_andor_graph",
    "heuristic_plan_selection",
    "is_constraint_connected",
    "is_controllable",
    "is_nonblocking",
    "is_observable",
    "language_equivalent",
    "natural_projection",
    "product",
    "solve_dcsn",
    "supcon",
    "sync_product",
    "trim",
    "universal",
    "validate",
]
