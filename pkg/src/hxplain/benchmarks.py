"""Deterministic generators for the benchmark families.

Layouts are desk-scale reconstructions; every family documents its own
location and transition counts in the document metadata.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .core import (Affine, Automaton, Edge, HxError, LinearConstraint, Location, Op, PlanningProblem,
                   rat, validate_problem)
from .model_io import ModelDocument

F = Fraction
FAMILIES = ("warehouse", "rover", "water_level", "nav", "nrs", "city")


class BenchmarkError(HxError):
    pass


def _box(lo_x, hi_x, lo_y, hi_y) -> List[LinearConstraint]:
    return [LinearConstraint({"x": 1}, Op.GE, lo_x), LinearConstraint({"x": 1}, Op.LE, hi_x),
            LinearConstraint({"y": 1}, Op.GE, lo_y), LinearConstraint({"y": 1}, Op.LE, hi_y)]


def _eq(var, value) -> LinearConstraint:
    return LinearConstraint({var: 1}, Op.EQ, value)


# -- grid worlds ----------------------------------------------------------------

_DIRS = (("right", 1, 0), ("up", 0, 1), ("left", -1, 0), ("down", 0, -1))


def _cell(k: int, cols: int) -> Tuple[int, int]:
    return (k - 1) % cols, (k - 1) // cols


def _door(col: int, row: int, dx: int, dy: int) -> Tuple[Fraction, Fraction]:
    """Crossing point shared by cell (col,row) and its neighbour in (dx,dy)."""
    half = F(1, 2)
    x = col + half + half * dx
    y = row + half + half * dy
    return x, y


def _grid_layout(rows: int, cols: int, marks: Dict[int, str]) -> str:
    lines = []
    width = len(str(rows * cols)) + 1
    for row in range(rows - 1, -1, -1):
        cells = []
        for col in range(cols):
            k = row * cols + col + 1
            cells.append(f"{marks.get(k, '.')}{k}".rjust(width + 1))
        lines.append(" ".join(cells))
    return "\n".join(lines) + "\n"


def _cells(values, rows, cols, what) -> Tuple[int, ...]:
    out = []
    for v in values or ():
        k = int(str(v).lstrip("l"))
        if not 1 <= k <= rows * cols:
            raise BenchmarkError(f"{what} cell {v} outside a {rows}x{cols} grid")
        out.append(k)
    return tuple(sorted(set(out)))


def warehouse(rows: int = 4, cols: int = 6, init: int = 7, goal: int = 18, blocked: Sequence[int] = (4, 11, 12),
              oil: Sequence[int] = (), recharge: Sequence[int] = (23,), docks: Sequence[int] = (22,),
              charge="10", floor="1/10", drain="2", oil_drain="4", speed="1", oil_speed="1/2",
              depth: int = 8, deliver: bool = True, name: Optional[str] = None) -> ModelDocument:
    """Warehouse robot on a rows x cols grid.

    Variables x, y (position) and c (battery).  Cell k is location ``l{k}``,
    numbered row-major from the bottom-left.  Moves are 4-neighbour only and
    pass through the midpoint of the shared side.  Battery drains at
    ``drain`` (``oil_drain`` on oil cells, which are also slippery: speed
    ``oil_speed``); dock cells do not drain; entering a recharge cell
    resets c to ``charge``.  Blocked cells keep their location but have no
    incident edges.  With ``deliver`` the goal is the centre of the goal
    cell, otherwise any point of it.
    """
    if rows < 1 or cols < 1:
        raise BenchmarkError("grid must have at least one row and one column")
    blocked = _cells(blocked, rows, cols, "blocked")
    oil = _cells(oil, rows, cols, "oil")
    recharge = _cells(recharge, rows, cols, "recharge")
    docks = _cells(docks, rows, cols, "dock")
    for what, k in (("initial", init), ("goal", goal)):
        if not 1 <= k <= rows * cols:
            raise BenchmarkError(f"{what} cell {k} outside the grid")
        if k in blocked:
            raise BenchmarkError(f"{what} cell {k} is blocked")
    charge, floor, drain, oil_drain = rat(charge), rat(floor), rat(drain), rat(oil_drain)
    speed, oil_speed = rat(speed), rat(oil_speed)
    if not (0 <= floor <= charge) or drain < 0 or oil_drain < 0 or speed <= 0 or oil_speed <= 0:
        raise BenchmarkError("invalid charge or speed parameters")
    locations = []
    for k in range(1, rows * cols + 1):
        col, row = _cell(k, cols)
        v = oil_speed if k in oil else speed
        d = F(0) if k in docks else (oil_drain if k in oil else drain)
        inv = _box(col, col + 1, row, row + 1)
        inv += [LinearConstraint({"c": 1}, Op.GE, floor), LinearConstraint({"c": 1}, Op.LE, charge)]
        locations.append(Location(f"l{k}", inv, {"x": (-v, v), "y": (-v, v), "c": (-d, -d)}))
    edges = []
    for k in range(1, rows * cols + 1):
        if k in blocked:
            continue
        col, row = _cell(k, cols)
        for dname, dx, dy in _DIRS:
            c2, r2 = col + dx, row + dy
            if not (0 <= c2 < cols and 0 <= r2 < rows):
                continue
            k2 = r2 * cols + c2 + 1
            if k2 in blocked:
                continue
            x, y = _door(col, row, dx, dy)
            reset = {"c": Affine.constant(charge)} if k2 in recharge else {}
            edges.append(Edge(f"e{k}_{k2}", f"l{k}", f"l{k2}", dname, [_eq("x", x), _eq("y", y)], reset))
    col, row = _cell(init, cols)
    automaton = Automaton(("x", "y", "c"), locations, edges, f"l{init}",
                          [_eq("x", col + F(1, 2)), _eq("y", row + F(1, 2)), _eq("c", charge)])
    gc, gr = _cell(goal, cols)
    target = [_eq("x", gc + F(1, 2)), _eq("y", gr + F(1, 2))] if deliver else []
    problem = PlanningProblem(automaton, f"l{goal}", target, depth)
    marks = {k: "#" for k in blocked}
    marks.update({k: "~" for k in oil})
    marks.update({k: "+" for k in recharge})
    marks.update({k: "=" for k in docks if k not in marks})
    marks[init] = "S"
    marks[goal] = "G"
    meta = {
        "name": name or f"warehouse-{cols}x{rows}",
        "family": "warehouse",
        "description": "warehouse robot; S start, G goal, # blocked, ~ oil, + recharge, = dock",
        "layout": _grid_layout(rows, cols, marks),
        "counts": {"locations": len(locations), "transitions": len(edges)},
        "cells": {"blocked": list(blocked), "oil": list(oil), "recharge": list(recharge), "docks": list(docks)},
    }
    return ModelDocument(problem, meta)


def warehouse_pair(depth: int = 8) -> Tuple[ModelDocument, ModelDocument]:
    """Human and agent warehouse models for reconciliation.

    The agent also knows about the oil spill on cells 10, 15 and 16 and
    about obstacles on cells 20 and 21.
    """
    human = warehouse(depth=depth, name="warehouse-human")
    agent = warehouse(depth=depth, blocked=(4, 11, 12, 20, 21), oil=(10, 15, 16), name="warehouse-agent")
    return human, agent


def warehouse_human(depth: int = 8) -> ModelDocument:
    return warehouse_pair(depth)[0]


def warehouse_agent(depth: int = 8) -> ModelDocument:
    return warehouse_pair(depth)[1]


# -- planetary rover ------------------------------------------------------------

# Directed moves of the rover.  Diagonal moves pass through the shared
# corner.  Before cell 13 the terrain only allows forward moves; the open
# ground past cell 14 has loops.  The list is tuned so that there are 244
# l11 -> l25 paths of at most 15 moves.
ROVER_EDGES = (
    (11, 6), (6, 1), (1, 2), (2, 3), (3, 8), (8, 13),
    (11, 12), (12, 6), (11, 16), (16, 17), (17, 12), (16, 21), (21, 22), (22, 17),
    (13, 14), (14, 19), (19, 24), (24, 25), (14, 15), (15, 20), (20, 24), (14, 9), (9, 10), (10, 15),
    (9, 4), (4, 5), (5, 10), (19, 18), (18, 23), (23, 24), (15, 14), (19, 14), (20, 19), (10, 9),
    (25, 24), (24, 19), (20, 15), (18, 19), (24, 20), (9, 14),
)

ROVER_SAMPLING = (1, 24)
ROVER_INCLINED = (3, 8)


def _rover_door(a: int, b: int, cols: int) -> Tuple[Fraction, Fraction]:
    ca, ra = _cell(a, cols)
    cb, rb = _cell(b, cols)
    dx, dy = cb - ca, rb - ra
    return _door(ca, ra, dx, dy)


def rover(depth: int = 15, charge="10", floor="0", speed="1", incline_speed="1/2",
          drain="1", sample_drain="2", incline_drain="3") -> ModelDocument:
    """Planetary rover on a 5x5 grid with 40 directed moves.

    Cell 7 is impassable and has no incident moves.
    Cells are numbered row-major from the top-left so that the base
    station sits at cell 25.  Sampling cells 1 and 24 drain at
    ``sample_drain``, inclined cells 3 and 8 at ``incline_drain`` with reduced
    speed, all others at ``drain``.
    """
    rows = cols = 5
    charge, floor = rat(charge), rat(floor)
    locations = []
    for k in range(1, 26):
        col, row = _cell(k, cols)
        if k in ROVER_INCLINED:
            v, d = rat(incline_speed), rat(incline_drain)
        elif k in ROVER_SAMPLING:
            v, d = rat(speed), rat(sample_drain)
        else:
            v, d = rat(speed), rat(drain)
        inv = _box(col, col + 1, row, row + 1) + [LinearConstraint({"c": 1}, Op.GE, floor),
                                                  LinearConstraint({"c": 1}, Op.LE, charge)]
        locations.append(Location(f"l{k}", inv, {"x": (-v, v), "y": (-v, v), "c": (-d, -d)}))
    edges = []
    for a, b in ROVER_EDGES:
        x, y = _rover_door(a, b, cols)
        edges.append(Edge(f"e{a}_{b}", f"l{a}", f"l{b}", f"move_l{b}", [_eq("x", x), _eq("y", y)]))
    col, row = _cell(11, cols)
    automaton = Automaton(("x", "y", "c"), locations, edges, "l11",
                          [_eq("x", col + F(1, 2)), _eq("y", row + F(1, 2)), _eq("c", charge)])
    problem = PlanningProblem(automaton, "l25", (), depth)
    marks = {k: "s" for k in ROVER_SAMPLING}
    marks.update({k: "^" for k in ROVER_INCLINED})
    marks[11] = "S"
    marks[25] = "G"
    # rows are printed top to bottom in numbering order for this family
    lines = []
    for row in range(rows):
        lines.append(" ".join(f"{marks.get(row * cols + c + 1, '.')}{row * cols + c + 1}".rjust(4)
                              for c in range(cols)))
    meta = {
        "name": "planetary-rover",
        "family": "rover",
        "description": "rover collecting samples; S start, G base station, s sampling site, ^ inclined",
        "layout": "\n".join(lines) + "\n",
        "counts": {"locations": 25, "transitions": len(edges)},
    }
    return ModelDocument(problem, meta)


# -- water-level monitor --------------------------------------------------------

def water_level(depth: int = 20, low="5", high="10", delay="2", unsafe="12", start="1") -> ModelDocument:
    """Two-tank style water-level monitor with 6 locations and 6 transitions.

    x is the controller clock, y the water level.  The pump fills at rate 1
    and the tank drains at rate 2 while the pump is off; switching either
    way takes ``delay`` time units.  l6 is the overflow location, entered
    only when the level strictly exceeds ``unsafe`` during the switch-off
    delay, which the delay never allows.
    """
    low, high, delay, unsafe, start = rat(low), rat(high), rat(delay), rat(unsafe), rat(start)
    if not (start <= high and low < high and delay >= 0):
        raise BenchmarkError("water level parameters must satisfy start <= high, low < high, delay >= 0")
    one, fill, drain_ = (F(1), F(1)), (F(1), F(1)), (F(-2), F(-2))
    x_le = LinearConstraint({"x": 1}, Op.LE, delay)
    locations = [
        Location("l1", [LinearConstraint({"y": 1}, Op.LE, high)], {"x": one, "y": fill}),
        Location("l2", [x_le], {"x": one, "y": fill}),
        Location("l3", [LinearConstraint({"y": 1}, Op.GE, low)], {"x": one, "y": drain_}),
        Location("l4", [x_le], {"x": one, "y": drain_}),
        Location("l5", [LinearConstraint({"y": 1}, Op.LE, high)], {"x": one, "y": fill}),
        Location("l6", [LinearConstraint({"y": 1}, Op.GT, unsafe)], {"x": (F(0), F(0)), "y": (F(0), F(0))}),
    ]
    zero = {"x": Affine.constant(0)}
    edges = [
        Edge("e1", "l1", "l2", "high_level", [_eq("y", high)], zero),
        Edge("e2", "l2", "l3", "pump_off", [_eq("x", delay)]),
        Edge("e3", "l3", "l4", "low_level", [_eq("y", low)], zero),
        Edge("e4", "l4", "l5", "pump_on", [_eq("x", delay)]),
        Edge("e5", "l5", "l2", "high_level", [_eq("y", high)], zero),
        Edge("e6", "l2", "l6", "overflow", [LinearConstraint({"y": 1}, Op.GT, unsafe)]),
    ]
    automaton = Automaton(("x", "y"), locations, edges, "l1", [_eq("x", 0), _eq("y", start)])
    problem = PlanningProblem(automaton, "l6", (), depth)
    meta = {
        "name": "water-level-monitor",
        "family": "water_level",
        "description": "water-level monitor; goal is the overflow location l6",
        "layout": "l1 -> l2 -> l3 -> l4 -> l5 -> l2 ; l2 -> l6 (overflow)\n",
        "counts": {"locations": 6, "transitions": 6},
    }
    return ModelDocument(problem, meta)


# -- navigation -----------------------------------------------------------------

def nav(depth: int = 10, init: int = 1, goal: int = 6) -> ModelDocument:
    """3x3 navigation benchmark with rectangular drift per cell.

    All 24 neighbour moves exist.  The robot moves freely (rates in
    [-1, 1]) except in the three cells around the goal, whose drift pushes
    it away from the goal.  Doors are open side segments, so the goal cell
    is never entered.
    """
    rows = cols = 3
    if not (1 <= init <= 9 and 1 <= goal <= 9) or init == goal:
        raise BenchmarkError("nav needs distinct init and goal cells in 1..9")
    gc, gr = _cell(goal, cols)
    away = {}
    for dname, dx, dy in _DIRS:
        c2, r2 = gc + dx, gr + dy
        if 0 <= c2 < cols and 0 <= r2 < rows:
            # drift along (dx, dy), i.e. away from the goal
            away[r2 * cols + c2 + 1] = (dx, dy)
    if init in away:
        raise BenchmarkError("nav init cell must not neighbour the goal")
    free = (F(-1), F(1))
    push = {1: (F(1, 2), F(1)), -1: (F(-1), F(-1, 2)), 0: free}
    locations = []
    for k in range(1, 10):
        col, row = _cell(k, cols)
        if k in away:
            dx, dy = away[k]
            flow = {"x": push[dx], "y": push[dy]}
        else:
            flow = {"x": free, "y": free}
        locations.append(Location(f"l{k}", _box(col, col + 1, row, row + 1), flow))
    edges = []
    for k in range(1, 10):
        col, row = _cell(k, cols)
        for dname, dx, dy in _DIRS:
            c2, r2 = col + dx, row + dy
            if 0 <= c2 < cols and 0 <= r2 < rows:
                k2 = r2 * cols + c2 + 1
                # the door is the open side segment, so corners cannot be cut
                if dx:
                    axis, val, other, lo = "x", col + (dx > 0), "y", row
                else:
                    axis, val, other, lo = "y", row + (dy > 0), "x", col
                guard = [_eq(axis, val), LinearConstraint({other: 1}, Op.GT, lo),
                         LinearConstraint({other: 1}, Op.LT, lo + 1)]
                edges.append(Edge(f"e{k}_{k2}", f"l{k}", f"l{k2}", dname, guard))
    col, row = _cell(init, cols)
    automaton = Automaton(("x", "y"), locations, edges, f"l{init}",
                          [_eq("x", col + F(1, 5)), _eq("y", row + F(1, 5))])
    marks = {k: ">" for k in away}
    marks[init] = "S"
    marks[goal] = "G"
    meta = {
        "name": "nav-3x3",
        "family": "nav",
        "description": "navigation grid; S start, G goal, > drift away from the goal",
        "layout": _grid_layout(rows, cols, marks),
        "counts": {"locations": 9, "transitions": len(edges)},
    }
    return ModelDocument(PlanningProblem(automaton, f"l{goal}", (), depth), meta)


# -- reactor --------------------------------------------------------------------

def nrs(depth: int = 15, limit="10", min_dwell="1") -> ModelDocument:
    """Reactor temperature control with two rod-insertion schedules.

    Temperature h rises at rate 1 and every schedule stage must last at
    least ``min_dwell`` (clock z).  Both schedules l2..l13 and l14..l24 are
    too long to finish below ``limit``, so the shutdown location l25 is
    unreachable.  l26 and l27 form a cooling loop at the start.
    """
    limit, min_dwell = rat(limit), rat(min_dwell)
    heat = {"h": (F(1), F(1)), "z": (F(1), F(1))}
    cool = {"h": (F(-1), F(-1)), "z": (F(1), F(1))}
    h_ok = [LinearConstraint({"h": 1}, Op.LE, limit), LinearConstraint({"h": 1}, Op.GE, 0)]
    locations = [Location(f"l{k}", list(h_ok), cool if k in (26, 27) else heat) for k in range(1, 28)]
    chain_a = [1] + list(range(2, 14)) + [25]
    chain_b = [1] + list(range(14, 25)) + [25]
    pairs = list(zip(chain_a, chain_a[1:])) + list(zip(chain_b, chain_b[1:]))
    pairs += [(1, 26), (26, 27), (27, 1), (13, 2), (24, 14)]
    edges = []
    for a, b in pairs:
        guard = [] if a in (1, 26, 27) else [LinearConstraint({"z": 1}, Op.GE, min_dwell)]
        edges.append(Edge(f"e{a}_{b}", f"l{a}", f"l{b}", f"go_l{b}", guard, {"z": Affine.constant(0)}))
    automaton = Automaton(("h", "z"), locations, edges, "l1", [_eq("h", 0), _eq("z", 0)])
    meta = {
        "name": "reactor",
        "family": "nrs",
        "description": "reactor rod schedules; l25 is shutdown",
        "layout": "l1 -> l2..l13 -> l25 ; l1 -> l14..l24 -> l25 ; l1 -> l26 -> l27 -> l1\n",
        "counts": {"locations": 27, "transitions": len(edges)},
    }
    return ModelDocument(PlanningProblem(automaton, "l25", (), depth), meta)


# -- city route network ---------------------------------------------------------

CITY_NAMES = "ABCDEFGHIJ"
# (from, to, delay, two_way)
CITY_ROUTES = (
    (1, 2, 4, True), (1, 3, 5, True), (2, 3, 3, True), (2, 4, 4, False), (3, 4, 3, False),
    (4, 5, 6, True), (4, 6, 7, True), (5, 6, 3, True), (5, 7, 6, False), (6, 7, 5, False),
    (7, 8, 3, True), (7, 9, 3, True), (9, 10, 3, True), (8, 10, 3, True), (4, 1, 3, False),
)


def city(depth: int = 10, goal: str = "H", battery="20", reserve="1") -> ModelDocument:
    """Car on a 10-juncture route network (A..J are l1..l10).

    The battery b drains at rate 1 and the route clock d must reach the
    route's delay before the car arrives at the next juncture.  Every A to
    H route passes D (l4) and G (l7), and reaching G costs the full charge.
    """
    if goal not in CITY_NAMES or goal == "A":
        raise BenchmarkError("city goal must be one of B..J")
    battery, reserve = rat(battery), rat(reserve)
    flow = {"b": (F(-1), F(-1)), "d": (F(1), F(1))}
    inv = [LinearConstraint({"b": 1}, Op.GE, reserve)]
    locations = [Location(f"l{k}", list(inv), flow) for k in range(1, 11)]
    edges = []
    for a, b, delay, two_way in CITY_ROUTES:
        for s, t in ((a, b), (b, a)) if two_way else ((a, b),):
            edges.append(Edge(f"e{s}_{t}", f"l{s}", f"l{t}", f"drive_{CITY_NAMES[t - 1]}",
                              [LinearConstraint({"d": 1}, Op.GE, delay)], {"d": Affine.constant(0)}))
    automaton = Automaton(("b", "d"), locations, edges, "l1", [_eq("b", battery), _eq("d", 0)])
    goal_loc = f"l{CITY_NAMES.index(goal) + 1}"
    meta = {
        "name": f"city-A-{goal}",
        "family": "city",
        "description": "city route network; junctures A..J are l1..l10",
        "layout": "\n".join(f"{CITY_NAMES[a - 1]} {'<->' if tw else '->'} {CITY_NAMES[b - 1]} delay {d}"
                            for a, b, d, tw in CITY_ROUTES) + "\n",
        "counts": {"locations": 10, "transitions": len(edges)},
    }
    return ModelDocument(PlanningProblem(automaton, goal_loc, (), depth), meta)


GENERATORS = {"warehouse": warehouse, "warehouse_human": warehouse_human, "warehouse_agent": warehouse_agent,
              "rover": rover, "water_level": water_level, "nav": nav, "nrs": nrs, "city": city}


def generate_benchmark(family: str, **params) -> ModelDocument:
    if family not in GENERATORS:
        raise BenchmarkError(f"unknown benchmark family {family!r}; choose from {', '.join(GENERATORS)}")
    doc = GENERATORS[family](**params)
    issues = validate_problem(doc.problem)
    if issues:  # pragma: no cover - generators are tested to be valid
        raise BenchmarkError("; ".join(issues))
    return doc
