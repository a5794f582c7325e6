"""Linear encoding of an abstract path, and path feasibility checks."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .core import (Automaton, HxError, LinearConstraint, Op, Plan, PlanningProblem, Run, RunStep)
from .graph import AbstractPath
from .lp import IIS, ConstraintSystem, deletion_filter_iis, solve_feasibility

KINDS = ("init", "flow", "invariant_in", "invariant_out", "guard", "reset", "dwell_nonneg", "target")


class PathMismatch(HxError):
    pass


@dataclass(frozen=True)
class Tag:
    step: int
    kind: str
    detail: str = ""


@dataclass(frozen=True)
class EncodedPath:
    path: AbstractPath
    system: ConstraintSystem
    var_index: Dict[Tuple[int, str, str], str]
    dwell_index: Dict[int, str]
    tag_index: Dict[int, Tag]


def state_var(x: str, i: int, side: str) -> str:
    return f"{x}[{i}].{side}"


def dwell_var(i: int) -> str:
    return f"t[{i}]"


def _check_path(a: Automaton, path: AbstractPath) -> None:
    if path.locations[0] != a.init_location:
        raise PathMismatch(f"path starts at {path.locations[0]}, not at {a.init_location}")
    for i, eid in enumerate(path.edges):
        if not a.has_edge(eid):
            raise PathMismatch(f"unknown edge {eid}")
        e = a.edge(eid)
        if e.source != path.locations[i] or e.target != path.locations[i + 1]:
            raise PathMismatch(f"edge {eid} does not connect {path.locations[i]} to {path.locations[i + 1]}")
    for loc in path.locations:
        if loc not in a.locations:
            raise PathMismatch(f"unknown location {loc}")


def encode_path(p: PlanningProblem, path: AbstractPath,
                target: Optional[Sequence[LinearConstraint]] = None) -> EncodedPath:
    """Constraint system whose solutions are exactly the runs along ``path``.

    Per step ``i`` the emission order is: init (step 0) or the reset link
    from the previous step, ``t_i >= 0``, flows, location invariants at
    entry and exit, and finally the guard of the outgoing edge.  Guard and
    reset constraints of edge ``e_i`` carry step ``i + 1``: they describe
    the transition into that step.  ``target`` defaults to the goal
    constraints and is imposed on the final exit valuation.
    """
    a = p.automaton
    _check_path(a, path)
    if target is None:
        target = p.goal_constraints
    X = a.variables
    n = len(path.locations)
    var_index: Dict[Tuple[int, str, str], str] = {}
    dwell_index: Dict[int, str] = {}
    names: List[str] = []
    for i in range(n):
        for x in X:
            for side in ("in", "out"):
                var_index[(i, x, side)] = state_var(x, i, side)
                names.append(var_index[(i, x, side)])
        dwell_index[i] = dwell_var(i)
        names.append(dwell_index[i])

    cons: List[LinearConstraint] = []
    tags: Dict[int, Tag] = {}

    def emit(c: LinearConstraint, tag: Tag):
        tags[len(cons)] = tag
        cons.append(c.with_tag(tag))

    def at(i, side):
        return {x: var_index[(i, x, side)] for x in X}

    for i, lid in enumerate(path.locations):
        loc = a.locations[lid]
        vin, vout = at(i, "in"), at(i, "out")
        t = dwell_index[i]
        if i == 0:
            for c in a.init_constraints:
                emit(c.rename(vin), Tag(0, "init"))
        else:
            e = a.edge(path.edges[i - 1])
            prev = at(i - 1, "out")
            for x in X:
                expr = e.reset.get(x)
                coeffs = {vin[x]: Fraction(1)}
                const = Fraction(0)
                if expr is None:
                    coeffs[prev[x]] = coeffs.get(prev[x], Fraction(0)) - 1
                else:
                    for u, k in expr.terms:
                        coeffs[prev[u]] = coeffs.get(prev[u], Fraction(0)) - k
                    const = expr.const
                emit(LinearConstraint(coeffs, Op.EQ, const), Tag(i, "reset", f"{e.id}:{x}"))
        emit(LinearConstraint({t: 1}, Op.GE, 0), Tag(i, "dwell_nonneg"))
        for x in X:
            lo, hi = loc.flow[x]
            if lo == hi:
                emit(LinearConstraint({vout[x]: 1, vin[x]: -1, t: -lo}, Op.EQ, 0), Tag(i, "flow", x))
            else:
                emit(LinearConstraint({vout[x]: 1, vin[x]: -1, t: -lo}, Op.GE, 0), Tag(i, "flow", x))
                emit(LinearConstraint({vout[x]: 1, vin[x]: -1, t: -hi}, Op.LE, 0), Tag(i, "flow", x))
        for c in loc.invariant:
            emit(c.rename(vin), Tag(i, "invariant_in"))
            emit(c.rename(vout), Tag(i, "invariant_out"))
        if i < n - 1:
            e = a.edge(path.edges[i])
            for c in e.guard:
                emit(c.rename(vout), Tag(i + 1, "guard", e.id))
    vlast = at(n - 1, "out")
    for c in target:
        emit(c.rename(vlast), Tag(n - 1, "target"))
    return EncodedPath(path, ConstraintSystem(names, cons), var_index, dwell_index, tags)


@dataclass(frozen=True)
class PathSegment:
    start: int
    end: int
    path: AbstractPath

    def render(self) -> str:
        return self.path.render()


@dataclass(frozen=True)
class FeasibleRun:
    run: Run
    plan: Plan
    margin: Fraction

    feasible = True


@dataclass(frozen=True)
class InfeasiblePath:
    iis: IIS
    segment: PathSegment
    tags: Tuple[Tag, ...]

    feasible = False


PathFeasibility = Union[FeasibleRun, InfeasiblePath]


def segment_of(enc: EncodedPath, iis: IIS) -> PathSegment:
    steps = [enc.tag_index[i].step for i in iis.indices]
    lo, hi = min(steps), max(steps)
    return PathSegment(lo, hi, enc.path.slice(lo, hi))


def run_from_witness(p: PlanningProblem, enc: EncodedPath, witness: Dict[str, Fraction]) -> Run:
    X = p.automaton.variables
    steps = []
    n = len(enc.path.locations)
    for i, lid in enumerate(enc.path.locations):
        entry = {x: witness[enc.var_index[(i, x, "in")]] for x in X}
        exit_ = {x: witness[enc.var_index[(i, x, "out")]] for x in X}
        edge = enc.path.edges[i] if i < n - 1 else None
        steps.append(RunStep(lid, entry, witness[enc.dwell_index[i]], exit_, edge))
    return Run(steps)


def extract_plan(r: Run, automaton: Optional[Automaton] = None) -> Plan:
    """Timed action sequence of a run; each action fires when its dwell ends."""
    clock = Fraction(0)
    steps = []
    for st in r.steps:
        clock += st.dwell
        if st.edge is not None:
            label = automaton.edge(st.edge).label if automaton is not None else st.edge
            steps.append((clock, label))
    return Plan(tuple(steps), clock)


def check_path(p: PlanningProblem, path: AbstractPath,
               target: Optional[Sequence[LinearConstraint]] = None, explain: bool = True) -> PathFeasibility:
    """Solve the path encoding; return a run and plan, or an IIS and its segment.

    With ``explain=False`` an infeasible path is reported without
    extracting an IIS (``iis`` and ``segment`` are None).
    """
    enc = encode_path(p, path, target)
    res = solve_feasibility(enc.system)
    if res.feasible:
        run = run_from_witness(p, enc, res.witness)
        return FeasibleRun(run, extract_plan(run, p.automaton), res.strictness_margin)
    if not explain:
        return InfeasiblePath(None, None, ())
    iis = deletion_filter_iis(enc.system)
    return InfeasiblePath(iis, segment_of(enc, iis), tuple(enc.tag_index[i] for i in iis.indices))
