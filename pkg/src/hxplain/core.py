"""Exact-rational domain types for rectangular linear hybrid automata.

Everything here is immutable after construction.  Numbers are
``fractions.Fraction`` throughout; helpers accept ints, Fractions and
decimal or ``p/q`` strings, but never floats.
"""

from __future__ import annotations

import copyreg
import enum
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Sequence, Tuple, Union

RatLike = Union[int, Fraction, str, Decimal]


class HxError(Exception):
    """Base class for all errors raised by this package."""


class UnboundVariable(HxError):
    pass


def rat(value: RatLike) -> Fraction:
    """Convert ``value`` to an exact Fraction.

    Strings may be integers, decimals ("2.5") or ratios ("1/3").  Floats
    are refused: they would smuggle rounding into an exact pipeline.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Decimal):
        if not value.is_finite():
            raise ValueError(f"not a finite number: {value}")
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty number")
        if "/" in text:
            num, _, den = text.partition("/")
            d = int(den.strip())
            if d == 0:
                raise ValueError(f"zero denominator in {value!r}")
            return Fraction(int(num.strip()), d)
        dec = Decimal(text)
        if not dec.is_finite():
            raise ValueError(f"not a finite number: {value!r}")
        return Fraction(dec)
    if isinstance(value, float):
        raise TypeError(f"float {value!r} is not allowed; use a string such as '0.1'")
    raise TypeError(f"cannot interpret {value!r} as a rational")


def rat_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


class Op(enum.Enum):
    LE = "<="
    LT = "<"
    EQ = "=="
    GE = ">="
    GT = ">"

    @classmethod
    def parse(cls, text: str) -> "Op":
        for op in cls:
            if op.value == text or op.name == text:
                return op
        if text == "=":
            return cls.EQ
        raise ValueError(f"unknown comparison operator {text!r}")

    @property
    def strict(self) -> bool:
        return self in (Op.LT, Op.GT)

    def holds(self, lhs: Fraction, rhs: Fraction) -> bool:
        if self is Op.LE:
            return lhs <= rhs
        if self is Op.LT:
            return lhs < rhs
        if self is Op.EQ:
            return lhs == rhs
        if self is Op.GE:
            return lhs >= rhs
        return lhs > rhs


def _terms(coeffs: Union[Mapping[str, RatLike], Iterable[Tuple[str, RatLike]]]) -> Tuple[Tuple[str, Fraction], ...]:
    items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
    acc: dict = {}
    for var, c in items:
        acc[var] = acc.get(var, Fraction(0)) + rat(c)
    return tuple(sorted((v, c) for v, c in acc.items() if c != 0))


@dataclass(frozen=True)
class LinearConstraint:
    """``sum(coeffs[v] * v) op rhs`` with an optional provenance tag."""

    terms: Tuple[Tuple[str, Fraction], ...]
    op: Op
    rhs: Fraction
    tag: Optional[object] = None

    def __init__(self, coeffs, op: Union[Op, str], rhs: RatLike, tag: Optional[object] = None):
        object.__setattr__(self, "terms", _terms(coeffs))
        object.__setattr__(self, "op", op if isinstance(op, Op) else Op.parse(op))
        object.__setattr__(self, "rhs", rat(rhs))
        object.__setattr__(self, "tag", tag)

    @property
    def coeffs(self) -> Mapping[str, Fraction]:
        return MappingProxyType(dict(self.terms))

    @property
    def variables(self) -> Tuple[str, ...]:
        return tuple(v for v, _ in self.terms)

    def lhs_value(self, valuation: Mapping[str, Fraction]) -> Fraction:
        total = Fraction(0)
        for v, c in self.terms:
            if v not in valuation:
                raise UnboundVariable(f"variable {v} is not bound")
            total += c * valuation[v]
        return total

    def holds(self, valuation: Mapping[str, Fraction]) -> bool:
        return self.op.holds(self.lhs_value(valuation), self.rhs)

    @classmethod
    def _raw(cls, terms, op: Op, rhs: Fraction, tag) -> "LinearConstraint":
        # terms must already be sorted, merged and nonzero
        c = object.__new__(cls)
        object.__setattr__(c, "terms", terms)
        object.__setattr__(c, "op", op)
        object.__setattr__(c, "rhs", rhs)
        object.__setattr__(c, "tag", tag)
        return c

    def with_tag(self, tag) -> "LinearConstraint":
        return LinearConstraint._raw(self.terms, self.op, self.rhs, tag)

    def rename(self, mapping: Mapping[str, str], tag=None) -> "LinearConstraint":
        renamed = [(mapping[v], c) for v, c in self.terms]
        if len({v for v, _ in renamed}) == len(renamed):
            return LinearConstraint._raw(tuple(sorted(renamed)), self.op, self.rhs, tag)
        return LinearConstraint(renamed, self.op, self.rhs, tag)

    def normalized(self) -> list:
        """Rows ``(coeffs, strict, rhs)`` meaning ``coeffs . x <= rhs`` (or ``<``)."""
        pos = dict(self.terms)
        neg = {v: -c for v, c in self.terms}
        if self.op is Op.LE:
            return [(pos, False, self.rhs)]
        if self.op is Op.LT:
            return [(pos, True, self.rhs)]
        if self.op is Op.GE:
            return [(neg, False, -self.rhs)]
        if self.op is Op.GT:
            return [(neg, True, -self.rhs)]
        return [(pos, False, self.rhs), (neg, False, -self.rhs)]

    def __str__(self) -> str:
        if not self.terms:
            lhs = "0"
        else:
            parts = []
            for i, (v, c) in enumerate(self.terms):
                sign = "-" if c < 0 else ("+" if i else "")
                mag = abs(c)
                coef = "" if mag == 1 else f"{rat_str(mag)}*"
                parts.append(f"{sign} {coef}{v}" if i else f"{sign}{coef}{v}")
            lhs = " ".join(parts)
        return f"{lhs} {self.op.value} {rat_str(self.rhs)}"


def eval_constraint(c: LinearConstraint, v: Mapping[str, Fraction]) -> bool:
    """Exact evaluation of ``c`` at valuation ``v``."""
    return c.holds(v)


@dataclass(frozen=True)
class Affine:
    """``const + sum(coeffs[v] * v)`` over pre-transition values."""

    terms: Tuple[Tuple[str, Fraction], ...]
    const: Fraction

    def __init__(self, coeffs=(), const: RatLike = 0):
        object.__setattr__(self, "terms", _terms(coeffs))
        object.__setattr__(self, "const", rat(const))

    @classmethod
    def constant(cls, value: RatLike) -> "Affine":
        return cls((), value)

    @classmethod
    def var(cls, name: str) -> "Affine":
        return cls(((name, 1),), 0)

    @property
    def coeffs(self) -> Mapping[str, Fraction]:
        return MappingProxyType(dict(self.terms))

    def value(self, valuation: Mapping[str, Fraction]) -> Fraction:
        total = self.const
        for v, c in self.terms:
            if v not in valuation:
                raise UnboundVariable(f"variable {v} is not bound")
            total += c * valuation[v]
        return total


def _frozen_map(m) -> Mapping:
    return MappingProxyType(dict(m))


def _reduce_proxy(m):
    return _frozen_map, (dict(m),)


# models and runs cross process boundaries when --jobs > 1
copyreg.pickle(MappingProxyType, _reduce_proxy)


@dataclass(frozen=True, eq=False)
class Location:
    id: str
    invariant: Tuple[LinearConstraint, ...]
    flow: Mapping[str, Tuple[Fraction, Fraction]]

    def __init__(self, id: str, invariant: Sequence[LinearConstraint] = (), flow=None):
        object.__setattr__(self, "id", id)
        object.__setattr__(self, "invariant", tuple(invariant))
        fl = {v: (rat(lo), rat(hi)) for v, (lo, hi) in (flow or {}).items()}
        object.__setattr__(self, "flow", _frozen_map(fl))

    def __eq__(self, other):
        return (isinstance(other, Location) and self.id == other.id
                and self.invariant == other.invariant and dict(self.flow) == dict(other.flow))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Edge:
    id: str
    source: str
    target: str
    label: str
    guard: Tuple[LinearConstraint, ...]
    reset: Mapping[str, Affine]

    def __init__(self, id: str, source: str, target: str, label: Optional[str] = None,
                 guard: Sequence[LinearConstraint] = (), reset=None):
        object.__setattr__(self, "id", id)
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "label", label if label is not None else id)
        object.__setattr__(self, "guard", tuple(guard))
        object.__setattr__(self, "reset", _frozen_map(reset or {}))

    def __eq__(self, other):
        return (isinstance(other, Edge) and (self.id, self.source, self.target, self.label, self.guard)
                == (other.id, other.source, other.target, other.label, other.guard)
                and dict(self.reset) == dict(other.reset))

    __hash__ = None

    def apply_reset(self, variables: Sequence[str], valuation: Mapping[str, Fraction]) -> dict:
        out = {}
        for v in variables:
            out[v] = self.reset[v].value(valuation) if v in self.reset else valuation[v]
        return out


@dataclass(frozen=True, eq=False)
class Automaton:
    variables: Tuple[str, ...]
    locations: Mapping[str, Location]
    edges: Tuple[Edge, ...]
    init_location: str
    init_constraints: Tuple[LinearConstraint, ...]

    def __init__(self, variables: Sequence[str], locations: Iterable[Location], edges: Iterable[Edge],
                 init_location: str, init_constraints: Sequence[LinearConstraint] = ()):
        object.__setattr__(self, "variables", tuple(variables))
        locs = list(locations)
        table = {}
        for loc in locs:
            # first declaration wins; duplicates are reported by validate_problem
            table.setdefault(loc.id, loc)
        object.__setattr__(self, "locations", _frozen_map(table))
        object.__setattr__(self, "_declared_locations", tuple(locs))
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(self, "init_location", init_location)
        object.__setattr__(self, "init_constraints", tuple(init_constraints))
        object.__setattr__(self, "_edge_table", _frozen_map({e.id: e for e in reversed(self.edges)}))

    @property
    def init(self):
        return (self.init_location, self.init_constraints)

    def edge(self, edge_id: str) -> Edge:
        return self._edge_table[edge_id]

    def has_edge(self, edge_id: str) -> bool:
        return edge_id in self._edge_table

    def __eq__(self, other):
        return (isinstance(other, Automaton) and self.variables == other.variables
                and list(self.locations.items()) == list(other.locations.items())
                and self.edges == other.edges and self.init == other.init)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class PlanningProblem:
    automaton: Automaton
    goal_location: str
    goal_constraints: Tuple[LinearConstraint, ...]
    depth: int
    required_visits: Optional[frozenset] = None

    def __init__(self, automaton: Automaton, goal_location: str, goal_constraints: Sequence[LinearConstraint] = (),
                 depth: int = 0, required_visits: Optional[Iterable[str]] = None):
        object.__setattr__(self, "automaton", automaton)
        object.__setattr__(self, "goal_location", goal_location)
        object.__setattr__(self, "goal_constraints", tuple(goal_constraints))
        object.__setattr__(self, "depth", depth)
        object.__setattr__(self, "required_visits",
                           None if required_visits is None else frozenset(required_visits))

    @property
    def init(self):
        return self.automaton.init

    @property
    def goal(self):
        return (self.goal_location, self.goal_constraints)

    def with_depth(self, depth: int) -> "PlanningProblem":
        return PlanningProblem(self.automaton, self.goal_location, self.goal_constraints, depth,
                               self.required_visits)

    def with_automaton(self, automaton: Automaton) -> "PlanningProblem":
        return PlanningProblem(automaton, self.goal_location, self.goal_constraints, self.depth,
                               self.required_visits)

    def __eq__(self, other):
        return (isinstance(other, PlanningProblem) and self.automaton == other.automaton
                and self.goal == other.goal and self.depth == other.depth
                and self.required_visits == other.required_visits)

    __hash__ = None


@dataclass(frozen=True)
class Plan:
    steps: Tuple[Tuple[Fraction, str], ...]
    makespan: Fraction


@dataclass(frozen=True)
class RunStep:
    location: str
    entry: Mapping[str, Fraction]
    dwell: Fraction
    exit: Mapping[str, Fraction]
    edge: Optional[str] = None  # None on the terminal step

    def __init__(self, location, entry, dwell, exit, edge=None):
        object.__setattr__(self, "location", location)
        object.__setattr__(self, "entry", _frozen_map(entry))
        object.__setattr__(self, "dwell", rat(dwell))
        object.__setattr__(self, "exit", _frozen_map(exit))
        object.__setattr__(self, "edge", edge)

    def __eq__(self, other):
        return (isinstance(other, RunStep) and self.location == other.location and self.dwell == other.dwell
                and dict(self.entry) == dict(other.entry) and dict(self.exit) == dict(other.exit)
                and self.edge == other.edge)

    __hash__ = None


@dataclass(frozen=True)
class Run:
    steps: Tuple[RunStep, ...]

    def __init__(self, steps: Iterable[RunStep]):
        object.__setattr__(self, "steps", tuple(steps))


# -- validation --------------------------------------------------------------

def _check_constraints(cs, declared, where, issues):
    for c in cs:
        for v in c.variables:
            if v not in declared:
                issues.append(f"{where}: unknown variable {v}")


def validate_problem(p: PlanningProblem) -> list:
    """Return every syntactic issue of ``p`` as a list of strings."""
    issues: list = []
    a = p.automaton
    declared = set(a.variables)
    if len(declared) != len(a.variables):
        issues.append("duplicate variable names")
    seen = set()
    for loc in a._declared_locations:
        if loc.id in seen:
            issues.append(f"duplicate location id {loc.id}")
        seen.add(loc.id)
    for loc in a.locations.values():
        _check_constraints(loc.invariant, declared, f"invariant of {loc.id}", issues)
        for v in a.variables:
            if v not in loc.flow:
                issues.append(f"location {loc.id}: no flow interval for {v}")
        for v, (lo, hi) in loc.flow.items():
            if v not in declared:
                issues.append(f"location {loc.id}: flow for unknown variable {v}")
            elif lo > hi:
                issues.append(f"location {loc.id}: empty flow interval for {v}")
    eids = set()
    for e in a.edges:
        if e.id in eids:
            issues.append(f"duplicate edge id {e.id}")
        eids.add(e.id)
        for end in (e.source, e.target):
            if end not in a.locations:
                issues.append(f"unknown location {end}")
        _check_constraints(e.guard, declared, f"guard of {e.id}", issues)
        for v, expr in e.reset.items():
            if v not in declared:
                issues.append(f"reset of {e.id}: unknown variable {v}")
            for u in expr.coeffs:
                if u not in declared:
                    issues.append(f"reset of {e.id}: unknown variable {u}")
    if a.init_location not in a.locations:
        issues.append(f"unknown location {a.init_location}")
    _check_constraints(a.init_constraints, declared, "init", issues)
    if p.goal_location not in a.locations:
        issues.append(f"unknown location {p.goal_location}")
    _check_constraints(p.goal_constraints, declared, "goal", issues)
    if not isinstance(p.depth, int) or isinstance(p.depth, bool) or p.depth < 0:
        issues.append("depth must be a non-negative integer")
    for loc in sorted(p.required_visits or ()):
        if loc not in a.locations:
            issues.append(f"unknown location {loc}")
    return issues


# -- run checking ------------------------------------------------------------

def check_run(p: PlanningProblem, run: Run, target: Optional[Sequence[LinearConstraint]] = None) -> list:
    """Replay ``run`` against ``p`` and list every violated condition.

    ``target`` defaults to the goal constraints; pass ``()`` to skip the
    terminal condition.  The goal location is only enforced when
    ``target`` is None.
    """
    a = p.automaton
    issues: list = []
    steps = run.steps
    if not steps:
        return ["empty run"]
    if steps[0].location != a.init_location:
        issues.append(f"run starts at {steps[0].location}, not {a.init_location}")
    variables = a.variables

    def total(val, where):
        missing = [v for v in variables if v not in val]
        if missing:
            issues.append(f"{where}: unbound {', '.join(missing)}")
            return False
        return True

    for c in a.init_constraints:
        if total(steps[0].entry, "step 0 entry") and not c.holds(steps[0].entry):
            issues.append(f"step 0 entry violates init {c}")
    for i, st in enumerate(steps):
        loc = a.locations.get(st.location)
        if loc is None:
            issues.append(f"step {i}: unknown location {st.location}")
            continue
        if st.dwell < 0:
            issues.append(f"step {i}: negative dwell")
        if not (total(st.entry, f"step {i} entry") and total(st.exit, f"step {i} exit")):
            continue
        for side, val in (("entry", st.entry), ("exit", st.exit)):
            for c in loc.invariant:
                if not c.holds(val):
                    issues.append(f"step {i} {side} violates invariant {c}")
        for v in variables:
            lo, hi = loc.flow[v]
            delta = st.exit[v] - st.entry[v]
            if not (lo * st.dwell <= delta <= hi * st.dwell):
                issues.append(f"step {i}: change of {v} outside flow bounds")
        last = i == len(steps) - 1
        if last:
            if st.edge is not None:
                issues.append("terminal step carries an edge")
            continue
        if st.edge is None or not a.has_edge(st.edge):
            issues.append(f"step {i}: missing or unknown edge {st.edge}")
            continue
        e = a.edge(st.edge)
        if e.source != st.location or e.target != steps[i + 1].location:
            issues.append(f"step {i}: edge {e.id} does not connect {st.location} to {steps[i + 1].location}")
        for c in e.guard:
            if not c.holds(st.exit):
                issues.append(f"step {i}: guard {c} of {e.id} fails")
        if total(steps[i + 1].entry, f"step {i + 1} entry"):
            after = e.apply_reset(variables, st.exit)
            if any(after[v] != steps[i + 1].entry[v] for v in variables):
                issues.append(f"step {i + 1}: entry does not match reset of {e.id}")
    final = steps[-1]
    if target is None:
        if final.location != p.goal_location:
            issues.append(f"run ends at {final.location}, not {p.goal_location}")
        target = p.goal_constraints
    for c in target:
        if total(final.exit, "final exit") and not c.holds(final.exit):
            issues.append(f"final exit violates target {c}")
    return issues
