"""Small hand-built models shared by the unit tests."""

from fractions import Fraction as F

from hxplain.core import Affine, Automaton, Edge, LinearConstraint, Location, Op, PlanningProblem


def le(var, rhs):
    return LinearConstraint({var: 1}, Op.LE, rhs)


def ge(var, rhs):
    return LinearConstraint({var: 1}, Op.GE, rhs)


def eq(var, rhs):
    return LinearConstraint({var: 1}, Op.EQ, rhs)


def clock_pair(guard_value=1, rate=(1, 1), depth=1) -> PlanningProblem:
    """l0 --go [x == guard_value]--> l1 with x' in ``rate`` and x(0) = 0."""
    locs = [Location("l0", [], {"x": rate}), Location("l1", [], {"x": rate})]
    edges = [Edge("e0", "l0", "l1", "go", [eq("x", guard_value)])]
    return PlanningProblem(Automaton(["x"], locs, edges, "l0", [eq("x", 0)]), "l1", (), depth)


def graph_problem(names, arcs, init, goal, depth) -> PlanningProblem:
    """Unconstrained automaton over a bare graph; every path is feasible."""
    locs = [Location(n, [], {"x": (F(1), F(1))}) for n in names]
    edges = [Edge(f"e{k}", s, t) for k, (s, t) in enumerate(arcs)]
    return PlanningProblem(Automaton(["x"], locs, edges, init, [eq("x", 0)]), goal, (), depth)


def battery_line(n=4, charge=3, drain=1, depth=None) -> PlanningProblem:
    """A corridor l0..l{n-1}; each move takes one time unit and drains ``drain``.

    With charge 3 and drain 1 the battery runs flat after three moves, so
    every location beyond l3 is unreachable.
    """
    names = [f"l{i}" for i in range(n)]
    locs = [Location(nm, [ge("c", 0)], {"c": (-drain, -drain), "x": (1, 1)}) for nm in names]
    edges = [Edge(f"e{i}", names[i], names[i + 1], f"mv{i}", [eq("x", 1)], {"x": Affine.constant(0)})
             for i in range(n - 1)]
    a = Automaton(["c", "x"], locs, edges, "l0", [eq("c", charge), eq("x", 0)])
    return PlanningProblem(a, names[-1], (), n - 1 if depth is None else depth)
