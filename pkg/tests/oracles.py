"""Independent reference implementations used as test oracles.

Nothing here calls the code under test for the property being checked;
the exhaustive reachability oracle shares only the path encoding and the
LP, which have their own oracles (Fourier-Motzkin, the run checker).
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Dict, List, Sequence, Set, Tuple

import networkx as nx

from hxplain.core import Affine, Automaton, Edge, LinearConstraint, Location, Op, PlanningProblem
from hxplain.encoding import encode_path
from hxplain.graph import AbstractPath
from hxplain.lp import ConstraintSystem, solve_feasibility

F = Fraction


# -- subsequences -------------------------------------------------------------

def embeds(c: Sequence, s: Sequence) -> bool:
    """Backtracking embedding search (deliberately not greedy)."""
    c, s = tuple(c), tuple(s)

    def go(i, j):
        if i == len(c):
            return True
        if len(s) - j < len(c) - i:
            return False
        for k in range(j, len(s)):
            if s[k] == c[i] and go(i + 1, k + 1):
                return True
        return False

    return go(0, 0)


def brute_lcs_length(seqs: Sequence[Sequence]) -> int:
    """Longest common subsequence length by trying subsequences of the shortest input."""
    seqs = [tuple(s) for s in seqs]
    short = min(seqs, key=len)
    for k in range(len(short), 0, -1):
        cands = {tuple(short[i] for i in idx) for idx in itertools.combinations(range(len(short)), k)}
        for c in sorted(cands):
            if all(embeds(c, s) for s in seqs):
                return k
    return 0


# -- graphs -------------------------------------------------------------------

def dfs_paths(arcs: Sequence[Tuple[str, str, str]], start: str, goal: str, depth: int,
              simple: bool = False) -> Set[Tuple[Tuple[str, ...], Tuple[str, ...]]]:
    """Every start->goal path of at most ``depth`` arcs, by plain recursion."""
    out: Dict[str, List[Tuple[str, str]]] = {}
    for s, t, e in arcs:
        out.setdefault(s, []).append((t, e))
    found = set()

    def go(locs, edges):
        if locs[-1] == goal:
            found.add((tuple(locs), tuple(edges)))
        if len(edges) == depth:
            return
        for t, e in out.get(locs[-1], ()):
            if simple and t in locs:
                continue
            go(locs + [t], edges + [e])

    go([start], [])
    return found


def nx_graph(vertices, arcs) -> nx.MultiDiGraph:
    g = nx.MultiDiGraph()
    g.add_nodes_from(vertices)
    g.add_edges_from((s, t) for s, t, _ in arcs)
    return g


def cut_vertices(vertices, arcs, s, t) -> Set[str]:
    """Vertices whose deletion disconnects t from s, by networkx reachability."""
    g = nx_graph(vertices, arcs)
    out = set()
    for v in vertices:
        if v in (s, t):
            continue
        h = g.copy()
        h.remove_node(v)
        if not nx.has_path(h, s, t):
            out.add(v)
    return out


def floyd_warshall(vertices, arcs) -> Dict[Tuple[str, str], int]:
    inf = float("inf")
    d = {(a, b): (0 if a == b else inf) for a in vertices for b in vertices}
    for s, t, _ in arcs:
        if s != t:
            d[(s, t)] = min(d[(s, t)], 1)
    for k in vertices:
        for a in vertices:
            for b in vertices:
                if d[(a, k)] + d[(k, b)] < d[(a, b)]:
                    d[(a, b)] = d[(a, k)] + d[(k, b)]
    return d


def random_digraph(rng: random.Random, n: int, m: int) -> Tuple[List[str], List[Tuple[str, str, str]]]:
    vertices = [f"v{i}" for i in range(n)]
    arcs = []
    for k in range(m):
        s, t = rng.choice(vertices), rng.choice(vertices)
        arcs.append((s, t, f"a{k}"))
    return vertices, arcs


# -- constraint systems -------------------------------------------------------

def random_coeff(rng: random.Random) -> Fraction:
    # rationals in [-5, 5] with small denominators
    den = rng.choice((1, 1, 1, 2, 3))
    return F(rng.randint(-5 * den, 5 * den), den)


def random_system(rng: random.Random, max_vars: int = 6, max_cons: int = 12, strict: float = 0.2,
                  eq: float = 0.1) -> ConstraintSystem:
    n = rng.randint(1, max_vars)
    names = [f"x{i}" for i in range(n)]
    cons = []
    for _ in range(rng.randint(1, max_cons)):
        k = rng.randint(1, min(3, n))
        coeffs = {v: random_coeff(rng) for v in rng.sample(names, k)}
        r = rng.random()
        if r < strict:
            op = rng.choice((Op.LT, Op.GT))
        elif r < strict + eq:
            op = Op.EQ
        else:
            op = rng.choice((Op.LE, Op.GE))
        cons.append(LinearConstraint(coeffs, op, random_coeff(rng)))
    return ConstraintSystem(names, cons)


# -- tiny hybrid automata -------------------------------------------------------

_RATES = (F(-1), F(0), F(1, 2), F(1), F(2))


def _small(rng, lo=0, hi=4):
    return F(rng.randint(lo * 2, hi * 2), 2)


def _atom(rng, names):
    v = rng.choice(names)
    if rng.random() < 0.3:
        other = [u for u in names if u != v][0]
        return LinearConstraint({v: 1, other: rng.choice((1, -1))}, rng.choice((Op.LE, Op.GE, Op.LT)),
                                _small(rng, -2, 5))
    return LinearConstraint({v: 1}, rng.choice((Op.LE, Op.GE, Op.LT, Op.GT, Op.EQ)), _small(rng))


def random_tiny_problem(rng: random.Random) -> PlanningProblem:
    names = ["x", "y"]
    n = rng.randint(1, 5)
    locs = []
    for i in range(n):
        inv = [_atom(rng, names) for _ in range(rng.randint(0, 2))]
        flow = {}
        for v in names:
            a, b = sorted((rng.choice(_RATES), rng.choice(_RATES)))
            flow[v] = (a, b)
        locs.append(Location(f"q{i}", inv, flow))
    edges = []
    for k in range(rng.randint(0, 8)):
        s, t = rng.randrange(n), rng.randrange(n)
        guard = [_atom(rng, names) for _ in range(rng.randint(0, 1))]
        reset = {}
        if rng.random() < 0.4:
            v = rng.choice(names)
            reset[v] = rng.choice((Affine.constant(_small(rng)), Affine({rng.choice(names): F(1, 2)}, 1)))
        edges.append(Edge(f"e{k}", f"q{s}", f"q{t}", None, guard, reset))
    init = [LinearConstraint({"x": 1}, Op.EQ, _small(rng, 0, 2)), LinearConstraint({"y": 1}, Op.EQ, _small(rng, 0, 2))]
    a = Automaton(names, locs, edges, "q0", init)
    return PlanningProblem(a, f"q{rng.randrange(n)}", (), rng.randint(0, 5))


def path_count(p: PlanningProblem) -> int:
    """Largest number of init->loc walks over the locations of ``p``."""
    a = p.automaton
    arcs = [(e.source, e.target, e.id) for e in a.edges]
    return max(len(dfs_paths(arcs, a.init_location, loc, p.depth)) for loc in a.locations)


def exhaustive_reach(p: PlanningProblem, loc: str):
    """Solve init->loc paths shortest first; return the first feasible one or None.

    No prefix is ever skipped: a path is declared infeasible only after
    its own full encoding has been solved.
    """
    a = p.automaton
    arcs = [(e.source, e.target, e.id) for e in a.edges]
    target = a.locations[loc].invariant
    for locs, edges in sorted(dfs_paths(arcs, a.init_location, loc, p.depth), key=lambda q: (len(q[0]), q)):
        path = AbstractPath(locs, edges)
        if solve_feasibility(encode_path(p, path, target).system).feasible:
            return path
    return None
