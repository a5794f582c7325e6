"""Unsolvability explanation through inevitable waypoints."""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

from .core import LinearConstraint, Plan, PlanningProblem, Run
from .encoding import check_path
from .graph import AbstractPath, PathBudgetExceeded, _dist_to, abstract_graph, default_budget, iter_paths
from .lp import SolverInvariantError
from .subsequence import (DEFAULT_CELL_BUDGET, BudgetExceeded, WaypointChain, build_chain, common_subsequence_fold,
                          dedupe, insertable_symbols, is_common_subsequence, lcs_multi_exact)

# paths handed to the LP per round; fixed so that counts never depend on --jobs
BATCH = 64

EXPLAINED = "Explained"
DISCRETE_UNSOLVABLE = "DiscreteUnsolvable"
SOLVABLE = "Solvable"
INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Reachable:
    path: AbstractPath
    run: Run
    plan: Plan
    paths_checked: int

    outcome = "Reachable"


@dataclass(frozen=True)
class Unreachable:
    paths_checked: int

    outcome = "Unreachable"


@dataclass(frozen=True)
class Budget:
    reason: str
    paths_checked: int

    outcome = "Budget"


ReachOutcome = Union[Reachable, Unreachable, Budget]


@dataclass(frozen=True)
class DiscreteUnsolvable:
    num_paths: int = 0


@dataclass
class Waypoints:
    chain: WaypointChain
    num_paths: int
    dedup_paths: int
    lcs_exact: bool
    locally_maximal: bool = True


@dataclass
class ExplanationReport:
    problem: str
    chain: Optional[WaypointChain]
    statuses: List[ReachOutcome]
    explanation: Optional[int]
    outcome: str
    goal_status: Optional[ReachOutcome] = None
    stats: dict = field(default_factory=dict)

    @property
    def explanation_location(self) -> Optional[str]:
        if self.explanation is None:
            return None
        return self.chain.locations[self.explanation]

    @property
    def feasible_before_explanation(self) -> int:
        stop = len(self.statuses) if self.explanation is None else self.explanation
        return sum(1 for s in self.statuses[:stop] if isinstance(s, Reachable))

    @property
    def feasible_waypoints(self) -> int:
        return sum(1 for s in self.statuses if isinstance(s, Reachable))


def compute_waypoints(p: PlanningProblem, mode: str = "walks", budget: Optional[int] = None,
                      exact: Optional[bool] = None, cell_budget: int = DEFAULT_CELL_BUDGET):
    """Chain of inevitable waypoints derived from the bounded path strings of ``p``.

    ``exact=None`` uses the exact multi-sequence DP when it fits in
    ``cell_budget`` and the pairwise fold otherwise; ``exact=True`` insists
    on the DP and raises BudgetExceeded when it does not fit.
    """
    g = abstract_graph(p.automaton)
    paths = list(iter_paths(g, p.automaton.init_location, p.goal_location, p.depth, mode,
                            p.required_visits, budget))
    if not paths:
        return DiscreteUnsolvable(0)
    strings = dedupe(path.string for path in paths)
    lcs = None
    if exact is not False:
        try:
            lcs = lcs_multi_exact(strings, cell_budget)
        except BudgetExceeded:
            if exact:
                raise
    used_exact = lcs is not None
    if lcs is None:
        lcs = common_subsequence_fold(strings)
    if not is_common_subsequence(lcs, strings):
        raise SolverInvariantError("waypoint chain is not a common subsequence of the path strings")
    maximal = used_exact or not insertable_symbols(lcs, strings)
    return Waypoints(build_chain(lcs, p), len(paths), len(strings), used_exact, maximal)


# worker state for the process pool
_W: dict = {}


def _init_worker(p, target):
    _W["p"] = p
    _W["target"] = target


def _node(p, target, path: AbstractPath, candidate: bool, redundant: bool):
    """Verdict for one search node: (prefix feasible, FeasibleRun or None).

    The prefix is encoded without a target; a candidate (a path ending at
    the target location) is then checked against the target unless the
    target is implied by the location invariant already in the encoding.
    """
    res = check_path(p, path, (), explain=False)
    if not res.feasible:
        return False, None
    if not candidate:
        return True, None
    if not redundant:
        res = check_path(p, path, target, explain=False)
    return True, (res if res.feasible else None)


def _node_in_worker(args):
    return _node(_W["p"], _W["target"], *args)


def _verdicts(p, target, jobs, pool):
    if pool is None:
        return [_node(p, target, *job) for job in jobs]
    return list(pool.map(_node_in_worker, jobs))


def _reach(p: PlanningProblem, location: str, target: Sequence[LinearConstraint], visits, mode: str,
           budget: Optional[int], pool) -> ReachOutcome:
    """Breadth-first search over path prefixes, dropping infeasible ones.

    Paths are visited in exactly the order in which ``iter_paths`` would
    emit them; a prefix whose encoding is infeasible cannot be extended to
    a feasible path, so dropping it never changes the first feasible path.
    ``paths_checked`` counts the candidate paths that were solved.
    """
    a = p.automaton
    g = abstract_graph(a)
    if mode not in ("walks", "simple"):
        raise ValueError(f"unknown enumeration mode {mode!r}")
    if budget is None:
        budget = default_budget()
    inv = set(a.locations[location].invariant)
    redundant = all(c in inv for c in target)
    need = frozenset(visits or ())
    dist = _dist_to(g, location)
    start = a.init_location
    if dist.get(start, p.depth + 1) > p.depth:
        return Unreachable(0)
    checked = 0
    used = 1
    level = [((start,), (), frozenset({start}) & need)]
    for length in range(p.depth + 1):
        nxt = []
        for i in range(0, len(level), BATCH):
            chunk = level[i:i + BATCH]
            jobs = [(AbstractPath(locs, edges), locs[-1] == location and seen == need, redundant)
                    for locs, edges, seen in chunk]
            for (locs, edges, seen), job, (ok, res) in zip(chunk, jobs, _verdicts(p, target, jobs, pool)):
                if not ok:
                    continue
                if job[1]:
                    checked += 1
                    if res is not None:
                        return Reachable(job[0], res.run, res.plan, checked)
                if length == p.depth:
                    continue
                remaining = p.depth - length - 1
                for t, eid in g.out[locs[-1]]:
                    if dist.get(t, remaining + 1) > remaining:
                        continue
                    if mode == "simple" and t in locs:
                        continue
                    used += 1
                    if used > budget:
                        return Budget(str(PathBudgetExceeded(budget)), checked)
                    nxt.append((locs + (t,), edges + (eid,), seen | ({t} & need)))
        used -= len(level)
        level = nxt
        if not level:
            break
    return Unreachable(checked)


class _Pool:
    """Process pool that exists only when more than one job is requested."""

    def __init__(self, p, target, jobs: int):
        self.p, self.target, self.jobs = p, target, jobs
        self.pool = None

    def __enter__(self):
        if self.jobs > 1:
            self.pool = ProcessPoolExecutor(self.jobs, initializer=_init_worker, initargs=(self.p, self.target))
        return self.pool

    def __exit__(self, *exc):
        if self.pool is not None:
            self.pool.shutdown()


def reach_subproblem(p: PlanningProblem, location: str, jobs: int = 1, mode: str = "walks",
                     budget: Optional[int] = None) -> ReachOutcome:
    """Bounded reachability of ``location`` at any valuation inside its invariant."""
    if location not in p.automaton.locations:
        raise KeyError(location)
    target = p.automaton.locations[location].invariant
    with _Pool(p, target, jobs) as pool:
        return _reach(p, location, target, None, mode, budget, pool)


def reach_goal(p: PlanningProblem, jobs: int = 1, mode: str = "walks", budget: Optional[int] = None) -> ReachOutcome:
    """Bounded reachability of the true goal, honouring required visits."""
    target = p.goal_constraints
    with _Pool(p, target, jobs) as pool:
        return _reach(p, p.goal_location, target, p.required_visits, mode, budget, pool)


def explain_unsolvability(p: PlanningProblem, jobs: int = 1, mode: str = "walks", budget: Optional[int] = None,
                          exact: Optional[bool] = None, name: str = "") -> ExplanationReport:
    """Walk the waypoint chain and report the first unreachable sub-problem.

    Every chain member is checked so that both feasible-waypoint counts
    can be reported; the explanation is decided by the first member that
    is not Reachable.
    """
    start = time.perf_counter()
    if budget is None:
        budget = default_budget()
    stats = {"num_paths": 0, "dedup_paths": 0, "lcs_exact": False, "lcs_locally_maximal": True,
             "peak_paths_in_memory": 0}

    def done(report):
        report.stats["elapsed_ms"] = round((time.perf_counter() - start) * 1000, 3)
        return report

    try:
        wp = compute_waypoints(p, mode, budget, exact)
    except PathBudgetExceeded as exc:
        return done(ExplanationReport(name, None, [], None, INCONCLUSIVE, Budget(str(exc), 0), stats))
    if isinstance(wp, DiscreteUnsolvable):
        return done(ExplanationReport(name, None, [], None, DISCRETE_UNSOLVABLE, None, stats))
    stats.update(num_paths=wp.num_paths, dedup_paths=wp.dedup_paths, lcs_exact=wp.lcs_exact,
                 lcs_locally_maximal=wp.locally_maximal, peak_paths_in_memory=max(wp.num_paths, BATCH))
    statuses: List[ReachOutcome] = []
    for loc in wp.chain.locations:
        statuses.append(reach_subproblem(p, loc, jobs, mode, budget))
    first = next((i for i, s in enumerate(statuses) if not isinstance(s, Reachable)), None)
    if first is not None:
        outcome = EXPLAINED if isinstance(statuses[first], Unreachable) else INCONCLUSIVE
        return done(ExplanationReport(name, wp.chain, statuses, first if outcome == EXPLAINED else None,
                                      outcome, None, stats))
    goal = reach_goal(p, jobs, mode, budget)
    if isinstance(goal, Reachable):
        outcome = SOLVABLE
    elif isinstance(goal, Unreachable):
        outcome = EXPLAINED
    else:
        outcome = INCONCLUSIVE
    # an unreachable true goal is explained by the goal waypoint itself
    explanation = len(statuses) - 1 if outcome == EXPLAINED else None
    return done(ExplanationReport(name, wp.chain, statuses, explanation, outcome, goal, stats))
