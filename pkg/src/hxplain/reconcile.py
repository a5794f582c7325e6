"""Model reconciliation between a human and an agent planning problem."""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

from .core import Automaton, HxError, Plan, PlanningProblem
from .encoding import PathSegment, Tag, check_path, encode_path, segment_of
from .graph import AbstractPath, LocGraph, PathBudgetExceeded, _dist_to, abstract_graph, default_budget
from .lp import IIS, NotInfeasible, deletion_filter_iis, solve_feasibility
from .model_io import ModelDocument

RECONCILED = "Reconciled"
HUMAN_HAS_VALID_AGENT_PLAN = "HumanHasValidAgentPlan"

PRUNED_BY_E = "pruned-by-E"
PRUNED_BY_IP = "pruned-by-IP-prefix"
PRUNED_BY_S = "pruned-by-S-segment"
INVALID_EDGE = "invalid-edge"
HUMAN_INFEASIBLE = "human-infeasible"
AGENT_IIS = "agent-IIS"
AGENT_FEASIBLE = "agent-feasible"
DISPOSITIONS = (PRUNED_BY_E, PRUNED_BY_IP, PRUNED_BY_S, INVALID_EDGE, HUMAN_INFEASIBLE, AGENT_IIS, AGENT_FEASIBLE)


class PairMismatch(HxError):
    pass


@dataclass(frozen=True)
class ModelPair:
    human: PlanningProblem
    agent: PlanningProblem

    def __post_init__(self):
        issues = pair_issues(self.human, self.agent)
        if issues:
            raise PairMismatch("; ".join(issues))


def pair_issues(human: PlanningProblem, agent: PlanningProblem) -> List[str]:
    h, a = human.automaton, agent.automaton
    issues = []
    if tuple(h.variables) != tuple(a.variables):
        issues.append("human and agent declare different variables")
    missing = sorted(set(h.locations) - set(a.locations))
    if missing:
        issues.append("human locations missing from the agent model: " + ", ".join(missing))
    if h.init_location != a.init_location or tuple(h.init_constraints) != tuple(a.init_constraints):
        issues.append("human and agent have different initial conditions")
    if human.goal_location != agent.goal_location or tuple(human.goal_constraints) != tuple(agent.goal_constraints):
        issues.append("human and agent have different goals")
    if human.depth != agent.depth:
        issues.append("human and agent have different depth bounds")
    return issues


@dataclass(frozen=True)
class InvalidEdge:
    edge: str
    position: int
    path: AbstractPath


@dataclass(frozen=True)
class Ok:
    pass


@dataclass(frozen=True)
class HumanFeasible:
    plan: Plan

    feasible = True


@dataclass(frozen=True)
class HumanInfeasible:
    feasible = False


@dataclass(frozen=True)
class SegmentPattern:
    """Contiguous piece of a path whose constraints are infeasible on their own.

    ``incoming`` is the edge entering the segment when the core uses its
    guard or reset; ``at_start``/``at_end`` pin the pattern to the path's
    first or last step when the core uses init or target constraints.
    """
    incoming: Optional[str]
    locations: Tuple[str, ...]
    edges: Tuple[str, ...]
    at_start: bool
    at_end: bool

    def occurs_in(self, path: AbstractPath) -> bool:
        n = len(self.locations)
        last = len(path.locations) - n
        for s in range(last + 1):
            if self.at_start and s != 0:
                break
            if self.at_end and s != last:
                continue
            if path.locations[s:s + n] != self.locations or path.edges[s:s + n - 1] != self.edges:
                continue
            if self.incoming is not None and (s == 0 or path.edges[s - 1] != self.incoming):
                continue
            return True
        return False


@dataclass(frozen=True)
class SegmentFinding:
    path: AbstractPath
    segment: PathSegment
    iis: IIS
    tags: Tuple[Tag, ...]
    pattern: SegmentPattern


@dataclass
class ReconciliationReport:
    invalid_edges: List[InvalidEdge] = field(default_factory=list)
    human_infeasible: List[AbstractPath] = field(default_factory=list)
    agent_infeasible: List[AbstractPath] = field(default_factory=list)
    segments: List[SegmentFinding] = field(default_factory=list)
    dispositions: List[Tuple[AbstractPath, str]] = field(default_factory=list)
    outcome: str = RECONCILED
    witness: Optional[Tuple[AbstractPath, Plan]] = None
    stats: dict = field(default_factory=dict)

    def counts(self) -> Dict[str, int]:
        out = {d: 0 for d in DISPOSITIONS}
        for _, d in self.dispositions:
            out[d] += 1
        return out


def discrete_feasibility(path: AbstractPath, agent: LocGraph) -> Union[Ok, InvalidEdge]:
    """First edge of ``path`` whose endpoints are not joined in the agent graph."""
    for i, eid in enumerate(path.edges):
        if not agent.has_arc(path.locations[i], path.locations[i + 1]):
            return InvalidEdge(eid, i, path)
    return Ok()


def human_feasibility(path: AbstractPath, human: PlanningProblem) -> Union[HumanFeasible, HumanInfeasible]:
    res = check_path(human, path, explain=False)
    return HumanFeasible(res.plan) if res.feasible else HumanInfeasible()


def _agent_paths(path: AbstractPath, agent: PlanningProblem) -> List[AbstractPath]:
    """Agent edge choices realising ``path``; the same edge id is preferred."""
    a = agent.automaton
    options = []
    for i, eid in enumerate(path.edges):
        s, t = path.locations[i], path.locations[i + 1]
        if a.has_edge(eid) and a.edge(eid).source == s and a.edge(eid).target == t:
            options.append((eid,))
        else:
            options.append(tuple(e.id for e in a.edges if e.source == s and e.target == t))
    return [AbstractPath(path.locations, combo) for combo in itertools.product(*options)]


def _pattern(human_path: AbstractPath, seg: PathSegment, tags: Sequence[Tag]) -> SegmentPattern:
    kinds_at_start = {t.kind for t in tags if t.step == seg.start}
    uses_incoming = seg.start > 0 and bool(kinds_at_start & {"guard", "reset"})
    kinds = {t.kind for t in tags}
    return SegmentPattern(human_path.edges[seg.start - 1] if uses_incoming else None,
                          human_path.locations[seg.start:seg.end + 1], human_path.edges[seg.start:seg.end],
                          "init" in kinds, "target" in kinds)


def agent_iis(path: AbstractPath, agent: PlanningProblem) -> List[Tuple[IIS, PathSegment]]:
    """IIS and path segment of the agent encoding, one per agent realisation of ``path``."""
    out = []
    for ap in _agent_paths(path, agent):
        enc = encode_path(agent, ap)
        if solve_feasibility(enc.system).feasible:
            raise NotInfeasible(f"path {ap.render()} is feasible in the agent model")
        iis = deletion_filter_iis(enc.system)
        seg = segment_of(enc, iis)
        out.append((iis, PathSegment(seg.start, seg.end, path.slice(seg.start, seg.end))))
    return out


def _agent_iis_tagged(path: AbstractPath, agent: PlanningProblem):
    """Like agent_iis but also returns the tags; None when some realisation is feasible."""
    found = []
    for ap in _agent_paths(path, agent):
        res = check_path(agent, ap)
        if res.feasible:
            return None, res
        seg = PathSegment(res.segment.start, res.segment.end, path.slice(res.segment.start, res.segment.end))
        found.append((res.iis, seg, res.tags))
    return found, None


def _prefix_infeasible(p: PlanningProblem, path: AbstractPath) -> bool:
    # extensions inherit infeasibility only when the target is not involved
    if not p.goal_constraints:
        return True
    return not check_path(p, path, (), explain=False).feasible


def _human_walks(g: LocGraph, start: str, goal: str, depth: int, removed: Set[str], mode: str, budget: int):
    """Breadth-first human paths; edges in ``removed`` are never expanded.

    ``removed`` may grow while the generator is suspended.
    """
    dist = _dist_to(g, goal)
    if dist.get(start, depth + 1) > depth:
        return
    used = 0
    level = [((start,), ())]
    for length in range(depth + 1):
        nxt = []
        for locs, edges in level:
            if locs[-1] == goal:
                used += 1
                if used > budget:
                    raise PathBudgetExceeded(budget)
                yield AbstractPath(locs, edges)
            if length == depth:
                continue
            remaining = depth - length - 1
            if any(e in removed for e in edges):
                continue
            for t, eid in g.out[locs[-1]]:
                if eid in removed or dist.get(t, remaining + 1) > remaining:
                    continue
                if mode == "simple" and t in locs:
                    continue
                used += 1
                if used > budget:
                    raise PathBudgetExceeded(budget)
                nxt.append((locs + (t,), edges + (eid,)))
        used -= len(level)
        level = nxt
        if not level:
            break


def reconcile(pair: ModelPair, mode: str = "walks", budget: Optional[int] = None) -> ReconciliationReport:
    """Replay every bounded human path against the agent model.

    Paths are processed in breadth-first order.  The first agent-feasible
    path ends the run with outcome HumanHasValidAgentPlan.
    """
    start = time.perf_counter()
    if budget is None:
        budget = default_budget()
    human, agent = pair.human, pair.agent
    hg = abstract_graph(human.automaton)
    ag = abstract_graph(agent.automaton)
    report = ReconciliationReport()
    removed: Set[str] = set()
    ip_prefixes: List[AbstractPath] = []
    patterns: List[SegmentPattern] = []

    def extends(path, q):
        n = len(q.locations)
        return n < len(path.locations) and path.locations[:n] == q.locations and path.edges[:n - 1] == q.edges

    walks = _human_walks(hg, human.automaton.init_location, human.goal_location, human.depth, removed, mode, budget)
    for path in walks:
        if any(e in removed for e in path.edges):
            report.dispositions.append((path, PRUNED_BY_E))
            continue
        if any(extends(path, q) for q in ip_prefixes):
            report.dispositions.append((path, PRUNED_BY_IP))
            continue
        if any(pt.occurs_in(path) for pt in patterns):
            report.dispositions.append((path, PRUNED_BY_S))
            continue
        d = discrete_feasibility(path, ag)
        if isinstance(d, InvalidEdge):
            report.invalid_edges.append(d)
            removed.add(d.edge)
            report.dispositions.append((path, INVALID_EDGE))
            continue
        if not human_feasibility(path, human).feasible:
            report.human_infeasible.append(path)
            if _prefix_infeasible(human, path):
                ip_prefixes.append(path)
            report.dispositions.append((path, HUMAN_INFEASIBLE))
            continue
        found, feasible = _agent_iis_tagged(path, agent)
        if found is None:
            report.dispositions.append((path, AGENT_FEASIBLE))
            report.outcome = HUMAN_HAS_VALID_AGENT_PLAN
            report.witness = (path, feasible.plan)
            break
        report.agent_infeasible.append(path)
        if len(found) == 1 and _prefix_infeasible(agent, _agent_paths(path, agent)[0]):
            ip_prefixes.append(path)
        for iis, seg, tags in found:
            pt = _pattern(path, seg, tags)
            report.segments.append(SegmentFinding(path, seg, iis, tags, pt))
            # a pattern only prunes when every agent realisation is covered
            if len(found) == 1 and pt not in patterns:
                patterns.append(pt)
        report.dispositions.append((path, AGENT_IIS))
    report.stats = {"num_paths": len(report.dispositions), "elapsed_ms": round((time.perf_counter() - start) * 1000, 3)}
    return report


def updated_human_model(human: ModelDocument, report: ReconciliationReport) -> ModelDocument:
    """Human model without the invalid edges, annotated with the unusable segments."""
    a = human.problem.automaton
    drop = {ie.edge for ie in report.invalid_edges}
    automaton = Automaton(a.variables, a.locations.values(), [e for e in a.edges if e.id not in drop],
                          a.init_location, a.init_constraints)
    meta = dict(human.metadata)
    meta["reconciliation"] = {
        "removed_edges": [ie.edge for ie in report.invalid_edges],
        "unusable_segments": sorted({f.segment.path.render() for f in report.segments}),
    }
    return ModelDocument(human.problem.with_automaton(automaton), meta, human.format_version)
