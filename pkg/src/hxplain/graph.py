"""Location graph of an automaton and bounded path enumeration."""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

from .core import Automaton, HxError

DEFAULT_PATH_BUDGET = 1_000_000


class PathBudgetExceeded(HxError):
    def __init__(self, budget: int):
        self.budget = budget
        super().__init__(f"path budget exceeded ({budget} paths)")


class Unreachable(HxError):
    pass


def default_budget() -> int:
    env = os.environ.get("HXPLAIN_BUDGET")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise HxError(f"HXPLAIN_BUDGET must be an integer, got {env!r}") from None
        if value <= 0:
            raise HxError("HXPLAIN_BUDGET must be positive")
        return value
    return DEFAULT_PATH_BUDGET


@dataclass(frozen=True)
class AbstractPath:
    locations: Tuple[str, ...]
    edges: Tuple[str, ...]

    def __post_init__(self):
        if len(self.locations) != len(self.edges) + 1:
            raise ValueError("a path needs exactly one more location than edges")

    @property
    def length(self) -> int:
        return len(self.edges)

    @property
    def string(self) -> Tuple[str, ...]:
        return self.locations

    def slice(self, start: int, end: int) -> "AbstractPath":
        """Sub-path from step ``start`` to step ``end`` inclusive."""
        return AbstractPath(self.locations[start:end + 1], self.edges[start:end])

    def render(self) -> str:
        parts = [self.locations[0]]
        for e, l in zip(self.edges, self.locations[1:]):
            parts.append(e)
            parts.append(l)
        return ",".join(parts)

    @classmethod
    def parse(cls, text: str) -> "AbstractPath":
        items = [t.strip() for t in text.split(",") if t.strip()]
        if len(items) % 2 != 1:
            raise ValueError("path must alternate locations and edges, starting and ending with a location")
        return cls(tuple(items[0::2]), tuple(items[1::2]))


class LocGraph:
    """Directed multigraph with one arc per automaton edge."""

    def __init__(self, vertices: Iterable[str], arcs: Iterable[Tuple[str, str, str]]):
        self.vertices: Tuple[str, ...] = tuple(vertices)
        self.arcs: Tuple[Tuple[str, str, str], ...] = tuple(arcs)
        self.out: Dict[str, List[Tuple[str, str]]] = {v: [] for v in self.vertices}
        self.inc: Dict[str, List[Tuple[str, str]]] = {v: [] for v in self.vertices}
        self._pairs = set()
        self._ids = set()
        for s, t, eid in self.arcs:
            self.out[s].append((t, eid))
            self.inc[t].append((s, eid))
            self._pairs.add((s, t))
            self._ids.add(eid)

    def has_arc(self, source: str, target: str) -> bool:
        return (source, target) in self._pairs

    def has_edge_id(self, eid: str) -> bool:
        return eid in self._ids

    def without_edges(self, edge_ids) -> "LocGraph":
        drop = set(edge_ids)
        return LocGraph(self.vertices, (a for a in self.arcs if a[2] not in drop))

    def without_arcs(self, pairs) -> "LocGraph":
        drop = set(pairs)
        return LocGraph(self.vertices, (a for a in self.arcs if (a[0], a[1]) not in drop))

    def __repr__(self):
        return f"LocGraph({len(self.vertices)} vertices, {len(self.arcs)} arcs)"


def abstract_graph(a: Automaton) -> LocGraph:
    return LocGraph(a.locations.keys(), ((e.source, e.target, e.id) for e in a.edges))


def _dist_to(g: LocGraph, target: str, removed: Optional[str] = None) -> Dict[str, int]:
    """Reverse BFS distances (in arcs) to ``target``."""
    dist = {target: 0}
    queue = deque([target])
    while queue:
        v = queue.popleft()
        for s, _ in g.inc[v]:
            if s not in dist and s != removed:
                dist[s] = dist[v] + 1
                queue.append(s)
    return dist


def iter_paths(g: LocGraph, start: str, goal: str, depth: int, mode: str = "walks",
               visits: Optional[Iterable[str]] = None, budget: Optional[int] = None) -> Iterator[AbstractPath]:
    """Yield start->goal paths of at most ``depth`` edges in breadth-first order.

    Prefixes that cannot reach ``goal`` within the remaining depth are
    dropped early; this never changes the result set.  ``budget`` caps the
    number of live prefixes plus emitted paths.
    """
    if mode not in ("walks", "simple"):
        raise ValueError(f"unknown enumeration mode {mode!r}")
    for v in (start, goal):
        if v not in g.out:
            raise ValueError(f"unknown location {v}")
    if budget is None:
        budget = default_budget()
    need = frozenset(visits or ())
    dist = _dist_to(g, goal)
    if dist.get(start, depth + 1) > depth:
        return
    simple = mode == "simple"
    used = 0
    # queue entries: (locations, edges, visited set of required locations)
    level = [((start,), (), frozenset({start}) & need)]
    for length in range(depth + 1):
        nxt = []
        for locs, edges, seen in level:
            last = locs[-1]
            if last == goal and seen == need:
                used += 1
                if used > budget:
                    raise PathBudgetExceeded(budget)
                yield AbstractPath(locs, edges)
            if length == depth:
                continue
            remaining = depth - length - 1
            for t, eid in g.out[last]:
                if dist.get(t, remaining + 1) > remaining:
                    continue
                if simple and t in locs:
                    continue
                used += 1
                if used > budget:
                    raise PathBudgetExceeded(budget)
                nxt.append((locs + (t,), edges + (eid,), seen | ({t} & need) if t in need else seen))
        used -= len(level)
        level = nxt
        if not level:
            break


def enumerate_paths(g: LocGraph, start: str, goal: str, depth: int, mode: str = "walks",
                    visits: Optional[Iterable[str]] = None, budget: Optional[int] = None) -> List[AbstractPath]:
    return list(iter_paths(g, start, goal, depth, mode, visits, budget))


def shortest_path_length(g: LocGraph, source: str, target: str) -> Optional[int]:
    """Number of locations on a shortest source->target path, or None."""
    if source == target:
        return 1
    dist = {source: 1}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for t, _ in g.out[v]:
            if t not in dist:
                dist[t] = dist[v] + 1
                if t == target:
                    return dist[t]
                queue.append(t)
    return None


def _reaches(g: LocGraph, source: str, target: str, removed: Optional[str]) -> bool:
    seen = {source}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        if v == target:
            return True
        for t, _ in g.out[v]:
            if t != removed and t not in seen:
                seen.add(t)
                queue.append(t)
    return False


def disconnecting_articulation_points(g: LocGraph, source: str, target: str) -> FrozenSet[str]:
    """Vertices whose removal leaves ``target`` unreachable from ``source``."""
    if not _reaches(g, source, target, None):
        raise Unreachable(f"{target} is not reachable from {source}")
    return frozenset(v for v in g.vertices
                     if v not in (source, target) and not _reaches(g, source, target, v))
