"""Common subsequences of path strings and waypoint chains."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

from .core import HxError, LinearConstraint, PlanningProblem

DEFAULT_CELL_BUDGET = 10_000_000

Seq = Tuple[Hashable, ...]


class BudgetExceeded(HxError):
    pass


class EndpointMissing(HxError):
    pass


def lcs_pair(a: Sequence, b: Sequence) -> Seq:
    """Longest common subsequence of ``a`` and ``b``.

    Ties are broken by matching at the earliest possible position in
    ``a``, then the earliest in ``b``.
    """
    a = tuple(a)
    b = tuple(b)
    n, m = len(a), len(b)
    if not n or not m:
        return ()
    # L[i][j] = LCS length of a[i:], b[j:]
    L = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        Li, Li1 = L[i], L[i + 1]
        ai = a[i]
        for j in range(m - 1, -1, -1):
            if ai == b[j]:
                Li[j] = Li1[j + 1] + 1
            else:
                x, y = Li1[j], Li[j + 1]
                Li[j] = x if x >= y else y
    out = []
    i = j = 0
    while i < n and j < m and L[i][j]:
        want = L[i][j]
        ai = a[i]
        hit = -1
        for jj in range(j, m):
            if b[jj] == ai and L[i + 1][jj + 1] + 1 == want:
                hit = jj
                break
        if hit < 0:
            i += 1
            continue
        out.append(ai)
        i += 1
        j = hit + 1
    return tuple(out)


def is_common_subsequence(c: Sequence, seqs: Sequence[Sequence]) -> bool:
    c = tuple(c)
    for s in seqs:
        it = iter(s)
        if not all(any(x == y for y in it) for x in c):
            return False
    return True


def _dp_cells(seqs) -> int:
    return math.prod(len(s) + 1 for s in seqs)


def lcs_multi_exact(seqs: Sequence[Sequence], budget: int = DEFAULT_CELL_BUDGET) -> Seq:
    """Exact LCS of all ``seqs``.

    Refuses (BudgetExceeded) when the full m-dimensional table would
    exceed ``budget`` cells.  Only states reached through leftmost
    matches are actually visited, which is a subset of that table and
    gives the same optimum.
    """
    seqs = [tuple(s) for s in seqs]
    if not seqs:
        return ()
    cells = _dp_cells(seqs)
    if cells > budget:
        raise BudgetExceeded(f"exact LCS table needs {cells} cells, budget is {budget}")
    if any(not s for s in seqs):
        return ()
    # next-occurrence tables: nxt[k][i] maps symbol -> first index >= i
    nxt = []
    for s in seqs:
        table = [None] * (len(s) + 1)
        cur: Dict = {}
        table[len(s)] = dict(cur)
        for i in range(len(s) - 1, -1, -1):
            cur[s[i]] = i
            table[i] = dict(cur)
        nxt.append(table)
    first = seqs[0]
    memo: Dict[tuple, int] = {}

    def moves(state):
        # candidate symbols in order of their next position in the first sequence
        t0 = nxt[0][state[0]]
        cands = []
        for sym, p0 in t0.items():
            pos = [p0]
            for k in range(1, len(seqs)):
                p = nxt[k][state[k]].get(sym)
                if p is None:
                    break
                pos.append(p)
            else:
                cands.append(tuple(pos))
        cands.sort()
        return cands

    def best(state) -> int:
        if state in memo:
            return memo[state]
        # explicit stack to avoid deep recursion
        stack = [(state, None)]
        while stack:
            st, cands = stack[-1]
            if st in memo:
                stack.pop()
                continue
            if cands is None:
                cands = moves(st)
                stack[-1] = (st, cands)
                pending = [tuple(p + 1 for p in c) for c in cands]
                todo = [s for s in pending if s not in memo]
                if todo:
                    stack.extend((s, None) for s in todo)
                    continue
            memo[st] = max((memo[tuple(p + 1 for p in c)] + 1 for c in cands), default=0)
            stack.pop()
        return memo[state]

    state = tuple(0 for _ in seqs)
    total = best(state)
    out = []
    while len(out) < total:
        want = total - len(out)
        for c in moves(state):
            nstate = tuple(p + 1 for p in c)
            if best(nstate) + 1 == want:
                out.append(first[c[0]])
                state = nstate
                break
        else:  # pragma: no cover - the memo guarantees a move
            raise AssertionError("LCS reconstruction failed")
    return tuple(out)


def dedupe(seqs: Sequence[Sequence]) -> List[Seq]:
    return sorted({tuple(s) for s in seqs}, key=lambda s: (len(s), s))


# the fold starts from an exact LCS of its first SEED_GROUP inputs when
# that table has at most SEED_CELLS cells
SEED_GROUP = 3
SEED_CELLS = 200_000


def _fold(ordered: List[Seq], acc: Seq) -> Seq:
    for s in ordered:
        if not acc:
            break
        if is_common_subsequence(acc, (s,)):
            continue
        acc = lcs_pair(acc, s)
    return acc


def common_subsequence_pairwise(seqs: Sequence[Sequence]) -> Seq:
    """Plain pairwise fold of lcs_pair over the distinct inputs."""
    if not seqs:
        raise ValueError("need at least one sequence")
    ordered = dedupe(seqs)
    return _fold(ordered[1:], ordered[0])


def common_subsequence_fold(seqs: Sequence[Sequence]) -> Seq:
    """Sound (not necessarily maximum) common subsequence of ``seqs``.

    The distinct inputs are sorted by length, then lexicographically.  The
    first few are combined with the exact DP when that is cheap, and the
    rest are folded in pairwise.  With at most SEED_GROUP distinct inputs
    the result is therefore a longest common subsequence.
    """
    if not seqs:
        raise ValueError("need at least one sequence")
    ordered = dedupe(seqs)
    head = ordered[:SEED_GROUP]
    if len(head) > 1 and _dp_cells(head) <= SEED_CELLS:
        return _fold(ordered[len(head):], lcs_multi_exact(head, SEED_CELLS))
    return _fold(ordered[1:], ordered[0])


def insertable_symbols(c: Sequence, seqs: Sequence[Sequence]) -> List[Tuple[int, Hashable]]:
    """Positions/symbols that could be inserted into ``c`` keeping it common.

    An empty list means ``c`` is locally maximal.
    """
    c = tuple(c)
    alphabet = sorted({x for s in seqs for x in s}, key=repr)
    found = []
    for pos in range(len(c) + 1):
        for x in alphabet:
            cand = c[:pos] + (x,) + c[pos:]
            if is_common_subsequence(cand, seqs):
                found.append((pos, x))
    return found


@dataclass(frozen=True)
class SubProblem:
    location: str
    goal: Tuple[LinearConstraint, ...]


@dataclass(frozen=True)
class WaypointChain:
    subproblems: Tuple[SubProblem, ...]
    provenance: Seq

    @property
    def locations(self) -> Tuple[str, ...]:
        return tuple(sp.location for sp in self.subproblems)

    def __len__(self):
        return len(self.subproblems)


def build_chain(c: Sequence[str], p: PlanningProblem) -> WaypointChain:
    c = tuple(c)
    l0 = p.automaton.init_location
    if not c or c[0] != l0:
        raise EndpointMissing(f"common subsequence does not start at {l0}")
    if c[-1] != p.goal_location:
        raise EndpointMissing(f"common subsequence does not end at {p.goal_location}")
    locs = p.automaton.locations
    return WaypointChain(tuple(SubProblem(l, locs[l].invariant) for l in c), c)
