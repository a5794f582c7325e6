"""Fourier-Motzkin elimination, used as an independent feasibility oracle."""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, FrozenSet, List, Tuple

from .lp import ConstraintSystem, ScaleExceeded

MAX_VARS = 8
MAX_CONSTRAINTS = 24
CHERNIKOV = True

# (coeffs, strict, rhs, history) meaning coeffs . x <= rhs (or <)
_Row = Tuple[Dict[str, Fraction], bool, Fraction, FrozenSet[int]]


def _substitute_equalities(rows: List[_Row], eqs: List[Tuple[Dict[str, Fraction], Fraction]]):
    """Gaussian elimination of equalities; returns rows or None if inconsistent."""
    eqs = [(dict(c), b) for c, b in eqs]
    while eqs:
        coeffs, b = eqs.pop()
        if not coeffs:
            if b != 0:
                return None
            continue
        v = min(coeffs)
        a = coeffs[v]
        # v = (b - sum others) / a
        expr = {u: -k / a for u, k in coeffs.items() if u != v}
        const = b / a

        def sub(c: Dict[str, Fraction], rhs: Fraction):
            k = c.get(v)
            if k is None:
                return c, rhs
            out = {u: w for u, w in c.items() if u != v}
            for u, w in expr.items():
                out[u] = out.get(u, Fraction(0)) + k * w
            return {u: w for u, w in out.items() if w}, rhs - k * const

        eqs = [sub(c, r) for c, r in eqs]
        new_rows = []
        for c, s, r, h in rows:
            c2, r2 = sub(c, r)
            new_rows.append((c2, s, r2, h))
        rows = new_rows
    return rows


def _key(coeffs: Dict[str, Fraction]):
    # scale so the first coefficient has magnitude 1
    first = min(coeffs)
    s = abs(coeffs[first])
    return tuple(sorted((v, k / s) for v, k in coeffs.items())), s


def fm_eliminate_all(cs: ConstraintSystem) -> bool:
    """Feasibility of ``cs`` (strict rows honoured) by Fourier-Motzkin.

    Strict rows ``a.x < b`` become ``a.x + e <= b`` with one shared
    ``e <= 1``; the system is feasible iff some ``e > 0`` survives the
    elimination of every original variable.  Keeping all rows closed is
    what makes Chernikov's redundancy rule safe to use.
    """
    if len(cs.variables) > MAX_VARS or len(cs.constraints) > MAX_CONSTRAINTS:
        raise ScaleExceeded(f"oracle handles at most {MAX_VARS} variables and {MAX_CONSTRAINTS} constraints")
    eps = "\0eps"
    rows: List[_Row] = []
    eqs = []
    any_strict = False
    for i, c in enumerate(cs.constraints):
        if c.op.value == "==":
            eqs.append((dict(c.terms), c.rhs))
            continue
        (coeffs, strict, rhs), = c.normalized()
        if strict:
            coeffs = dict(coeffs)
            coeffs[eps] = Fraction(1)
            any_strict = True
        rows.append((coeffs, False, rhs, frozenset([i])))
    if any_strict:
        rows.append(({eps: Fraction(1)}, False, Fraction(1), frozenset([len(cs.constraints)])))
    rows = _substitute_equalities(rows, eqs)
    if rows is None:
        return False
    eliminated = 0
    while True:
        live = []
        for r in rows:
            if not r[0]:
                if r[2] < 0:
                    return False
                continue
            live.append(r)
        rows = _dedupe(live)
        vars_left = sorted({v for r in rows for v in r[0]} - {eps})
        if not vars_left:
            break

        def cost(v):
            p = sum(1 for r in rows if r[0].get(v, 0) > 0)
            n = sum(1 for r in rows if r[0].get(v, 0) < 0)
            return (p * n - p - n, v)

        v = min(vars_left, key=cost)
        eliminated += 1
        pos = [r for r in rows if r[0].get(v, 0) > 0]
        neg = [r for r in rows if r[0].get(v, 0) < 0]
        rest = [r for r in rows if v not in r[0]]
        for cp, _, bp, hp in pos:
            for cn, _, bn, hn in neg:
                h = hp | hn
                # Chernikov's rule: a derived row built from more than k+1
                # originals after k eliminations is redundant
                if CHERNIKOV and len(h) > eliminated + 1:
                    continue
                a, b = cp[v], -cn[v]
                coeffs = {}
                for u in set(cp) | set(cn):
                    if u == v:
                        continue
                    k = b * cp.get(u, 0) + a * cn.get(u, 0)
                    if k:
                        coeffs[u] = k
                rest.append((coeffs, False, b * bp + a * bn, h))
        rows = rest
    if not any_strict:
        return True
    # rows are k*e <= d; need some e > 0
    upper = None
    lower = None
    for coeffs, _, d, _ in rows:
        k = coeffs[eps]
        if k > 0:
            upper = d / k if upper is None else min(upper, d / k)
        else:
            lower = d / k if lower is None else max(lower, d / k)
    assert upper is not None  # e <= 1 is always present
    return upper > 0 and (lower is None or lower <= upper)


def _dedupe(rows: List[_Row]) -> List[_Row]:
    best: Dict = {}
    for coeffs, strict, rhs, h in rows:
        key, s = _key(coeffs)
        r = rhs / s
        cur = best.get(key)
        # tighter rhs wins; on ties the strict row wins
        if cur is None or r < cur[0] or (r == cur[0] and strict and not cur[1]):
            best[key] = (r, strict, h, coeffs, rhs)
    return [(coeffs, strict, rhs, h) for (_, strict, h, coeffs, rhs) in best.values()]
