"""Exact rational linear feasibility.

A sparse-tableau simplex over rationals (gmpy2 ``mpq`` when available)
with Bland's rule.  Free variables are pivoted into the basis first and
never leave; the remaining rows involve only non-negative slacks.
Strict rows share a single slack ``eps`` that is maximised (capped at 1)
after a Phase-I feasibility pass.

Every verdict carries a proof that is re-checked with plain Fractions:
a witness point for feasible systems, a Farkas combination otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .core import HxError, LinearConstraint, Op

try:  # pragma: no cover - exercised implicitly
    from gmpy2 import mpq as _Q

    def _to_frac(q) -> Fraction:
        return Fraction(int(q.numerator), int(q.denominator))
except ImportError:  # pragma: no cover
    _Q = Fraction

    def _to_frac(q) -> Fraction:
        return q


class NotInfeasible(HxError):
    pass


class ScaleExceeded(HxError):
    pass


class SolverInvariantError(HxError):
    """An exact re-check of a solver proof failed; this is a bug."""


@dataclass(frozen=True)
class ConstraintSystem:
    variables: Tuple[str, ...]
    constraints: Tuple[LinearConstraint, ...]

    def __init__(self, variables: Sequence[str], constraints: Sequence[LinearConstraint]):
        object.__setattr__(self, "variables", tuple(variables))
        object.__setattr__(self, "constraints", tuple(constraints))
        known = set(self.variables)
        for c in self.constraints:
            for v in c.variables:
                if v not in known:
                    raise ValueError(f"constraint {c} uses undeclared variable {v}")

    def subset(self, indices) -> "ConstraintSystem":
        return ConstraintSystem(self.variables, [self.constraints[i] for i in indices])

    def __len__(self):
        return len(self.constraints)


@dataclass(frozen=True)
class Feasible:
    witness: Dict[str, Fraction]
    strictness_margin: Fraction

    feasible = True


@dataclass(frozen=True)
class Infeasible:
    # constraint index -> weight; weights of EQ constraints may be negative
    # (that selects the reversed inequality), all others are >= 0
    certificate: Dict[int, Fraction]

    feasible = False


FeasibilityResult = Union[Feasible, Infeasible]


# -- proof checking -------------------------------------------------------------

def check_witness(cs: ConstraintSystem, witness: Mapping[str, Fraction], margin: Fraction = Fraction(0)) -> bool:
    for c in cs.constraints:
        if not c.holds(witness):
            return False
        if margin > 0 and c.op.strict:
            for coeffs, _, rhs in c.normalized():
                lhs = sum((k * witness[v] for v, k in coeffs.items()), Fraction(0))
                if lhs + margin > rhs:
                    return False
    return True


def check_certificate(cs: ConstraintSystem, cert: Mapping[int, Fraction]) -> bool:
    """True iff ``cert`` combines the constraints into ``0 <= negative`` or ``0 < 0``."""
    combo: Dict[str, Fraction] = {}
    rhs = Fraction(0)
    strict_weight = False
    for i, w in cert.items():
        if w == 0:
            continue
        if not 0 <= i < len(cs.constraints):
            return False
        c = cs.constraints[i]
        rows = c.normalized()
        if c.op is Op.EQ:
            coeffs, strict, b = rows[0] if w > 0 else rows[1]
            w = abs(w)
        else:
            if w < 0:
                return False
            coeffs, strict, b = rows[0]
        for v, k in coeffs.items():
            combo[v] = combo.get(v, Fraction(0)) + w * k
        rhs += w * b
        strict_weight = strict_weight or strict
    if any(k != 0 for k in combo.values()):
        return False
    return rhs < 0 or (rhs == 0 and strict_weight)


# -- the simplex --------------------------------------------------------------

class _Tableau:
    """Rows are dicts column -> coefficient with an explicit rhs.

    Column ids: ``("x", j)`` free variables, ``("s", i)`` slack of row i,
    ``"eps"``, ``"seps"`` (slack of eps <= 1), ``("a", i)`` artificials
    and ``("q", i)`` passive tracking columns for equality rows.
    """

    __slots__ = ("rows", "rhs", "basis", "order", "colrows")

    def __init__(self):
        self.rows: List[Dict] = []
        self.rhs: List = []
        self.basis: List = []
        self.order: Dict = {}
        self.colrows: Dict = {}  # column -> set of row indices holding it

    def add_row(self, coeffs: Dict, rhs, basic) -> int:
        r = len(self.rows)
        self.rows.append(coeffs)
        self.rhs.append(rhs)
        self.basis.append(basic)
        for col in coeffs:
            self.colrows.setdefault(col, set()).add(r)
        return r

    def pivot(self, r: int, col, objs: Sequence[Tuple[Dict, list]]) -> None:
        row = self.rows[r]
        piv = row[col]
        if piv != 1:
            inv = 1 / piv
            for k in row:
                row[k] = row[k] * inv
            self.rhs[r] = self.rhs[r] * inv
        rrhs = self.rhs[r]
        colrows = self.colrows
        for i in list(colrows.get(col, ())):
            if i == r:
                continue
            other = self.rows[i]
            f = other[col]
            for k, v in row.items():
                if k in other:
                    nv = other[k] - f * v
                    if nv:
                        other[k] = nv
                    else:
                        del other[k]
                        colrows[k].discard(i)
                else:
                    other[k] = -f * v
                    colrows.setdefault(k, set()).add(i)
            self.rhs[i] = self.rhs[i] - f * rrhs
        for obj, box in objs:
            f = obj.get(col)
            if f:
                for k, v in row.items():
                    nv = obj.get(k, 0) - f * v
                    if nv:
                        obj[k] = nv
                    else:
                        obj.pop(k, None)
                box[0] = box[0] + f * rrhs
        self.basis[r] = col


def _colkey(col):
    # Bland order: slacks by row, then eps, then artificials
    if col == "eps":
        return (1, 0)
    if col == "seps":
        return (2, 0)
    kind, i = col
    return ({"x": 0, "s": 0, "a": 3, "q": 9}[kind], i if kind == "s" else i)


class _Solver:
    def __init__(self, cs: ConstraintSystem):
        self.cs = cs
        self.var_index = {v: j for j, v in enumerate(cs.variables)}

    def solve(self) -> FeasibilityResult:
        cs = self.cs
        T = _Tableau()
        # one tableau row per normalized row; EQ stays a single row
        self.row_src: List[Tuple[int, int]] = []  # (constraint index, sign)
        self.eq_rows = set()
        any_strict = False
        for ci, c in enumerate(cs.constraints):
            coeffs = {("x", self.var_index[v]): _Q(k.numerator, k.denominator) for v, k in c.terms}
            rhs = _Q(c.rhs.numerator, c.rhs.denominator)
            sign = 1
            if c.op in (Op.GE, Op.GT):
                coeffs = {k: -v for k, v in coeffs.items()}
                rhs = -rhs
                sign = -1
            r = len(T.rows)
            if c.op is Op.EQ:
                coeffs[("q", r)] = _Q(1)
                self.eq_rows.add(r)
                T.add_row(coeffs, rhs, None)
            else:
                if c.op.strict:
                    coeffs["eps"] = _Q(1)
                    any_strict = True
                coeffs[("s", r)] = _Q(1)
                T.add_row(coeffs, rhs, ("s", r))
            self.row_src.append((ci, sign))
        eps_row = None
        if any_strict:
            eps_row = T.add_row({"eps": _Q(1), "seps": _Q(1)}, _Q(1), "seps")
        self.T = T
        self.any_strict = any_strict
        self.eps_row = eps_row

        # 1. free variables into the basis, equality rows first
        definitional = set()
        for j in range(len(cs.variables)):
            col = ("x", j)
            holders = [r for r in T.colrows.get(col, ()) if r not in definitional]
            if not holders:
                continue
            holders.sort(key=lambda r: (r not in self.eq_rows, r))
            r = holders[0]
            T.pivot(r, col, ())
            definitional.add(r)
        self.definitional = definitional

        # 2. Phase I
        active = [r for r in range(len(T.rows)) if r not in definitional]
        obj: Dict = {}  # minimise sum of artificials: z = z0 + sum(obj[c] * c)
        zbox = [_Q(0)]
        for r in active:
            basic = T.basis[r]
            if basic is not None and T.rhs[r] >= 0:
                continue
            row = T.rows[r]
            if T.rhs[r] < 0:
                for k in row:
                    row[k] = -row[k]
                T.rhs[r] = -T.rhs[r]
            a = ("a", r)
            row[a] = _Q(1)
            T.colrows.setdefault(a, set()).add(r)
            T.basis[r] = a
            zbox[0] += T.rhs[r]
            for k, v in row.items():
                if k != a:
                    obj[k] = obj.get(k, 0) - v
        obj = {k: v for k, v in obj.items() if v}
        self._run(active, obj, zbox, minimise=True, phase1=True)
        if zbox[0] > 0:
            return self._infeasible_from(obj, zbox[0], phase=1)
        self._drop_artificials(active)

        if not any_strict:
            return self._feasible(_Q(1))
        # 3. maximise eps
        obj2: Dict = {}
        z2 = [_Q(0)]
        # z = eps, expressed in nonbasic columns
        eps_basic = [r for r in active if T.basis[r] == "eps"]
        if eps_basic:
            r = eps_basic[0]
            z2[0] = T.rhs[r]
            for k, v in T.rows[r].items():
                if k != "eps":
                    obj2[k] = -v
        else:
            obj2["eps"] = _Q(1)
        self._run(active, obj2, z2, minimise=False, phase1=False)
        eps_star = z2[0]
        if eps_star > 0:
            return self._feasible(min(eps_star, _Q(1)))
        return self._infeasible_from(obj2, _Q(0), phase=2)

    def _run(self, active, obj, zbox, minimise: bool, phase1: bool) -> None:
        T = self.T
        dead_art = set()
        while True:
            enter = None
            best = None
            for col, v in obj.items():
                if isinstance(col, tuple) and col[0] in ("q", "x"):
                    continue
                if isinstance(col, tuple) and col[0] == "a" and (not phase1 or col in dead_art):
                    continue
                if (v < 0) if minimise else (v > 0):
                    key = _colkey(col)
                    if best is None or key < best:
                        best, enter = key, col
            if enter is None:
                return
            leave = None
            ratio = None
            for r in T.colrows.get(enter, ()):
                if r in self.definitional:
                    continue
                a = T.rows[r][enter]
                if a <= 0:
                    continue
                q = T.rhs[r] / a
                key = (q, _colkey(T.basis[r]))
                if ratio is None or key < ratio:
                    ratio, leave = key, r
            if leave is None:
                raise SolverInvariantError("unbounded direction in a bounded LP")
            old = T.basis[leave]
            if isinstance(old, tuple) and old[0] == "a":
                dead_art.add(old)
            T.pivot(leave, enter, ((obj, zbox),))

    def _drop_artificials(self, active) -> None:
        T = self.T
        for r in active:
            b = T.basis[r]
            if isinstance(b, tuple) and b[0] == "a":
                # basic at level zero: pivot it out on any real column
                cands = [k for k in T.rows[r] if not (isinstance(k, tuple) and k[0] in ("a", "q"))]
                if cands:
                    col = min(cands, key=_colkey)
                    T.pivot(r, col, ())
                else:
                    self.definitional.add(r)  # redundant row, 0 = 0
        for r in range(len(T.rows)):
            row = T.rows[r]
            for k in [k for k in row if isinstance(k, tuple) and k[0] == "a"]:
                del row[k]
                T.colrows[k].discard(r)
        for r in list(active):
            if r in self.definitional:
                active.remove(r)

    def _feasible(self, margin) -> Feasible:
        T = self.T
        values: Dict = {}
        for r, b in enumerate(T.basis):
            if b is not None:
                values[b] = T.rhs[r]
        witness = {}
        for j, v in enumerate(self.cs.variables):
            witness[v] = _to_frac(values.get(("x", j), _Q(0)))
        # basic free variables are read straight off their rows (all nonbasic are 0)
        margin = _to_frac(margin)
        if not check_witness(self.cs, witness, margin if self.any_strict else Fraction(0)):
            raise SolverInvariantError("witness failed exact re-check")
        return Feasible(witness, margin)

    def _infeasible_from(self, obj: Dict, zval, phase: int) -> Infeasible:
        cert: Dict[int, Fraction] = {}
        for col, v in obj.items():
            if isinstance(col, tuple) and col[0] in ("s", "q"):
                r = col[1]
                ci, sign = self.row_src[r]
                w = _to_frac(v) * sign if col[0] == "q" else _to_frac(v)
                if w:
                    cert[ci] = cert.get(ci, Fraction(0)) + w
        cert = {k: v for k, v in cert.items() if v}
        for cand in (cert, {k: -v for k, v in cert.items()}):
            if check_certificate(self.cs, cand):
                return Infeasible(dict(sorted(cand.items())))
        raise SolverInvariantError("Farkas certificate failed exact re-check")


def solve_feasibility(cs: ConstraintSystem) -> FeasibilityResult:
    """Decide ``cs`` exactly; strict rows must hold with a common positive slack."""
    if not cs.constraints:
        return Feasible({v: Fraction(0) for v in cs.variables}, Fraction(1))
    return _Solver(cs).solve()


# -- IIS ----------------------------------------------------------------------

@dataclass(frozen=True)
class IIS:
    indices: Tuple[int, ...]
    constraints: Tuple[LinearConstraint, ...]


def deletion_filter_iis(cs: ConstraintSystem) -> IIS:
    """Deletion filter scanning constraints in index order.

    A constraint that carries no weight in the current Farkas
    certificate can be dropped without a solve: the certificate still
    proves the smaller system infeasible.  The outcome is the same as the
    plain scan.
    """
    res = solve_feasibility(cs)
    if res.feasible:
        raise NotInfeasible("system is feasible; it has no IIS")
    keep = list(range(len(cs.constraints)))
    cert = res.certificate  # keyed by position in cs
    for idx in range(len(cs.constraints)):
        if cert.get(idx, 0) == 0:
            keep.remove(idx)
            continue
        trial = [i for i in keep if i != idx]
        sub = cs.subset(trial)
        r = solve_feasibility(sub)
        if not r.feasible:
            keep = trial
            cert = {trial[k]: w for k, w in r.certificate.items()}
    return IIS(tuple(keep), tuple(cs.constraints[i] for i in keep))


def is_iis(cs: ConstraintSystem, indices: Sequence[int]) -> bool:
    sub = cs.subset(indices)
    if solve_feasibility(sub).feasible:
        return False
    for k in range(len(indices)):
        if not solve_feasibility(cs.subset([i for j, i in enumerate(indices) if j != k])).feasible:
            return False
    return True
