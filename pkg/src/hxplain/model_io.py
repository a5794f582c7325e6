"""Reading and writing ``.lhap.json`` model documents.

The text form is JSON.  Rationals are written as JSON integers when
integral and as ``"p/q"`` strings otherwise; on input, JSON decimals,
integer literals and ``"p/q"``/decimal strings are all accepted and
converted exactly.  Output is canonical: keys sorted, locations and
edges kept in declaration order (that order drives path enumeration).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Any, Mapping, Optional

from .core import (Affine, Automaton, Edge, HxError, LinearConstraint, Location, Op,
                   PlanningProblem, rat, validate_problem)

FORMAT_VERSION = 1


class ModelSyntaxError(HxError):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


class ModelSemanticError(HxError):
    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("; ".join(self.issues))


@dataclass(frozen=True, eq=False)
class ModelDocument:
    problem: PlanningProblem
    metadata: Mapping[str, Any] = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    def __eq__(self, other):
        return (isinstance(other, ModelDocument) and self.format_version == other.format_version
                and self.problem == other.problem and dict(self.metadata) == dict(other.metadata))

    __hash__ = None


# -- parsing ------------------------------------------------------------------

class _Reader:
    """Walks the decoded JSON tree, keeping a path for error messages."""

    def __init__(self, text: str):
        self.text = text

    def fail(self, path: str, message: str):
        line, col = self._locate(path)
        raise ModelSyntaxError(f"{path}: {message}", line, col)

    def _locate(self, path: str):
        # best effort: position of the last object key named in the path
        key = path.rsplit(".", 1)[-1].split("[", 1)[0]
        if key:
            idx = self.text.find(f'"{key}"')
            if idx >= 0:
                line = self.text.count("\n", 0, idx) + 1
                col = idx - (self.text.rfind("\n", 0, idx) + 1) + 1
                return line, col
        return None, None


def _expect_keys(r: _Reader, obj, path: str, required, optional=()):
    if not isinstance(obj, dict):
        r.fail(path, "expected an object")
    for k in obj:
        if k not in required and k not in optional:
            r.fail(f"{path}.{k}", f"unknown field {k!r}")
    for k in required:
        if k not in obj:
            r.fail(path, f"missing field {k!r}")


def _num(r: _Reader, value, path: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, str, Decimal)):
        r.fail(path, f"expected a number, got {value!r}")
    try:
        return rat(value)
    except (ValueError, TypeError, ArithmeticError):
        r.fail(path, f"not a rational number: {value!r}")


def _str(r: _Reader, value, path: str) -> str:
    if not isinstance(value, str) or not value:
        r.fail(path, "expected a non-empty string")
    return value


def _constraint(r: _Reader, obj, path: str) -> LinearConstraint:
    _expect_keys(r, obj, path, ("lhs", "op", "rhs"))
    lhs = obj["lhs"]
    if not isinstance(lhs, dict):
        r.fail(f"{path}.lhs", "expected an object")
    coeffs = {_str(r, k, f"{path}.lhs"): _num(r, v, f"{path}.lhs.{k}") for k, v in lhs.items()}
    try:
        op = Op.parse(obj["op"]) if isinstance(obj["op"], str) else None
    except ValueError:
        op = None
    if op is None:
        r.fail(f"{path}.op", f"unknown operator {obj['op']!r}")
    return LinearConstraint(coeffs, op, _num(r, obj["rhs"], f"{path}.rhs"))


def _constraints(r: _Reader, lst, path: str):
    if not isinstance(lst, list):
        r.fail(path, "expected a list")
    return [_constraint(r, c, f"{path}[{i}]") for i, c in enumerate(lst)]


def _affine(r: _Reader, obj, path: str) -> Affine:
    if isinstance(obj, (int, str, Decimal)) and not isinstance(obj, bool):
        return Affine.constant(_num(r, obj, path))
    _expect_keys(r, obj, path, (), ("coeffs", "const"))
    coeffs = obj.get("coeffs", {})
    if not isinstance(coeffs, dict):
        r.fail(f"{path}.coeffs", "expected an object")
    return Affine({_str(r, k, path): _num(r, v, f"{path}.coeffs.{k}") for k, v in coeffs.items()},
                  _num(r, obj.get("const", 0), f"{path}.const"))


def _pairs_no_dupes(r: _Reader):
    def hook(pairs):
        out = {}
        for k, v in pairs:
            if k in out:
                r.fail(k, f"duplicate key {k!r}")
            out[k] = v
        return out
    return hook


def parse_model(text: str, validate: bool = True) -> ModelDocument:
    """Parse model text into a ModelDocument, exactly."""
    r = _Reader(text)
    try:
        root = json.loads(text, parse_float=Decimal, object_pairs_hook=_pairs_no_dupes(r))
    except json.JSONDecodeError as exc:
        raise ModelSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    _expect_keys(r, root, "$", ("version", "variables", "locations", "edges", "init", "goal", "depth"),
                 ("required_visits", "metadata"))
    if root["version"] != FORMAT_VERSION:
        r.fail("$.version", f"unsupported format version {root['version']!r}")
    variables = root["variables"]
    if not isinstance(variables, list):
        r.fail("$.variables", "expected a list")
    variables = [_str(r, v, "$.variables") for v in variables]

    locs_obj = root["locations"]
    if not isinstance(locs_obj, dict):
        r.fail("$.locations", "expected an object")
    locations = []
    for lid, body in locs_obj.items():
        path = f"$.locations.{lid}"
        _expect_keys(r, body, path, ("flow",), ("invariant",))
        flow = {}
        if not isinstance(body["flow"], dict):
            r.fail(f"{path}.flow", "expected an object")
        for v, iv in body["flow"].items():
            if not isinstance(iv, list) or len(iv) != 2:
                r.fail(f"{path}.flow.{v}", "expected [lo, hi]")
            flow[v] = (_num(r, iv[0], f"{path}.flow.{v}"), _num(r, iv[1], f"{path}.flow.{v}"))
        locations.append(Location(lid, _constraints(r, body.get("invariant", []), f"{path}.invariant"), flow))

    if not isinstance(root["edges"], list):
        r.fail("$.edges", "expected a list")
    edges = []
    for i, e in enumerate(root["edges"]):
        path = f"$.edges[{i}]"
        _expect_keys(r, e, path, ("id", "source", "target"), ("label", "guard", "reset"))
        reset = e.get("reset", {})
        if not isinstance(reset, dict):
            r.fail(f"{path}.reset", "expected an object")
        edges.append(Edge(_str(r, e["id"], f"{path}.id"), _str(r, e["source"], f"{path}.source"),
                          _str(r, e["target"], f"{path}.target"),
                          _str(r, e["label"], f"{path}.label") if "label" in e else None,
                          _constraints(r, e.get("guard", []), f"{path}.guard"),
                          {v: _affine(r, x, f"{path}.reset.{v}") for v, x in reset.items()}))

    _expect_keys(r, root["init"], "$.init", ("location",), ("constraints",))
    _expect_keys(r, root["goal"], "$.goal", ("location",), ("constraints",))
    depth = root["depth"]
    if not isinstance(depth, int) or isinstance(depth, bool):
        r.fail("$.depth", "expected an integer")
    visits = root.get("required_visits")
    if visits is not None:
        if not isinstance(visits, list):
            r.fail("$.required_visits", "expected a list or null")
        visits = [_str(r, v, "$.required_visits") for v in visits]
    metadata = root.get("metadata", {})
    if not isinstance(metadata, dict):
        r.fail("$.metadata", "expected an object")

    automaton = Automaton(variables, locations, edges, _str(r, root["init"]["location"], "$.init.location"),
                          _constraints(r, root["init"].get("constraints", []), "$.init.constraints"))
    problem = PlanningProblem(automaton, _str(r, root["goal"]["location"], "$.goal.location"),
                              _constraints(r, root["goal"].get("constraints", []), "$.goal.constraints"),
                              depth, visits)
    if validate:
        issues = validate_problem(problem)
        if issues:
            raise ModelSemanticError(issues)
    return ModelDocument(problem, _plain(metadata), FORMAT_VERSION)


def _plain(obj):
    # metadata is free-form; keep decimals exact but as strings
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_plain(v) for v in obj]
    if isinstance(obj, Decimal):
        return str(obj)
    return obj


def read_model(path) -> ModelDocument:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_model(fh.read())


# -- serialization ------------------------------------------------------------

def num_json(q: Fraction):
    return q.numerator if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def constraint_json(c: LinearConstraint) -> dict:
    return {"lhs": {v: num_json(k) for v, k in c.terms}, "op": c.op.value, "rhs": num_json(c.rhs)}


def affine_json(a: Affine):
    if not a.terms:
        return num_json(a.const)
    return {"coeffs": {v: num_json(k) for v, k in a.terms}, "const": num_json(a.const)}


def _sorted(d: dict) -> dict:
    return {k: d[k] for k in sorted(d)}


def document_json(doc: ModelDocument) -> dict:
    p = doc.problem
    a = p.automaton
    locations = {}
    for loc in a.locations.values():
        locations[loc.id] = _sorted({
            "flow": {v: [num_json(lo), num_json(hi)] for v, (lo, hi) in sorted(loc.flow.items())},
            "invariant": [constraint_json(c) for c in loc.invariant],
        })
    edges = [_sorted({"id": e.id, "source": e.source, "target": e.target, "label": e.label,
                      "guard": [constraint_json(c) for c in e.guard],
                      "reset": {v: affine_json(x) for v, x in sorted(e.reset.items())}})
             for e in a.edges]
    out = {
        "depth": p.depth,
        "edges": edges,
        "goal": {"constraints": [constraint_json(c) for c in p.goal_constraints], "location": p.goal_location},
        "init": {"constraints": [constraint_json(c) for c in a.init_constraints], "location": a.init_location},
        "locations": locations,
        "metadata": _canon(doc.metadata),
        "required_visits": None if p.required_visits is None else sorted(p.required_visits),
        "variables": list(a.variables),
        "version": doc.format_version,
    }
    return out


def _canon(obj):
    if isinstance(obj, dict):
        return {k: _canon(obj[k]) for k in sorted(obj)}
    if isinstance(obj, (list, tuple)):
        return [_canon(v) for v in obj]
    return obj


def serialize_model(doc: ModelDocument) -> str:
    """Canonical text for ``doc``; equal documents give identical bytes."""
    return json.dumps(document_json(doc), indent=1, ensure_ascii=False) + "\n"


def write_model(doc: ModelDocument, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_model(doc))
