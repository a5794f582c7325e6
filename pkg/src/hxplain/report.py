"""JSON report documents for the command line, and their text rendering.

Every text rendering is computed from the JSON document alone, so the two
formats can never disagree.
"""

from __future__ import annotations

import json
from importlib import resources
from typing import List

from .core import Plan, Run
from .encoding import FeasibleRun, InfeasiblePath, Tag
from .explain import Budget, ExplanationReport, Reachable
from .graph import AbstractPath
from .lp import IIS
from .model_io import num_json
from .reconcile import DISPOSITIONS, ReconciliationReport

REPORT_VERSION = 1
TIMING_FIELDS = ("elapsed_ms",)


def plan_json(plan: Plan) -> dict:
    return {"steps": [{"time": num_json(t), "action": a} for t, a in plan.steps],
            "makespan": num_json(plan.makespan)}


def run_json(run: Run) -> list:
    return [{"location": st.location,
             "entry": {v: num_json(q) for v, q in sorted(st.entry.items())},
             "dwell": num_json(st.dwell),
             "exit": {v: num_json(q) for v, q in sorted(st.exit.items())},
             "edge": st.edge}
            for st in run.steps]


def tag_json(t: Tag) -> dict:
    return {"step": t.step, "kind": t.kind, "detail": t.detail}


def iis_json(iis: IIS, tags) -> list:
    return [{"index": i, "constraint": str(c), **tag_json(t)}
            for i, c, t in zip(iis.indices, iis.constraints, tags)]


def witness_json(path: AbstractPath, plan: Plan) -> dict:
    return {"path": path.render(), "plan": plan_json(plan)}


def reach_json(loc: str, s) -> dict:
    out = {"loc": loc, "outcome": s.outcome, "paths_checked": s.paths_checked}
    if isinstance(s, Reachable):
        out["witness"] = witness_json(s.path, s.plan)
    if isinstance(s, Budget):
        out["reason"] = s.reason
    return out


def explain_json(r: ExplanationReport) -> dict:
    locs = r.chain.locations if r.chain is not None else ()
    out = {
        "kind": "explain",
        "version": REPORT_VERSION,
        "problem": r.problem,
        "chain": list(locs),
        "statuses": [reach_json(l, s) for l, s in zip(locs, r.statuses)],
        "outcome": r.outcome,
        "feasible_waypoints": {"before_explanation": r.feasible_before_explanation, "total": r.feasible_waypoints},
        "stats": dict(r.stats),
    }
    if r.explanation is not None:
        out["explanation"] = r.explanation_location
        out["explanation_index"] = r.explanation
    if r.goal_status is not None:
        goal = r.chain.locations[-1] if r.chain is not None else ""
        out["goal_status"] = reach_json(goal, r.goal_status)
    return out


def pattern_json(pt) -> dict:
    return {"incoming": pt.incoming, "locations": list(pt.locations), "edges": list(pt.edges),
            "at_start": pt.at_start, "at_end": pt.at_end}


def reconcile_json(r: ReconciliationReport, human: str = "", agent: str = "") -> dict:
    out = {
        "kind": "reconcile",
        "version": REPORT_VERSION,
        "human": human,
        "agent": agent,
        "outcome": r.outcome,
        "invalid_edges": [{"edge": ie.edge, "position": ie.position, "path": ie.path.render()}
                          for ie in r.invalid_edges],
        "human_infeasible": [p.render() for p in r.human_infeasible],
        "agent_infeasible": [p.render() for p in r.agent_infeasible],
        "segments": [{"path": f.path.render(), "start": f.segment.start, "end": f.segment.end,
                      "segment": f.segment.render(), "iis": iis_json(f.iis, f.tags),
                      "pattern": pattern_json(f.pattern)}
                     for f in r.segments],
        "dispositions": [{"path": p.render(), "disposition": d} for p, d in r.dispositions],
        "counts": r.counts(),
        "updated_human": {"removed_edges": [ie.edge for ie in r.invalid_edges],
                          "unusable_segments": sorted({f.segment.render() for f in r.segments})},
        "stats": dict(r.stats),
    }
    if r.witness is not None:
        out["witness"] = witness_json(*r.witness)
    return out


def check_path_json(path: AbstractPath, target: str, res) -> dict:
    out = {"kind": "check-path", "version": REPORT_VERSION, "path": path.render(), "target": target,
           "feasible": res.feasible}
    if isinstance(res, FeasibleRun):
        out["plan"] = plan_json(res.plan)
        out["run"] = run_json(res.run)
        out["strictness_margin"] = num_json(res.margin)
    elif isinstance(res, InfeasiblePath):
        out["segment"] = {"start": res.segment.start, "end": res.segment.end, "path": res.segment.render()}
        out["iis"] = iis_json(res.iis, res.tags)
    return out


def strip_timing(obj):
    """Copy of a report without wall-clock fields."""
    if isinstance(obj, dict):
        return {k: strip_timing(v) for k, v in obj.items() if k not in TIMING_FIELDS}
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj


def dumps(report: dict) -> str:
    return json.dumps(report, indent=1, sort_keys=True, ensure_ascii=False) + "\n"


def load_schema() -> dict:
    text = resources.files("hxplain").joinpath("report.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


# -- text rendering -------------------------------------------------------------

def _plan_lines(plan: dict, indent: str = "  ") -> List[str]:
    lines = [f"{indent}{s['time']}: {s['action']}" for s in plan["steps"]]
    lines.append(f"{indent}makespan: {plan['makespan']}")
    return lines


def _iis_lines(iis: list, indent: str = "  ") -> List[str]:
    out = []
    for c in iis:
        detail = f" {c['detail']}" if c["detail"] else ""
        out.append(f"{indent}[{c['step']} {c['kind']}{detail}] {c['constraint']}")
    return out


def _explain_text(r: dict) -> List[str]:
    lines = [f"problem: {r['problem']}" if r["problem"] else "problem: -",
             f"outcome: {r['outcome']}"]
    if r["chain"]:
        lines.append("chain: " + " ".join(r["chain"]))
    for s in r["statuses"]:
        lines.append(f"  {s['loc']}: {s['outcome']} ({s['paths_checked']} paths checked)")
    if "goal_status" in r:
        g = r["goal_status"]
        lines.append(f"goal: {g['outcome']} ({g['paths_checked']} paths checked)")
    if "explanation" in r:
        lines.append(f"explanation: {r['explanation']}")
    fw = r["feasible_waypoints"]
    lines.append(f"feasible waypoints: {fw['before_explanation']} before the explanation, {fw['total']} in total")
    st = r["stats"]
    lines.append(f"paths: {st['num_paths']} ({st['dedup_paths']} distinct strings), "
                 f"lcs: {'exact' if st['lcs_exact'] else 'fold'}"
                 f"{'' if st['lcs_locally_maximal'] else ' (not locally maximal)'}")
    return lines


def _reconcile_text(r: dict) -> List[str]:
    lines = [f"outcome: {r['outcome']}"]
    for ie in r["invalid_edges"]:
        lines.append(f"invalid edge: {ie['edge']} (position {ie['position']} of {ie['path']})")
    for seg in r["updated_human"]["unusable_segments"]:
        lines.append(f"unusable segment: {seg}")
    lines.append("dispositions: " + ", ".join(f"{k} {r['counts'][k]}" for k in DISPOSITIONS))
    if "witness" in r:
        lines.append(f"agent-feasible human path: {r['witness']['path']}")
        lines.extend(_plan_lines(r["witness"]["plan"]))
    return lines


def _check_path_text(r: dict) -> List[str]:
    lines = [f"path: {r['path']}", f"target: {r['target']}"]
    if r["feasible"]:
        lines.append("feasible")
        lines.extend(_plan_lines(r["plan"]))
    else:
        seg = r["segment"]
        lines.append(f"infeasible; IIS segment {seg['path']} (steps {seg['start']}..{seg['end']})")
        lines.extend(_iis_lines(r["iis"]))
    return lines


def _reach_text(r: dict) -> List[str]:
    lines = [f"{r['loc']}: {r['outcome']} ({r['paths_checked']} paths checked)"]
    if "witness" in r:
        lines.append(f"  path: {r['witness']['path']}")
        lines.extend(_plan_lines(r["witness"]["plan"]))
    if "reason" in r:
        lines.append(f"  {r['reason']}")
    return lines


def _paths_text(r: dict) -> List[str]:
    return r["paths"] + [f"{r['count']} paths"]


def _lcs_text(r: dict) -> List[str]:
    return [" ".join(r["common_subsequence"]),
            f"{'exact' if r['exact'] else 'fold'} ({r['num_paths']} paths, {r['dedup_paths']} distinct strings)"]


def _validate_text(r: dict) -> List[str]:
    if r["valid"]:
        c = r["counts"]
        return [f"valid: {c['variables']} variables, {c['locations']} locations, {c['edges']} edges"]
    return ["invalid"] + [f"  {i}" for i in r["issues"]]


def _gen_text(r: dict) -> List[str]:
    lines = [f"wrote {r['bench']} to {r['out']}"]
    if "layout" in r:
        lines.append(f"wrote layout to {r['layout']}")
    return lines


_TEXT = {"explain": _explain_text, "reconcile": _reconcile_text, "check-path": _check_path_text,
         "reach": _reach_text, "paths": _paths_text, "lcs": _lcs_text, "validate": _validate_text,
         "gen": _gen_text}


def render_text(report: dict) -> str:
    return "\n".join(_TEXT[report["kind"]](report)) + "\n"


def render(report: dict, fmt: str) -> str:
    return dumps(report) if fmt == "json" else render_text(report)
