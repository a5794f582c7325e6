"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 parse or validation error,
4 budget exceeded or inconclusive result, 5 internal invariant violation.
"""

from __future__ import annotations

import argparse
import inspect
import json
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from . import report as rep
from .benchmarks import GENERATORS, BenchmarkError, generate_benchmark
from .core import HxError, validate_problem
from .encoding import PathMismatch, check_path
from .explain import INCONCLUSIVE, Budget, explain_unsolvability, reach_subproblem
from .graph import AbstractPath, PathBudgetExceeded, abstract_graph, default_budget, iter_paths
from .lp import SolverInvariantError
from .model_io import ModelDocument, ModelSemanticError, ModelSyntaxError, parse_model, write_model
from .reconcile import ModelPair, PairMismatch, reconcile, updated_human_model
from .subsequence import BudgetExceeded, common_subsequence_fold, dedupe, lcs_multi_exact

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_BUDGET, EXIT_INTERNAL = 0, 2, 3, 4, 5


class InputError(HxError):
    pass


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _positive(text: str) -> int:
    v = _nonneg(text)
    if v == 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _run_flags(sp, jobs=True):
    sp.add_argument("--depth", type=_nonneg, help="override the model's depth bound")
    sp.add_argument("--mode", choices=("walks", "simple"), default="walks")
    sp.add_argument("--budget", type=_positive, help="path cap (default: HXPLAIN_BUDGET or 1000000)")
    if jobs:
        sp.add_argument("--jobs", type=_positive, default=1)


def _out_flags(sp):
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.add_argument("--out", help="write the report to this file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hxplain", description="Unsolvability explanation for linear hybrid automata.")
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sp = sub.add_parser("explain", help="explain why a planning problem has no plan")
    sp.add_argument("--model", required=True)
    sp.add_argument("--exact", action="store_true", help="insist on the exact multi-sequence LCS")
    _run_flags(sp)
    _out_flags(sp)

    sp = sub.add_parser("reconcile", help="reconcile a human model with an agent model")
    sp.add_argument("--human", required=True)
    sp.add_argument("--agent", required=True)
    sp.add_argument("--updated-human", help="also write the updated human model here")
    _run_flags(sp)
    _out_flags(sp)

    sp = sub.add_parser("paths", help="list the bounded paths between two locations")
    sp.add_argument("--model", required=True)
    sp.add_argument("--from", dest="source")
    sp.add_argument("--to", dest="target")
    _run_flags(sp, jobs=False)
    _out_flags(sp)

    sp = sub.add_parser("lcs", help="common subsequence of the bounded path strings")
    sp.add_argument("--model", required=True)
    sp.add_argument("--exact", action="store_true")
    _run_flags(sp, jobs=False)
    _out_flags(sp)

    sp = sub.add_parser("check-path", help="check one abstract path for a run")
    sp.add_argument("--model", required=True)
    sp.add_argument("--path", required=True, help='e.g. "l1,e1,l2"')
    sp.add_argument("--target", choices=("goal", "inv", "none"), default="goal")
    _out_flags(sp)

    sp = sub.add_parser("reach", help="bounded reachability of one location")
    sp.add_argument("--model", required=True)
    sp.add_argument("--loc", required=True)
    _run_flags(sp)
    _out_flags(sp)

    sp = sub.add_parser("gen", help="write a benchmark model")
    sp.add_argument("--bench", required=True, choices=sorted(GENERATORS))
    sp.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                    help="family parameter; lists are comma separated")
    sp.add_argument("--depth", type=_nonneg)
    sp.add_argument("--out", required=True)
    sp.add_argument("--format", choices=("text", "json"), default="text")

    sp = sub.add_parser("validate", help="parse and validate a model file")
    sp.add_argument("--model", required=True)
    sp.add_argument("--format", choices=("text", "json"), default="text")
    return ap


# -- helpers --------------------------------------------------------------------

def _load(path: str) -> ModelDocument:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        return parse_model(text)
    except ModelSyntaxError as exc:
        raise InputError(f"{path}: {exc}") from None
    except ModelSemanticError as exc:
        raise InputError(f"{path}: invalid model: {exc}") from None


def _problem(doc: ModelDocument, args):
    p = doc.problem
    if getattr(args, "depth", None) is not None:
        p = p.with_depth(args.depth)
    return p


def _budget(args) -> int:
    return args.budget if args.budget is not None else default_budget()


def _name(doc: ModelDocument, path: str) -> str:
    name = doc.metadata.get("name")
    return name if isinstance(name, str) else Path(path).stem.split(".")[0]


def _location(p, loc: str) -> str:
    if loc not in p.automaton.locations:
        raise InputError(f"unknown location {loc}")
    return loc


def _coerce(default, text: str):
    if isinstance(default, bool):
        if text.lower() not in ("true", "false"):
            raise InputError(f"expected true or false, got {text!r}")
        return text.lower() == "true"
    if isinstance(default, int):
        try:
            return int(text)
        except ValueError:
            raise InputError(f"expected an integer, got {text!r}") from None
    if isinstance(default, tuple):
        try:
            return tuple(int(v) for v in text.split(",") if v.strip())
        except ValueError:
            raise InputError(f"expected comma separated integers, got {text!r}") from None
    return text


def _gen_params(bench: str, pairs: Sequence[str], depth: Optional[int]) -> dict:
    sig = inspect.signature(GENERATORS[bench])
    params = {}
    for item in pairs:
        key, sep, value = item.partition("=")
        if not sep:
            raise InputError(f"--param expects KEY=VALUE, got {item!r}")
        if key not in sig.parameters:
            raise InputError(f"{bench} has no parameter {key!r}; known: {', '.join(sig.parameters)}")
        params[key] = _coerce(sig.parameters[key].default, value)
    if depth is not None:
        params["depth"] = depth
    return params


# -- commands -------------------------------------------------------------------

def cmd_explain(args):
    doc = _load(args.model)
    p = _problem(doc, args)
    r = explain_unsolvability(p, args.jobs, args.mode, _budget(args), True if args.exact else None,
                              _name(doc, args.model))
    return rep.explain_json(r), (EXIT_BUDGET if r.outcome == INCONCLUSIVE else EXIT_OK)


def cmd_reconcile(args):
    hdoc, adoc = _load(args.human), _load(args.agent)
    human, agent = _problem(hdoc, args), _problem(adoc, args)
    try:
        pair = ModelPair(human, agent)
    except PairMismatch as exc:
        raise InputError(str(exc)) from None
    r = reconcile(pair, args.mode, _budget(args))
    if args.updated_human:
        write_model(updated_human_model(hdoc, r), args.updated_human)
    return rep.reconcile_json(r, _name(hdoc, args.human), _name(adoc, args.agent)), EXIT_OK


def cmd_paths(args):
    doc = _load(args.model)
    p = _problem(doc, args)
    a = p.automaton
    source = _location(p, args.source or a.init_location)
    target = _location(p, args.target or p.goal_location)
    g = abstract_graph(a)
    paths = [q.render() for q in iter_paths(g, source, target, p.depth, args.mode, None, _budget(args))]
    return {"kind": "paths", "version": rep.REPORT_VERSION, "from": source, "to": target, "depth": p.depth,
            "mode": args.mode, "count": len(paths), "paths": paths}, EXIT_OK


def cmd_lcs(args):
    doc = _load(args.model)
    p = _problem(doc, args)
    g = abstract_graph(p.automaton)
    paths = list(iter_paths(g, p.automaton.init_location, p.goal_location, p.depth, args.mode,
                            p.required_visits, _budget(args)))
    strings = dedupe(q.string for q in paths)
    lcs, exact = None, False
    if strings:
        try:
            lcs, exact = lcs_multi_exact(strings), True
        except BudgetExceeded:
            if args.exact:
                raise
            lcs = common_subsequence_fold(strings)
    return {"kind": "lcs", "version": rep.REPORT_VERSION, "common_subsequence": list(lcs or ()),
            "exact": exact, "num_paths": len(paths), "dedup_paths": len(strings)}, EXIT_OK


def cmd_check_path(args):
    doc = _load(args.model)
    p = doc.problem
    try:
        path = AbstractPath.parse(args.path)
    except ValueError as exc:
        raise InputError(f"bad path: {exc}") from None
    if args.target == "goal":
        target = None
    elif args.target == "inv":
        target = p.automaton.locations[_location(p, path.locations[-1])].invariant
    else:
        target = ()
    try:
        res = check_path(p, path, target)
    except PathMismatch as exc:
        raise InputError(str(exc)) from None
    return rep.check_path_json(path, args.target, res), EXIT_OK


def cmd_reach(args):
    doc = _load(args.model)
    p = _problem(doc, args)
    s = reach_subproblem(p, _location(p, args.loc), args.jobs, args.mode, _budget(args))
    out = {"kind": "reach", "version": rep.REPORT_VERSION, **rep.reach_json(args.loc, s)}
    return out, (EXIT_BUDGET if isinstance(s, Budget) else EXIT_OK)


def cmd_gen(args):
    params = _gen_params(args.bench, args.param, args.depth)
    try:
        doc = generate_benchmark(args.bench, **params)
    except (BenchmarkError, ValueError, TypeError) as exc:
        raise InputError(str(exc)) from None
    try:
        write_model(doc, args.out)
    except OSError as exc:
        raise InputError(f"{args.out}: {exc.strerror}") from None
    out = {"kind": "gen", "version": rep.REPORT_VERSION, "bench": args.bench, "out": args.out,
           "params": {k: list(v) if isinstance(v, tuple) else v for k, v in sorted(params.items())}}
    layout = doc.metadata.get("layout")
    if isinstance(layout, str):
        side = _sidecar(args.out)
        try:
            Path(side).write_text(layout, encoding="utf-8")
        except OSError as exc:
            raise InputError(f"{side}: {exc.strerror}") from None
        out["layout"] = side
    return out, EXIT_OK


def _sidecar(model_path: str) -> str:
    p = Path(model_path)
    name = p.name
    for ext in (".lhap.json", ".json"):
        if name.endswith(ext):
            name = name[:-len(ext)]
            break
    return str(p.with_name(name + ".layout.txt"))


def cmd_validate(args):
    try:
        text = Path(args.model).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{args.model}: {exc.strerror}") from None
    try:
        doc = parse_model(text, validate=False)
    except ModelSyntaxError as exc:
        raise InputError(f"{args.model}: {exc}") from None
    issues = validate_problem(doc.problem)
    a = doc.problem.automaton
    out = {"kind": "validate", "version": rep.REPORT_VERSION, "valid": not issues, "issues": issues}
    if not issues:
        out["counts"] = {"variables": len(a.variables), "locations": len(a.locations), "edges": len(a.edges)}
    return out, (EXIT_OK if not issues else EXIT_INPUT)


COMMANDS = {"explain": cmd_explain, "reconcile": cmd_reconcile, "paths": cmd_paths, "lcs": cmd_lcs,
            "check-path": cmd_check_path, "reach": cmd_reach, "gen": cmd_gen, "validate": cmd_validate}


def run_cli(argv: Optional[List[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse has already printed its message
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        report, code = COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    except (PathBudgetExceeded, BudgetExceeded) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_BUDGET
    except (SolverInvariantError, AssertionError) as exc:
        print(f"internal error: {exc}", file=stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - every other failure is ours
        print(f"internal error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_INTERNAL
    # render from the serialized document so text is a function of the JSON alone
    text = rep.render(json.loads(rep.dumps(report)), args.format)
    dest = getattr(args, "out", None) if args.command != "gen" else None
    if dest:
        try:
            Path(dest).write_text(text, encoding="utf-8")
        except OSError as exc:
            print(f"error: {dest}: {exc.strerror}", file=stderr)
            return EXIT_INPUT
    else:
        stdout.write(text)
        stdout.flush()
    return code


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
