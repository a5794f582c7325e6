"""Acceptance criteria, one test each.  Every test logs a pass/fail line."""

import io
import json
import random
from fractions import Fraction as F

import oracles
from acceptance_log import criterion
from conftest import BENCH

from hxplain import report as rep
from hxplain.cli import run_cli
from hxplain.core import Automaton, Edge, LinearConstraint, Location, Op, PlanningProblem, check_run
from hxplain.encoding import check_path, encode_path
from hxplain.explain import Reachable, compute_waypoints, explain_unsolvability, reach_subproblem
from hxplain.fm import fm_eliminate_all
from hxplain.graph import (AbstractPath, LocGraph, abstract_graph, disconnecting_articulation_points,
                           enumerate_paths)
from hxplain.lp import check_certificate, check_witness, deletion_filter_iis, solve_feasibility
from hxplain.model_io import read_model
from hxplain.reconcile import (AGENT_FEASIBLE, DISPOSITIONS, PRUNED_BY_E, PRUNED_BY_IP, PRUNED_BY_S, InvalidEdge,
                               ModelPair, agent_iis, discrete_feasibility, human_feasibility, reconcile)
from hxplain.subsequence import (BudgetExceeded, common_subsequence_fold, common_subsequence_pairwise, dedupe,
                                 lcs_multi_exact)

GOLDEN_PATH = "l7,e7_8,l8,e8_9,l9,e9_10,l10,e10_16,l16,e16_22,l22,e22_23,l23,e23_17,l17,e17_18,l18"


def _key(c):
    return c.terms, c.op, c.rhs


def _same(c, d):
    # an equality may come out with both sides negated
    if _key(c) == _key(d):
        return True
    neg = LinearConstraint({v: -k for v, k in d.terms}, d.op, -d.rhs)
    return d.op is Op.EQ and _key(c) == _key(neg)


@criterion(1, "worked LP golden test", 1.0)
def test_c1_worked_lp():
    p = read_model(BENCH / "warehouse_agent.lhap.json").problem
    path = AbstractPath.parse(GOLDEN_PATH)
    enc = encode_path(p, path)
    cons = enc.system.constraints
    # 9 steps, 3 variables in and out, one dwell time each
    assert len(enc.system.variables) == 9 * 7
    expected = [
        LinearConstraint({"x[0].in": 1}, Op.EQ, F(1, 2)),
        LinearConstraint({"y[0].in": 1}, Op.EQ, F(3, 2)),
        LinearConstraint({"c[0].in": 1}, Op.EQ, 10),
        LinearConstraint({"c[0].out": 1, "c[0].in": -1, "t[0]": 2}, Op.EQ, 0),
        LinearConstraint({"c[0].in": 1}, Op.GE, F(1, 10)),
        LinearConstraint({"c[0].out": 1}, Op.GE, F(1, 10)),
        # the recharge reset entering l23
        LinearConstraint({"c[6].in": 1}, Op.EQ, 10),
    ]
    for want in expected:
        assert any(_same(c, want) for c in cons), f"missing {want}"
    res = check_path(p, path)
    assert not res.feasible
    assert res.segment.render() == "l10,e10_16,l16,e16_22,l22"
    return f"{len(cons)} constraints, IIS size {len(res.iis.indices)}, segment {res.segment.render()}"


@criterion(2, "rover explanation", 30.0)
def test_c2_rover():
    doc = read_model(BENCH / "rover.lhap.json")
    p = doc.problem
    a = p.automaton
    assert len(a.locations) == 25 and p.depth == 15
    assert all(c.rhs == 10 for c in a.init_constraints if c.variables == ("c",))
    rates = {a.locations[l].flow["c"][0] for l in a.locations}
    assert rates <= {F(-1), F(-2), F(-3)}
    r = explain_unsolvability(p, name="rover")
    assert " ".join(r.chain.locations) == "l11 l6 l1 l2 l3 l8 l13 l14 l24 l25"
    assert r.explanation_location == "l13"
    assert all(isinstance(s, Reachable) for s in r.statuses[:6])
    return f"|PS| = {r.stats['num_paths']} (soft target 244), exact LCS {r.stats['lcs_exact']}"


@criterion(3, "water-level monitor", 5.0)
def test_c3_water_level():
    p = read_model(BENCH / "water_level.lhap.json").problem
    assert p.depth == 20
    r = explain_unsolvability(p, name="water_level")
    assert len(r.chain) == 3
    assert r.explanation_location == "l6"
    return f"chain {' '.join(r.chain.locations)}, |PS| = {r.stats['num_paths']}"


def _two_route_problem(rng):
    n_a, n_b = rng.randint(1, 4), rng.randint(1, 4)
    route_a = [f"a{i}" for i in range(n_a)]
    route_b = [f"b{i}" for i in range(n_b)]
    names = ["l0"] + route_a + route_b + ["lgoal"]
    arcs = []
    for route in (route_a, route_b):
        chain = ["l0"] + route + ["lgoal"]
        arcs += list(zip(chain, chain[1:]))
    for _ in range(rng.randint(0, 4)):
        arcs.append((rng.choice(names), rng.choice(names)))
    locs = [Location(n, [], {"x": (F(1), F(1))}) for n in names]
    edges = [Edge(f"e{k}", s, t) for k, (s, t) in enumerate(arcs)]
    a = Automaton(["x"], locs, edges, "l0", [LinearConstraint({"x": 1}, Op.EQ, 0)])
    return PlanningProblem(a, "lgoal", (), max(n_a, n_b) + 1)


@criterion(4, "trivial chain for two disjoint routes", 1.0)
def test_c4_trivial_chain():
    rng = random.Random(4)
    for _ in range(40):
        p = _two_route_problem(rng)
        w = compute_waypoints(p)
        assert w.chain.locations == ("l0", "lgoal"), w.chain.locations
    return "40 random graphs"


def _random_seqs(rng, k, max_len, alphabet):
    return [tuple(rng.choice(alphabet) for _ in range(rng.randint(0, max_len))) for _ in range(k)]


@criterion(5, "LCS property suite", 60.0)
def test_c5_lcs_properties():
    rng = random.Random(5)
    brute_checked = pairwise_short = 0
    for i in range(10_000):
        k = rng.randint(1, 3) if i % 2 == 0 else rng.randint(1, 8)
        max_len = 12 if i % 2 == 0 else 20
        seqs = _random_seqs(rng, k, max_len, "abcd"[:rng.randint(1, 4)])
        fold = common_subsequence_fold(seqs)
        assert all(oracles.embeds(fold, s) for s in seqs), (seqs, fold)
        assert len(fold) <= min(len(s) for s in seqs)
        if k <= 3 and max(len(s) for s in seqs) <= 12:
            best = oracles.brute_lcs_length(seqs)
            assert len(lcs_multi_exact(seqs)) == best, seqs
            assert len(fold) == best, (seqs, fold)
            pairwise_short += len(common_subsequence_pairwise(seqs)) < best
            brute_checked += 1

    graphs = with_cuts = too_big = 0
    while graphs < 200:
        n = rng.randint(3, 7)
        vertices, arcs = oracles.random_digraph(rng, n, rng.randint(n, 2 * n + 2))
        g = LocGraph(vertices, arcs)
        s, t = vertices[0], vertices[-1]
        strings = dedupe(q.string for q in enumerate_paths(g, s, t, n - 1, mode="simple"))
        if not strings:
            continue
        try:
            exact = lcs_multi_exact(strings)
        except BudgetExceeded:
            # the exact table does not fit; draw another graph
            too_big += 1
            continue
        graphs += 1
        cuts = oracles.cut_vertices(vertices, arcs, s, t)
        assert disconnecting_articulation_points(g, s, t) == cuts
        assert cuts <= set(exact), (cuts, exact)
        with_cuts += bool(cuts)
    return (f"{brute_checked} brute-force checks; pairwise-only fold short on {pairwise_short}; "
            f"{with_cuts}/200 graphs have cut vertices, {too_big} over the DP budget redrawn")


@criterion(6, "LP oracle equivalence", 120.0)
def test_c6_lp_oracle():
    rng = random.Random(6)
    feasible = 0
    for _ in range(1000):
        cs = oracles.random_system(rng)
        res = solve_feasibility(cs)
        assert res.feasible == fm_eliminate_all(cs), [str(c) for c in cs.constraints]
        if res.feasible:
            feasible += 1
            assert check_witness(cs, res.witness)
        else:
            assert check_certificate(cs, res.certificate)
    return f"{feasible} feasible, {1000 - feasible} infeasible"


@criterion(7, "IIS minimality", 120.0)
def test_c7_iis_minimality():
    rng = random.Random(7)
    done = sizes = 0
    while done < 500:
        cs = oracles.random_system(rng, max_cons=10)
        if fm_eliminate_all(cs):
            continue
        iis = deletion_filter_iis(cs)
        idx = list(iis.indices)
        assert not fm_eliminate_all(cs.subset(idx))
        for k in range(len(idx)):
            assert fm_eliminate_all(cs.subset(idx[:k] + idx[k + 1:]))
        done += 1
        sizes += len(idx)
    return f"mean IIS size {sizes / done:.2f}"


@criterion(8, "reachability oracle", 60.0)
def test_c8_reachability_oracle():
    rng = random.Random(8)
    problems = checks = reachable = skipped = 0
    while problems < 100:
        p = oracles.random_tiny_problem(rng)
        # the oracle solves every path separately; skip the rare dense ones
        if oracles.path_count(p) > 1500:
            skipped += 1
            continue
        problems += 1
        for loc in p.automaton.locations:
            got = reach_subproblem(p, loc)
            want = oracles.exhaustive_reach(p, loc)
            checks += 1
            assert isinstance(got, Reachable) == (want is not None), (loc, want)
            if want is not None:
                reachable += 1
                assert len(got.path.locations) == len(want.locations)
                assert check_run(p, got.run, p.automaton.locations[loc].invariant) == []
    return f"{checks} location checks, {reachable} reachable, {skipped} dense problems skipped"


@criterion(9, "reconciliation golden test", 30.0)
def test_c9_reconciliation():
    human_doc = read_model(BENCH / "warehouse_human.lhap.json")
    agent_doc = read_model(BENCH / "warehouse_agent.lhap.json")
    human, agent = human_doc.problem, agent_doc.problem
    r = reconcile(ModelPair(human, agent))
    assert r.outcome == "Reconciled"

    bad = {(human.automaton.edge(ie.edge).source, human.automaton.edge(ie.edge).target) for ie in r.invalid_edges}
    assert ("l19", "l20") in bad

    oil = {f"l{c}" for c in agent_doc.metadata["cells"]["oil"]}
    assert oil == {l for l, loc in agent.automaton.locations.items() if loc.flow["c"][0] == -4}
    assert any(oil & set(f.segment.path.locations) for f in r.segments)

    # disjoint, total partition of the human path set
    listed = [q for q, _ in r.dispositions]
    assert len(set(listed)) == len(listed)
    assert all(d in DISPOSITIONS for _, d in r.dispositions)
    assert not any(d == AGENT_FEASIBLE for _, d in r.dispositions)
    arcs = [(e.source, e.target, e.id) for e in human.automaton.edges]
    oracle = {AbstractPath(l, e) for l, e in oracles.dfs_paths(
        arcs, human.automaton.init_location, human.goal_location, human.depth)}
    assert set(listed) <= oracle
    removed = {ie.edge for ie in r.invalid_edges}
    assert all(removed & set(q.edges) for q in oracle - set(listed))

    # a pruned path could never have been a valid agent plan
    ag = abstract_graph(agent.automaton)
    rng = random.Random(9)
    pruned = [q for q, d in r.dispositions if d in (PRUNED_BY_E, PRUNED_BY_IP, PRUNED_BY_S)]
    for q in rng.sample(pruned, min(40, len(pruned))):
        ok = (isinstance(discrete_feasibility(q, ag), InvalidEdge)
              or not human_feasibility(q, human).feasible
              or bool(agent_iis(q, agent)))
        assert ok, q.render()
    counts = r.counts()
    return ", ".join(f"{d} {counts[d]}" for d in DISPOSITIONS if counts[d])


def _cli(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_cli(argv, out, err)
    return code, out.getvalue(), err.getvalue()


def _json(argv):
    code, out, err = _cli(argv + ["--format", "json"])
    assert code in (0, 4), err
    return rep.strip_timing(json.loads(out))


@criterion(10, "determinism", 120.0)
def test_c10_determinism(tmp_path):
    rover = str(BENCH / "rover.lhap.json")
    water = str(BENCH / "water_level.lhap.json")
    human = str(BENCH / "warehouse_human.lhap.json")
    agent = str(BENCH / "warehouse_agent.lhap.json")
    parallel = [
        ["explain", "--model", rover],
        ["explain", "--model", water],
        ["explain", "--model", agent],
        ["reach", "--model", rover, "--loc", "l13"],
        ["reach", "--model", agent, "--loc", "l23"],
        ["reconcile", "--human", human, "--agent", agent],
    ]
    serial = [
        ["paths", "--model", water],
        ["lcs", "--model", rover],
        ["check-path", "--model", agent, "--path", GOLDEN_PATH],
        ["validate", "--model", human],
    ]
    runs = 0
    for argv in parallel + serial:
        first = _json(argv)
        assert _json(argv) == first, argv
        text = _cli(argv)[1]
        assert _cli(argv)[1] == text, argv
        runs += 4
        if argv in parallel:
            assert _json(argv + ["--jobs", "8"]) == first, argv
            assert _cli(argv + ["--jobs", "8"])[1] == text, argv
            runs += 2
    blobs = []
    for k in range(2):
        out = tmp_path / f"w{k}.lhap.json"
        assert _cli(["gen", "--bench", "warehouse_agent", "--out", str(out)])[0] == 0
        blobs.append(out.read_bytes())
    assert blobs[0] == blobs[1]
    return f"{runs + 2} runs compared"
