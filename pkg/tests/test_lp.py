import itertools
import random
from fractions import Fraction as F

import pytest

from hxplain.core import LinearConstraint, Op
from hxplain.fm import fm_eliminate_all
from hxplain.lp import (ConstraintSystem, NotInfeasible, ScaleExceeded, check_certificate, check_witness,
                        deletion_filter_iis, is_iis, solve_feasibility)

import oracles
from toys import eq, ge, le


def lt(v, r):
    return LinearConstraint({v: 1}, Op.LT, r)


def gt(v, r):
    return LinearConstraint({v: 1}, Op.GT, r)


def system(*cons):
    names = sorted({v for c in cons for v in c.variables})
    return ConstraintSystem(names, list(cons))


def test_feasible_interval():
    res = solve_feasibility(system(ge("x", 1), le("x", 2)))
    assert res.feasible
    assert 1 <= res.witness["x"] <= 2


def test_infeasible_interval_certificate():
    cs = system(ge("x", 1), le("x", 0))
    res = solve_feasibility(cs)
    assert not res.feasible
    assert res.certificate == {0: 1, 1: 1}
    assert check_certificate(cs, res.certificate)


@pytest.mark.parametrize("cons,feasible", [
    ((lt("x", 1), gt("x", 1)), False),
    ((lt("x", 1), ge("x", 1)), False),
    ((lt("x", 1), ge("x", 0)), True),
    ((lt("x", 1),), True),
    ((eq("x", 1), lt("x", 1)), False),
])
def test_strictness(cons, feasible):
    cs = system(*cons)
    res = solve_feasibility(cs)
    assert res.feasible == feasible == fm_eliminate_all(cs)
    if feasible:
        assert res.strictness_margin > 0
        assert check_witness(cs, res.witness, res.strictness_margin)
    else:
        assert check_certificate(cs, res.certificate)


def test_empty_system():
    assert solve_feasibility(ConstraintSystem(["x"], [])).feasible
    assert fm_eliminate_all(ConstraintSystem([], []))


def test_equalities_and_free_variables():
    cs = system(LinearConstraint({"x": 1, "y": 1}, Op.EQ, 3), LinearConstraint({"x": 1, "y": -1}, Op.EQ, -1),
                ge("x", -5))
    res = solve_feasibility(cs)
    assert res.feasible and res.witness == {"x": 1, "y": 2}


def test_negative_values_are_found():
    res = solve_feasibility(system(le("x", -3), ge("x", F(-7, 2))))
    assert res.feasible and F(-7, 2) <= res.witness["x"] <= -3


def test_certificate_checker_rejects_bogus_proofs():
    cs = system(ge("x", 1), le("x", 2))
    assert not check_certificate(cs, {0: 1, 1: 1})
    assert not check_certificate(cs, {0: -1})
    assert not check_certificate(cs, {5: 1})


def test_random_systems_against_fourier_motzkin():
    rng = random.Random(21)
    for _ in range(300):
        cs = oracles.random_system(rng, max_vars=4, max_cons=8, strict=0.3, eq=0.2)
        res = solve_feasibility(cs)
        assert res.feasible == fm_eliminate_all(cs)
        if res.feasible:
            assert check_witness(cs, res.witness, res.strictness_margin)
        else:
            assert check_certificate(cs, res.certificate)


def test_fm_scale_guard():
    many = [ge(f"x{i}", 0) for i in range(9)]
    with pytest.raises(ScaleExceeded):
        fm_eliminate_all(system(*many))


def test_iis_drops_irrelevant_constraint():
    cs = system(ge("x", 1), le("x", 0), ge("y", 0))
    assert deletion_filter_iis(cs).indices == (0, 1)


def test_iis_keeps_a_minimal_triangle():
    cs = system(LinearConstraint({"x": 1, "y": 1}, Op.LE, 1), ge("x", 1), ge("y", 1))
    iis = deletion_filter_iis(cs)
    assert iis.indices == (0, 1, 2)
    for k in range(3):
        assert fm_eliminate_all(cs.subset([i for i in range(3) if i != k]))


def test_iis_with_two_disjoint_cores():
    cs = system(ge("x", 1), ge("y", 2), le("y", 1), le("x", 0), ge("z", 0), le("z", 5))
    iis = deletion_filter_iis(cs)
    assert set(iis.indices) in ({0, 3}, {1, 2})
    assert is_iis(cs, iis.indices)
    # exactly the two cores are IISes among all subsets
    cores = [set(s) for k in range(1, 7) for s in itertools.combinations(range(6), k) if is_iis(cs, s)]
    assert sorted(map(sorted, cores)) == [[0, 3], [1, 2]]


def test_iis_of_feasible_system_is_an_error():
    with pytest.raises(NotInfeasible):
        deletion_filter_iis(system(ge("x", 0)))


def test_iis_minimal_on_random_systems():
    rng = random.Random(22)
    done = 0
    while done < 100:
        cs = oracles.random_system(rng, max_vars=4, max_cons=8)
        if solve_feasibility(cs).feasible:
            continue
        idx = list(deletion_filter_iis(cs).indices)
        assert not fm_eliminate_all(cs.subset(idx))
        assert all(fm_eliminate_all(cs.subset(idx[:k] + idx[k + 1:])) for k in range(len(idx)))
        done += 1


def test_degenerate_cycling_instance_terminates():
    # a classic degenerate system; Bland's rule must not cycle
    cons = [
        LinearConstraint({"a": F(1, 4), "b": -8, "c": -1, "d": 9}, Op.LE, 0),
        LinearConstraint({"a": F(1, 2), "b": -12, "c": F(-1, 2), "d": 3}, Op.LE, 0),
        LinearConstraint({"c": 1}, Op.LE, 1),
        ge("a", 0), ge("b", 0), ge("c", 0), ge("d", 0),
        LinearConstraint({"a": F(3, 4), "b": -20, "c": F(1, 2), "d": -6}, Op.GT, F(1, 20)),
    ]
    cs = system(*cons)
    assert solve_feasibility(cs).feasible == fm_eliminate_all(cs)
