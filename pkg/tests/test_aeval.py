import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from reacsynth import aeval
from reacsynth import logic as L
from reacsynth.aeval import AeInvalid, AeQuery, AeValid, RegionOfValidity
from reacsynth.engine import viability_query
from reacsynth.logic import Sort, Var
from reacsynth.smt import Sat, Unsat, Valid

from support import bench_ts, brute_exists, grid, random_query

x = Var("x", Sort.INT)
y = Var("y", Sort.INT)
a = Var("a", Sort.REAL)
z = Var("z", Sort.REAL)


def test_successor_is_valid(solver):
    q = AeQuery((x,), (y,), L.TRUE, L.eq(y, L.add(x, 1)))
    res = aeval.solve(q, solver)
    assert isinstance(res, AeValid)
    assert len(res.skolem.cases) == 1
    assert L.eval_term(res.skolem.cases[0].assignment[y], {x: Fraction(7)}) == 8
    assert isinstance(solver.check_valid(res.region.closed_form), Valid)
    assert aeval.check_skolem(q, res.skolem, solver)


def test_bounded_doubling_is_invalid(solver):
    q = AeQuery((x,), (y,), L.TRUE, L.conj(L.le(x, 5), L.eq(y, L.scale(2, x))))
    res = aeval.solve(q, solver)
    assert isinstance(res, AeInvalid)
    assert isinstance(solver.check_valid(L.Iff(res.region.closed_form, L.le(x, 5))), Valid)
    assert res.counterexample[x] > 5
    assert aeval.check_region_maximal(q, res.region, solver)


def test_counterexample_outside_region(solver):
    T = L.disj(L.conj(L.gt(z, a), L.lt(z, 0)), L.gt(a, 0))
    q = AeQuery((a,), (z,), L.TRUE, T)
    res = aeval.solve(q, solver)
    assert isinstance(res, AeInvalid)
    cex = res.counterexample
    assert L.eval_formula(q.S, cex) and not L.eval_formula(res.region.closed_form, cex)


def test_deleting_a_disjunct_breaks_maximality(solver):
    T = L.disj(L.conj(L.ge(y, 0), L.le(y, 1), L.eq(x, y)), L.conj(L.ge(y, 5), L.le(y, 6), L.eq(x, y)))
    q = AeQuery((x,), (y,), L.TRUE, T)
    res = aeval.solve(q, solver)
    assert len(res.region) >= 2
    assert aeval.check_region_maximal(q, res.region, solver)
    r = res.region
    cut = RegionOfValidity(r.S, r.disjuncts[1:], r.witnesses[1:])
    assert not aeval.check_region_maximal(q, cut, solver)


def test_unsat_precondition_is_vacuous(solver):
    q = AeQuery((x,), (y,), L.conj(L.gt(x, 1), L.lt(x, 0)), L.FALSE)
    res = aeval.solve(q, solver)
    assert isinstance(res, AeValid)
    assert aeval.check_region_maximal(q, res.region, solver)


def test_scopes_checked():
    with pytest.raises(ValueError):
        AeQuery((x,), (x,), L.TRUE, L.TRUE)
    with pytest.raises(ValueError):
        AeQuery((x,), (y,), L.le(y, 0), L.TRUE)


def test_cinderella_first_query_escapes(solver):
    """At F = true some admissible input overflows a bucket."""
    ts = bench_ts("cinderella_c2")
    q = viability_query(ts, L.TRUE)
    res = aeval.solve(q, solver)
    assert isinstance(res, AeInvalid)
    cex = res.counterexample
    assert L.eval_formula(ts.A, cex)
    stuck = L.conj(L.substitute(ts.G_T, {v: L.Const(Fraction(val), v.sort) if v.sort.numeric else
                                         (L.TRUE if val else L.FALSE) for v, val in cex.items()}))
    assert isinstance(solver.check_sat(stuck, ts.next_vars), Unsat)


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.integers(0, 10 ** 6))
def test_random_region_properties(solver, seed):
    q = random_query(random.Random(seed), ints=seed % 3 == 0)
    res = aeval.solve(q, solver)
    for p in res.region.disjuncts:
        assert not set(L.free_vars(p)) & set(q.ys)
    if isinstance(res, AeValid):
        assert aeval.check_skolem(q, res.skolem, solver)
    else:
        cex = res.counterexample
        assert L.eval_formula(q.S, cex) and not L.eval_formula(res.region.closed_form, cex)


@pytest.mark.parametrize("seed", range(10))
def test_region_against_enumeration(solver, seed):
    q = random_query(random.Random(500 + seed), ints=True)
    res = aeval.solve(q, solver)
    for xv in grid(q.xs, -5, 5):
        if L.eval_formula(q.S, xv):
            assert L.eval_formula(res.region.union, xv) == brute_exists(q, xv)
