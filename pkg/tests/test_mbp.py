import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from reacsynth import logic as L
from reacsynth import mbp
from reacsynth.logic import Sort, Var
from reacsynth.smt import Sat, Unsat, Valid

from support import brute_exists, grid, random_query

x = Var("x", Sort.REAL)
y = Var("y", Sort.REAL)
n = Var("n", Sort.INT)
k = Var("k", Sort.INT)


def _witness_ok(solver, T, proj, ys):
    ob = L.Implies(proj.guard, L.substitute(T, proj.witnesses))
    return isinstance(solver.check_valid(ob), Valid)


def test_open_interval_midpoint(solver):
    T = L.conj(L.gt(y, x), L.lt(y, L.add(x, 2)))
    p = mbp.project(T, [y], {x: Fraction(0), y: Fraction(1)})
    assert L.simplify(p.guard) == L.TRUE
    assert L.eval_term(p.witnesses[y], {x: Fraction(0)}) == 1
    assert _witness_ok(solver, T, p, [y])


def test_equality_substitution(solver):
    T = L.conj(L.eq(y, L.scale(3, x)), L.ge(y, 6))
    p = mbp.project(T, [y], {x: Fraction(2), y: Fraction(6)})
    assert p.witnesses[y] == L.scale(3, x) or L.linearize(p.witnesses[y]) == L.linearize(L.scale(3, x))
    assert isinstance(solver.check_valid(L.Iff(p.guard, L.ge(L.scale(3, x), 6))), Valid)
    assert _witness_ok(solver, T, p, [y])


def test_upper_bound_pick(solver):
    T = L.le(y, x)
    p = mbp.project(T, [y], {x: Fraction(0), y: Fraction(0)})
    assert L.simplify(p.guard) == L.TRUE
    assert p.witnesses[y] == x
    assert _witness_ok(solver, T, p, [y])


def test_model_must_satisfy():
    with pytest.raises(mbp.ModelDoesNotSatisfy):
        mbp.project(L.lt(y, x), [y], {x: Fraction(0), y: Fraction(1)})


def test_eliminate_linear_equality(solver):
    got = mbp.eliminate_all(L.conj(L.le(x, 5), L.eq(y, L.scale(2, x))), [y], solver)
    assert isinstance(solver.check_valid(L.Iff(got, L.le(x, 5))), Valid)


def test_eliminate_empty_interval(solver):
    got = mbp.eliminate_all(L.conj(L.ge(y, x), L.le(y, L.sub(x, 1))), [y], solver)
    assert isinstance(solver.check_sat(got), Unsat)


def test_eliminate_trivial(solver):
    assert mbp.eliminate_all(L.TRUE, [y], solver) == L.TRUE


def test_integer_unit_bounds(solver):
    T = L.conj(L.ge(k, n), L.le(k, L.add(n, 1)), L.ge(L.add(k, n), 3))
    p = mbp.project(T, [k], {n: Fraction(1), k: Fraction(2)})
    assert p.exact
    assert _witness_ok(solver, T, p, [k])


def test_integer_nonunit_pins(solver):
    T = L.conj(L.eq(L.scale(2, k), n), L.ge(n, 0))
    p = mbp.project(T, [k], {n: Fraction(4), k: Fraction(2)})
    assert _witness_ok(solver, T, p, [k])
    assert L.eval_formula(p.guard, {n: Fraction(4)})


@settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.integers(0, 10 ** 6))
def test_projection_contract(solver, seed):
    """Guard holds at the model and implies T with the witnesses plugged in."""
    q = random_query(random.Random(seed), ints=seed % 2 == 1)
    res = solver.check_sat(q.T, list(q.xs) + list(q.ys))
    if not isinstance(res, Sat):
        return
    p = mbp.project(q.T, q.ys, res.model)
    assert not set(L.free_vars(p.guard)) & set(q.ys)
    assert L.eval_formula(p.guard, res.model)
    assert _witness_ok(solver, q.T, p, q.ys)


@pytest.mark.parametrize("seed", range(12))
def test_elimination_against_enumeration(solver, seed):
    q = random_query(random.Random(seed), ints=True)
    got = mbp.eliminate_all(q.T, q.ys, solver)
    for xv in grid(q.xs, -4, 4):
        assert L.eval_formula(got, xv) == brute_exists(q, xv), xv
