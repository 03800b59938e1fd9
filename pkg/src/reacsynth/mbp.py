"""Model-based projection for linear integer/real arithmetic.

Given ``T(x, y)`` and a model ``m`` of it, :func:`project` returns a y-free
``guard`` with ``m |= guard`` and ``guard => T[y := witnesses]`` valid.  Real
variables are eliminated with an epsilon-free Loos-Weispfenning step guided by
the model; integer variables with unit coefficients by exact bound resolution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from . import logic as L
from .logic import Linear, Sort, Var


class ModelDoesNotSatisfy(Exception):
    pass


@dataclass(frozen=True)
class Projection:
    guard: L.Formula
    witnesses: Dict[Var, object]
    exact: bool = True  # False when a model value had to be pinned


@dataclass(frozen=True)
class _Lit:
    """``lin op 0`` with op in {'<', '<=', '='}."""
    lin: Linear
    op: str

    def holds(self, m) -> bool:
        return L._compare(self.op, self.lin.evaluate(m), 0)

    def to_formula(self) -> L.Formula:
        lin = self.lin
        sort = lin.sort()  # one sort for both sides
        pos = Linear({v: c for v, c in lin.coeffs.items() if c > 0})
        if pos.coeffs:
            rest = Linear({v: -c for v, c in lin.coeffs.items() if c < 0}, -lin.const)
            return L.Atom(self.op, pos.to_term(sort), rest.to_term(sort))
        neg = Linear({v: -c for v, c in lin.coeffs.items()})
        return L.Atom(_FLIP[self.op], neg.to_term(sort), Linear({}, lin.const).to_term(sort))


_FLIP = {"<": ">", "<=": ">=", "=": "="}


def _canon(lin: Linear, op: str):
    """Scale to coprime integer coefficients; returns a _Lit or a bool."""
    if lin.is_constant():
        return L._compare(op, lin.const, 0)
    dens = [c.denominator for c in lin.coeffs.values()] + [lin.const.denominator]
    k = math.lcm(*dens)
    nums = [int(c * k) for c in lin.coeffs.values()]
    g = math.gcd(*nums)
    factor = Fraction(k, g)
    if op == "=":
        first = lin.coeffs[lin.variables()[0]]
        if first < 0:
            factor = -factor
    return _Lit(lin.scale(factor), op)


def _int_canon(lin: Linear, op: str):
    """Integer tightening for literals over Int variables only."""
    lit = _canon(lin, op)
    if isinstance(lit, bool) or not all(v.sort is Sort.INT for v in lit.lin.coeffs):
        return lit
    lin, op = lit.lin, lit.op
    k = math.lcm(*[c.denominator for c in lin.coeffs.values()], lin.const.denominator)
    lin = lin.scale(k)
    if op == "<":
        lin, op = lin + Linear({}, 1), "<="
    g = math.gcd(*[int(c) for c in lin.coeffs.values()])
    if op == "=":
        if lin.const % g != 0:
            return False
        return _Lit(lin.scale(Fraction(1, g)), "=")
    const = Fraction(math.ceil(lin.const / g))
    return _Lit(Linear({v: c / g for v, c in lin.coeffs.items()}, const), "<=")


def _from_atom(a: L.Atom, m) -> _Lit:
    d = L.linearize(a.lhs) - L.linearize(a.rhs)
    op = a.op
    if op == "!=":
        op = "<" if d.evaluate(m) < 0 else ">"
    if op == ">":
        d, op = -d, "<"
    elif op == ">=":
        d, op = -d, "<="
    return _Lit(d, op)


def implicant(f: L.Formula, m: Mapping) -> List[L.Formula]:
    """Literals of an NNF formula that are true in ``m`` and jointly imply it."""
    out: List[L.Formula] = []
    seen = set()

    def walk(g):
        if isinstance(g, L.BoolConst):
            if not g.value:
                raise ModelDoesNotSatisfy("false literal in implicant")
            return
        if isinstance(g, (Var, L.Not, L.Atom)):
            if g not in seen:
                seen.add(g)
                out.append(g)
            return
        if isinstance(g, L.And):
            for a in g.args:
                walk(a)
            return
        if isinstance(g, L.Or):
            for a in g.args:
                if L.eval_formula(a, m):
                    walk(a)
                    return
            raise ModelDoesNotSatisfy("no disjunct holds")
        raise TypeError(f"formula not in NNF: {g}")

    walk(f)
    return out


def project(T: L.Formula, ys: Sequence[Var], m: Mapping, in_nnf: bool = False
            ) -> Projection:
    """Model-based projection of ``ys`` out of ``T`` at model ``m``."""
    f = T if in_nnf else L.nnf(T)
    if not L.eval_formula(f, m):
        raise ModelDoesNotSatisfy("model does not satisfy T")
    yset = set(ys)
    arith: List[_Lit] = []
    bools: List[L.Formula] = []
    for lit in implicant(f, m):
        if isinstance(lit, L.Atom):
            arith.append(_from_atom(lit, m))
        else:
            bools.append(lit)

    steps: List[Tuple[Var, object]] = []
    exact = True
    for y in ys:
        if y.sort is Sort.BOOL:
            val = bool(m.get(y, False))
            bools = [b for b in bools if (b.arg if isinstance(b, L.Not) else b) != y]
            steps.append((y, L.TRUE if val else L.FALSE))
    for y in [v for v in ys if v.sort is Sort.INT] + [v for v in ys if v.sort is Sort.REAL]:
        if y.sort is Sort.INT:
            arith, w, ok = _eliminate_int(y, arith, m)
            exact = exact and ok
        else:
            arith, w = _eliminate_real(y, arith, m)
        steps.append((y, w))

    # back-substitute: each witness only mentions ys eliminated after it
    resolved: Dict[Var, object] = {}
    for y, w in reversed(steps):
        if isinstance(w, Linear):
            for y2, w2 in resolved.items():
                if isinstance(w2, Linear):
                    w = w.substitute(y2, w2)
        resolved[y] = w
    witnesses = {}
    for y in ys:
        w = resolved[y]
        witnesses[y] = w.to_term(y.sort) if isinstance(w, Linear) else w

    parts: Dict[L.Formula, None] = {}
    for b in bools:
        parts.setdefault(b, None)
    for lit in arith:
        c = _canon(lit.lin, lit.op)
        if c is True:
            continue
        if c is False:
            raise AssertionError("projection produced a false literal")
        parts.setdefault(c.to_formula(), None)
    guard = L.conj(list(parts))
    return Projection(guard, witnesses, exact)


def _substitute(lits: List[_Lit], y: Var, w: Linear, m, integral: bool) -> List[_Lit]:
    out = []
    for lit in lits:
        lin = lit.lin.substitute(y, w)
        c = _int_canon(lin, lit.op) if integral else _canon(lin, lit.op)
        if c is True:
            continue
        if c is False:
            raise AssertionError("substitution falsified a literal true in the model")
        out.append(c)
    return out


def _bound_key(b: Linear) -> str:
    return str(b.to_term())


def _eliminate_real(y: Var, lits: List[_Lit], m) -> Tuple[List[_Lit], Linear]:
    with_y = [l for l in lits if l.lin.coeff(y) != 0]
    rest = [l for l in lits if l.lin.coeff(y) == 0]
    if not with_y:
        return rest, Linear()
    for l in with_y:
        if l.op == "=":
            a = l.lin.coeff(y)
            w = l.lin.without(y).scale(Fraction(-1) / a)
            others = [o for o in with_y if o is not l]
            return rest + _substitute(others, y, w, m, False), w
    lowers: List[Tuple[Linear, bool]] = []
    uppers: List[Tuple[Linear, bool]] = []
    for l in with_y:
        a = l.lin.coeff(y)
        bound = l.lin.without(y).scale(Fraction(-1) / a)
        strict = l.op == "<"
        (uppers if a > 0 else lowers).append((bound, strict))
    new: List[_Lit] = []
    lo = hi = None
    if lowers:
        # greatest lower bound in m; strict wins ties
        lo = max(lowers, key=lambda b: (b[0].evaluate(m), b[1], _bound_key(b[0])))
        for b, s in lowers:
            if b is lo[0]:
                continue
            new.append(_Lit(b - lo[0], "<" if (s and not lo[1]) else "<="))
    if uppers:
        hi = min(uppers, key=lambda b: (b[0].evaluate(m), not b[1], _bound_key(b[0])))
        for b, s in uppers:
            if b is hi[0]:
                continue
            new.append(_Lit(hi[0] - b, "<" if (s and not hi[1]) else "<="))
    if lo and hi:
        new.append(_Lit(lo[0] - hi[0], "<" if (lo[1] or hi[1]) else "<="))
        if not lo[1]:
            w = lo[0]
        elif not hi[1]:
            w = hi[0]
        else:
            w = (lo[0] + hi[0]).scale(Fraction(1, 2))
    elif lo:
        w = lo[0] + Linear({}, 1) if lo[1] else lo[0]
    else:
        w = hi[0] - Linear({}, 1) if hi[1] else hi[0]
    out = []
    for l in new:
        c = _canon(l.lin, l.op)
        if c is True:
            continue
        if c is False:
            raise AssertionError("bound resolution falsified a literal true in the model")
        out.append(c)
    return rest + out, w


def _eliminate_int(y: Var, lits: List[_Lit], m) -> Tuple[List[_Lit], Linear, bool]:
    with_y = [l for l in lits if l.lin.coeff(y) != 0]
    rest = [l for l in lits if l.lin.coeff(y) == 0]
    if not with_y:
        return rest, Linear(), True
    norm = []
    for l in with_y:
        c = _int_canon(l.lin, l.op)
        if c is True:
            continue
        if c is False:
            raise AssertionError("integer literal false in the model")
        norm.append(c)
    pure = [l for l in norm if all(v.sort is Sort.INT for v in l.lin.coeffs)]
    for l in pure:
        if l.op == "=" and abs(l.lin.coeff(y)) == 1:
            a = l.lin.coeff(y)
            w = l.lin.without(y).scale(-a)
            others = [o for o in norm if o is not l]
            return rest + _substitute(others, y, w, m, True), w, True
    if len(pure) == len(norm) and all(abs(l.lin.coeff(y)) == 1 and l.op == "<=" for l in norm):
        lowers, uppers = [], []
        for l in norm:
            a = l.lin.coeff(y)
            bound = l.lin.without(y).scale(-a)
            (uppers if a > 0 else lowers).append(bound)
        new: List[_Lit] = []
        lo = hi = None
        if lowers:
            lo = max(lowers, key=lambda b: (b.evaluate(m), _bound_key(b)))
            new.extend(_Lit(b - lo, "<=") for b in lowers if b is not lo)
        if uppers:
            hi = min(uppers, key=lambda b: (b.evaluate(m), _bound_key(b)))
            new.extend(_Lit(hi - b, "<=") for b in uppers if b is not hi)
        if lo is not None and hi is not None:
            new.append(_Lit(lo - hi, "<="))
        w = lo if lo is not None else hi
        out = []
        for l in new:
            c = _int_canon(l.lin, l.op)
            if c is True:
                continue
            if c is False:
                raise AssertionError("integer bound resolution falsified a literal")
            out.append(c)
        return rest + out, w, True
    # non-unit coefficients or mixed sorts: pin y to its model value
    w = Linear({}, Fraction(m[y]))
    return rest + _substitute(norm, y, w, m, False), w, False


def eliminate_all(T: L.Formula, ys: Sequence[Var], solver, max_rounds: int = 100000
                  ) -> L.Formula:
    """Quantifier elimination ``exists ys. T`` by exhaustive projection."""
    f = L.nnf(T)
    xs = [v for v in L.free_vars(f) if v not in set(ys)]
    scope = list(dict.fromkeys(list(xs) + list(ys)))
    from .smt import Sat, Unsat
    guards: List[L.Formula] = []
    with solver.frame(scope):
        solver.add(f)
        for _ in range(max_rounds):
            res = solver.check()
            if isinstance(res, Unsat):
                return L.simplify(L.disj(guards))
            if not isinstance(res, Sat):
                raise RuntimeError(f"solver gave up during elimination: {res}")
            g = project(f, ys, res.model, in_nnf=True).guard
            guards.append(g)
            solver.add(L.neg(g))
    raise RuntimeError("elimination did not converge")
