"""Lowering of a checked contract to a symbolic transition system.

A transition reads the pre-transition state ``s``, the environment input
``i`` and the successor ``s'``.  Equation-defined streams are read at ``s'``
(their new value), ``pre x`` at ``s``.  Controller choices without an
equation are read at ``s``: the value committed on the previous step.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from . import logic as L
from .logic import Sort, Var
from .lustre.ast import (Arrow, Binary, BoolLit, Call, IfThenElse, Ident, Num, Pre,
                         Unary)
from .lustre.elaborate import CheckedContract
from .lustre.parser import LustreError
from . import smtlib

PRIME = "'"


class EncodingError(LustreError):
    pass


def primed(v: Var) -> Var:
    return Var(v.name + PRIME, v.sort)


@dataclass
class TransitionSystem:
    name: str
    state_vars: Tuple[Var, ...]
    input_vars: Tuple[Var, ...]
    next_vars: Tuple[Var, ...]
    A: L.Formula
    G_I: L.Formula
    G_T: L.Formula
    property: Optional[Var] = None
    free_vars: Tuple[Var, ...] = ()  # controller choices without an equation

    def __post_init__(self):
        self.state_vars = tuple(self.state_vars)
        self.input_vars = tuple(self.input_vars)
        self.next_vars = tuple(self.next_vars)
        self.next_of = dict(zip(self.state_vars, self.next_vars))
        self.current_of = dict(zip(self.next_vars, self.state_vars))

    def prime(self, f):
        return L.substitute(f, self.next_of)

    def unprime(self, f):
        return L.substitute(f, self.current_of)

    def check_scopes(self):
        s, i, n = set(self.state_vars), set(self.input_vars), set(self.next_vars)
        if len(self.next_vars) != len(self.state_vars) or len(n) != len(s):
            raise ValueError("next variables are not a bijection of the state")
        for name, f, allowed in (("A", self.A, s | i), ("G_I", self.G_I, s),
                                 ("G_T", self.G_T, s | i | n)):
            stray = [v.name for v in L.free_vars(f) if v not in allowed]
            if stray:
                raise ValueError(f"{name} mentions out-of-scope variables {stray}")

    def dump(self) -> str:
        """(A, G_I, G_T) as SMT-LIB define-fun text."""
        si = list(self.state_vars) + list(self.input_vars)
        lines = [f"; transition system for node {self.name}",
                 f"; state: {' '.join(v.name for v in self.state_vars)}",
                 f"; input: {' '.join(v.name for v in self.input_vars)}",
                 smtlib.define_fun("A", si, self.A),
                 smtlib.define_fun("G_I", self.state_vars, self.G_I),
                 smtlib.define_fun("G_T", si + list(self.next_vars), self.G_T)]
        return "\n".join(lines) + "\n"


class _Translator:
    def __init__(self, cc: CheckedContract, vars_: Dict[str, Var]):
        self.cc = cc
        self.vars = vars_
        self.inputs = set(cc.inputs)
        self.free = set(cc.free)
        self.inlined: Dict[str, object] = {}

    def fail(self, code, msg, e):
        raise EncodingError(code, msg, getattr(e, "span", None))

    def ref(self, name: str, mode: str, e):
        v = self.vars[name]
        if name in self.inputs:
            if mode == "init":
                self.fail("InitialDependsOnInput",
                          f"input '{name}' is read at the initial instant, before any input exists", e)
            return v
        if name in self.free:
            return v
        if mode == "init":
            return v
        if mode == "trans":
            return primed(v)
        # assumptions see only (s, i): inline the stream's current-instant definition
        if name not in self.inlined:
            self.inlined[name] = self.tr(self.cc.defined[name], "assert")
        return self.inlined[name]

    def tr(self, e, mode: str):
        if isinstance(e, Num):
            return L.Const(e.value, Sort.REAL if e.is_real else Sort.INT)
        if isinstance(e, BoolLit):
            return L.TRUE if e.value else L.FALSE
        if isinstance(e, Ident):
            return self.ref(e.name, mode, e)
        if isinstance(e, Pre):
            if mode == "init":
                self.fail("IllegalPre", "pre at the initial instant", e)
            name = e.arg.name
            if name in self.inputs:
                self.fail("InitialDependsOnInput", f"pre of input '{name}'", e)
            return self.vars[name]
        if isinstance(e, Arrow):
            return self.tr(e.init if mode == "init" else e.step, mode)
        if isinstance(e, Unary):
            a = self.tr(e.arg, mode)
            return L.Not(a) if e.op == "not" else L.Neg(a)
        if isinstance(e, IfThenElse):
            c = self.tr(e.cond, mode)
            a = self.tr(e.then, mode)
            b = self.tr(e.other, mode)
            if L.is_formula(a):
                return L.disj(L.conj(c, a), L.conj(L.neg(c), b))
            return L.Ite(c, a, b)
        if isinstance(e, Binary):
            return self.binary(e, mode)
        if isinstance(e, Call):
            raise TypeError("node calls must be inlined before encoding")
        raise TypeError(f"not an expression: {e!r}")

    def binary(self, e: Binary, mode: str):
        a = self.tr(e.lhs, mode)
        b = self.tr(e.rhs, mode)
        op = e.op
        if op == "and":
            return L.conj(a, b)
        if op == "or":
            return L.disj(a, b)
        if op == "xor":
            return L.Not(L.Iff(a, b))
        if op == "=>":
            return L.Implies(a, b)
        if op in ("=", "<>") and L.is_formula(a):
            return L.Iff(a, b) if op == "=" else L.Not(L.Iff(a, b))
        if op in ("<", "<=", ">", ">=", "=", "<>"):
            return L.Atom("!=" if op == "<>" else op, a, b)
        if op == "+":
            return L.Add((a, b))
        if op == "-":
            return L.Add((a, L.Neg(b)))
        if op == "*":
            ka, kb = _constant(a), _constant(b)
            if kb is not None:
                return L.Scale(kb, a)
            if ka is not None:
                return L.Scale(ka, b)
            self.fail("NonLinearTerm", "product of two non-constant terms", e)
        if op == "/":
            kb = _constant(b)
            if kb is None or kb == 0:
                self.fail("NonLinearTerm", "division by a non-constant", e)
            return L.Scale(1 / kb, a)
        self.fail("NonLinearTerm", f"'{op}' with a non-constant operand", e)


def _constant(t) -> Optional[Fraction]:
    try:
        lin = L.linearize(t)
    except L.NonLinear:
        return None
    return lin.const if lin.is_constant() else None


def observed_at_start(cc: CheckedContract) -> set:
    """Defined streams whose first value can matter.

    That is the property, anything read through ``pre`` (at the second
    instant it yields the first value), and whatever the first value of those
    depends on.  Other streams are left unconstrained in G_I.
    """
    from .lustre.ast import walk
    todo = [cc.property]
    for e in list(cc.defined.values()) + list(cc.asserts):
        todo.extend(x.arg.name for x in walk(e) if isinstance(x, Pre))
    seen = set()
    while todo:
        n = todo.pop()
        if n in seen or n not in cc.defined:
            continue
        seen.add(n)
        todo.extend(x.name for x in walk(_initial_branch(cc.defined[n])) if isinstance(x, Ident))
    return seen


def _initial_branch(e):
    """The expression as read at the first instant (left operands of '->')."""
    if isinstance(e, Arrow):
        return _initial_branch(e.init)
    if isinstance(e, Pre):
        return e  # never evaluated at the first instant
    if isinstance(e, (Num, BoolLit, Ident)):
        return e
    if isinstance(e, Unary):
        return Unary(e.op, _initial_branch(e.arg))
    if isinstance(e, Binary):
        return Binary(e.op, _initial_branch(e.lhs), _initial_branch(e.rhs))
    if isinstance(e, IfThenElse):
        return IfThenElse(*(_initial_branch(x) for x in (e.cond, e.then, e.other)))
    raise TypeError(f"unexpected expression {e!r}")


def _eq(v, rhs):
    if v.sort is Sort.BOOL:
        return L.Iff(v, rhs)
    return L.Atom("=", v, rhs)


def encode(cc: CheckedContract) -> TransitionSystem:
    vars_ = {n: Var(n, s) for n, s in cc.sorts.items()}
    tr = _Translator(cc, vars_)
    state = [vars_[n] for n in cc.state]
    inputs = [vars_[n] for n in cc.inputs]
    init_parts, trans_parts, assume = [], [], []
    observed = observed_at_start(cc)
    for name, rhs in cc.defined.items():
        v = vars_[name]
        if name in observed:
            init_parts.append(_eq(v, tr.tr(rhs, "init")))
        trans_parts.append(_eq(primed(v), tr.tr(rhs, "trans")))
    for a in cc.asserts:
        assume.append(tr.tr(a, "assert"))
    p = vars_[cc.property]
    init_parts.append(p)
    trans_parts.append(primed(p))
    ts = TransitionSystem(
        name=cc.name,
        state_vars=state, input_vars=inputs, next_vars=[primed(v) for v in state],
        A=L.lift_ite(L.conj(assume)), G_I=L.lift_ite(L.conj(init_parts)),
        G_T=L.lift_ite(L.conj(trans_parts)), property=p,
        free_vars=tuple(vars_[n] for n in cc.free))
    ts.check_scopes()
    return ts


# ---------------------------------------------------------------- finite domains

@dataclass(frozen=True)
class NotFinite:
    reason: str


FiniteDomainMap = Dict[Var, Tuple[object, ...]]


def _interval(atom: L.Atom, v: Var) -> Tuple[Optional[Fraction], Optional[Fraction]]:
    try:
        lin = L.linearize(atom.lhs) - L.linearize(atom.rhs)
    except L.NonLinear:
        return None, None
    a = lin.coeff(v)
    bound = -lin.const / a
    op = atom.op
    if a < 0:
        op = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "=": "=", "!=": "!="}[op]
    if op == "=":
        return bound, bound
    if op == "<=":
        return None, bound
    if op == "<":
        return None, bound - 1 if bound.denominator == 1 else Fraction(math.floor(bound))
    if op == ">=":
        return bound, None
    if op == ">":
        return bound + 1 if bound.denominator == 1 else Fraction(math.ceil(bound)), None
    return None, None


def _flatten(f):
    if isinstance(f, L.And):
        out = []
        for a in f.args:
            out.extend(_flatten(a))
        return out
    return [f]


def _top_conjuncts(f):
    """Top-level conjuncts, looking through ``p & (p <=> body)`` definitions."""
    parts = _flatten(f)
    asserted = {p for p in parts if isinstance(p, Var)}
    k = 0
    while k < len(parts):
        p = parts[k]
        if isinstance(p, L.Iff) and isinstance(p.lhs, Var) and p.lhs in asserted:
            for q in _flatten(p.rhs):
                if q not in parts:
                    parts.append(q)
                    if isinstance(q, Var):
                        asserted.add(q)
        k += 1
    return parts


def _bounds(f: L.Formula) -> Dict[Var, List[Optional[Fraction]]]:
    out: Dict[Var, List[Optional[Fraction]]] = {}
    for c in _top_conjuncts(f):
        if not isinstance(c, L.Atom):
            continue
        vs = L.free_vars(c)
        if len(vs) != 1 or vs[0].sort is not Sort.INT:
            continue
        lo, hi = _interval(c, vs[0])
        cur = out.setdefault(vs[0], [None, None])
        if lo is not None:
            lo = Fraction(math.ceil(lo))
            cur[0] = lo if cur[0] is None else max(cur[0], lo)
        if hi is not None:
            hi = Fraction(math.floor(hi))
            cur[1] = hi if cur[1] is None else min(cur[1], hi)
    return out


def bounded_domains(ts: TransitionSystem, max_values: int = 10 ** 6
                    ) -> Union[FiniteDomainMap, NotFinite]:
    """Per-variable finite domains from interval atoms conjoined at top level.

    A state variable needs bounds both initially (G_I) and after every step
    (G_T on its primed copy); an input needs bounds in A.
    """
    init_b, trans_b, in_b = _bounds(ts.G_I), _bounds(ts.G_T), _bounds(ts.A)
    out: FiniteDomainMap = {}
    for v in list(ts.state_vars) + list(ts.input_vars):
        if v.sort is Sort.BOOL:
            out[v] = (False, True)
            continue
        if v.sort is Sort.REAL:
            return NotFinite(f"'{v.name}' is real-valued")
        if v in ts.next_of:
            b0 = init_b.get(v, [None, None])
            b1 = trans_b.get(ts.next_of[v], [None, None])
            if None in b0 or None in b1:
                return NotFinite(f"no syntactic bounds for state variable '{v.name}'")
            lo, hi = min(b0[0], b1[0]), max(b0[1], b1[1])
        else:
            b = in_b.get(v, [None, None])
            if None in b:
                return NotFinite(f"no syntactic bounds for input '{v.name}'")
            lo, hi = b
        if hi - lo + 1 > max_values:
            return NotFinite(f"domain of '{v.name}' is too large")
        out[v] = tuple(Fraction(k) for k in range(int(lo), int(hi) + 1))
    return out
