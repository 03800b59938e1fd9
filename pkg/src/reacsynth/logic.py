"""Quantifier-free linear integer/real arithmetic (LIRA).

Terms and formulas are immutable trees with exact rational constants.
Models are plain ``dict`` objects mapping :class:`Var` to ``Fraction`` (numeric
sorts) or ``bool``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Mapping, Tuple, Union


class LogicError(Exception):
    pass


class UnboundVariable(LogicError):
    pass


class SortMismatch(LogicError):
    pass


class NonLinear(LogicError):
    pass


class Sort(enum.Enum):
    BOOL = "Bool"
    INT = "Int"
    REAL = "Real"

    @property
    def numeric(self) -> bool:
        return self is not Sort.BOOL

    def __str__(self) -> str:
        return self.value


class _Node:
    """Structural equality with a hash cached at construction."""

    def __post_init__(self):
        object.__setattr__(self, "_h", hash((type(self).__name__,) + self._fields()))

    def _fields(self) -> tuple:
        return tuple(getattr(self, n) for n in self.__match_args__)

    def __hash__(self) -> int:
        return self._h

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        return (type(self) is type(other) and self._h == other._h
                and self._fields() == other._fields())

    def __ne__(self, other) -> bool:
        return not self.__eq__(other)

    def __str__(self) -> str:
        return pretty(self)


class _Arith:
    """Operator sugar for building terms in code and tests."""

    def __add__(self, other):
        return add(self, _lift(other))

    def __radd__(self, other):
        return add(_lift(other), self)

    def __sub__(self, other):
        return add(self, Neg(_lift(other)))

    def __rsub__(self, other):
        return add(_lift(other), Neg(self))

    def __neg__(self):
        return Neg(self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Scale(Fraction(other), self)
        raise NonLinear(f"cannot multiply {self} by {other}")

    __rmul__ = __mul__


# ---------------------------------------------------------------- terms

@dataclass(frozen=True, eq=False)
class Const(_Node, _Arith):
    value: Fraction
    sort: Sort = Sort.REAL

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))
        if self.sort is Sort.BOOL:
            raise SortMismatch("numeric constant with Bool sort")
        if self.sort is Sort.INT and self.value.denominator != 1:
            raise SortMismatch(f"non-integral Int constant {self.value}")
        super().__post_init__()


@dataclass(frozen=True, eq=False)
class Var(_Node, _Arith):
    name: str
    sort: Sort

    def __repr__(self) -> str:
        return f"Var({self.name!r}, {self.sort.name})"


@dataclass(frozen=True, eq=False)
class Neg(_Node, _Arith):
    arg: "Term"


@dataclass(frozen=True, eq=False)
class Add(_Node, _Arith):
    args: Tuple["Term", ...]


@dataclass(frozen=True, eq=False)
class Scale(_Node, _Arith):
    coef: Fraction
    arg: "Term"

    def __post_init__(self):
        object.__setattr__(self, "coef", Fraction(self.coef))
        super().__post_init__()


@dataclass(frozen=True, eq=False)
class Ite(_Node, _Arith):
    cond: "Formula"
    then: "Term"
    other: "Term"


# ------------------------------------------------------------- formulas

@dataclass(frozen=True, eq=False)
class BoolConst(_Node):
    value: bool


RELOPS = ("<", "<=", "=", "!=", ">=", ">")


@dataclass(frozen=True, eq=False)
class Atom(_Node):
    op: str
    lhs: "Term"
    rhs: "Term"

    def __post_init__(self):
        if self.op not in RELOPS:
            raise ValueError(f"unknown relational operator {self.op!r}")
        super().__post_init__()


@dataclass(frozen=True, eq=False)
class Not(_Node):
    arg: "Formula"


@dataclass(frozen=True, eq=False)
class And(_Node):
    args: Tuple["Formula", ...]


@dataclass(frozen=True, eq=False)
class Or(_Node):
    args: Tuple["Formula", ...]


@dataclass(frozen=True, eq=False)
class Implies(_Node):
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True, eq=False)
class Iff(_Node):
    lhs: "Formula"
    rhs: "Formula"


Term = Union[Const, Var, Neg, Add, Scale, Ite]
Formula = Union[BoolConst, Var, Atom, Not, And, Or, Implies, Iff]
Value = Union[Fraction, bool]
Model = Dict[Var, Value]

TRUE = BoolConst(True)
FALSE = BoolConst(False)

_TERM_TYPES = (Const, Neg, Add, Scale, Ite)
_FORMULA_TYPES = (BoolConst, Atom, Not, And, Or, Implies, Iff)


def is_term(e) -> bool:
    return isinstance(e, _TERM_TYPES) or (isinstance(e, Var) and e.sort.numeric)


def is_formula(e) -> bool:
    return isinstance(e, _FORMULA_TYPES) or (isinstance(e, Var) and e.sort is Sort.BOOL)


# ---------------------------------------------------------- constructors

def _lift(x):
    if isinstance(x, bool):
        raise SortMismatch("bool used as a number")
    if isinstance(x, int):
        return Const(Fraction(x), Sort.INT)
    if isinstance(x, (Fraction, float)):
        return Const(Fraction(x), Sort.REAL)
    return x


def num(value, sort: Sort = None) -> Const:
    value = Fraction(value)
    if sort is None:
        sort = Sort.INT if value.denominator == 1 else Sort.REAL
    return Const(value, sort)


def real(value) -> Const:
    return Const(Fraction(value), Sort.REAL)


def add(*terms) -> Term:
    flat = []
    for t in terms:
        t = _lift(t)
        if isinstance(t, Add):
            flat.extend(t.args)
        else:
            flat.append(t)
    if len(flat) == 1:
        return flat[0]
    return Add(tuple(flat))


def sub(a, b) -> Term:
    return add(a, Neg(_lift(b)))


def scale(coef, t) -> Term:
    return Scale(Fraction(coef), _lift(t))


def ite(cond, then, other) -> Term:
    return Ite(cond, _lift(then), _lift(other))


def atom(op: str, lhs, rhs) -> Atom:
    return Atom(op, _lift(lhs), _lift(rhs))


def lt(a, b): return atom("<", a, b)
def le(a, b): return atom("<=", a, b)
def eq(a, b): return atom("=", a, b)
def ne(a, b): return atom("!=", a, b)
def ge(a, b): return atom(">=", a, b)
def gt(a, b): return atom(">", a, b)


def conj(*fs) -> Formula:
    """Conjunction with flattening and constant absorption."""
    out: List[Formula] = []
    for f in _flat(fs):
        if isinstance(f, And):
            out.extend(f.args)
        elif f == TRUE:
            continue
        elif f == FALSE:
            return FALSE
        else:
            out.append(f)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def disj(*fs) -> Formula:
    out: List[Formula] = []
    for f in _flat(fs):
        if isinstance(f, Or):
            out.extend(f.args)
        elif f == FALSE:
            continue
        elif f == TRUE:
            return TRUE
        else:
            out.append(f)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def _flat(fs):
    for f in fs:
        if isinstance(f, (list, tuple)):
            yield from _flat(f)
        else:
            yield f


def neg(f: Formula) -> Formula:
    if isinstance(f, BoolConst):
        return FALSE if f.value else TRUE
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def implies(a: Formula, b: Formula) -> Formula:
    return Implies(a, b)


def iff(a: Formula, b: Formula) -> Formula:
    return Iff(a, b)


# ------------------------------------------------------------- queries

def sort_of(t: Term) -> Sort:
    if isinstance(t, (Const, Var)):
        return t.sort
    if isinstance(t, Neg):
        return sort_of(t.arg)
    if isinstance(t, Add):
        return Sort.REAL if any(sort_of(a) is Sort.REAL for a in t.args) else Sort.INT
    if isinstance(t, Scale):
        if t.coef.denominator != 1:
            return Sort.REAL
        return sort_of(t.arg)
    if isinstance(t, Ite):
        a, b = sort_of(t.then), sort_of(t.other)
        return Sort.REAL if Sort.REAL in (a, b) else a
    raise SortMismatch(f"not a term: {t!r}")


def children(e) -> tuple:
    if isinstance(e, (Const, Var, BoolConst)):
        return ()
    if isinstance(e, (Neg, Not)):
        return (e.arg,)
    if isinstance(e, (Add, And, Or)):
        return e.args
    if isinstance(e, Scale):
        return (e.arg,)
    if isinstance(e, Ite):
        return (e.cond, e.then, e.other)
    if isinstance(e, (Atom, Implies, Iff)):
        return (e.lhs, e.rhs)
    raise TypeError(f"not an expression: {e!r}")


def free_vars(*exprs) -> List[Var]:
    """Free variables in order of first occurrence."""
    seen: Dict[Var, None] = {}
    visited = set()
    stack = list(reversed(exprs))
    while stack:
        e = stack.pop()
        if id(e) in visited:
            continue
        visited.add(id(e))
        if isinstance(e, Var):
            seen.setdefault(e, None)
        else:
            stack.extend(reversed(children(e)))
    return list(seen)


def size(e) -> int:
    return 1 + sum(size(c) for c in children(e))


def atoms(f) -> List[Atom]:
    out: Dict[Atom, None] = {}

    def walk(e):
        if isinstance(e, Atom):
            out.setdefault(e, None)
        for c in children(e):
            walk(c)

    walk(f)
    return list(out)


def has_ite(e) -> bool:
    if isinstance(e, Ite):
        return True
    return any(has_ite(c) for c in children(e))


# ------------------------------------------------------------ semantics

def _compare(op: str, a, b) -> bool:
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    if op == ">=":
        return a >= b
    return a > b


def _lookup(v: Var, m: Mapping):
    try:
        val = m[v]
    except KeyError:
        raise UnboundVariable(v.name) from None
    if v.sort is Sort.BOOL:
        if not isinstance(val, bool):
            raise SortMismatch(f"{v.name} is Bool but model holds {val!r}")
    else:
        if isinstance(val, bool):
            raise SortMismatch(f"{v.name} is {v.sort} but model holds {val!r}")
        if v.sort is Sort.INT and Fraction(val).denominator != 1:
            raise SortMismatch(f"{v.name} is Int but model holds {val}")
    return val


def eval_term(t: Term, m: Mapping) -> Fraction:
    if isinstance(t, Const):
        return t.value
    if isinstance(t, Var):
        if t.sort is Sort.BOOL:
            raise SortMismatch(f"Bool variable {t.name} used as a term")
        return Fraction(_lookup(t, m))
    if isinstance(t, Neg):
        return -eval_term(t.arg, m)
    if isinstance(t, Add):
        return sum((eval_term(a, m) for a in t.args), Fraction(0))
    if isinstance(t, Scale):
        return t.coef * eval_term(t.arg, m)
    if isinstance(t, Ite):
        return eval_term(t.then, m) if eval_formula(t.cond, m) else eval_term(t.other, m)
    raise SortMismatch(f"not a term: {t!r}")


def eval_formula(f: Formula, m: Mapping) -> bool:
    if isinstance(f, BoolConst):
        return f.value
    if isinstance(f, Var):
        if f.sort is not Sort.BOOL:
            raise SortMismatch(f"numeric variable {f.name} used as a formula")
        return _lookup(f, m)
    if isinstance(f, Atom):
        return _compare(f.op, eval_term(f.lhs, m), eval_term(f.rhs, m))
    if isinstance(f, Not):
        return not eval_formula(f.arg, m)
    if isinstance(f, And):
        return all(eval_formula(a, m) for a in f.args)
    if isinstance(f, Or):
        return any(eval_formula(a, m) for a in f.args)
    if isinstance(f, Implies):
        return (not eval_formula(f.lhs, m)) or eval_formula(f.rhs, m)
    if isinstance(f, Iff):
        return eval_formula(f.lhs, m) == eval_formula(f.rhs, m)
    raise SortMismatch(f"not a formula: {f!r}")


def evaluate(e, m: Mapping) -> Value:
    if is_formula(e):
        return eval_formula(e, m)
    return eval_term(e, m)


def compile_formula(f: Formula) -> Callable[[Mapping], bool]:
    """Close ``f`` into a Python function; same semantics as :func:`eval_formula`."""
    return _compile(f)


def compile_term(t: Term) -> Callable[[Mapping], Fraction]:
    return _compile(t)


def _compile(e):
    if isinstance(e, (Const, BoolConst)):
        v = e.value
        return lambda m: v
    if isinstance(e, Var):
        return lambda m: m[e]
    if isinstance(e, Neg):
        a = _compile(e.arg)
        return lambda m: -a(m)
    if isinstance(e, Add):
        parts = [_compile(a) for a in e.args]
        return lambda m: sum((p(m) for p in parts), Fraction(0))
    if isinstance(e, Scale):
        c, a = e.coef, _compile(e.arg)
        return lambda m: c * a(m)
    if isinstance(e, Ite):
        c, a, b = _compile(e.cond), _compile(e.then), _compile(e.other)
        return lambda m: a(m) if c(m) else b(m)
    if isinstance(e, Atom):
        a, b, op = _compile(e.lhs), _compile(e.rhs), e.op
        return lambda m: _compare(op, a(m), b(m))
    if isinstance(e, Not):
        a = _compile(e.arg)
        return lambda m: not a(m)
    if isinstance(e, And):
        parts = [_compile(a) for a in e.args]
        return lambda m: all(p(m) for p in parts)
    if isinstance(e, Or):
        parts = [_compile(a) for a in e.args]
        return lambda m: any(p(m) for p in parts)
    if isinstance(e, Implies):
        a, b = _compile(e.lhs), _compile(e.rhs)
        return lambda m: (not a(m)) or b(m)
    if isinstance(e, Iff):
        a, b = _compile(e.lhs), _compile(e.rhs)
        return lambda m: a(m) == b(m)
    raise TypeError(f"not an expression: {e!r}")


# ------------------------------------------------------- transformations

def _rebuild(e, kids):
    if isinstance(e, Neg):
        return Neg(kids[0])
    if isinstance(e, Add):
        return Add(tuple(kids))
    if isinstance(e, Scale):
        return Scale(e.coef, kids[0])
    if isinstance(e, Ite):
        return Ite(*kids)
    if isinstance(e, Atom):
        return Atom(e.op, *kids)
    if isinstance(e, Not):
        return Not(kids[0])
    if isinstance(e, And):
        return And(tuple(kids))
    if isinstance(e, Or):
        return Or(tuple(kids))
    if isinstance(e, Implies):
        return Implies(*kids)
    if isinstance(e, Iff):
        return Iff(*kids)
    raise TypeError(f"cannot rebuild {e!r}")


def substitute(e, mapping: Mapping[Var, object]):
    """Simultaneous, sort-preserving substitution of variables."""
    for v, r in mapping.items():
        _check_substitution(v, r)
    if not mapping:
        return e
    memo: Dict[int, object] = {}

    def go(x):
        key = id(x)
        if key in memo:
            return memo[key]
        if isinstance(x, Var):
            out = mapping.get(x, x)
        elif isinstance(x, (Const, BoolConst)):
            out = x
        else:
            kids = children(x)
            new = [go(k) for k in kids]
            out = x if all(a is b for a, b in zip(kids, new)) else _rebuild(x, new)
        memo[key] = out
        return out

    return go(e)


def _check_substitution(v: Var, r) -> None:
    if v.sort is Sort.BOOL:
        if not is_formula(r):
            raise SortMismatch(f"Bool variable {v.name} replaced by term {r}")
        return
    if not is_term(r):
        raise SortMismatch(f"{v.sort} variable {v.name} replaced by formula {r}")
    if v.sort is Sort.INT and sort_of(r) is Sort.REAL:
        raise SortMismatch(f"Int variable {v.name} replaced by Real term {r}")


def rename(e, mapping: Mapping[Var, Var]):
    return substitute(e, mapping)


def _split_ite(t: Term) -> List[Tuple[Formula, Term]]:
    """Case split of a term into (path condition, ite-free term) pairs."""
    if not has_ite(t):
        return [(TRUE, t)]
    if isinstance(t, Ite):
        out = []
        for c, a in _split_ite(t.then):
            out.append((conj(t.cond, c), a))
        for c, b in _split_ite(t.other):
            out.append((conj(neg(t.cond), c), b))
        return out
    if isinstance(t, Neg):
        return [(c, Neg(a)) for c, a in _split_ite(t.arg)]
    if isinstance(t, Scale):
        return [(c, Scale(t.coef, a)) for c, a in _split_ite(t.arg)]
    if isinstance(t, Add):
        combos: List[Tuple[Formula, List[Term]]] = [(TRUE, [])]
        for arg in t.args:
            combos = [(conj(c0, c1), ts + [a])
                      for c0, ts in combos for c1, a in _split_ite(arg)]
        return [(c, Add(tuple(ts))) for c, ts in combos]
    raise TypeError(f"not a term: {t!r}")


def lift_ite(f: Formula) -> Formula:
    """Remove term-level if-then-else by case-splitting the enclosing atoms."""
    if isinstance(f, Atom):
        if not (has_ite(f.lhs) or has_ite(f.rhs)):
            return f
        cases = []
        for cl, tl in _split_ite(f.lhs):
            for cr, tr in _split_ite(f.rhs):
                cases.append(conj(lift_ite(cl), lift_ite(cr), Atom(f.op, tl, tr)))
        return disj(*cases)
    if isinstance(f, (BoolConst, Var)):
        return f
    kids = children(f)
    new = [lift_ite(k) for k in kids]
    if all(a is b for a, b in zip(kids, new)):
        return f
    return _rebuild(f, new)


_NEGATED_OP = {"<": ">=", "<=": ">", ">": "<=", ">=": "<"}


def nnf(f: Formula, positive: bool = True) -> Formula:
    """Negation normal form over the connectives and/or.

    Implications and equivalences are expanded, term-level ite is lifted, and
    disequalities become a disjunction of strict inequalities.
    """
    if isinstance(f, BoolConst):
        return f if positive else neg(f)
    if isinstance(f, Var):
        return f if positive else Not(f)
    if isinstance(f, Atom):
        if has_ite(f.lhs) or has_ite(f.rhs):
            return nnf(lift_ite(f), positive)
        op = f.op
        if not positive:
            if op == "=":
                op = "!="
            elif op == "!=":
                op = "="
            else:
                op = _NEGATED_OP[op]
        if op == "!=":
            return Or((Atom("<", f.lhs, f.rhs), Atom(">", f.lhs, f.rhs)))
        return f if op == f.op else Atom(op, f.lhs, f.rhs)
    if isinstance(f, Not):
        return nnf(f.arg, not positive)
    if isinstance(f, And):
        parts = [nnf(a, positive) for a in f.args]
        return conj(parts) if positive else disj(parts)
    if isinstance(f, Or):
        parts = [nnf(a, positive) for a in f.args]
        return disj(parts) if positive else conj(parts)
    if isinstance(f, Implies):
        if positive:
            return disj(nnf(f.lhs, False), nnf(f.rhs, True))
        return conj(nnf(f.lhs, True), nnf(f.rhs, False))
    if isinstance(f, Iff):
        a_pos, a_neg = nnf(f.lhs, True), nnf(f.lhs, False)
        b_pos, b_neg = nnf(f.rhs, True), nnf(f.rhs, False)
        if positive:
            return disj(conj(a_pos, b_pos), conj(a_neg, b_neg))
        return disj(conj(a_pos, b_neg), conj(a_neg, b_pos))
    raise TypeError(f"not a formula: {f!r}")


def simplify(e):
    """Constant folding, flattening and de-duplication. Equivalence-preserving."""
    if isinstance(e, (Var, Const, BoolConst)):
        return e
    if isinstance(e, (Neg, Add, Scale)):
        return _simplify_term(e)
    if isinstance(e, Ite):
        c = simplify(e.cond)
        a, b = simplify(e.then), simplify(e.other)
        if c == TRUE:
            return a
        if c == FALSE:
            return b
        if a == b:
            return a
        return Ite(c, a, b)
    if isinstance(e, Atom):
        lhs, rhs = simplify(e.lhs), simplify(e.rhs)
        if not (has_ite(lhs) or has_ite(rhs)):
            diff = linearize(Add((lhs, Neg(rhs))))
            if diff.is_constant():
                return TRUE if _compare(e.op, diff.const, 0) else FALSE
        if lhs == rhs:
            return TRUE if e.op in ("=", "<=", ">=") else FALSE
        return Atom(e.op, lhs, rhs)
    if isinstance(e, Not):
        a = simplify(e.arg)
        if isinstance(a, BoolConst):
            return neg(a)
        if isinstance(a, Not):
            return a.arg
        return Not(a)
    if isinstance(e, (And, Or)):
        is_and = isinstance(e, And)
        unit, zero = (TRUE, FALSE) if is_and else (FALSE, TRUE)
        out: Dict[Formula, None] = {}
        for a in e.args:
            a = simplify(a)
            parts = a.args if isinstance(a, type(e)) else (a,)
            for p in parts:
                if p == zero:
                    return zero
                if p != unit:
                    out.setdefault(p, None)
        items = list(out)
        for p in items:
            if neg(p) in out:
                return zero
        if not items:
            return unit
        if len(items) == 1:
            return items[0]
        return And(tuple(items)) if is_and else Or(tuple(items))
    if isinstance(e, Implies):
        a, b = simplify(e.lhs), simplify(e.rhs)
        if a == FALSE or b == TRUE or a == b:
            return TRUE
        if a == TRUE:
            return b
        if b == FALSE:
            return simplify(Not(a))
        return Implies(a, b)
    if isinstance(e, Iff):
        a, b = simplify(e.lhs), simplify(e.rhs)
        if a == b:
            return TRUE
        if a == TRUE:
            return b
        if b == TRUE:
            return a
        if a == FALSE:
            return simplify(Not(b))
        if b == FALSE:
            return simplify(Not(a))
        return Iff(a, b)
    raise TypeError(f"not an expression: {e!r}")


def _simplify_term(t: Term) -> Term:
    if has_ite(t):
        kids = [simplify(k) for k in children(t)]
        return _rebuild(t, kids)
    lin = linearize(t)
    out = lin.to_term(sort_of(t))
    # keep the original shape unless folding actually shrinks it
    return out if size(out) <= size(t) else t


# ---------------------------------------------------------- linear forms

class Linear:
    """Affine combination ``sum(c * v) + const`` with rational coefficients."""

    __slots__ = ("coeffs", "const")

    def __init__(self, coeffs: Mapping[Var, Fraction] = None, const=0):
        self.coeffs: Dict[Var, Fraction] = {
            v: Fraction(c) for v, c in (coeffs or {}).items() if c != 0}
        self.const = Fraction(const)

    @classmethod
    def var(cls, v: Var) -> "Linear":
        return cls({v: Fraction(1)})

    def __add__(self, other: "Linear") -> "Linear":
        out = dict(self.coeffs)
        for v, c in other.coeffs.items():
            out[v] = out.get(v, 0) + c
        return Linear(out, self.const + other.const)

    def __sub__(self, other: "Linear") -> "Linear":
        return self + other.scale(-1)

    def __neg__(self) -> "Linear":
        return self.scale(-1)

    def scale(self, k) -> "Linear":
        k = Fraction(k)
        return Linear({v: c * k for v, c in self.coeffs.items()}, self.const * k)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Linear) and self.coeffs == other.coeffs
                and self.const == other.const)

    def __hash__(self) -> int:
        return hash((frozenset(self.coeffs.items()), self.const))

    def __repr__(self) -> str:
        return f"Linear({self.to_term()})"

    def coeff(self, v: Var) -> Fraction:
        return self.coeffs.get(v, Fraction(0))

    def without(self, v: Var) -> "Linear":
        return Linear({u: c for u, c in self.coeffs.items() if u != v}, self.const)

    def substitute(self, v: Var, repl: "Linear") -> "Linear":
        c = self.coeff(v)
        if c == 0:
            return self
        return self.without(v) + repl.scale(c)

    def is_constant(self) -> bool:
        return not self.coeffs

    def variables(self) -> List[Var]:
        return sorted(self.coeffs, key=lambda v: v.name)

    def evaluate(self, m: Mapping) -> Fraction:
        return self.const + sum((c * Fraction(m[v]) for v, c in self.coeffs.items()),
                                Fraction(0))

    def is_integral(self) -> bool:
        """All variables Int and all coefficients/constant integers."""
        return (self.const.denominator == 1
                and all(v.sort is Sort.INT and c.denominator == 1
                        for v, c in self.coeffs.items()))

    def sort(self) -> Sort:
        return Sort.INT if self.is_integral() else Sort.REAL

    def to_term(self, sort: Sort = None) -> Term:
        if sort is None:
            sort = self.sort()
        csort = Sort.INT if (sort is Sort.INT and self.const.denominator == 1) else Sort.REAL
        parts: List[Term] = []
        for v in self.variables():
            c = self.coeffs[v]
            if c == 1:
                parts.append(v)
            elif c == -1:
                parts.append(Neg(v))
            else:
                parts.append(Scale(c, v))
        if self.const != 0 or not parts:
            parts.append(Const(self.const, csort))
        return parts[0] if len(parts) == 1 else Add(tuple(parts))


def linearize(t: Term) -> Linear:
    if isinstance(t, Const):
        return Linear({}, t.value)
    if isinstance(t, Var):
        if t.sort is Sort.BOOL:
            raise SortMismatch(f"Bool variable {t.name} in arithmetic")
        return Linear.var(t)
    if isinstance(t, Neg):
        return linearize(t.arg).scale(-1)
    if isinstance(t, Add):
        out = Linear()
        for a in t.args:
            out = out + linearize(a)
        return out
    if isinstance(t, Scale):
        return linearize(t.arg).scale(t.coef)
    if isinstance(t, Ite):
        raise NonLinear("if-then-else term must be lifted before linearization")
    raise SortMismatch(f"not a term: {t!r}")


# ------------------------------------------------------------- printing

def _fmt_num(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def pretty(e) -> str:
    if isinstance(e, Const):
        return _fmt_num(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, BoolConst):
        return "true" if e.value else "false"
    if isinstance(e, Neg):
        return f"-{_paren(e.arg)}"
    if isinstance(e, Add):
        out = pretty(e.args[0])
        for a in e.args[1:]:
            if isinstance(a, Neg):
                out += f" - {_paren(a.arg)}"
            elif isinstance(a, Const) and a.value < 0:
                out += f" - {_fmt_num(-a.value)}"
            elif isinstance(a, Scale) and a.coef < 0:
                out += f" - {_fmt_num(-a.coef)}*{_paren(a.arg)}"
            else:
                out += f" + {pretty(a)}"
        return out
    if isinstance(e, Scale):
        return f"{_fmt_num(e.coef)}*{_paren(e.arg)}"
    if isinstance(e, Ite):
        return f"ite({pretty(e.cond)}, {pretty(e.then)}, {pretty(e.other)})"
    if isinstance(e, Atom):
        return f"{pretty(e.lhs)} {e.op} {pretty(e.rhs)}"
    if isinstance(e, Not):
        return f"not {_paren(e.arg)}"
    if isinstance(e, And):
        return " and ".join(_paren(a) for a in e.args)
    if isinstance(e, Or):
        return " or ".join(_paren(a) for a in e.args)
    if isinstance(e, Implies):
        return f"{_paren(e.lhs)} => {_paren(e.rhs)}"
    if isinstance(e, Iff):
        return f"{_paren(e.lhs)} <=> {_paren(e.rhs)}"
    return repr(e)


def _paren(e) -> str:
    s = pretty(e)
    if isinstance(e, (Const, Var, BoolConst, Ite)) and not s.startswith("-"):
        return s
    return f"({s})"


def format_model(m: Mapping) -> str:
    parts = []
    for v in sorted(m, key=lambda v: v.name):
        val = m[v]
        parts.append(f"{v.name}={str(val).lower() if isinstance(val, bool) else _fmt_num(Fraction(val))}")
    return "{" + ", ".join(parts) + "}"


def mk_vars(names: Iterable[str], sort: Sort) -> List[Var]:
    if isinstance(names, str):
        names = names.split()
    return [Var(n, sort) for n in names]
