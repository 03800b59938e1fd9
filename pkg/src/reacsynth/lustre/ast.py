"""Syntax tree for the supported Lustre subset.

Spans are carried for diagnostics but excluded from equality, so two trees
parsed from differently formatted text compare equal.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple, Union


@dataclass(frozen=True)
class Span:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


NOSPAN = Span(0, 0)


def _span():
    return field(default=NOSPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Num:
    value: Fraction
    is_real: bool
    span: Span = _span()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    span: Span = _span()


@dataclass(frozen=True)
class Ident:
    name: str
    span: Span = _span()


@dataclass(frozen=True)
class Unary:
    op: str  # '-' | 'not'
    arg: "Expr"
    span: Span = _span()


@dataclass(frozen=True)
class Binary:
    op: str
    lhs: "Expr"
    rhs: "Expr"
    span: Span = _span()


@dataclass(frozen=True)
class IfThenElse:
    cond: "Expr"
    then: "Expr"
    other: "Expr"
    span: Span = _span()


@dataclass(frozen=True)
class Pre:
    arg: "Expr"
    span: Span = _span()


@dataclass(frozen=True)
class Arrow:
    init: "Expr"
    step: "Expr"
    span: Span = _span()


@dataclass(frozen=True)
class Call:
    node: str
    args: Tuple["Expr", ...]
    span: Span = _span()


Expr = Union[Num, BoolLit, Ident, Unary, Binary, IfThenElse, Pre, Arrow, Call]

ARITH_OPS = ("+", "-", "*", "/", "div", "mod")
REL_OPS = ("<", "<=", ">", ">=", "=", "<>")
BOOL_OPS = ("and", "or", "xor", "=>")


@dataclass(frozen=True)
class Param:
    name: str
    sort: str  # 'bool' | 'int' | 'real'
    span: Span = _span()


@dataclass(frozen=True)
class Equation:
    lhs: str
    rhs: Expr
    span: Span = _span()


@dataclass(frozen=True)
class Assertion:
    expr: Expr
    span: Span = _span()


@dataclass(frozen=True)
class Directive:
    kind: str  # 'REALIZABLE' | 'PROPERTY'
    names: Tuple[str, ...]
    span: Span = _span()


@dataclass(frozen=True)
class Node:
    name: str
    inputs: Tuple[Param, ...]
    outputs: Tuple[Param, ...]
    locals: Tuple[Param, ...]
    equations: Tuple[Equation, ...]
    asserts: Tuple[Assertion, ...]
    directives: Tuple[Directive, ...] = ()
    span: Span = _span()


@dataclass(frozen=True)
class ConstDecl:
    name: str
    sort: Optional[str]
    value: Expr
    span: Span = _span()


@dataclass(frozen=True)
class Program:
    consts: Tuple[ConstDecl, ...]
    nodes: Tuple[Node, ...]
    directives: Tuple[Directive, ...] = ()


def subexprs(e: Expr) -> List[Expr]:
    if isinstance(e, (Num, BoolLit, Ident)):
        return []
    if isinstance(e, (Unary, Pre)):
        return [e.arg]
    if isinstance(e, Binary):
        return [e.lhs, e.rhs]
    if isinstance(e, IfThenElse):
        return [e.cond, e.then, e.other]
    if isinstance(e, Arrow):
        return [e.init, e.step]
    if isinstance(e, Call):
        return list(e.args)
    raise TypeError(f"not an expression: {e!r}")


def walk(e: Expr):
    yield e
    for s in subexprs(e):
        yield from walk(s)
