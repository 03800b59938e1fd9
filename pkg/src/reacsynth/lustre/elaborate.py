"""Name resolution, sort checking, constant folding and node inlining."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Set, Tuple

from ..logic import Sort
from .ast import (Arrow, Binary, BoolLit, Call, Equation, Expr, IfThenElse, Ident,
                  Node, Num, Pre, Program, Span, Unary, NOSPAN, walk)
from .parser import LustreError, parse_program

SORTS = {"bool": Sort.BOOL, "int": Sort.INT, "real": Sort.REAL}


@dataclass
class CheckedContract:
    """A flattened, sort-checked synthesis node.

    ``defined`` maps each equation-defined stream to its elaborated right-hand
    side, in an order where current-instant dependencies come first.  ``free``
    streams are controller choices with no equation (non-realizable params).
    """
    name: str
    inputs: Tuple[str, ...]
    free: Tuple[str, ...]
    defined: Dict[str, Expr]
    sorts: Dict[str, Sort]
    asserts: Tuple[Expr, ...]
    property: str
    declared: Tuple[str, ...] = ()  # state streams in declaration order
    origin: Dict[str, Span] = field(default_factory=dict)

    @property
    def state(self) -> Tuple[str, ...]:
        return self.declared


def _err(code, msg, span=NOSPAN):
    return LustreError(code, msg, span or NOSPAN)


# -- constant evaluation ------------------------------------------------------

def euclid_div(a: int, b: int) -> int:
    """SMT-LIB integer division: the remainder is always non-negative."""
    q = a // b if b > 0 else -(a // -b)
    if a - b * q < 0:
        q += 1 if b < 0 else -1
    return q


def apply_op(op: str, a, b):
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return Fraction(a) / b
    if op == "div":
        return Fraction(euclid_div(int(a), int(b)))
    if op == "mod":
        return Fraction(int(a) - int(b) * euclid_div(int(a), int(b)))
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    if op == "=":
        return a == b
    if op == "<>":
        return a != b
    if op == "and":
        return a and b
    if op == "or":
        return a or b
    if op == "xor":
        return a != b
    if op == "=>":
        return (not a) or b
    raise ValueError(op)


def _lit(v, sort: Sort, span=NOSPAN):
    if sort is Sort.BOOL:
        return BoolLit(bool(v), span)
    return Num(Fraction(v), sort is Sort.REAL, span)


def _lit_value(e):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, BoolLit):
        return e.value
    return None


def _is_lit(e) -> bool:
    return isinstance(e, (Num, BoolLit))


# -- checks on source nodes -------------------------------------------------------

def check_pre_guarded(e: Expr, guarded: bool = False):
    """``pre`` must sit under the right operand of ``->``; inside ``pre`` the guard resets."""
    if isinstance(e, Pre):
        if not guarded:
            raise _err("IllegalPre", "pre without an enclosing '->' initial value", e.span)
        check_pre_guarded(e.arg, False)
    elif isinstance(e, Arrow):
        check_pre_guarded(e.init, guarded)
        check_pre_guarded(e.step, True)
    else:
        from .ast import subexprs
        for s in subexprs(e):
            check_pre_guarded(s, guarded)


def _calls(n: Node) -> List[Call]:
    out = []
    exprs = [eq.rhs for eq in n.equations] + [a.expr for a in n.asserts]
    for e in exprs:
        out.extend(x for x in walk(e) if isinstance(x, Call))
    return out


def _check_recursion(nodes: Dict[str, Node]):
    state: Dict[str, int] = {}

    def visit(name, stack):
        state[name] = 1
        for c in _calls(nodes[name]):
            if c.node not in nodes:
                raise _err("UnknownIdentifier", f"unknown node '{c.node}'", c.span)
            if state.get(c.node) == 1:
                cycle = " -> ".join(stack + [c.node])
                raise _err("RecursiveNodeCall", f"recursive node call {cycle}", c.span)
            if c.node not in state:
                visit(c.node, stack + [c.node])
        state[name] = 2

    for name in nodes:
        if name not in state:
            visit(name, [name])


# -- elaboration -------------------------------------------------------------

class _Builder:
    def __init__(self, nodes: Dict[str, Node], consts):
        self.nodes = nodes
        self.consts = consts
        self.sorts: Dict[str, Sort] = {}
        self.defined: Dict[str, Expr] = {}
        self.asserts: List[Expr] = []
        self.declared: List[str] = []
        self.origin: Dict[str, Span] = {}
        self.counter = 0

    def fresh(self, base: str) -> str:
        while True:
            self.counter += 1
            name = f"{base}__{self.counter}"
            if name not in self.sorts:
                return name

    def add_stream(self, name: str, sort: Sort, span: Span):
        if name in self.sorts:
            raise _err("MultipleDefinitions", f"'{name}' declared twice", span)
        self.sorts[name] = sort
        self.declared.append(name)
        self.origin[name] = span

    def define(self, name: str, rhs: Expr, span: Span):
        if name in self.defined:
            raise _err("MultipleDefinitions", f"'{name}' has more than one equation", span)
        self.defined[name] = rhs

    def instantiate(self, node: Node, scope_names: Dict[str, str],
                    args: Optional[List[Tuple[Expr, Sort]]] = None) -> Dict[str, str]:
        """Add ``node``'s streams under the given renaming; returns that renaming."""
        seen: Set[str] = set()
        for p in node.inputs + node.outputs + node.locals:
            if p.name in seen:
                raise _err("MultipleDefinitions", f"'{p.name}' declared twice in node {node.name}", p.span)
            seen.add(p.name)
        scope = dict(scope_names)
        for p in node.inputs + node.outputs + node.locals:
            scope.setdefault(p.name, self.fresh(f"{node.name}_{p.name}"))
            self.add_stream(scope[p.name], SORTS[p.sort], p.span)
        if args is not None:
            if len(args) != len(node.inputs):
                raise _err("SortMismatch", f"node {node.name} expects {len(node.inputs)} arguments")
            for p, (a, s) in zip(node.inputs, args):
                if s is not SORTS[p.sort]:
                    raise _err("SortMismatch",
                               f"argument for {node.name}.{p.name} has sort {s.value}, expected {p.sort}",
                               p.span)
                self.define(scope[p.name], a, p.span)
        inputs = {p.name for p in node.inputs}
        sorts = {p.name: SORTS[p.sort] for p in node.inputs + node.outputs + node.locals}
        for eq in node.equations:
            if eq.lhs in inputs:
                raise _err("InputDefinedByEquation", f"input '{eq.lhs}' cannot be defined", eq.span)
            if eq.lhs not in sorts:
                raise _err("UnknownIdentifier", f"'{eq.lhs}' is not declared", eq.span)
            check_pre_guarded(eq.rhs)
            rhs, s = self.expr(eq.rhs, scope)
            if s is not sorts[eq.lhs]:
                raise _err("SortMismatch",
                           f"'{eq.lhs}' has sort {sorts[eq.lhs].value} but its equation has sort {s.value}",
                           eq.span)
            self.define(scope[eq.lhs], rhs, eq.span)
        for a in node.asserts:
            check_pre_guarded(a.expr)
            e, s = self.expr(a.expr, scope)
            if s is not Sort.BOOL:
                raise _err("SortMismatch", "assertion is not boolean", a.span)
            self.asserts.append(e)
        for p in node.outputs + node.locals:
            if p.name not in {eq.lhs for eq in node.equations}:
                raise _err("MissingDefinition", f"'{p.name}' has no equation", p.span)
        return scope

    def expr(self, e: Expr, scope: Dict[str, str]) -> Tuple[Expr, Sort]:
        if isinstance(e, Num):
            return e, (Sort.REAL if e.is_real else Sort.INT)
        if isinstance(e, BoolLit):
            return e, Sort.BOOL
        if isinstance(e, Ident):
            if e.name in scope:
                name = scope[e.name]
                return Ident(name, e.span), self.sorts[name]
            if e.name in self.consts:
                v, s = self.consts[e.name]
                return _lit(v, s, e.span), s
            raise _err("UnknownIdentifier", f"unknown identifier '{e.name}'", e.span)
        if isinstance(e, Unary):
            a, s = self.expr(e.arg, scope)
            if e.op == "not":
                if s is not Sort.BOOL:
                    raise _err("SortMismatch", "'not' needs a boolean", e.span)
                if _is_lit(a):
                    return BoolLit(not a.value, e.span), s
                return Unary("not", a, e.span), s
            if not s.numeric:
                raise _err("SortMismatch", "unary '-' needs a number", e.span)
            if _is_lit(a):
                return Num(-a.value, a.is_real, e.span), s
            return Unary("-", a, e.span), s
        if isinstance(e, Binary):
            return self.binary(e, scope)
        if isinstance(e, IfThenElse):
            c, sc = self.expr(e.cond, scope)
            a, sa = self.expr(e.then, scope)
            b, sb = self.expr(e.other, scope)
            if sc is not Sort.BOOL:
                raise _err("SortMismatch", "if-condition is not boolean", e.span)
            if sa is not sb:
                raise _err("SortMismatch", f"if-branches have sorts {sa.value} and {sb.value}", e.span)
            if isinstance(c, BoolLit):
                return (a if c.value else b), sa
            return IfThenElse(c, a, b, e.span), sa
        if isinstance(e, Pre):
            a, s = self.expr(e.arg, scope)
            if not (isinstance(a, Ident) and a.name in self.sorts):
                name = self.fresh("pre")
                self.add_stream(name, s, e.span)
                self.define(name, a, e.span)
                a = Ident(name, e.span)
            return Pre(a, e.span), s
        if isinstance(e, Arrow):
            a, sa = self.expr(e.init, scope)
            b, sb = self.expr(e.step, scope)
            if sa is not sb:
                raise _err("SortMismatch", f"'->' operands have sorts {sa.value} and {sb.value}", e.span)
            return Arrow(a, b, e.span), sa
        if isinstance(e, Call):
            node = self.nodes.get(e.node)
            if node is None:
                raise _err("UnknownIdentifier", f"unknown node '{e.node}'", e.span)
            if len(node.outputs) != 1:
                raise _err("SortMismatch", f"node {e.node} must return exactly one value", e.span)
            args = [self.expr(a, scope) for a in e.args]
            inner = self.instantiate(node, {}, args)
            out = inner[node.outputs[0].name]
            return Ident(out, e.span), self.sorts[out]
        raise TypeError(f"not an expression: {e!r}")

    def binary(self, e: Binary, scope) -> Tuple[Expr, Sort]:
        a, sa = self.expr(e.lhs, scope)
        b, sb = self.expr(e.rhs, scope)
        op = e.op
        if op in ("and", "or", "xor", "=>"):
            if sa is not Sort.BOOL or sb is not Sort.BOOL:
                raise _err("SortMismatch", f"'{op}' needs booleans", e.span)
            rs = Sort.BOOL
        elif op in ("=", "<>"):
            if sa is not sb:
                raise _err("SortMismatch", f"'{op}' compares {sa.value} with {sb.value}", e.span)
            rs = Sort.BOOL
        elif op in ("<", "<=", ">", ">="):
            if sa is not sb or not sa.numeric:
                raise _err("SortMismatch", f"'{op}' needs two numbers of one sort", e.span)
            rs = Sort.BOOL
        else:
            if sa is not sb or not sa.numeric:
                raise _err("SortMismatch", f"'{op}' needs two numbers of one sort, got {sa.value} and {sb.value}", e.span)
            if op == "/" and sa is not Sort.REAL:
                raise _err("SortMismatch", "'/' is real division; use 'div' for integers", e.span)
            if op in ("div", "mod") and sa is not Sort.INT:
                raise _err("SortMismatch", f"'{op}' needs integers", e.span)
            if op in ("/", "div", "mod") and _is_lit(b) and b.value == 0:
                raise _err("DivisionByZero", f"'{op}' by zero", e.span)
            if op == "/" and not _is_lit(b):
                raise _err("NonLinearTerm", "division by a non-constant", e.span)
            rs = sa
        if _is_lit(a) and _is_lit(b):
            return _lit(apply_op(op, _lit_value(a), _lit_value(b)), rs, e.span), rs
        return Binary(op, a, b, e.span), rs


def _fold_const(e: Expr, consts) -> Tuple[object, Sort]:
    b = _Builder({}, consts)
    v, s = b.expr(e, {})
    if not _is_lit(v):
        raise _err("NonConstant", "constant initializer is not constant", getattr(e, "span", NOSPAN))
    return _lit_value(v), s


def _current_deps(e: Expr) -> Set[str]:
    """Streams read at the current instant (outside any ``pre``)."""
    out: Set[str] = set()

    def go(x):
        if isinstance(x, Ident):
            out.add(x.name)
        elif isinstance(x, Pre):
            return
        else:
            from .ast import subexprs
            for s in subexprs(x):
                go(s)
    go(e)
    return out


def _schedule(defined: Dict[str, Expr], origin) -> List[str]:
    order: List[str] = []
    state: Dict[str, int] = {}

    def visit(n, path):
        state[n] = 1
        for d in sorted(_current_deps(defined[n])):
            if d not in defined:
                continue
            if state.get(d) == 1:
                cyc = " -> ".join(path + [d])
                raise _err("AlgebraicLoop", f"instantaneous dependency cycle {cyc}", origin.get(d, NOSPAN))
            if d not in state:
                visit(d, path + [d])
        state[n] = 2
        order.append(n)

    for n in defined:
        if n not in state:
            visit(n, [n])
    return order


def select_node(prog: Program, name: Optional[str] = None) -> Node:
    if name is not None:
        for n in prog.nodes:
            if n.name == name:
                return n
        raise _err("UnknownIdentifier", f"no node named '{name}'")
    marked = [n for n in prog.nodes if n.directives]
    if len(marked) > 1:
        raise _err("AmbiguousNode", "directives appear in more than one node", marked[1].span)
    if marked:
        return marked[0]
    if not prog.nodes:
        raise _err("NoNode", "program declares no node")
    return prog.nodes[-1]


def elaborate(prog: Program, node_name: Optional[str] = None) -> CheckedContract:
    consts: Dict[str, Tuple[object, Sort]] = {}
    for c in prog.consts:
        if c.name in consts:
            raise _err("MultipleDefinitions", f"constant '{c.name}' declared twice", c.span)
        v, s = _fold_const(c.value, consts)
        if c.sort is not None and SORTS[c.sort] is not s:
            raise _err("SortMismatch", f"constant '{c.name}' declared {c.sort} but has sort {s.value}", c.span)
        consts[c.name] = (v, s)
    nodes: Dict[str, Node] = {}
    for n in prog.nodes:
        if n.name in nodes:
            raise _err("MultipleDefinitions", f"node '{n.name}' declared twice", n.span)
        nodes[n.name] = n
    _check_recursion(nodes)
    main = select_node(prog, node_name)

    realizable = None
    prop = None
    for d in tuple(prog.directives) + tuple(main.directives):
        if d.kind == "REALIZABLE":
            if realizable is not None:
                raise _err("MultipleDefinitions", "more than one REALIZABLE directive", d.span)
            realizable = d
        else:
            if prop is not None:
                raise _err("MultipleDefinitions", "more than one PROPERTY directive", d.span)
            prop = d

    params = [p.name for p in main.inputs]
    if realizable is None:
        inputs = list(params)
    else:
        for nm in realizable.names:
            if nm not in params:
                raise _err("UnknownIdentifier", f"REALIZABLE name '{nm}' is not a node input", realizable.span)
        inputs = [p for p in params if p in realizable.names]
    free = [p for p in params if p not in inputs]

    b = _Builder(nodes, consts)
    scope = b.instantiate(main, {p.name: p.name for p in main.inputs + main.outputs + main.locals})
    assert all(scope[k] == k for k in scope)

    if prop is None:
        bools = [p.name for p in main.outputs if p.sort == "bool"]
        if len(bools) != 1:
            raise _err("MissingProperty", "no PROPERTY directive and no single boolean output", main.span)
        prop_name = bools[0]
    else:
        prop_name = prop.names[0]
        if prop_name not in b.defined:
            raise _err("UnknownIdentifier", f"PROPERTY '{prop_name}' is not a defined stream", prop.span)
    if b.sorts[prop_name] is not Sort.BOOL:
        raise _err("SortMismatch", f"PROPERTY '{prop_name}' is not boolean")

    order = _schedule(b.defined, b.origin)
    defined = {n: b.defined[n] for n in order}
    declared = tuple(n for n in b.declared if n not in inputs)
    return CheckedContract(
        name=main.name, inputs=tuple(inputs), free=tuple(free), defined=defined,
        sorts=dict(b.sorts), asserts=tuple(b.asserts), property=prop_name,
        declared=declared, origin=dict(b.origin))


def load(text: str, node_name: Optional[str] = None) -> CheckedContract:
    return elaborate(parse_program(text), node_name)
