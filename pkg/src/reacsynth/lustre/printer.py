"""Pretty-printer; ``parse_program(print_program(p)) == p`` for parsed programs."""
from __future__ import annotations

from fractions import Fraction
from typing import List

from .ast import (Arrow, Binary, BoolLit, Call, IfThenElse, Ident, Node, Num,
                  Param, Pre, Program, Unary)

# binding strength; higher binds tighter
_PREC = {
    "->": 1, "=>": 2, "or": 3, "xor": 3, "and": 4,
    "<": 5, "<=": 5, ">": 5, ">=": 5, "=": 5, "<>": 5,
    "+": 6, "-": 6, "*": 7, "/": 7, "div": 7, "mod": 7,
}
_RIGHT = {"->", "=>"}
_UNARY = 8


def _decimal(q: Fraction) -> str:
    """Exact decimal text for a fraction whose denominator is 2^a 5^b."""
    sign = "-" if q < 0 else ""
    q = abs(q)
    k = 0
    while (q * 10 ** k).denominator != 1:
        k += 1
        if k > 400:
            raise ValueError(f"{q} has no finite decimal expansion")
    digits = str(int(q * 10 ** k))
    if k == 0:
        return f"{sign}{digits}.0"
    digits = digits.rjust(k + 1, "0")
    return f"{sign}{digits[:-k]}.{digits[-k:]}"


def num_text(value: Fraction, is_real: bool) -> str:
    if not is_real:
        if value.denominator != 1:
            raise ValueError("integer literal with a fractional value")
        return str(value.numerator)
    return _decimal(Fraction(value))


def _prec(e) -> int:
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Arrow):
        return _PREC["->"]
    if isinstance(e, IfThenElse):
        return 0
    if isinstance(e, (Unary, Pre)):
        return _UNARY
    if isinstance(e, Num) and e.value < 0:
        return _UNARY
    return 9


def expr_text(e) -> str:
    if isinstance(e, Num):
        if e.value < 0:
            return "-" + num_text(-e.value, e.is_real)
        return num_text(e.value, e.is_real)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Ident):
        return e.name
    if isinstance(e, Unary):
        arg = _wrap(e.arg, _UNARY)
        sep = " " if e.op == "not" or arg.startswith("-") else ""
        return f"{e.op}{sep}{arg}"
    if isinstance(e, Pre):
        return f"pre {_wrap(e.arg, _UNARY)}"
    if isinstance(e, Call):
        return f"{e.node}({', '.join(expr_text(a) for a in e.args)})"
    if isinstance(e, IfThenElse):
        return f"if {expr_text(e.cond)} then {expr_text(e.then)} else {expr_text(e.other)}"
    if isinstance(e, (Binary, Arrow)):
        op = e.op if isinstance(e, Binary) else "->"
        lhs, rhs = (e.lhs, e.rhs) if isinstance(e, Binary) else (e.init, e.step)
        p = _PREC[op]
        if op in _RIGHT:
            lp, rp = p + 1, p
        elif p == 5:
            lp, rp = p + 1, p + 1
        else:
            lp, rp = p, p + 1
        return f"{_wrap(lhs, lp)} {op} {_wrap(rhs, rp)}"
    raise TypeError(f"not an expression: {e!r}")


def _wrap(e, min_prec: int) -> str:
    text = expr_text(e)
    return f"({text})" if _prec(e) < min_prec else text


def _params(ps) -> str:
    return "; ".join(f"{p.name}: {p.sort}" for p in ps)


def node_text(n: Node) -> str:
    lines: List[str] = [f"node {n.name}({_params(n.inputs)}) returns ({_params(n.outputs)});"]
    if n.locals:
        lines.append("var")
        lines.extend(f"  {p.name}: {p.sort};" for p in n.locals)
    lines.append("let")
    for d in n.directives:
        lines.append(f"  --%{d.kind} {', '.join(d.names)};")
    for eq in n.equations:
        lines.append(f"  {eq.lhs} = {expr_text(eq.rhs)};")
    for a in n.asserts:
        lines.append(f"  assert {expr_text(a.expr)};")
    lines.append("tel")
    return "\n".join(lines)


def print_program(p: Program) -> str:
    parts = []
    for c in p.consts:
        ann = f": {c.sort}" if c.sort else ""
        parts.append(f"const {c.name}{ann} = {expr_text(c.value)};")
    for d in p.directives:
        parts.append(f"--%{d.kind} {', '.join(d.names)};")
    for n in p.nodes:
        parts.append(node_text(n))
    return "\n\n".join(parts) + "\n"
