"""SMT-LIB 2 text: s-expressions, formula printing and parsing."""
from __future__ import annotations

import re
from decimal import Decimal
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

from . import logic as L
from .logic import Sort, Var

SExpr = Union[str, list]


class SmtLibError(Exception):
    pass


_TOKEN = re.compile(r"""\s*(?:(;[^\n]*)|(\()|(\))|("(?:[^"]|"")*")|(\|[^|]*\|)|([^\s()";|]+))""")


def tokenize(text: str) -> List[str]:
    pos, out = 0, []
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise SmtLibError(f"unexpected character at offset {pos}: {text[pos:pos+20]!r}")
        pos = m.end()
        if m.group(1) is not None:
            continue
        tok = next(g for g in m.groups()[1:] if g is not None)
        out.append(tok)
    return out


def parse_sexprs(text: str) -> List[SExpr]:
    toks = tokenize(text)
    stack: List[list] = [[]]
    for t in toks:
        if t == "(":
            stack.append([])
        elif t == ")":
            if len(stack) == 1:
                raise SmtLibError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(t)
    if len(stack) != 1:
        raise SmtLibError("unbalanced '('")
    return stack[0]


def parse_sexpr(text: str) -> SExpr:
    items = parse_sexprs(text)
    if len(items) != 1:
        raise SmtLibError(f"expected one s-expression, got {len(items)}")
    return items[0]


def render(s: SExpr) -> str:
    if isinstance(s, list):
        return "(" + " ".join(render(x) for x in s) + ")"
    return s


# ------------------------------------------------------------- printing

_SIMPLE = re.compile(r"^[A-Za-z~!@$%^&*_+=<>.?/-][A-Za-z0-9~!@$%^&*_+=<>.?/-]*$")
_RESERVED = {"true", "false", "and", "or", "not", "ite", "let", "forall", "exists",
             "assert", "par", "_", "!", "as", "distinct", "BINARY", "DECIMAL",
             "HEXADECIMAL", "NUMERAL", "STRING"}


def symbol(name: str) -> str:
    if _SIMPLE.match(name) and name not in _RESERVED:
        return name
    if "|" in name or "\\" in name:
        raise SmtLibError(f"cannot quote symbol {name!r}")
    return f"|{name}|"


def unquote(sym: str) -> str:
    if sym.startswith("|") and sym.endswith("|"):
        return sym[1:-1]
    return sym


def sort_name(s: Sort) -> str:
    return s.value


def numeral(v: Fraction, sort: Sort) -> str:
    v = Fraction(v)
    if sort is Sort.INT:
        if v.denominator != 1:
            raise SmtLibError(f"non-integral Int literal {v}")
        return str(v) if v >= 0 else f"(- {-v})"
    mag = abs(v)
    body = f"{mag.numerator}.0" if mag.denominator == 1 else \
        f"(/ {mag.numerator}.0 {mag.denominator}.0)"
    return body if v >= 0 else f"(- {body})"


def term_text(t: L.Term, ctx: Sort = None) -> str:
    """Print a term; ``ctx=Sort.REAL`` coerces Int subterms with ``to_real``."""
    own = L.sort_of(t)
    if ctx is None:
        ctx = own
    if isinstance(t, L.Const):
        return numeral(t.value, Sort.REAL if ctx is Sort.REAL else Sort.INT)
    if isinstance(t, Var):
        if ctx is Sort.REAL and t.sort is Sort.INT:
            return f"(to_real {symbol(t.name)})"
        return symbol(t.name)
    if isinstance(t, L.Neg):
        return f"(- {term_text(t.arg, ctx)})"
    if isinstance(t, L.Add):
        return "(+ " + " ".join(term_text(a, ctx) for a in t.args) + ")"
    if isinstance(t, L.Scale):
        inner = Sort.REAL if (ctx is Sort.REAL or t.coef.denominator != 1) else Sort.INT
        return f"(* {numeral(t.coef, inner)} {term_text(t.arg, inner)})"
    if isinstance(t, L.Ite):
        return f"(ite {formula_text(t.cond)} {term_text(t.then, ctx)} {term_text(t.other, ctx)})"
    raise SmtLibError(f"not a term: {t!r}")


def formula_text(f: L.Formula) -> str:
    if isinstance(f, L.BoolConst):
        return "true" if f.value else "false"
    if isinstance(f, Var):
        return symbol(f.name)
    if isinstance(f, L.Atom):
        ctx = Sort.REAL if Sort.REAL in (L.sort_of(f.lhs), L.sort_of(f.rhs)) else Sort.INT
        a, b = term_text(f.lhs, ctx), term_text(f.rhs, ctx)
        if f.op == "!=":
            return f"(not (= {a} {b}))"
        return f"({f.op} {a} {b})"
    if isinstance(f, L.Not):
        return f"(not {formula_text(f.arg)})"
    if isinstance(f, L.And):
        return "(and " + " ".join(formula_text(a) for a in f.args) + ")"
    if isinstance(f, L.Or):
        return "(or " + " ".join(formula_text(a) for a in f.args) + ")"
    if isinstance(f, L.Implies):
        return f"(=> {formula_text(f.lhs)} {formula_text(f.rhs)})"
    if isinstance(f, L.Iff):
        return f"(= {formula_text(f.lhs)} {formula_text(f.rhs)})"
    raise SmtLibError(f"not a formula: {f!r}")


def to_text(e) -> str:
    return formula_text(e) if L.is_formula(e) else term_text(e)


def declare(v: Var) -> str:
    return f"(declare-const {symbol(v.name)} {sort_name(v.sort)})"


def define_fun(name: str, params: Sequence[Var], body) -> str:
    ps = " ".join(f"({symbol(v.name)} {sort_name(v.sort)})" for v in params)
    if L.is_formula(body):
        rs = "Bool"
    else:
        rs = sort_name(L.sort_of(body))
    return f"(define-fun {symbol(name)} ({ps}) {rs} {to_text(body)})"


# -------------------------------------------------------------- parsing

def parse_number(tok: str) -> Fraction:
    if re.fullmatch(r"\d+", tok):
        return Fraction(int(tok))
    if re.fullmatch(r"\d+\.\d*|\d*\.\d+", tok):
        return Fraction(Decimal(tok))
    raise SmtLibError(f"not a numeral: {tok!r}")


def is_number_token(tok) -> bool:
    return isinstance(tok, str) and re.fullmatch(r"\d+(\.\d*)?|\.\d+", tok) is not None


def parse_value(s: SExpr) -> Union[Fraction, bool]:
    """Parse a model value: numerals, decimals, ``(- v)``, ``(/ a b)``, booleans."""
    if isinstance(s, str):
        if s == "true":
            return True
        if s == "false":
            return False
        return parse_number(s)
    if len(s) == 2 and s[0] == "-":
        v = parse_value(s[1])
        if isinstance(v, bool):
            raise SmtLibError("negated boolean value")
        return -v
    if len(s) == 3 and s[0] == "/":
        a, b = parse_value(s[1]), parse_value(s[2])
        if isinstance(a, bool) or isinstance(b, bool) or b == 0:
            raise SmtLibError(f"bad rational value {render(s)}")
        return a / b
    if len(s) == 2 and s[0] == "to_real":
        return parse_value(s[1])
    raise SmtLibError(f"unsupported value shape {render(s)}")


class Env:
    """Symbol table for parsing: variables and ``define-fun`` macros."""

    def __init__(self, variables: Iterable[Var] = ()):
        self.vars: Dict[str, Var] = {v.name: v for v in variables}
        self.funs: Dict[str, Tuple[List[Var], object]] = {}
        self.bound: List[Dict[str, object]] = []

    def lookup(self, name: str):
        for frame in reversed(self.bound):
            if name in frame:
                return frame[name]
        if name in self.vars:
            return self.vars[name]
        if name in self.funs and not self.funs[name][0]:
            return self.funs[name][1]
        raise SmtLibError(f"unknown symbol {name!r}")


def parse_expr(s: SExpr, env: Env):
    """Convert an s-expression into a logic term or formula."""
    if isinstance(s, str):
        if s == "true":
            return L.TRUE
        if s == "false":
            return L.FALSE
        if is_number_token(s):
            v = parse_number(s)
            return L.Const(v, Sort.INT if "." not in s else Sort.REAL)
        return env.lookup(unquote(s))
    if not s:
        raise SmtLibError("empty application")
    head, args = s[0], s[1:]
    if isinstance(head, list):
        raise SmtLibError(f"unsupported head {render(head)}")
    if head == "let":
        frame = {}
        for binding in args[0]:
            frame[unquote(binding[0])] = parse_expr(binding[1], env)
        env.bound.append(frame)
        try:
            return parse_expr(args[1], env)
        finally:
            env.bound.pop()
    sub = [parse_expr(a, env) for a in args]
    if head == "not":
        return L.Not(sub[0])
    if head == "and":
        return L.And(tuple(sub)) if len(sub) > 1 else (sub[0] if sub else L.TRUE)
    if head == "or":
        return L.Or(tuple(sub)) if len(sub) > 1 else (sub[0] if sub else L.FALSE)
    if head == "=>":
        out = sub[-1]
        for a in reversed(sub[:-1]):
            out = L.Implies(a, out)
        return out
    if head == "ite":
        if L.is_formula(sub[1]):
            c, a, b = sub
            return L.Or((L.And((c, a)), L.And((L.Not(c), b))))
        return L.Ite(sub[0], sub[1], sub[2])
    if head in ("=", "distinct"):
        if L.is_formula(sub[0]):
            if len(sub) != 2:
                raise SmtLibError("chained Bool equality unsupported")
            out = L.Iff(sub[0], sub[1])
            return L.Not(out) if head == "distinct" else out
        if len(sub) != 2:
            return L.And(tuple(L.Atom("=" if head == "=" else "!=", a, b)
                               for a, b in zip(sub, sub[1:])))
        return L.Atom("=" if head == "=" else "!=", sub[0], sub[1])
    if head in ("<", "<=", ">", ">="):
        if len(sub) == 2:
            return L.Atom(head, sub[0], sub[1])
        return L.And(tuple(L.Atom(head, a, b) for a, b in zip(sub, sub[1:])))
    if head == "+":
        return L.Add(tuple(sub))
    if head == "-":
        if len(sub) == 1:
            if isinstance(sub[0], L.Const):
                return L.Const(-sub[0].value, sub[0].sort)
            return L.Neg(sub[0])
        out = sub[0]
        return L.Add((out,) + tuple(L.Neg(b) for b in sub[1:]))
    if head == "*":
        consts = [a for a in sub if isinstance(a, L.Const)]
        others = [a for a in sub if not isinstance(a, L.Const)]
        k = Fraction(1)
        for c in consts:
            k *= c.value
        if not others:
            return L.num(k, Sort.REAL if any(c.sort is Sort.REAL for c in consts) else Sort.INT)
        if len(others) > 1:
            raise L.NonLinear(f"nonlinear product {render(s)}")
        return L.Scale(k, others[0])
    if head == "/":
        if not all(isinstance(a, L.Const) for a in sub[1:]):
            raise L.NonLinear(f"division by a non-constant {render(s)}")
        k = Fraction(1)
        for c in sub[1:]:
            if c.value == 0:
                raise SmtLibError("division by zero")
            k /= c.value
        if isinstance(sub[0], L.Const):
            return L.Const(sub[0].value * k, Sort.REAL)
        return L.Scale(k, sub[0])
    if head in ("to_real", "to_int"):
        if head == "to_int":
            raise SmtLibError("to_int is not supported")
        a = sub[0]
        if isinstance(a, L.Const):
            return L.Const(a.value, Sort.REAL)
        return a
    name = unquote(head)
    if name in env.funs:
        params, body = env.funs[name]
        if len(params) != len(sub):
            raise SmtLibError(f"arity mismatch calling {name}")
        return L.substitute(body, dict(zip(params, sub)))
    raise SmtLibError(f"unsupported operator {head!r}")


def parse_formula(text: str, variables: Iterable[Var]) -> L.Formula:
    out = parse_expr(parse_sexpr(text), Env(variables))
    if not L.is_formula(out):
        raise SmtLibError(f"expected a formula: {text}")
    return out


def parse_term(text: str, variables: Iterable[Var]) -> L.Term:
    out = parse_expr(parse_sexpr(text), Env(variables))
    if not L.is_term(out):
        raise SmtLibError(f"expected a term: {text}")
    return out


def parse_sort(tok) -> Sort:
    try:
        return Sort(tok)
    except ValueError:
        raise SmtLibError(f"unsupported sort {tok!r}") from None


def parse_params(plist) -> List[Var]:
    return [Var(unquote(p[0]), parse_sort(p[1])) for p in plist]


def parse_script(text: str):
    """Read declarations and ``define-fun``s.

    Returns ``(declared_vars, functions)`` where ``functions`` maps a name to
    ``(params, body)``.
    """
    env = Env()
    order: List[str] = []
    for cmd in parse_sexprs(text):
        if not isinstance(cmd, list) or not cmd:
            raise SmtLibError(f"unexpected top-level item {cmd!r}")
        head = cmd[0]
        if head == "declare-const":
            v = Var(unquote(cmd[1]), parse_sort(cmd[2]))
            env.vars[v.name] = v
        elif head == "declare-fun" and cmd[2] == []:
            v = Var(unquote(cmd[1]), parse_sort(cmd[3]))
            env.vars[v.name] = v
        elif head == "define-fun":
            name = unquote(cmd[1])
            params = parse_params(cmd[2])
            inner = Env(list(env.vars.values()) + params)
            inner.funs = env.funs
            body = parse_expr(cmd[4], inner)
            env.funs[name] = (params, body)
            order.append(name)
        elif head in ("set-logic", "set-option", "set-info", "check-sat", "exit"):
            continue
        else:
            raise SmtLibError(f"unsupported command {head!r}")
    return env.vars, {n: env.funs[n] for n in order}
