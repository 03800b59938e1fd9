"""C99 emission of a controller.

Two numeric modes: ``double`` for speed, and ``rational``, which carries
reals as normalized int64 numerator/denominator pairs so that traces can be
compared exactly against the Python interpreter.  Integers are ``long long``
and booleans ``bool`` in both modes.

The optional ``main`` (compiled with ``-DREACSYNTH_MAIN``) reads one input
vector per line from stdin and prints the initial state and each successor.
Numbers on both sides use ``n/d`` text for rationals.
"""
from __future__ import annotations

import hashlib
from fractions import Fraction
from typing import List

from . import logic as L
from .encoder import TransitionSystem
from .logic import Sort, Var
from .runtime import Controller

MODES = ("double", "rational")


def contract_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _ident(name: str) -> str:
    out = "".join(c if c.isalnum() or c == "_" else "_" for c in name)
    return "v_" + out


class _Emitter:
    def __init__(self, c: Controller, mode: str):
        if mode not in MODES:
            raise ValueError(f"unknown numeric mode {mode!r}")
        self.c = c
        self.mode = mode
        self.state = set(c.state_vars)
        self.inputs = set(c.input_vars)
        self.rational = mode == "rational"

    def ref(self, v: Var) -> str:
        if v in self.state:
            return f"s->{_ident(v.name)}"
        if v in self.inputs:
            return f"in->{_ident(v.name)}"
        raise ValueError(f"variable {v.name} is neither state nor input")

    def real_const(self, q: Fraction) -> str:
        if self.rational:
            return f"rat_make({q.numerator}LL, {q.denominator}LL)"
        if q.denominator == 1:
            return f"{q.numerator}.0"
        return f"({q.numerator}.0 / {q.denominator}.0)"

    def term(self, t, sort: Sort) -> str:
        """``t`` rendered at ``sort`` (Int subterms are widened inside Real ones)."""
        own = L.sort_of(t)
        if sort is Sort.REAL and own is Sort.INT:
            inner = self.term(t, Sort.INT)
            return f"rat_int({inner})" if self.rational else f"((double)({inner}))"
        if isinstance(t, L.Const):
            if sort is Sort.INT:
                return f"{int(t.value)}LL"
            return self.real_const(t.value)
        if isinstance(t, Var):
            return self.ref(t)
        if isinstance(t, L.Neg):
            a = self.term(t.arg, sort)
            return f"rat_neg({a})" if (self.rational and sort is Sort.REAL) else f"(-{a})"
        if isinstance(t, L.Add):
            parts = [self.term(a, sort) for a in t.args]
            if self.rational and sort is Sort.REAL:
                acc = parts[0]
                for p in parts[1:]:
                    acc = f"rat_add({acc}, {p})"
                return acc
            return "(" + " + ".join(parts) + ")"
        if isinstance(t, L.Scale):
            a = self.term(t.arg, sort)
            k = t.coef
            if sort is Sort.INT:
                if k.denominator != 1:
                    raise ValueError("fractional coefficient on an integer term")
                return f"({k.numerator}LL * {a})"
            if self.rational:
                return f"rat_scale({a}, {k.numerator}LL, {k.denominator}LL)"
            return f"({self.real_const(k)} * {a})"
        if isinstance(t, L.Ite):
            c = self.formula(t.cond)
            return f"({c} ? {self.term(t.then, sort)} : {self.term(t.other, sort)})"
        raise TypeError(f"not a term: {t!r}")

    def formula(self, f) -> str:
        if isinstance(f, L.BoolConst):
            return "true" if f.value else "false"
        if isinstance(f, Var):
            return self.ref(f)
        if isinstance(f, L.Not):
            return f"(!{self.formula(f.arg)})"
        if isinstance(f, L.And):
            return "(" + " && ".join(self.formula(a) for a in f.args) + ")"
        if isinstance(f, L.Or):
            return "(" + " || ".join(self.formula(a) for a in f.args) + ")"
        if isinstance(f, L.Implies):
            return f"(!{self.formula(f.lhs)} || {self.formula(f.rhs)})"
        if isinstance(f, L.Iff):
            return f"({self.formula(f.lhs)} == {self.formula(f.rhs)})"
        if isinstance(f, L.Atom):
            sort = Sort.REAL if Sort.REAL in (L.sort_of(f.lhs), L.sort_of(f.rhs)) else Sort.INT
            op = {"=": "==", "!=": "!="}.get(f.op, f.op)
            a, b = self.term(f.lhs, sort), self.term(f.rhs, sort)
            if self.rational and sort is Sort.REAL:
                return f"(rat_cmp({a}, {b}) {op} 0)"
            return f"({a} {op} {b})"
        raise TypeError(f"not a formula: {f!r}")

    def value(self, v: Var, x) -> str:
        if v.sort is Sort.BOOL:
            return "true" if x else "false"
        if v.sort is Sort.INT:
            return f"{int(x)}LL"
        return self.real_const(Fraction(x))

    def ctype(self, v: Var) -> str:
        if v.sort is Sort.BOOL:
            return "bool"
        if v.sort is Sort.INT:
            return "long long"
        return "rat_t" if self.rational else "double"

    def assignment(self, case, indent: str) -> List[str]:
        out = []
        for s, n in zip(self.c.state_vars, self.c.next_vars):
            t = case.assignment[n]
            rhs = self.formula(t) if s.sort is Sort.BOOL else self.term(t, s.sort)
            out.append(f"{indent}n.{_ident(s.name)} = {rhs};")
        return out


_RAT_SUPPORT = r"""
typedef struct { long long n; long long d; } rat_t;

static inline long long rat_gcd(long long a, long long b)
{
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) { long long t = a % b; a = b; b = t; }
    return a;
}

static inline rat_t rat_make(long long n, long long d)
{
    rat_t r;
    long long g;
    if (d < 0) { n = -n; d = -d; }
    g = rat_gcd(n, d);
    if (g > 1) { n /= g; d /= g; }
    r.n = n;
    r.d = d;
    return r;
}

static inline rat_t rat_int(long long x) { return rat_make(x, 1); }
static inline rat_t rat_neg(rat_t a) { return rat_make(-a.n, a.d); }

static inline rat_t rat_add(rat_t a, rat_t b)
{
    long long g = rat_gcd(a.d, b.d);
    return rat_make(a.n * (b.d / g) + b.n * (a.d / g), (a.d / g) * b.d);
}

static inline rat_t rat_scale(rat_t a, long long n, long long d)
{
    long long g1 = rat_gcd(a.n, d), g2 = rat_gcd(n, a.d);
    if (g1 == 0) g1 = 1;
    if (g2 == 0) g2 = 1;
    return rat_make((a.n / g1) * (n / g2), (a.d / g2) * (d / g1));
}

static inline int rat_cmp(rat_t a, rat_t b)
{
    rat_t diff = rat_add(a, rat_neg(b));
    return (diff.n > 0) - (diff.n < 0);
}
"""


def emit_c(c: Controller, ts: TransitionSystem = None, mode: str = "double",
           source_hash: str = None) -> str:
    """A self-contained C99 translation unit implementing ``c``."""
    em = _Emitter(c, mode)
    name = ts.name if ts is not None else "controller"
    if source_hash is None:
        source_hash = contract_hash(ts.dump() if ts is not None else c.to_json())
    lines: List[str] = [
        f"/* Controller for node {name}, generated by reacsynth. */",
        f"/* contract sha256: {source_hash} */",
        f"/* numeric mode: {mode} */",
        "#include <stdbool.h>",
        "#include <stdio.h>",
        "#include <stdlib.h>",
        "#include <string.h>",
    ]
    if em.rational:
        lines.extend(_RAT_SUPPORT.strip("\n").splitlines())
    lines.append("")
    lines.append("typedef struct {")
    for v in c.state_vars:
        lines.append(f"    {em.ctype(v)} {_ident(v.name)};")
    if not c.state_vars:
        lines.append("    int unused;")
    lines.append("} state;")
    lines.append("")
    lines.append("typedef struct {")
    for v in c.input_vars:
        lines.append(f"    {em.ctype(v)} {_ident(v.name)};")
    if not c.input_vars:
        lines.append("    int unused;")
    lines.append("} inputs;")
    lines.append("")
    lines.append("void init(state *s)")
    lines.append("{")
    if not c.state_vars:
        lines.append("    s->unused = 0;")
    for v in c.state_vars:
        lines.append(f"    s->{_ident(v.name)} = {em.value(v, c.initial[v])};")
    lines.append("}")
    lines.append("")
    lines.append("void step(state *s, const inputs *in)")
    lines.append("{")
    lines.append("    state n;")
    lines.append("    (void)in;")
    lines.append("    memset(&n, 0, sizeof n);")
    cases = list(c.cases)
    if len(cases) == 1:
        lines.extend(em.assignment(cases[0], "    "))
    else:
        for k, case in enumerate(cases):
            if k == 0:
                lines.append(f"    if ({em.formula(case.guard)}) {{")
            elif k < len(cases) - 1:
                lines.append(f"    }} else if ({em.formula(case.guard)}) {{")
            else:
                lines.append("    } else {")
            lines.extend(em.assignment(case, "        "))
        lines.append("    }")
    lines.append("    *s = n;")
    lines.append("}")
    lines.extend(_harness(c, em))
    return "\n".join(lines) + "\n"


def _harness(c: Controller, em: _Emitter) -> List[str]:
    out = ["", "#ifdef REACSYNTH_MAIN"]
    if em.rational:
        out += [
            "static inline rat_t read_num(const char *tok)",
            "{",
            "    long long n = 0, d = 1;",
            "    if (sscanf(tok, \"%lld/%lld\", &n, &d) < 1) exit(2);",
            "    return rat_make(n, d);",
            "}",
            "",
            "static inline void print_num(rat_t x) { printf(\" %lld/%lld\", x.n, x.d); }",
        ]
    else:
        out += [
            "static inline double read_num(const char *tok)",
            "{",
            "    double n = 0.0, d = 1.0;",
            "    if (sscanf(tok, \"%lf/%lf\", &n, &d) < 1) exit(2);",
            "    return n / d;",
            "}",
            "",
            "static inline void print_num(double x) { printf(\" %.17g\", x); }",
        ]
    out += ["", "static void print_state(const state *s)", "{"]
    for v in c.state_vars:
        f = _ident(v.name)
        if v.sort is Sort.REAL:
            out.append(f"    print_num(s->{f});")
        elif v.sort is Sort.INT:
            out.append(f"    printf(\" %lld\", s->{f});")
        else:
            out.append(f"    printf(\" %d\", s->{f} ? 1 : 0);")
    out += ["    printf(\"\\n\");", "}", "",
            "int main(void)", "{",
            "    char line[4096];",
            "    state s;",
            "    init(&s);",
            "    print_state(&s);",
            "    while (fgets(line, sizeof line, stdin) != NULL) {",
            "        inputs in;",
            "        char *tok = strtok(line, \" \\t\\r\\n\");",
            "        memset(&in, 0, sizeof in);"]
    for v in c.input_vars:
        f = _ident(v.name)
        out.append("        if (tok == NULL) return 2;")
        if v.sort is Sort.REAL:
            out.append(f"        in.{f} = read_num(tok);")
        elif v.sort is Sort.INT:
            out.append(f"        in.{f} = atoll(tok);")
        else:
            out.append(f"        in.{f} = atoi(tok) != 0;")
        out.append("        tok = strtok(NULL, \" \\t\\r\\n\");")
    out += ["        (void)tok;",
            "        step(&s, &in);",
            "        print_state(&s);",
            "    }",
            "    return 0;",
            "}",
            "#endif"]
    return out


def loc(source: str) -> int:
    """Non-blank source lines."""
    return sum(1 for ln in source.splitlines() if ln.strip())


def format_inputs(c: Controller, script) -> str:
    """Input script text for the emitted ``main``."""
    rows = []
    for i in script:
        vals = []
        for v in c.input_vars:
            x = i[v]
            if v.sort is Sort.BOOL:
                vals.append("1" if x else "0")
            elif v.sort is Sort.INT:
                vals.append(str(int(x)))
            else:
                q = Fraction(x)
                vals.append(f"{q.numerator}/{q.denominator}")
        rows.append(" ".join(vals) if vals else "-")
    return "\n".join(rows) + "\n"


def parse_states(c: Controller, text: str, mode: str) -> List[dict]:
    """Inverse of the harness's ``print_state`` output."""
    out = []
    for line in text.strip().splitlines():
        toks = line.split()
        row = {}
        for v, tok in zip(c.state_vars, toks):
            if v.sort is Sort.BOOL:
                row[v] = tok == "1"
            elif v.sort is Sort.INT:
                row[v] = Fraction(int(tok))
            elif mode == "rational":
                row[v] = Fraction(tok)
            else:
                row[v] = float(tok)
        out.append(row)
    return out
