"""Random well-typed Lustre programs in the supported subset.

``encodable=True`` restricts the shape so the encoder accepts the result:
every local starts from a literal, ``pre`` only reads locals, and integer
``div``/``mod`` is left out.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Tuple

SORTS = ("int", "bool", "real")

HELPERS = {
    # name: (params, output sort, body template using a, b, r)
    "acc": ([("a", "int"), ("b", "int")], "int", "r = 0 -> pre(r) + (if b > 0 then a else 0);"),
    "pick": ([("a", "int"), ("b", "int")], "int", "r = if a >= b then a - b else b;"),
    "edge": ([("a", "bool"), ("b", "bool")], "bool", "r = false -> (a and not pre(a)) or b;"),
    "avg": ([("a", "real"), ("b", "real")], "real", "r = (a + b) / 2.0;"),
}
# helpers reading pre of a parameter: their first value depends on the caller's inputs
STATEFUL_ARGS = {"edge"}


@dataclass
class Generated:
    text: str
    inputs: List[Tuple[str, str]]
    free: List[Tuple[str, str]]
    locals: List[Tuple[str, str]]


class _Gen:
    def __init__(self, rng: random.Random, encodable: bool):
        self.rng = rng
        self.encodable = encodable
        self.helpers_used = set()

    def lit(self, sort):
        r = self.rng
        if sort == "bool":
            return r.choice(["true", "false"])
        if sort == "int":
            return str(r.randint(-3, 5))
        return r.choice(["0.0", "1.5", "0.25", "2.0", "-1.0"])

    def expr(self, sort, depth, cur: Dict[str, str], pres: Dict[str, str], allow_pre: bool) -> str:
        r = self.rng
        names = [n for n, s in cur.items() if s == sort]
        if depth <= 0 or r.random() < 0.25:
            opts = ["lit"] + (["var"] * 3 if names else [])
            if allow_pre and any(s == sort for s in pres.values()):
                opts += ["pre"] * 2
            k = r.choice(opts)
            if k == "lit":
                return self.lit(sort)
            if k == "var":
                return r.choice(names)
            return f"pre({r.choice([n for n, s in pres.items() if s == sort])})"
        e = lambda s=sort, d=depth - 1: self.expr(s, d, cur, pres, allow_pre)  # noqa: E731
        if sort == "bool":
            k = r.choice(["not", "and", "or", "xor", "imp", "cmp_int", "cmp_real", "eq_bool", "if"])
            if k == "not":
                return f"not {e()}"
            if k in ("and", "or", "xor"):
                return f"({e()} {k} {e()})"
            if k == "imp":
                return f"({e()} => {e()})"
            if k == "cmp_int":
                return f"({e('int')} {r.choice(['<', '<=', '=', '<>', '>=', '>'])} {e('int')})"
            if k == "cmp_real":
                return f"({e('real')} {r.choice(['<', '<=', '>=', '>'])} {e('real')})"
            if k == "eq_bool":
                return f"({e()} = {e()})"
            return f"(if {e('bool')} then {e()} else {e()})"
        k = r.choice(["add", "sub", "scale", "neg", "if", "div", "call"])
        if k == "add":
            return f"({e()} + {e()})"
        if k == "sub":
            return f"({e()} - {e()})"
        if k == "scale":
            c = r.choice(["2", "3", "-1"]) if sort == "int" else r.choice(["2.0", "0.5", "-1.5"])
            return f"({c} * {e()})"
        if k == "neg":
            return f"(- {e()})"
        if k == "if":
            return f"(if {e('bool')} then {e()} else {e()})"
        if k == "div":
            if sort == "int" and self.encodable:
                return f"({e()} - {e()})"
            if sort == "int":
                return f"({e()} {r.choice(['div', 'mod'])} {r.choice(['2', '3', '-2'])})"
            return f"({e()} / {r.choice(['2.0', '4.0', '-0.5'])})"
        helpers = [h for h, (ps, out, _) in HELPERS.items()
                   if out == sort and not (self.encodable and h in STATEFUL_ARGS)]
        if not helpers:
            return self.lit(sort)
        h = r.choice(helpers)
        self.helpers_used.add(h)
        args = ", ".join(e(s) for _, s in HELPERS[h][0])
        return f"{h}({args})"


def generate(rng: random.Random, encodable: bool = False) -> Generated:
    g = _Gen(rng, encodable)
    n_in = rng.randint(1, 3)
    inputs = [(f"i{k}", rng.choice(SORTS)) for k in range(n_in)]
    free = [(f"e{k}", rng.choice(SORTS)) for k in range(rng.randint(0, 1))]
    n_loc = rng.randint(1, 5)
    locs = [(f"v{k}", rng.choice(SORTS)) for k in range(n_loc)]
    pres = dict(locs)
    eqs = []
    cur = dict(inputs + free)
    for name, sort in locs:
        if encodable or rng.random() < 0.6:
            init = g.lit(sort) if encodable or rng.random() < 0.5 else g.expr(sort, 1, cur, pres, False)
            step = g.expr(sort, 3, cur, pres, True)
            rhs = f"{init} -> {step}"
        else:
            rhs = g.expr(sort, 3, cur, pres, False)
        eqs.append(f"  {name} = {rhs};")
        cur[name] = sort
    body_prop = g.expr("bool", 2, cur, pres, True)
    eqs.append(f"  ok = true -> {body_prop};")
    asserts = []
    if rng.random() < 0.5:
        asserts.append(f"  assert true -> {g.expr('bool', 2, cur, pres, True)};")

    parts = []
    if rng.random() < 0.3:
        parts.append(f"const K = {rng.randint(1, 4)};")
    for h in sorted(g.helpers_used):
        ps, out, body = HELPERS[h]
        params = "; ".join(f"{a}: {s}" for a, s in ps)
        parts.append(f"node {h}({params}) returns (r: {out});\nlet\n  {body}\ntel")
    params = "; ".join(f"{n}: {s}" for n, s in inputs + free)
    realizable = ", ".join(n for n, _ in inputs)
    var = ("var " + "; ".join(f"{n}: {s}" for n, s in locs) + ";\n") if locs else ""
    parts.append(f"node main({params}) returns (ok: bool);\n{var}let\n"
                 f"  --%REALIZABLE {realizable};\n  --%PROPERTY ok;\n"
                 + "\n".join(asserts + eqs) + "\ntel")
    return Generated("\n\n".join(parts) + "\n", inputs, free, locs)


def random_value(rng: random.Random, sort: str):
    if sort == "bool":
        return rng.random() < 0.5
    if sort == "int":
        return Fraction(rng.randint(-4, 4))
    return Fraction(rng.randint(-8, 8), rng.choice([1, 2, 4]))
