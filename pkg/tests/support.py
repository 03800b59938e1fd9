"""Shared helpers for the test suite: benchmark loading, random generators, brute-force oracles."""
from __future__ import annotations

import itertools
import random
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Sequence

from hypothesis import strategies as st

from reacsynth import logic as L
from reacsynth.aeval import AeQuery
from reacsynth.encoder import TransitionSystem, encode, primed
from reacsynth.logic import Sort, Var
from reacsynth.lustre import load

ROOT = Path(__file__).resolve().parents[1]
BENCH = ROOT / "benchmarks"

REALIZABLE_BENCH = ["arbiter", "cinderella_c2", "cinderella_c3", "clamp_calls", "clock",
                    "counter_ctrl_reset", "integrator", "tank", "thermostat", "toggle"]
UNREALIZABLE_BENCH = ["arbiter_tight", "bad_init", "cinderella_unreal", "counter_env_reset",
                      "counter_overflow", "integrator_tight", "tank_overflow", "thermostat_tight"]


def bench_text(name: str) -> str:
    return (BENCH / f"{name}.lus").read_text()


def bench_ts(name: str) -> TransitionSystem:
    return encode(load(bench_text(name)))


def cinderella_text(C: str = "2.0", assumptions: bool = True) -> str:
    text = bench_text("cinderella_c2").replace("const C = 2.0;", f"const C = {C};")
    if not assumptions:
        text = "\n".join(l for l in text.splitlines() if not l.strip().startswith("assert"))
    return text


# ------------------------------------------------------------- logic strategies

X = Var("x", Sort.REAL)
Y = Var("y", Sort.REAL)
N = Var("n", Sort.INT)
M = Var("m", Sort.INT)
P = Var("p", Sort.BOOL)
Q = Var("q", Sort.BOOL)
NUMERIC = [X, Y, N, M]
BOOLS = [P, Q]

small = st.fractions(min_value=-6, max_value=6, max_denominator=4)
coef = st.sampled_from([Fraction(c) for c in (-3, -2, -1, 1, 2, 3)] + [Fraction(1, 2)])


@st.composite
def terms(draw, depth=2):
    if depth == 0 or draw(st.integers(0, 2)) == 0:
        if draw(st.booleans()):
            return draw(st.sampled_from(NUMERIC))
        return L.Const(draw(small))
    kind = draw(st.sampled_from(["add", "scale", "neg", "ite"]))
    if kind == "add":
        return L.Add((draw(terms(depth - 1)), draw(terms(depth - 1))))
    if kind == "scale":
        return L.Scale(draw(coef), draw(terms(depth - 1)))
    if kind == "neg":
        return L.Neg(draw(terms(depth - 1)))
    return L.Ite(draw(formulas(depth - 1)), draw(terms(depth - 1)), draw(terms(depth - 1)))


@st.composite
def formulas(draw, depth=2):
    if depth == 0 or draw(st.integers(0, 3)) == 0:
        k = draw(st.integers(0, 4))
        if k == 0:
            return draw(st.sampled_from(BOOLS))
        if k == 1:
            return L.BoolConst(draw(st.booleans()))
        op = draw(st.sampled_from(["<", "<=", "=", "!=", ">=", ">"]))
        return L.Atom(op, draw(terms(1)), draw(terms(1)))
    kind = draw(st.sampled_from(["and", "or", "not", "implies", "iff"]))
    a = draw(formulas(depth - 1))
    if kind == "not":
        return L.Not(a)
    b = draw(formulas(depth - 1))
    return {"and": lambda: L.And((a, b)), "or": lambda: L.Or((a, b)),
            "implies": lambda: L.Implies(a, b), "iff": lambda: L.Iff(a, b)}[kind]()


@st.composite
def models(draw):
    m: Dict[Var, object] = {}
    for v in NUMERIC:
        m[v] = Fraction(draw(st.integers(-4, 4))) if v.sort is Sort.INT else draw(small)
    for v in BOOLS:
        m[v] = draw(st.booleans())
    return m


# ------------------------------------------------------------- random forall-exists queries

def random_query(rng: random.Random, ints: bool = False) -> AeQuery:
    """≤3 x-vars, ≤2 y-vars, ≤8 atoms.

    Int queries keep unit coefficients on the y vars and bound each y to a
    small box, so the region is a finite union of projections.
    """
    sort = Sort.INT if ints else Sort.REAL
    xs = [Var(f"x{k}", sort) for k in range(rng.randint(1, 3))]
    ys = [Var(f"y{k}", sort) for k in range(rng.randint(1, 2))]

    def lin(vs, unit=False):
        parts = []
        for v in rng.sample(vs, rng.randint(1, len(vs))):
            c = rng.choice([1, -1]) if unit else rng.choice([1, -1, 2, -2, 3])
            parts.append(L.scale(c, v))
        parts.append(L.num(rng.randint(-4, 4), sort))
        return L.add(*parts)

    def atom():
        op = rng.choice(["<", "<=", "=", ">=", ">"] if not ints else ["<=", ">=", "=", "<"])
        if ints:
            lhs = L.add(lin(ys, unit=True), L.scale(rng.choice([1, -1, 2]), rng.choice(xs)))
        else:
            lhs = lin(xs + ys)
        return L.Atom(op, lhs, L.num(rng.randint(-3, 3), sort))

    n_atoms = rng.randint(1, 8)
    box = []
    if ints:
        for y in ys:
            box += [L.ge(y, L.num(-3, sort)), L.le(y, L.num(3, sort))]
        n_atoms = max(1, n_atoms - len(box))
    body = [atom() for _ in range(n_atoms)]
    # a little boolean structure
    if len(body) >= 3 and rng.random() < 0.6:
        k = rng.randint(1, len(body) - 1)
        body = [L.disj(L.conj(body[:k]), L.conj(body[k:]))]
    T = L.conj(box + body)
    S = L.TRUE
    if rng.random() < 0.5:
        x = rng.choice(xs)
        S = L.conj(L.ge(x, L.num(-5, sort)), L.le(x, L.num(5, sort)))
    return AeQuery(tuple(xs), tuple(ys), S, T)


def brute_exists(q: AeQuery, xval: Dict[Var, object], lo=-3, hi=3) -> bool:
    """∃ys.T by enumeration over an int box (valid for the boxed int queries)."""
    for ys in itertools.product(range(lo, hi + 1), repeat=len(q.ys)):
        env = dict(xval)
        env.update({y: Fraction(v) for y, v in zip(q.ys, ys)})
        if L.eval_formula(q.T, env):
            return True
    return False


# ------------------------------------------------------------- random finite contracts

def random_finite_ts(rng: random.Random, index: int = 0) -> TransitionSystem:
    """A transition system over ≤3 state vars ranging over Bool or Int[0..3].

    Every numeric var is explicitly bounded in G_I, G_T (primed) and A, so the
    explicit-state oracle applies.
    """
    n_state = rng.randint(1, 3)
    n_input = rng.randint(0, 2)
    svars = [Var(f"s{k}", rng.choice([Sort.BOOL, Sort.INT])) for k in range(n_state)]
    ivars = [Var(f"i{k}", rng.choice([Sort.BOOL, Sort.INT])) for k in range(n_input)]
    nvars = [primed(v) for v in svars]

    def bounds(v):
        if v.sort is Sort.BOOL:
            return []
        return [L.ge(v, L.num(0, Sort.INT)), L.le(v, L.num(3, Sort.INT))]

    def int_term(pool):
        ints = [v for v in pool if v.sort is Sort.INT]
        if not ints or rng.random() < 0.2:
            return L.num(rng.randint(0, 3), Sort.INT)
        t = rng.choice(ints)
        if rng.random() < 0.5:
            t = L.add(t, L.num(rng.choice([-1, 1, 2]), Sort.INT))
        if len(ints) > 1 and rng.random() < 0.3:
            t = L.add(t, rng.choice(ints))
        return t

    def cond(pool):
        bools = [v for v in pool if v.sort is Sort.BOOL]
        if bools and rng.random() < 0.5:
            b = rng.choice(bools)
            return b if rng.random() < 0.5 else L.Not(b)
        return L.Atom(rng.choice(["<=", ">=", "=", "<"]), int_term(pool),
                      L.num(rng.randint(0, 3), Sort.INT))

    cur = svars + ivars
    trans: List[L.Formula] = []
    for s, n in zip(svars, nvars):
        trans += bounds(n)
        mode = rng.random()
        if mode < 0.45:  # environment-driven update
            if s.sort is Sort.BOOL:
                trans.append(L.Iff(n, cond(cur)))
            else:
                trans.append(L.eq(n, L.ite(cond(cur), int_term(cur), int_term(cur))))
        elif mode < 0.75:  # constrained choice
            if s.sort is Sort.BOOL:
                trans.append(L.Implies(cond(cur), n if rng.random() < 0.5 else L.Not(n)))
            else:
                trans.append(L.Atom(rng.choice(["<=", ">="]), n, int_term(cur)))
        # else: free choice within bounds
    if rng.random() < 0.7:
        trans.append(L.Implies(cond(cur), cond(nvars)))
    init = [b for v in svars for b in bounds(v)]
    if rng.random() < 0.8:
        init.append(cond(svars))
    assume = [b for v in ivars for b in bounds(v)]
    if ivars and rng.random() < 0.4:
        assume.append(L.Implies(cond(svars), cond(ivars)))
    return TransitionSystem(
        name=f"random{index}", state_vars=svars, input_vars=ivars, next_vars=nvars,
        A=L.lift_ite(L.conj(assume)), G_I=L.lift_ite(L.conj(init)),
        G_T=L.lift_ite(L.conj(trans)))


def refinement_chain(history) -> List[L.Formula]:
    """F_0, F_1, ... rebuilt from the recorded violating regions."""
    out = [L.TRUE]
    for ref in history:
        out.append(L.conj(out[-1], L.neg(ref.W)))
    return out


def values_close(a, b, tol=1e-9) -> bool:
    if isinstance(a, bool) or isinstance(b, bool):
        return a == b
    return abs(float(a) - float(b)) <= tol


def grid(vs: Sequence[Var], lo=-4, hi=4):
    for vals in itertools.product(range(lo, hi + 1), repeat=len(vs)):
        yield {v: Fraction(x) for v, x in zip(vs, vals)}


# ------------------------------------------------------------- C toolchain

STRICT_C_FLAGS = ["-std=c99", "-Wall", "-Wextra", "-pedantic", "-Werror"]


def c_compiler():
    import shutil
    for cc in ("gcc", "clang", "cc"):
        path = shutil.which(cc)
        if path:
            return path
    return None


def compile_c(source: str, workdir: Path, name: str = "ctl", main: bool = True):
    import subprocess
    src = workdir / f"{name}.c"
    exe = workdir / name
    src.write_text(source)
    flags = STRICT_C_FLAGS + (["-DREACSYNTH_MAIN"] if main else ["-c"])
    out = exe if main else workdir / f"{name}.o"
    res = subprocess.run([c_compiler(), *flags, "-o", str(out), str(src)],
                         capture_output=True, text=True)
    return res, out


def run_emitted(exe: Path, stdin: str) -> str:
    import subprocess
    res = subprocess.run([str(exe)], input=stdin, capture_output=True, text=True, timeout=120)
    assert res.returncode == 0, res.stderr
    return res.stdout


# criterion number -> one-line verdict, printed in the terminal summary
ACCEPTANCE: Dict[int, str] = {}


def report(criterion: int, ok: bool, detail: str) -> None:
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE[criterion] = line
    print(line)
