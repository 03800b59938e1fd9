"""Executable controllers: stepping, random admissible environments, simulation."""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import logic as L
from . import smtlib
from .aeval import SkolemCase
from .encoder import TransitionSystem
from .engine import Realizable
from .logic import Sort, Var
from .smt import Sat, SmtSolver, SolverConfig, Unsat

SCHEMA_VERSION = 1


class NoCaseMatched(Exception):
    """No Skolem guard holds: the controller was used outside F & A."""


class NoAdmissibleInput(Exception):
    """The assumptions admit no input at this state."""


@dataclass
class Controller:
    state_vars: Tuple[Var, ...]
    input_vars: Tuple[Var, ...]
    next_vars: Tuple[Var, ...]
    initial: Dict[Var, object]
    cases: Tuple[SkolemCase, ...]
    _compiled: list = field(default=None, repr=False, compare=False)

    @classmethod
    def from_outcome(cls, ts: TransitionSystem, outcome: Realizable) -> "Controller":
        return cls(tuple(ts.state_vars), tuple(ts.input_vars), tuple(ts.next_vars),
                   dict(outcome.initial), tuple(outcome.skolem.cases))

    def compiled(self):
        if self._compiled is None:
            out = []
            for c in self.cases:
                assigns = []
                for s, n in zip(self.state_vars, self.next_vars):
                    t = c.assignment[n]
                    fn = L.compile_formula(t) if s.sort is Sort.BOOL else L.compile_term(t)
                    assigns.append((s, fn))
                out.append((L.compile_formula(c.guard), assigns))
            self._compiled = out
        return self._compiled

    # -- serialization

    def to_json(self) -> str:
        def val(v, x):
            return ("true" if x else "false") if v.sort is Sort.BOOL else smtlib.numeral(Fraction(x), v.sort)
        doc = {
            "schema": SCHEMA_VERSION,
            "stateVars": [{"name": v.name, "sort": v.sort.value} for v in self.state_vars],
            "inputVars": [{"name": v.name, "sort": v.sort.value} for v in self.input_vars],
            "initial": {v.name: val(v, self.initial[v]) for v in self.state_vars},
            "cases": [{"guard": smtlib.to_text(c.guard),
                       "assigns": {n.name: smtlib.to_text(c.assignment[n]) for n in self.next_vars}}
                      for c in self.cases],
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "Controller":
        from .encoder import primed
        doc = json.loads(text)
        if doc.get("schema") != SCHEMA_VERSION:
            raise ValueError(f"unsupported controller schema {doc.get('schema')}")
        svars = [Var(d["name"], Sort(d["sort"])) for d in doc["stateVars"]]
        ivars = [Var(d["name"], Sort(d["sort"])) for d in doc["inputVars"]]
        nvars = [primed(v) for v in svars]
        scope = svars + ivars
        initial = {v: smtlib.parse_value(smtlib.parse_sexpr(doc["initial"][v.name])) for v in svars}
        cases = []
        for c in doc["cases"]:
            guard = smtlib.parse_formula(c["guard"], scope)
            assign = {}
            for n in nvars:
                text = c["assigns"][n.name]
                assign[n] = (smtlib.parse_formula(text, scope) if n.sort is Sort.BOOL
                             else smtlib.parse_term(text, scope))
            cases.append(SkolemCase(guard, assign))
        return cls(tuple(svars), tuple(ivars), tuple(nvars), initial, tuple(cases))


def run_step(c: Controller, s: Dict[Var, object], i: Dict[Var, object]) -> Dict[Var, object]:
    """Next state: the assignment of the first case whose guard holds at (s, i)."""
    env = dict(s)
    env.update(i)
    for guard, assigns in c.compiled():
        if guard(env):
            return {v: fn(env) for v, fn in assigns}
    raise NoCaseMatched(f"no case matches at {L.format_model(env)}")


def select_case(c: Controller, s, i) -> int:
    env = dict(s)
    env.update(i)
    for k, (guard, _) in enumerate(c.compiled()):
        if guard(env):
            return k
    raise NoCaseMatched(f"no case matches at {L.format_model(env)}")


# ---------------------------------------------------------------- environment

def _dyadic(rng: random.Random, lo: Fraction, hi: Fraction, bits: int = 6) -> Fraction:
    k = rng.randrange(0, 2 ** bits + 1)
    return lo + (hi - lo) * Fraction(k, 2 ** bits)


class InputSampler:
    """Random admissible inputs: random window constraints, relaxed when infeasible.

    When ``A`` does not mention the state, it is asserted once in a solver frame
    and reused for every sample.
    """

    def __init__(self, A: L.Formula, state_vars: Sequence[Var], input_vars: Sequence[Var],
                 solver: SmtSolver, seed: int = 0):
        self.A = A
        self.state_vars = tuple(state_vars)
        self.input_vars = tuple(input_vars)
        self.solver = solver
        self.rng = random.Random(seed)
        self.state_free = not (set(L.free_vars(A)) & set(state_vars))
        self._framed = False
        self._anchor: Dict[Var, object] = {}

    def close(self):
        if self._framed:
            self.solver.pop()
            self._framed = False

    def _windows(self, anchor: Dict[Var, object]) -> List[L.Formula]:
        rng = self.rng
        out = []
        k = rng.randint(1, max(1, len(self.input_vars)))
        for v in rng.sample(list(self.input_vars), min(k, len(self.input_vars))):
            if v.sort is Sort.BOOL:
                out.append(v if rng.random() < 0.5 else L.Not(v))
                continue
            # snap to a coarse grid so denominators do not compound across steps
            a = Fraction(round(Fraction(anchor.get(v, 0)) * 64), 64)
            radius = 1 + abs(a)
            c = _dyadic(rng, a - radius, a + radius)
            w = radius * Fraction(1, 2 ** rng.randint(1, 4))
            if v.sort is Sort.INT:
                lo, hi = int(c - w) - 1, int(c + w) + 1
                out.append(L.conj(L.ge(v, L.Const(lo, Sort.INT)), L.le(v, L.Const(hi, Sort.INT))))
            else:
                out.append(L.conj(L.ge(v, L.Const(c - w)), L.le(v, L.Const(c + w))))
        return out

    def sample(self, s: Dict[Var, object]) -> Dict[Var, object]:
        if self.state_free:
            A_s = self.A
        else:
            A_s = L.simplify(L.substitute(self.A, {v: _as_expr(v, s[v]) for v in self.state_vars}))
        if not self.input_vars:
            if L.eval_formula(A_s, {}):
                return {}
            raise NoAdmissibleInput("assumption is false at this state")
        solver = self.solver
        if self.state_free:
            if not self._framed:
                solver.push(self.input_vars)
                solver.add(A_s)
                self._framed = True
            base = None
        else:
            base = A_s
        windows = self._windows(self._anchor)
        attempts = [windows, [w for w in windows if self.rng.random() < 0.5], []]
        for extra in attempts:
            with solver.frame(self.input_vars):
                if base is not None:
                    solver.add(base)
                for w in extra:
                    solver.add(w)
                res = solver.check()
            if isinstance(res, Sat):
                m = {v: res.model[v] for v in self.input_vars}
                self._anchor = m
                return m
            if not isinstance(res, Unsat):
                raise RuntimeError(f"solver could not sample an input: {res}")
        raise NoAdmissibleInput(f"assumption is unsatisfiable at {L.format_model(s)}")



def _as_expr(v: Var, x):
    if v.sort is Sort.BOOL:
        return L.TRUE if x else L.FALSE
    return L.Const(Fraction(x), v.sort)


def sample_input(A: L.Formula, s: Dict[Var, object], input_vars: Sequence[Var],
                 solver: SmtSolver, seed: int = 0) -> Dict[Var, object]:
    """One admissible input at state ``s``."""
    sampler = InputSampler(A, list(s), input_vars, solver, seed)
    try:
        return sampler.sample(s)
    finally:
        sampler.close()


# ---------------------------------------------------------------- simulation

@dataclass
class Trace:
    states: List[Dict[Var, object]] = field(default_factory=list)
    inputs: List[Dict[Var, object]] = field(default_factory=list)
    guarantee: List[bool] = field(default_factory=list)


@dataclass
class SimulationReport:
    steps: int
    violations: int
    no_input: bool = False  # stopped early: assumptions admitted no input
    trace: Optional[Trace] = None


def simulate(c: Controller, ts: TransitionSystem, steps: int, seed: int = 0,
             solver_config: SolverConfig = None, fixpoint: L.Formula = None,
             record: bool = False, inputs: Sequence[Dict[Var, object]] = None
             ) -> SimulationReport:
    """Run the controller against a random admissible environment.

    A step violates the contract if ``G_T`` fails on the taken transition, the
    property is false in the new state, or the new state leaves ``fixpoint``.
    A scripted ``inputs`` sequence replaces the sampler when given.
    """
    g_t = L.compile_formula(ts.G_T)
    g_i = L.compile_formula(ts.G_I)
    in_f = L.compile_formula(fixpoint) if fixpoint is not None else None
    nxt = ts.next_of
    prop = ts.property
    trace = Trace() if record else None
    s = dict(c.initial)
    violations = 0 if g_i(s) else 1
    if trace:
        trace.states.append(dict(s))
    solver = None
    sampler = None
    if inputs is None:
        solver = SmtSolver(solver_config or SolverConfig(seed=seed))
        sampler = InputSampler(ts.A, ts.state_vars, ts.input_vars, solver, seed)
    done = 0
    try:
        for k in range(steps):
            if inputs is not None:
                i = inputs[k]
            else:
                try:
                    i = sampler.sample(s)
                except NoAdmissibleInput:
                    return SimulationReport(done, violations, True, trace)
            s2 = run_step(c, s, i)
            env = dict(s)
            env.update(i)
            env.update({nxt[v]: x for v, x in s2.items()})
            ok = g_t(env) and (prop is None or bool(s2[prop]))
            if in_f is not None and not in_f(s2):
                ok = False
            if not ok:
                violations += 1
            if trace:
                trace.inputs.append(dict(i))
                trace.states.append(dict(s2))
                trace.guarantee.append(ok)
            s = s2
            done += 1
    finally:
        if sampler is not None:
            sampler.close()
        if solver is not None:
            solver.close()
    return SimulationReport(done, violations, False, trace)


def input_script(ts: TransitionSystem, c: Controller, steps: int, seed: int = 0,
                 solver_config: SolverConfig = None) -> List[Dict[Var, object]]:
    """A recorded sequence of admissible inputs along the controller's own run."""
    rep = simulate(c, ts, steps, seed, solver_config, record=True)
    return rep.trace.inputs
