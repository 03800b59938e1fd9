"""Greatest-fixpoint synthesis driven by forall-exists validity checks.

Starting from ``F = true`` the engine asks whether every state in ``F``
can answer every admissible input with a successor inside ``F``.  If not,
the states that admit an input escaping the region of validity are removed
from ``F`` and the question is repeated.
"""
from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, TextIO, Union

from . import aeval
from . import logic as L
from .aeval import AeInvalid, AeQuery, AeUnknown, AeValid, RegionOfValidity, SkolemFunction
from .encoder import TransitionSystem
from .logic import Var
from .smt import CounterModel, Sat, SmtSolver, Unknown as SmtUnknown, Unsat, Valid

log = logging.getLogger(__name__)


@dataclass
class EngineConfig:
    max_iterations: int = 200
    time_budget: float = 600.0
    max_disjuncts: int = aeval.DEFAULT_MAX_DISJUNCTS
    prune_threshold: int = 16
    check_progress: bool = True
    check_monotone: bool = False
    trace: Optional[TextIO] = None


@dataclass
class Refinement:
    iteration: int
    Q: L.Formula
    W: L.Formula
    progress: Optional[bool] = None  # F_k & ~F_{k+1} satisfiable
    monotone: Optional[bool] = None


@dataclass
class EngineState:
    blocks: List[L.Formula] = field(default_factory=list)
    iteration: int = 0
    history: List[Refinement] = field(default_factory=list)

    @property
    def F(self) -> L.Formula:
        return L.conj(self.blocks)


@dataclass
class Realizable:
    initial: Dict[Var, object]
    skolem: SkolemFunction
    fixpoint: L.Formula
    iterations: int
    history: List[Refinement]
    elapsed: float = 0.0
    verdict: str = "realizable"


@dataclass
class Unrealizable:
    final_F: L.Formula
    last_region: Optional[RegionOfValidity]
    iterations: int
    history: List[Refinement]
    elapsed: float = 0.0
    verdict: str = "unrealizable"


@dataclass
class Unknown:
    reason: str
    iterations: int
    history: List[Refinement]
    elapsed: float = 0.0
    verdict: str = "unknown"


SynthesisOutcome = Union[Realizable, Unrealizable, Unknown]


def viability_query(ts: TransitionSystem, F: L.Formula) -> AeQuery:
    """``forall s, i. F & A => exists s'. G_T & F[s := s']``."""
    return AeQuery(tuple(ts.state_vars) + tuple(ts.input_vars), ts.next_vars,
                   L.conj(F, ts.A), L.conj(ts.G_T, ts.prime(F)))


def violation_query(ts: TransitionSystem, F: L.Formula, Q: L.Formula) -> AeQuery:
    """``forall s. F => exists i. A & ~Q``: its region is the set of states with an escaping input."""
    return AeQuery(ts.state_vars, ts.input_vars, F, L.conj(ts.A, L.neg(Q)))


def _prune(blocks: List[L.Formula], solver: SmtSolver, scope) -> List[L.Formula]:
    kept = list(blocks)
    k = 0
    while k < len(kept):
        others = kept[:k] + kept[k + 1:]
        res = solver.check_valid(L.Implies(L.conj(others), kept[k]), scope)
        if isinstance(res, Valid):
            kept.pop(k)
        else:
            k += 1
    return kept


def synthesize(ts: TransitionSystem, solver: SmtSolver, cfg: EngineConfig = None
               ) -> SynthesisOutcome:
    cfg = cfg or EngineConfig()
    start = time.monotonic()
    deadline = start + cfg.time_budget
    st = EngineState()
    last_region = None

    def elapsed():
        return time.monotonic() - start

    def trace(**rec):
        if cfg.trace is not None:
            rec["elapsed_ms"] = round(elapsed() * 1000, 3)
            cfg.trace.write(json.dumps(rec, sort_keys=True) + "\n")
            cfg.trace.flush()

    while True:
        if st.iteration >= cfg.max_iterations:
            return Unknown(f"iteration cap {cfg.max_iterations} reached", st.iteration,
                           st.history, elapsed())
        if time.monotonic() > deadline:
            return Unknown("time budget exhausted", st.iteration, st.history, elapsed())
        st.iteration += 1
        F = st.F
        res = aeval.solve(viability_query(ts, F), solver, cfg.max_disjuncts, deadline)
        if isinstance(res, AeUnknown):
            trace(iteration=st.iteration, phi_verdict="unknown", region_disjuncts=0,
                  w_disjuncts=0, F_size=L.size(F))
            return Unknown(res.reason, st.iteration, st.history, elapsed())
        last_region = res.region
        if isinstance(res, AeValid):
            trace(iteration=st.iteration, phi_verdict="valid",
                  region_disjuncts=len(res.region), w_disjuncts=0, F_size=L.size(F))
            init = solver.check_sat(L.conj(ts.G_I, F), ts.state_vars)
            if isinstance(init, Sat):
                model = {v: init.model[v] for v in ts.state_vars}
                return Realizable(model, res.skolem, F, st.iteration, st.history, elapsed())
            if isinstance(init, Unsat):
                return Unrealizable(F, last_region, st.iteration, st.history, elapsed())
            return Unknown(init.reason, st.iteration, st.history, elapsed())

        Q = res.region.closed_form
        sub = aeval.solve(violation_query(ts, F, Q), solver, cfg.max_disjuncts, deadline)
        if isinstance(sub, AeUnknown):
            return Unknown(sub.reason, st.iteration, st.history, elapsed())
        W = sub.region.closed_form
        trace(iteration=st.iteration, phi_verdict="invalid",
              region_disjuncts=len(res.region), w_disjuncts=len(sub.region),
              F_size=L.size(F))
        block = L.simplify(L.neg(W))
        st.blocks.append(block)
        if len(st.blocks) > cfg.prune_threshold:
            st.blocks = _prune(st.blocks, solver, ts.state_vars)
        F_next = st.F
        ref = Refinement(st.iteration, Q, W)
        if cfg.check_progress:
            p = solver.check_sat(L.conj(F, L.neg(F_next)), ts.state_vars)
            ref.progress = isinstance(p, Sat) if not isinstance(p, SmtUnknown) else None
        if cfg.check_monotone:
            m = solver.check_valid(L.Implies(F_next, F), ts.state_vars)
            ref.monotone = isinstance(m, Valid)
        st.history.append(ref)
        log.debug("iteration %d: |R|=%d |W|=%d", st.iteration, len(res.region), len(sub.region))


# ------------------------------------------------------------------ certification

@dataclass
class Obligation:
    name: str
    verdict: str  # 'valid' | 'invalid' | 'unknown'
    countermodel: Optional[Dict[Var, object]] = None


@dataclass
class CertificationReport:
    obligations: List[Obligation]

    @property
    def ok(self) -> bool:
        return all(o.verdict == "valid" for o in self.obligations)

    def failures(self) -> List[Obligation]:
        return [o for o in self.obligations if o.verdict != "valid"]


class CertificationFailed(Exception):
    def __init__(self, report: CertificationReport):
        self.report = report
        bad = report.failures()[0]
        cm = L.format_model(bad.countermodel) if bad.countermodel else "-"
        super().__init__(f"obligation {bad.name} is {bad.verdict}; countermodel {cm}")


def certify(ts: TransitionSystem, outcome: Realizable, solver: SmtSolver) -> CertificationReport:
    """Re-check the fixpoint and Skolem function independently of how they were found."""
    F = outcome.fixpoint
    sk = outcome.skolem
    obligations: List[Obligation] = []
    scope = list(ts.state_vars) + list(ts.input_vars)
    next_to_state = {n: s for s, n in ts.next_of.items()}
    for k, case in enumerate(sk.cases):
        image = {next_to_state[y]: t for y, t in case.assignment.items()}
        goal = L.conj(L.substitute(ts.G_T, case.assignment), L.substitute(F, image))
        ob = L.Implies(L.conj(F, ts.A, case.guard), goal)
        obligations.append(_discharge(f"case{k}", ob, scope, solver))
    covered = L.Implies(L.conj(F, ts.A), L.disj([c.guard for c in sk.cases]))
    obligations.append(_discharge("coverage", covered, scope, solver))
    init = outcome.initial
    for name, f in (("initial_G_I", ts.G_I), ("initial_F", F)):
        try:
            ok = L.eval_formula(f, init)
        except L.LogicError:
            ok = False
        obligations.append(Obligation(name, "valid" if ok else "invalid", None if ok else dict(init)))
    report = CertificationReport(obligations)
    if not report.ok:
        raise CertificationFailed(report)
    return report


def _discharge(name, f, scope, solver) -> Obligation:
    res = solver.check_valid(f, scope)
    if isinstance(res, Valid):
        return Obligation(name, "valid")
    if isinstance(res, CounterModel):
        return Obligation(name, "invalid", dict(res.model))
    return Obligation(name, "unknown")
