"""Validity of ``forall xs. exists ys. S(xs) => T(xs, ys)`` with regions of validity.

The loop enumerates models of ``S & T & ~R`` and grows ``R`` by the projection
of each model.  When no model is left, ``S & R`` is exactly the set of
``xs`` for which some ``ys`` satisfies ``T``; the query is valid iff ``S & ~R``
is unsatisfiable.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

from . import logic as L
from . import mbp
from .logic import Sort, Var
from .smt import Sat, SmtSolver, Unknown, Unsat, Valid

log = logging.getLogger(__name__)

DEFAULT_MAX_DISJUNCTS = 500


@dataclass(frozen=True)
class AeQuery:
    xs: Tuple[Var, ...]
    ys: Tuple[Var, ...]
    S: L.Formula
    T: L.Formula

    def __post_init__(self):
        object.__setattr__(self, "xs", tuple(self.xs))
        object.__setattr__(self, "ys", tuple(self.ys))
        if set(self.xs) & set(self.ys):
            raise ValueError("universal and existential variables overlap")
        allowed = set(self.xs)
        stray = [v for v in L.free_vars(self.S) if v not in allowed]
        if stray:
            raise ValueError(f"S mentions non-universal variables {[v.name for v in stray]}")
        allowed |= set(self.ys)
        stray = [v for v in L.free_vars(self.T) if v not in allowed]
        if stray:
            raise ValueError(f"T mentions undeclared variables {[v.name for v in stray]}")


@dataclass(frozen=True)
class RegionOfValidity:
    S: L.Formula
    disjuncts: Tuple[L.Formula, ...]
    # witness terms found alongside each disjunct (audit only)
    witnesses: Tuple[Dict[Var, object], ...] = ()

    @property
    def union(self) -> L.Formula:
        return L.disj(list(self.disjuncts))

    @property
    def closed_form(self) -> L.Formula:
        return L.simplify(L.conj(self.S, self.union))

    def __len__(self) -> int:
        return len(self.disjuncts)


@dataclass(frozen=True)
class SkolemCase:
    guard: L.Formula
    assignment: Dict[Var, object]


@dataclass(frozen=True)
class SkolemFunction:
    """First-match guarded assignments; the last guard is the residue of the others."""
    xs: Tuple[Var, ...]
    ys: Tuple[Var, ...]
    cases: Tuple[SkolemCase, ...]

    def select(self, model) -> int:
        for k, case in enumerate(self.cases):
            if L.eval_formula(case.guard, model):
                return k
        raise LookupError("no Skolem case matches")

    def apply(self, model) -> Dict[Var, object]:
        case = self.cases[self.select(model)]
        return {y: L.evaluate(t, model) for y, t in case.assignment.items()}

    def as_terms(self) -> Dict[Var, object]:
        """Each ``y`` as a nested if-then-else over the cases."""
        out = {}
        for y in self.ys:
            if y.sort is Sort.BOOL:
                expr = self.cases[-1].assignment[y]
                for case in reversed(self.cases[:-1]):
                    a = case.assignment[y]
                    expr = L.disj(L.conj(case.guard, a), L.conj(L.neg(case.guard), expr))
            else:
                expr = self.cases[-1].assignment[y]
                for case in reversed(self.cases[:-1]):
                    expr = L.Ite(case.guard, case.assignment[y], expr)
            out[y] = expr
        return out


@dataclass
class AeValid:
    skolem: SkolemFunction
    region: RegionOfValidity


@dataclass
class AeInvalid:
    region: RegionOfValidity
    counterexample: Dict[Var, object]


@dataclass
class AeUnknown:
    reason: str
    region: Optional[RegionOfValidity] = None


AeResult = Union[AeValid, AeInvalid, AeUnknown]


def _default(v: Var):
    if v.sort is Sort.BOOL:
        return L.FALSE
    return L.Const(0, v.sort)


def _budget(solver: SmtSolver, deadline: Optional[float]) -> Optional[float]:
    if deadline is None:
        return None
    remaining = deadline - time.monotonic()
    return max(0.05, min(solver.config.timeout, remaining))


def solve(q: AeQuery, solver: SmtSolver, max_disjuncts: int = DEFAULT_MAX_DISJUNCTS,
          deadline: float = None) -> AeResult:
    """Decide the query; returns the maximal region and a Skolem function if valid."""
    T = L.nnf(q.T)
    scope = list(q.xs) + list(q.ys)
    disjuncts: List[L.Formula] = []
    witnesses: List[Dict[Var, object]] = []

    def region():
        return RegionOfValidity(q.S, tuple(disjuncts), tuple(witnesses))

    with solver.frame(scope):
        solver.add(q.S)
        solver.add(T)
        while True:
            if deadline is not None and time.monotonic() > deadline:
                return AeUnknown("time budget exhausted", region())
            res = solver.check(_budget(solver, deadline))
            if isinstance(res, Unsat):
                break
            if not isinstance(res, Sat):
                return AeUnknown(res.reason, region())
            if len(disjuncts) >= max_disjuncts:
                return AeUnknown(f"more than {max_disjuncts} region disjuncts", region())
            proj = mbp.project(T, q.ys, res.model, in_nnf=True)
            disjuncts.append(proj.guard)
            witnesses.append(proj.witnesses)
            solver.add(L.neg(proj.guard))

    with solver.frame(q.xs):
        solver.add(q.S)
        for d in disjuncts:
            solver.add(L.neg(d))
        res = solver.check(_budget(solver, deadline))
    if isinstance(res, Unknown):
        return AeUnknown(res.reason, region())
    if isinstance(res, Sat):
        cex = {v: res.model[v] for v in q.xs}
        return AeInvalid(region(), cex)
    return AeValid(_assemble(q, disjuncts, witnesses), region())


def _assemble(q: AeQuery, disjuncts, witnesses) -> SkolemFunction:
    if not disjuncts:
        return SkolemFunction(q.xs, q.ys, (SkolemCase(L.TRUE, {y: _default(y) for y in q.ys}),))
    cases = [SkolemCase(g, dict(w)) for g, w in zip(disjuncts[:-1], witnesses[:-1])]
    residue = L.neg(L.disj(list(disjuncts[:-1]))) if len(disjuncts) > 1 else L.TRUE
    cases.append(SkolemCase(residue, dict(witnesses[-1])))
    return SkolemFunction(q.xs, q.ys, tuple(cases))


def skolem_obligations(q: AeQuery, skolem: SkolemFunction) -> List[L.Formula]:
    """Per case: ``S & guard => T[ys := assignment]``; plus coverage of S."""
    out = []
    for case in skolem.cases:
        out.append(L.Implies(L.conj(q.S, case.guard), L.substitute(q.T, case.assignment)))
    out.append(L.Implies(q.S, L.disj([c.guard for c in skolem.cases])))
    return out


def check_skolem(q: AeQuery, skolem: SkolemFunction, solver: SmtSolver) -> bool:
    return all(isinstance(solver.check_valid(ob, q.xs), Valid)
               for ob in skolem_obligations(q, skolem))


def check_region_maximal(q: AeQuery, region: RegionOfValidity, solver: SmtSolver) -> bool:
    """Audit ``forall xs. S => (R <=> exists ys. T)`` in both directions.

    (=>) each disjunct comes with witnesses: ``S & P_i => T[ys := w_i]``.
    (<=) ``S & (exists ys. T) & ~R`` is unsatisfiable, with the existential
    eliminated by :func:`reacsynth.mbp.eliminate_all`.
    """
    if len(region.witnesses) != len(region.disjuncts):
        raise ValueError("region carries no witnesses to audit")
    for p, w in zip(region.disjuncts, region.witnesses):
        ob = L.Implies(L.conj(q.S, p), L.substitute(q.T, w))
        res = solver.check_valid(ob, q.xs)
        if isinstance(res, Unknown):
            raise RuntimeError(f"audit undetermined: {res.reason}")
        if not isinstance(res, Valid):
            return False
    exists_t = mbp.eliminate_all(q.T, q.ys, solver)
    res = solver.check_sat(L.conj(q.S, exists_t, L.neg(region.union)), q.xs)
    if isinstance(res, Unknown):
        raise RuntimeError(f"audit undetermined: {res.reason}")
    return isinstance(res, Unsat)
