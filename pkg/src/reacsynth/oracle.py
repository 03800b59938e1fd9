"""Explicit-state greatest fixpoint of the viability operator, for cross-checking."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Tuple

from . import logic as L
from .encoder import FiniteDomainMap, TransitionSystem

DEFAULT_LIMIT = 10 ** 7


class SpaceTooLarge(Exception):
    pass


State = Tuple[object, ...]


@dataclass
class OracleResult:
    states: List[State]
    viable: FrozenSet[State]
    initial: List[State]  # viable states satisfying G_I
    rounds: int

    @property
    def realizable(self) -> bool:
        return bool(self.initial)

    @property
    def verdict(self) -> str:
        return "realizable" if self.realizable else "unrealizable"


def oracle_viable(ts: TransitionSystem, domains: FiniteDomainMap,
                  limit: int = DEFAULT_LIMIT) -> OracleResult:
    """``viable = gfp X. { s | forall i. A(s,i) => exists s' in X. G_T(s,i,s') }``."""
    svars, ivars, nvars = ts.state_vars, ts.input_vars, ts.next_vars
    states = list(itertools.product(*[domains[v] for v in svars]))
    inputs = list(itertools.product(*[domains[v] for v in ivars]))
    work = len(states) * max(1, len(inputs)) * len(states)
    if len(states) * max(1, len(inputs)) > limit or work > 50 * limit:
        raise SpaceTooLarge(f"{len(states)} states x {len(inputs)} inputs")
    assume = L.compile_formula(ts.A)
    trans = L.compile_formula(ts.G_T)
    init = L.compile_formula(ts.G_I)

    # per state: for each admissible input, the set of allowed successors
    moves: Dict[State, List[FrozenSet[State]]] = {}
    for s in states:
        env = dict(zip(svars, s))
        per_input = []
        for i in inputs:
            env.update(zip(ivars, i))
            if not assume(env):
                continue
            succ = []
            for t in states:
                env.update(zip(nvars, t))
                if trans(env):
                    succ.append(t)
            per_input.append(frozenset(succ))
        moves[s] = per_input

    alive = set(states)
    rounds = 0
    while True:
        rounds += 1
        keep = {s for s in alive if all(succ & alive for succ in moves[s])}
        if keep == alive:
            break
        alive = keep
    initial = [s for s in states if s in alive and init(dict(zip(svars, s)))]
    return OracleResult(states, frozenset(alive), initial, rounds)


def in_viable(result: OracleResult, ts: TransitionSystem, F: L.Formula) -> bool:
    """Every oracle-viable state satisfies ``F`` (containment check)."""
    f = L.compile_formula(F)
    return all(f(dict(zip(ts.state_vars, s))) for s in result.viable)
