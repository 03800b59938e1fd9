import dataclasses
import io
import json
import random

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from reacsynth import logic as L
from reacsynth.aeval import SkolemCase, SkolemFunction
from reacsynth.encoder import TransitionSystem, bounded_domains, primed
from reacsynth.engine import (CertificationFailed, EngineConfig, Realizable, Unknown,
                              Unrealizable, certify, synthesize)
from reacsynth.logic import Sort, Var
from reacsynth.oracle import in_viable, oracle_viable
from reacsynth.smt import Sat, Valid

from support import bench_ts, random_finite_ts, refinement_chain

HEALTH = [HealthCheck.function_scoped_fixture]


def _trivial(G_I=L.TRUE):
    s = Var("s", Sort.INT)
    i = Var("i", Sort.INT)
    return TransitionSystem("trivial", [s], [i], [primed(s)], L.TRUE, G_I, L.TRUE)


def test_trivial_system(solver):
    ts = _trivial()
    out = synthesize(ts, solver)
    assert isinstance(out, Realizable)
    assert certify(ts, out, solver).ok
    assert isinstance(solver.check_valid(out.fixpoint, ts.state_vars), Valid)


def test_empty_initial_set(solver):
    out = synthesize(_trivial(L.FALSE), solver)
    assert isinstance(out, Unrealizable)
    assert out.iterations == 1


def test_toggle(solver):
    ts = bench_ts("toggle")
    oracle = oracle_viable(ts, bounded_domains(ts))
    b = Var("b", Sort.BOOL)
    assert {s[ts.state_vars.index(b)] for s in oracle.viable} == {False, True}
    out = synthesize(ts, solver)
    assert isinstance(out, Realizable)
    certify(ts, out, solver)


def test_environment_overflows_counter(solver):
    ts = bench_ts("counter_overflow")
    oracle = oracle_viable(ts, bounded_domains(ts))
    assert not oracle.viable
    out = synthesize(ts, solver)
    assert isinstance(out, Unrealizable)


def test_environment_held_reset_is_unrealizable(solver):
    """Reset controlled by the environment: holding i = 0 overflows, so no state is viable."""
    ts = bench_ts("counter_env_reset")
    oracle = oracle_viable(ts, bounded_domains(ts))
    assert not oracle.realizable
    assert synthesize(ts, solver).verdict == oracle.verdict


def test_controller_reset_is_realizable(solver):
    ts = bench_ts("counter_ctrl_reset")
    oracle = oracle_viable(ts, bounded_domains(ts))
    out = synthesize(ts, solver)
    assert oracle.realizable and isinstance(out, Realizable)
    assert in_viable(oracle, ts, out.fixpoint)


def test_cinderella_without_assumptions(solver):
    out = synthesize(bench_ts("cinderella_unreal"), solver)
    assert isinstance(out, Unrealizable)


def test_perturbed_skolem_fails_certification(solver):
    ts = bench_ts("counter_ctrl_reset")
    out = synthesize(ts, solver)
    certify(ts, out, solver)
    mutated = 0
    for k, case in enumerate(out.skolem.cases):
        reach = solver.check_sat(L.conj(out.fixpoint, ts.A, case.guard),
                                 list(ts.state_vars) + list(ts.input_vars))
        if not isinstance(reach, Sat):
            continue
        for y, t in case.assignment.items():
            if y.sort is not Sort.INT:
                continue
            bad = dict(case.assignment)
            bad[y] = L.add(t, 1)
            cases = list(out.skolem.cases)
            cases[k] = SkolemCase(case.guard, bad)
            sk = SkolemFunction(out.skolem.xs, out.skolem.ys, tuple(cases))
            with pytest.raises(CertificationFailed) as exc:
                certify(ts, dataclasses.replace(out, skolem=sk), solver)
            assert exc.value.report.failures()[0].countermodel
            mutated += 1
    assert mutated


def test_wrong_initial_state_fails_certification(solver):
    ts = bench_ts("counter_ctrl_reset")
    out = synthesize(ts, solver)
    c = Var("c", Sort.INT)
    init = dict(out.initial)
    init[c] = init[c] + 5
    with pytest.raises(CertificationFailed):
        certify(ts, dataclasses.replace(out, initial=init), solver)


def test_iteration_cap_gives_unknown(solver):
    out = synthesize(bench_ts("counter_overflow"), solver, EngineConfig(max_iterations=2))
    assert isinstance(out, Unknown) and "iteration" in out.reason


def test_time_budget_gives_unknown(solver):
    out = synthesize(bench_ts("counter_overflow"), solver, EngineConfig(time_budget=0.0))
    assert isinstance(out, Unknown)


def test_trace_records(solver):
    buf = io.StringIO()
    out = synthesize(bench_ts("arbiter"), solver, EngineConfig(trace=buf))
    rows = [json.loads(l) for l in buf.getvalue().splitlines()]
    assert len(rows) == out.iterations
    assert set(rows[0]) == {"iteration", "phi_verdict", "region_disjuncts", "w_disjuncts",
                            "F_size", "elapsed_ms"}
    assert rows[-1]["phi_verdict"] == "valid"


def test_fixpoint_only_mentions_state(solver):
    ts = bench_ts("arbiter")
    out = synthesize(ts, solver)
    assert set(L.free_vars(out.fixpoint)) <= set(ts.state_vars)


def test_monotone_refinement(solver):
    ts = bench_ts("tank_overflow")
    out = synthesize(ts, solver, EngineConfig(check_monotone=True))
    assert all(r.monotone for r in out.history)
    assert all(r.progress for r in out.history)


@settings(max_examples=25, deadline=None, suppress_health_check=HEALTH)
@given(st.integers(0, 10 ** 6))
def test_engine_agrees_with_enumeration(solver, seed):
    ts = random_finite_ts(random.Random(seed), seed)
    oracle = oracle_viable(ts, bounded_domains(ts))
    out = synthesize(ts, solver, EngineConfig(time_budget=30))
    assert out.verdict == oracle.verdict
    # viable states are never removed
    for F in refinement_chain(out.history):
        assert in_viable(oracle, ts, F)
    assert all(r.progress for r in out.history)
    if isinstance(out, Realizable):
        certify(ts, out, solver)
