"""Acceptance criteria 1-7, each at its stated tolerance.

Every engine run and every forall-exists solve made by criteria 1-4 is
recorded, so criteria 5 and 6 audit exactly those runs.
"""
import random
import time

import pytest

from reacsynth import aeval
from reacsynth.aeval import AeValid
from reacsynth.codegen import emit_c, format_inputs, loc, parse_states
from reacsynth.encoder import bounded_domains, encode
from reacsynth.engine import CertificationFailed, EngineConfig, Realizable, Unknown, certify, synthesize
from reacsynth.logic import Sort
from reacsynth.lustre import load
from reacsynth.oracle import oracle_viable
from reacsynth.runtime import Controller, input_script, simulate
from reacsynth.smt import SmtSolver, SolverConfig

from support import (REALIZABLE_BENCH, bench_text, bench_ts, c_compiler, compile_c, random_finite_ts,
                     random_query, report, run_emitted, values_close)

BUDGET = 600.0
SIM_STEPS = 10_000
N_RANDOM_CONTRACTS = 40
N_QUERIES = 100
REFERENCE_LOC = {"cinderella_c3": 204, "cinderella_c2": 202}  # logged next to ours, no tolerance


class Recorder:
    """Wraps ``aeval.solve`` to keep every query with its result."""

    def __init__(self):
        self.solves = []
        self._orig = aeval.solve

    def __call__(self, q, *args, **kw):
        res = self._orig(q, *args, **kw)
        self.solves.append((q, res))
        return res


@pytest.fixture(scope="module")
def recorder():
    rec = Recorder()
    with pytest.MonkeyPatch.context() as mp:
        mp.setattr(aeval, "solve", rec)
        yield rec


@pytest.fixture(scope="module")
def engine_runs():
    """(criterion, name, ts, outcome) for every engine run of criteria 1-3."""
    return []


@pytest.fixture(scope="module")
def acc_solver():
    s = SmtSolver(SolverConfig(timeout=60))
    yield s
    s.close()


@pytest.fixture(scope="module")
def cinderella(recorder, engine_runs, acc_solver):
    results = {}
    for name in ("cinderella_c2", "cinderella_c3"):
        ts = bench_ts(name)
        t0 = time.monotonic()
        out = synthesize(ts, acc_solver, EngineConfig(time_budget=BUDGET))
        elapsed = time.monotonic() - t0
        engine_runs.append((1, name, ts, out))
        info = {"verdict": out.verdict, "time": elapsed, "iterations": out.iterations}
        if isinstance(out, Realizable):
            try:
                certify(ts, out, acc_solver)
                info["certified"] = True
            except CertificationFailed:
                info["certified"] = False
            sim = simulate(Controller.from_outcome(ts, out), ts, SIM_STEPS, seed=2024,
                           fixpoint=out.fixpoint)
            info["sim"] = (sim.steps, sim.violations, sim.no_input)
        results[name] = info
    return results


def test_criterion_1_cinderella_realizable(cinderella):
    ok = True
    parts = []
    for name, info in cinderella.items():
        good = (info["verdict"] == "realizable" and info.get("certified")
                and info.get("sim") == (SIM_STEPS, 0, False) and info["time"] <= BUDGET)
        ok = ok and bool(good)
        parts.append(f"{name}: {info['verdict']} in {info['time']:.1f}s "
                     f"({info['iterations']} iterations), certified={info.get('certified')}, "
                     f"sim={info.get('sim')}")
    report(1, ok, "; ".join(parts))
    assert ok


@pytest.fixture(scope="module")
def unrealizable_run(recorder, engine_runs, acc_solver):
    ts = encode(load(bench_text("cinderella_unreal")))
    t0 = time.monotonic()
    out = synthesize(ts, acc_solver, EngineConfig(time_budget=BUDGET))
    engine_runs.append((2, "cinderella_unreal", ts, out))
    return out, time.monotonic() - t0


def test_criterion_2_unrealizable_and_sound(unrealizable_run, cinderella, random_contracts,
                                            engine_runs, acc_solver):
    out, elapsed = unrealizable_run
    uncertified = []
    realizable = 0
    for _, name, ts, o in engine_runs:
        if isinstance(o, Realizable):
            realizable += 1
            try:
                certify(ts, o, acc_solver)
            except CertificationFailed:
                uncertified.append(name)
    ok = out.verdict == "unrealizable" and elapsed <= BUDGET and not uncertified
    report(2, ok, f"assumption-free Cinderella {out.verdict} in {elapsed:.2f}s; "
                  f"{realizable - len(uncertified)}/{realizable} realizable runs certified")
    assert ok


@pytest.fixture(scope="module")
def random_contracts(recorder, engine_runs, acc_solver):
    cases = [(f"random{k}", random_finite_ts(random.Random(7000 + k), k))
             for k in range(N_RANDOM_CONTRACTS)]
    cases += [(n, bench_ts(n)) for n in ("toggle", "counter_overflow", "counter_env_reset")]
    rows = []
    for name, ts in cases:
        oracle = oracle_viable(ts, bounded_domains(ts))
        t0 = time.monotonic()
        out = synthesize(ts, acc_solver, EngineConfig(time_budget=BUDGET))
        elapsed = time.monotonic() - t0
        engine_runs.append((3, name, ts, out))
        rows.append((name, oracle.verdict, out.verdict, elapsed, isinstance(out, Unknown)))
    return rows


def test_criterion_3_oracle_equivalence(random_contracts):
    rows = random_contracts
    agree = sum(o == e for _, o, e, _, _ in rows)
    caps = sum(u for *_, u in rows)
    slow = [n for n, _, _, t, _ in rows if t > 10.0]
    worst = max(t for _, _, _, t, _ in rows)
    n_real = sum(o == "realizable" for _, o, _, _, _ in rows)
    ok = agree == len(rows) and caps == 0 and not slow and len(rows) >= 28
    report(3, ok, f"{agree}/{len(rows)} verdicts match the explicit fixpoint "
                  f"({n_real} realizable), {caps} cap hits, slowest {worst:.2f}s")
    assert ok, [r for r in rows if r[1] != r[2]] + slow


@pytest.fixture(scope="module")
def region_audit(recorder, acc_solver):
    t0 = time.monotonic()
    results = []
    for k in range(N_QUERIES):
        q = random_query(random.Random(90_000 + k), ints=k % 2 == 1)
        res = aeval.solve(q, acc_solver)
        results.append(aeval.check_region_maximal(q, res.region, acc_solver))
    return results, time.monotonic() - t0


def test_criterion_4_region_maximality(region_audit):
    results, elapsed = region_audit
    ok = all(results) and len(results) >= 100 and elapsed <= 60.0
    report(4, ok, f"{sum(results)}/{len(results)} regions maximal, {elapsed:.1f}s total")
    assert ok


def test_criterion_5_skolem_soundness(cinderella, unrealizable_run, random_contracts, region_audit,
                                      recorder, acc_solver):
    valid = [(q, r) for q, r in recorder.solves if isinstance(r, AeValid)]
    bad = [q for q, r in valid if not aeval.check_skolem(q, r.skolem, acc_solver)]
    ok = bool(valid) and not bad
    report(5, ok, f"{len(valid) - len(bad)}/{len(valid)} valid solves have sound Skolem cases")
    assert ok


def test_criterion_6_progress(cinderella, unrealizable_run, random_contracts, engine_runs):
    refinements = [(name, r) for _, name, _, out in engine_runs for r in out.history]
    stalled = [name for name, r in refinements if r.progress is not True]
    ok = not stalled
    report(6, ok, f"{len(refinements) - len(stalled)}/{len(refinements)} refinements "
                  f"removed a state, over {len(engine_runs)} engine runs")
    assert ok, stalled


@pytest.mark.skipif(c_compiler() is None, reason="no C compiler")
def test_criterion_7_emission_fidelity(tmp_path, acc_solver):
    failures = []
    sizes = []
    worst = 0.0
    for name in REALIZABLE_BENCH:
        ts = bench_ts(name)
        out = synthesize(ts, acc_solver, EngineConfig(time_budget=BUDGET))
        assert isinstance(out, Realizable), name
        c = Controller.from_outcome(ts, out)
        script = input_script(ts, c, 1000, seed=31)
        ref = simulate(c, ts, len(script), inputs=script, record=True).trace.states
        for mode in ("double", "rational"):
            src = emit_c(c, ts, mode)
            res, exe = compile_c(src, tmp_path, f"{name}_{mode}")
            if res.returncode != 0 or res.stderr.strip():
                failures.append(f"{name}/{mode}: compile")
                continue
            got = parse_states(c, run_emitted(exe, format_inputs(c, script)), mode)
            if len(got) != len(ref):
                failures.append(f"{name}/{mode}: length")
                continue
            for a, b in zip(got, ref):
                for v in c.state_vars:
                    if mode == "rational" or v.sort is not Sort.REAL:
                        if a[v] != b[v]:
                            failures.append(f"{name}/{mode}: {v.name}")
                    else:
                        worst = max(worst, abs(a[v] - float(b[v])))
                        if not values_close(a[v], b[v], 1e-9):
                            failures.append(f"{name}/{mode}: {v.name}")
            if mode == "double":
                reported = REFERENCE_LOC.get(name)
                sizes.append(f"{name}={loc(src)}" + (f" (reference {reported})" if reported else ""))
    ok = not failures
    report(7, ok, f"{len(REALIZABLE_BENCH)} controllers x 2 modes, worst double error "
                  f"{worst:.1e}; LoC {', '.join(sizes)}")
    assert ok, failures[:10]
