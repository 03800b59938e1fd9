"""Command-line entry point: ``reacsynth synth|bench|oracle-check|aeval``."""
from __future__ import annotations

import argparse
import concurrent.futures
import csv
import io
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from . import __version__
from . import aeval as AE
from . import logic as L
from . import smtlib
from .codegen import contract_hash, emit_c, loc
from .encoder import NotFinite, bounded_domains, encode
from .engine import (CertificationFailed, EngineConfig, Realizable, Unrealizable,
                     certify, synthesize)
from .lustre import LustreError, load
from .oracle import SpaceTooLarge, oracle_viable
from .runtime import Controller, simulate
from .smt import SmtSolver, SolverConfig, SolverError

REPORT_SCHEMA = 1
EXIT = {"realizable": 0, "unrealizable": 10, "unknown": 20, "error": 1}
CSV_COLUMNS = ["name", "verdict", "iterations", "time_s", "skolem_cases", "emitted_loc",
               "certified", "sim_steps", "sim_violations"]

log = logging.getLogger("reacsynth")


@dataclass
class RunOptions:
    solver_path: Optional[str] = None
    solver_args: Optional[List[str]] = None
    timeout: float = 600.0
    query_timeout: float = 60.0
    max_iterations: int = 200
    emit_c: Optional[str] = None
    c_mode: str = "double"
    simulate: int = 0
    seed: int = 0
    dump_ts: Optional[str] = None
    query_log: Optional[str] = None
    trace: Optional[str] = None
    controller_out: Optional[str] = None
    measure_loc: bool = False

    def solver_config(self) -> SolverConfig:
        return SolverConfig(path=self.solver_path, args=self.solver_args,
                            timeout=min(self.query_timeout, self.timeout),
                            query_log=self.query_log, seed=self.seed)


@dataclass
class RunReport:
    contract: str
    verdict: str
    iterations: int = 0
    time_s: float = 0.0
    region_disjuncts: int = 0
    skolem_cases: int = 0
    fixpoint_size: int = 0
    certified: Optional[bool] = None
    emitted_loc: Optional[int] = None
    sim_steps: int = 0
    sim_violations: int = 0
    seed: int = 0
    message: str = ""
    diagnostics: List[str] = field(default_factory=list)
    schema_version: int = REPORT_SCHEMA

    @property
    def name(self) -> str:
        return Path(self.contract).stem

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def csv_row(self) -> Dict[str, object]:
        return {
            "name": self.name, "verdict": self.verdict, "iterations": self.iterations,
            "time_s": f"{self.time_s:.3f}", "skolem_cases": self.skolem_cases,
            "emitted_loc": "" if self.emitted_loc is None else self.emitted_loc,
            "certified": "" if self.certified is None else str(self.certified).lower(),
            "sim_steps": self.sim_steps, "sim_violations": self.sim_violations,
        }


def run_contract(path: str, opts: RunOptions) -> RunReport:
    """Parse, encode, synthesize, certify, then optionally emit and simulate."""
    rep = RunReport(contract=str(path), verdict="error", seed=opts.seed)
    start = time.monotonic()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        rep.message = f"{path}: file not found"
        rep.diagnostics.append(rep.message)
        return rep
    except OSError as e:
        rep.message = f"{path}: {e}"
        return rep
    try:
        ts = encode(load(text))
    except LustreError as e:
        rep.diagnostics = [f"{path}:{d}" for d in e.diagnostics]
        rep.message = rep.diagnostics[0]
        return rep
    if opts.dump_ts:
        dump = ts.dump()
        if opts.dump_ts == "-":
            sys.stderr.write(dump)
        else:
            Path(opts.dump_ts).write_text(dump)
    trace_fh = open(opts.trace, "w") if opts.trace else None
    try:
        with SmtSolver(opts.solver_config()) as solver:
            cfg = EngineConfig(max_iterations=opts.max_iterations, time_budget=opts.timeout,
                               trace=trace_fh)
            out = synthesize(ts, solver, cfg)
            rep.verdict = out.verdict
            rep.iterations = out.iterations
            if isinstance(out, Unrealizable) and out.last_region is not None:
                rep.region_disjuncts = len(out.last_region)
            if not isinstance(out, Realizable):
                rep.message = getattr(out, "reason", "")
                return rep
            rep.skolem_cases = len(out.skolem.cases)
            rep.fixpoint_size = L.size(out.fixpoint)
            try:
                certify(ts, out, solver)
                rep.certified = True
            except CertificationFailed as e:
                rep.certified = False
                rep.verdict = "error"
                rep.message = f"certification failed: {e}"
                return rep
        ctrl = Controller.from_outcome(ts, out)
        if opts.controller_out:
            Path(opts.controller_out).write_text(ctrl.to_json())
        if opts.emit_c or opts.measure_loc:
            src = emit_c(ctrl, ts, opts.c_mode, contract_hash(text))
            rep.emitted_loc = loc(src)
            if opts.emit_c:
                Path(opts.emit_c).write_text(src)
        if opts.simulate:
            sim = simulate(ctrl, ts, opts.simulate, seed=opts.seed,
                           solver_config=opts.solver_config(), fixpoint=out.fixpoint)
            rep.sim_steps = sim.steps
            rep.sim_violations = sim.violations
            if sim.no_input:
                rep.message = "simulation stopped: assumptions admit no input"
    except SolverError as e:
        rep.verdict = "error"
        rep.message = f"solver failure: {e}"
    finally:
        if trace_fh:
            trace_fh.close()
        rep.time_s = round(time.monotonic() - start, 3)
    return rep


def _bench_worker(args):
    path, opts = args
    try:
        return run_contract(path, opts)
    except Exception as e:  # recorded, the run continues
        return RunReport(contract=str(path), verdict="error", message=f"{type(e).__name__}: {e}")


def run_bench(directory: str, opts: RunOptions, jobs: int = 1) -> List[RunReport]:
    paths = sorted(str(p) for p in Path(directory).glob("*.lus"))
    work = [(p, opts) for p in paths]
    if jobs <= 1 or len(work) <= 1:
        return [_bench_worker(w) for w in work]
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_bench_worker, work))


def bench_summary(reports: List[RunReport]) -> Dict[str, object]:
    solved = [r for r in reports if r.verdict in ("realizable", "unrealizable")]
    times = [r.time_s for r in solved]
    locs = [r.emitted_loc for r in reports if r.emitted_loc is not None]
    return {
        "contracts": len(reports),
        "solved": len(solved),
        "realizable": sum(r.verdict == "realizable" for r in reports),
        "unrealizable": sum(r.verdict == "unrealizable" for r in reports),
        "unknown": sum(r.verdict == "unknown" for r in reports),
        "errors": sum(r.verdict == "error" for r in reports),
        "avg_time_s": round(sum(times) / len(times), 3) if times else 0.0,
        "max_time_s": max(times) if times else 0.0,
        "avg_loc": round(sum(locs) / len(locs), 1) if locs else 0.0,
        "max_loc": max(locs) if locs else 0,
    }


def reports_csv(reports: List[RunReport]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in reports:
        w.writerow(r.csv_row())
    return buf.getvalue()


def oracle_check(path: str, opts: RunOptions) -> Dict[str, object]:
    ts = encode(load(Path(path).read_text(encoding="utf-8")))
    doms = bounded_domains(ts)
    if isinstance(doms, NotFinite):
        raise ValueError(f"NotFinite: {doms.reason}")
    oracle = oracle_viable(ts, doms)
    with SmtSolver(opts.solver_config()) as solver:
        out = synthesize(ts, solver, EngineConfig(max_iterations=opts.max_iterations,
                                                  time_budget=opts.timeout))
    return {"contract": str(path), "engine": out.verdict, "oracle": oracle.verdict,
            "agree": out.verdict == oracle.verdict, "iterations": out.iterations,
            "viable_states": len(oracle.viable), "states": len(oracle.states)}


def aeval_file(path: str, opts: RunOptions) -> Dict[str, object]:
    """Solve a query file holding ``(define-fun S (xs) Bool ..)`` and ``(define-fun T (xs ys) Bool ..)``."""
    _, funs = smtlib.parse_script(Path(path).read_text(encoding="utf-8"))
    if "S" not in funs or "T" not in funs:
        raise ValueError("query file must define S and T")
    xs, S = funs["S"]
    tparams, T = funs["T"]
    names = {v.name for v in xs}
    ys = [v for v in tparams if v.name not in names]
    q = AE.AeQuery(tuple(xs), tuple(ys), S, T)
    with SmtSolver(opts.solver_config()) as solver:
        res = AE.solve(q, solver, deadline=time.monotonic() + opts.timeout)
    out: Dict[str, object] = {"query": str(path)}
    if isinstance(res, AE.AeValid):
        out["verdict"] = "valid"
        out["skolem"] = [{"guard": smtlib.to_text(c.guard),
                          "assigns": {y.name: smtlib.to_text(t) for y, t in c.assignment.items()}}
                         for c in res.skolem.cases]
    elif isinstance(res, AE.AeInvalid):
        out["verdict"] = "invalid"
        out["counterexample"] = {v.name: smtlib.numeral(x, v.sort) if v.sort.numeric else str(x).lower()
                                 for v, x in res.counterexample.items()}
    else:
        out["verdict"] = "unknown"
        out["reason"] = res.reason
    if res.region is not None:
        out["region"] = smtlib.to_text(res.region.closed_form)
        out["region_disjuncts"] = len(res.region)
    return out


# ------------------------------------------------------------------ argparse

def _common(p: argparse.ArgumentParser):
    p.add_argument("--solver-path", help="SMT solver binary (default: $REACSYNTH_SOLVER or z3 on PATH)")
    p.add_argument("--solver-args", help="solver arguments, shell-quoted")
    p.add_argument("--timeout", type=float, default=600.0, help="wall-clock budget in seconds")
    p.add_argument("--max-iterations", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--query-log", help="directory receiving every solver query as .smt2")
    p.add_argument("-v", "--verbose", action="count", default=0)


def _opts(a) -> RunOptions:
    return RunOptions(
        solver_path=a.solver_path, solver_args=SolverConfig.parse_args(a.solver_args),
        timeout=a.timeout, max_iterations=a.max_iterations, seed=a.seed,
        query_log=a.query_log,
        emit_c=getattr(a, "emit_c", None), c_mode=getattr(a, "c_mode", "double"),
        simulate=getattr(a, "simulate", 0) or 0, dump_ts=getattr(a, "dump_ts", None),
        trace=getattr(a, "trace", None), controller_out=getattr(a, "controller", None),
        measure_loc=getattr(a, "loc", False))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="reacsynth", description=__doc__)
    ap.add_argument("--version", action="version", version=f"reacsynth {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="synthesize a controller for one contract")
    s.add_argument("contract")
    _common(s)
    s.add_argument("--emit-c", metavar="FILE")
    s.add_argument("--c-mode", choices=("double", "rational"), default="double")
    s.add_argument("--simulate", type=int, metavar="STEPS", default=0)
    s.add_argument("--dump-ts", nargs="?", const="-", metavar="FILE",
                   help="write (A, G_I, G_T) as SMT-LIB define-funs (stderr if no file)")
    s.add_argument("--trace", metavar="FILE", help="engine trace, one JSON object per iteration")
    s.add_argument("--controller", metavar="FILE", help="write the controller as JSON")
    fmt = s.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="JSON report (default)")
    fmt.add_argument("--csv", action="store_true", help="one-row CSV report")
    s.add_argument("--out", metavar="FILE", help="write the report here instead of stdout")

    b = sub.add_parser("bench", help="run every .lus contract in a directory")
    b.add_argument("directory")
    _common(b)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--simulate", type=int, metavar="STEPS", default=0)
    b.add_argument("--no-loc", dest="loc", action="store_false", default=True,
                   help="skip measuring emitted C size")
    fmt = b.add_mutually_exclusive_group()
    fmt.add_argument("--csv", action="store_true", help="CSV rows (default)")
    fmt.add_argument("--json", action="store_true", help="JSON list of reports")
    b.add_argument("--out", metavar="FILE")

    o = sub.add_parser("oracle-check", help="compare the engine with explicit enumeration")
    o.add_argument("contract")
    _common(o)

    q = sub.add_parser("aeval", help="decide one forall-exists query file")
    q.add_argument("query")
    _common(q)
    return ap


def _emit(text: str, out: Optional[str]):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(a.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    opts = _opts(a)
    if a.command == "synth":
        rep = run_contract(a.contract, opts)
        for d in rep.diagnostics:
            print(d, file=sys.stderr)
        if a.csv:
            _emit(reports_csv([rep]), a.out)
        else:
            _emit(rep.to_json() + "\n", a.out)
        return EXIT[rep.verdict]
    if a.command == "bench":
        if not Path(a.directory).is_dir():
            print(f"{a.directory}: not a directory", file=sys.stderr)
            return 1
        reports = run_bench(a.directory, opts, a.jobs)
        summary = bench_summary(reports)
        if a.json:
            _emit(json.dumps({"schema_version": REPORT_SCHEMA, "summary": summary,
                              "reports": [asdict(r) for r in reports]}, indent=2) + "\n", a.out)
        else:
            _emit(reports_csv(reports), a.out)
        print(json.dumps(summary, sort_keys=True), file=sys.stderr)
        return 0
    if a.command == "oracle-check":
        try:
            res = oracle_check(a.contract, opts)
        except (ValueError, SpaceTooLarge, LustreError, OSError) as e:
            print(f"{a.contract}: {e}", file=sys.stderr)
            return 1
        print(json.dumps(res, sort_keys=True))
        print("agree" if res["agree"] else "disagree", file=sys.stderr)
        return 0 if res["agree"] else 1
    if a.command == "aeval":
        try:
            res = aeval_file(a.query, opts)
        except (ValueError, OSError, smtlib.SmtLibError) as e:
            print(f"{a.query}: {e}", file=sys.stderr)
            return 1
        print(json.dumps(res, indent=2, sort_keys=True))
        return {"valid": 0, "invalid": 10}.get(res["verdict"], 20)
    return 1


if __name__ == "__main__":
    sys.exit(main())
