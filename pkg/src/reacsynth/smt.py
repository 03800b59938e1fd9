"""SMT-LIB 2 solver process driver.

One :class:`SmtSolver` owns one solver subprocess and talks to it over
stdin/stdout using incremental ``push``/``pop``. Every satisfying model is
re-checked with :func:`reacsynth.logic.eval_formula` before it is returned.
"""
from __future__ import annotations

import logging
import os
import select
import shlex
import shutil
import subprocess
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from . import logic as L
from . import smtlib
from .logic import Var

log = logging.getLogger(__name__)


class SolverError(Exception):
    pass


class SolverCrashed(SolverError):
    pass


class SolverNotFound(SolverError):
    pass


@dataclass
class Sat:
    model: Dict[Var, object]


@dataclass
class Unsat:
    pass


@dataclass
class Unknown:
    reason: str


@dataclass
class Valid:
    pass


@dataclass
class CounterModel:
    model: Dict[Var, object]


SatResult = Union[Sat, Unsat, Unknown]
ValidResult = Union[Valid, CounterModel, Unknown]


def default_solver_path() -> Optional[str]:
    return os.environ.get("REACSYNTH_SOLVER") or shutil.which("z3")


@dataclass
class SolverConfig:
    path: Optional[str] = None
    args: Optional[List[str]] = None
    timeout: float = 60.0
    query_log: Optional[str] = None
    seed: int = 0
    logic: str = "ALL"

    def command(self) -> List[str]:
        path = self.path or default_solver_path()
        if not path:
            raise SolverNotFound("no SMT solver found; pass --solver-path or set REACSYNTH_SOLVER")
        if self.args is not None:
            args = list(self.args)
        elif Path(path).name.startswith("z3"):
            args = ["-in", "-smt2"]
        elif Path(path).name.startswith("cvc5"):
            args = ["--lang=smt2", "--incremental", "--produce-models"]
        else:
            args = []
        return [path] + args

    @staticmethod
    def parse_args(text: Optional[str]) -> Optional[List[str]]:
        return None if text is None else shlex.split(text)


@dataclass
class _Frame:
    decls: List[Var] = field(default_factory=list)
    asserts: List[L.Formula] = field(default_factory=list)


class SmtSolver:
    """Incremental SMT-LIB session over a subprocess."""

    def __init__(self, config: SolverConfig = None):
        self.config = config or SolverConfig()
        self._proc: Optional[subprocess.Popen] = None
        self._buf = ""
        self._frames: List[_Frame] = [_Frame()]
        self._declared: Dict[str, Var] = {}
        self.queries = 0
        self._log_dir = Path(self.config.query_log) if self.config.query_log else None
        if self._log_dir:
            self._log_dir.mkdir(parents=True, exist_ok=True)

    # -- process management

    def _header(self) -> str:
        return ("(set-option :produce-models true)\n"
                f"(set-option :random-seed {self.config.seed})\n"
                f"(set-logic {self.config.logic})\n")

    def _start(self) -> None:
        cmd = self.config.command()
        try:
            self._proc = subprocess.Popen(cmd, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                          stderr=subprocess.DEVNULL, text=True, bufsize=1)
        except OSError as exc:
            raise SolverNotFound(f"cannot start solver {cmd[0]}: {exc}") from exc
        self._buf = ""
        self._write(self._header())

    def _ensure(self) -> None:
        if self._proc is None or self._proc.poll() is not None:
            self._restart()

    def _restart(self) -> None:
        self._kill()
        self._start()
        # replay frames; the base frame has no push
        for i, fr in enumerate(self._frames):
            if i > 0:
                self._write("(push 1)\n")
            for v in fr.decls:
                self._write(smtlib.declare(v) + "\n")
            for a in fr.asserts:
                self._write(f"(assert {smtlib.formula_text(a)})\n")

    def _kill(self) -> None:
        if self._proc is not None:
            try:
                self._proc.kill()
                self._proc.wait(timeout=5)
            except Exception:  # noqa: BLE001 - best effort cleanup
                pass
            self._proc = None

    def close(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            try:
                self._proc.stdin.write("(exit)\n")
                self._proc.stdin.flush()
                self._proc.wait(timeout=2)
            except Exception:  # noqa: BLE001
                pass
        self._kill()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def __del__(self):
        try:
            self._kill()
        except Exception:  # noqa: BLE001
            pass

    def _write(self, text: str) -> None:
        if self._proc is None:
            self._start()
        try:
            self._proc.stdin.write(text)
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise SolverCrashed(str(exc)) from exc

    def _read(self, deadline: float) -> smtlib.SExpr:
        """Read one complete s-expression (or atom) from the solver."""
        fd = self._proc.stdout.fileno()
        while True:
            item = self._take()
            if item is not None:
                return item
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise TimeoutError
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                raise TimeoutError
            chunk = os.read(fd, 65536)
            if not chunk:
                raise SolverCrashed("solver closed its output")
            self._buf += chunk.decode()

    def _take(self):
        buf = self._buf
        i, n = 0, len(buf)
        while i < n and buf[i].isspace():
            i += 1
        if i == n:
            return None
        depth = 0
        j = i
        in_str = in_sym = False
        while j < n:
            c = buf[j]
            if in_str:
                if c == '"':
                    in_str = False
            elif in_sym:
                if c == "|":
                    in_sym = False
            elif c == '"':
                in_str = True
            elif c == "|":
                in_sym = True
            elif c == "(":
                depth += 1
            elif c == ")":
                depth -= 1
                if depth == 0:
                    text = buf[i:j + 1]
                    self._buf = buf[j + 1:]
                    return smtlib.parse_sexpr(text)
            elif depth == 0 and c.isspace():
                text = buf[i:j]
                self._buf = buf[j:]
                return text
            j += 1
        return None

    # -- assertion stack

    def push(self, scope: Sequence[Var] = ()) -> None:
        self._ensure()
        self._frames.append(_Frame())
        self._write("(push 1)\n")
        self.declare(scope)

    def pop(self) -> None:
        if len(self._frames) == 1:
            raise SolverError("pop without push")
        fr = self._frames.pop()
        for v in fr.decls:
            del self._declared[v.name]
        if self._proc is not None and self._proc.poll() is None:
            self._write("(pop 1)\n")

    def declare(self, scope: Sequence[Var]) -> None:
        fr = self._frames[-1]
        for v in sorted(set(scope), key=lambda v: v.name):
            old = self._declared.get(v.name)
            if old is not None:
                if old != v:
                    raise SolverError(f"{v.name} redeclared with sort {v.sort}")
                continue
            self._declared[v.name] = v
            fr.decls.append(v)
            self._write(smtlib.declare(v) + "\n")

    def add(self, f: L.Formula) -> None:
        missing = [v for v in L.free_vars(f) if v.name not in self._declared]
        if missing:
            raise L.UnboundVariable(", ".join(v.name for v in missing))
        for v in L.free_vars(f):
            if self._declared[v.name] != v:
                raise L.SortMismatch(f"{v.name} declared as {self._declared[v.name].sort}")
        self._frames[-1].asserts.append(f)
        self._write(f"(assert {smtlib.formula_text(f)})\n")

    def frame(self, scope: Sequence[Var] = ()):
        return _FrameContext(self, scope)

    # -- queries

    def _log_query(self) -> None:
        if not self._log_dir:
            return
        lines = [self._header()]
        for fr in self._frames:
            lines.extend(smtlib.declare(v) for v in fr.decls)
        for fr in self._frames:
            lines.extend(f"(assert {smtlib.formula_text(a)})" for a in fr.asserts)
        lines.append("(check-sat)")
        path = self._log_dir / f"{self.queries:06d}.smt2"
        path.write_text("\n".join(lines) + "\n")

    def check(self, budget: float = None) -> SatResult:
        """Check the current assertion stack; the model covers every declared var."""
        self.queries += 1
        self._log_query()
        budget = self.config.timeout if budget is None else budget
        for attempt in range(2):
            try:
                self._ensure()
                res = self._check_once(budget)
            except TimeoutError:
                log.info("solver timeout after %.1fs; restarting", budget)
                self._restart_quietly()
                return Unknown("timeout")
            except SolverCrashed as exc:
                log.warning("solver crashed (%s); replaying", exc)
                self._restart_quietly()
                if attempt == 1:
                    return Unknown(f"crashed: {exc}")
                continue
            if isinstance(res, Sat) and not self._model_ok(res.model):
                log.warning("solver model failed re-evaluation; re-querying")
                if attempt == 1:
                    return Unknown("model failed validation")
                continue
            return res
        return Unknown("unreachable")

    def _restart_quietly(self) -> None:
        try:
            self._restart()
        except SolverError:
            self._kill()

    def _check_once(self, budget: float) -> SatResult:
        deadline = time.monotonic() + budget
        self._write("(check-sat)\n")
        ans = self._read(deadline)
        if isinstance(ans, list):
            raise SolverError(f"solver error: {smtlib.render(ans)}")
        if ans == "unsat":
            return Unsat()
        if ans == "unknown":
            return Unknown("solver returned unknown")
        if ans != "sat":
            raise SolverError(f"unexpected solver answer {ans!r}")
        scope = [v for fr in self._frames for v in fr.decls]
        model: Dict[Var, object] = {}
        if scope:
            names = " ".join(smtlib.symbol(v.name) for v in scope)
            self._write(f"(get-value ({names}))\n")
            resp = self._read(deadline)
            if not isinstance(resp, list) or (resp and resp[0] == "error"):
                raise SolverError(f"get-value failed: {smtlib.render(resp)}")
            if len(resp) != len(scope):
                raise SolverError("get-value arity mismatch")
            for v, pair in zip(scope, resp):
                try:
                    val = smtlib.parse_value(pair[1])
                except smtlib.SmtLibError as exc:
                    return Unknown(f"unparseable value for {v.name}: {exc}")
                if v.sort is L.Sort.BOOL:
                    if not isinstance(val, bool):
                        return Unknown(f"non-boolean value for {v.name}")
                elif isinstance(val, bool) or (v.sort is L.Sort.INT and val.denominator != 1):
                    return Unknown(f"ill-sorted value for {v.name}")
                model[v] = val
        return Sat(model)

    def _model_ok(self, model) -> bool:
        try:
            return all(L.eval_formula(a, model) for fr in self._frames for a in fr.asserts)
        except L.LogicError:
            return False

    def check_sat(self, f: L.Formula, scope: Sequence[Var] = None, budget: float = None
                  ) -> SatResult:
        if scope is None:
            scope = L.free_vars(f)
        with self.frame(scope):
            self.add(f)
            res = self.check(budget)
        if isinstance(res, Sat):
            wanted = set(scope)
            res = Sat({v: val for v, val in res.model.items() if v in wanted})
        return res

    def check_valid(self, f: L.Formula, scope: Sequence[Var] = None, budget: float = None
                    ) -> ValidResult:
        if scope is None:
            scope = L.free_vars(f)
        res = self.check_sat(L.Not(f), scope, budget)
        if isinstance(res, Unsat):
            return Valid()
        if isinstance(res, Sat):
            return CounterModel(res.model)
        return res

    def is_valid(self, f: L.Formula, scope: Sequence[Var] = None) -> bool:
        res = self.check_valid(f, scope)
        if isinstance(res, Unknown):
            raise SolverError(f"validity undetermined: {res.reason}")
        return isinstance(res, Valid)

    def is_sat(self, f: L.Formula, scope: Sequence[Var] = None) -> bool:
        res = self.check_sat(f, scope)
        if isinstance(res, Unknown):
            raise SolverError(f"satisfiability undetermined: {res.reason}")
        return isinstance(res, Sat)

    def raw(self, script: str, budget: float = None) -> str:
        """Run a standalone script in a fresh solver process (tests, audits)."""
        cmd = self.config.command()
        out = subprocess.run(cmd, input=self._header() + script, capture_output=True,
                             text=True, timeout=budget or self.config.timeout)
        return out.stdout


class _FrameContext:
    def __init__(self, solver: SmtSolver, scope):
        self.solver = solver
        self.scope = scope

    def __enter__(self) -> SmtSolver:
        self.solver.push(self.scope)
        return self.solver

    def __exit__(self, *exc):
        self.solver.pop()
