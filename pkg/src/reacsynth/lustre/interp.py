"""Reference stream semantics, one instant at a time.

Two interpreters share the expression evaluator: one runs a source program
with node calls as live instances, the other runs a flattened
:class:`CheckedContract`.  Agreement between them is the inlining oracle.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional

from .ast import (Arrow, Binary, BoolLit, Call, IfThenElse, Ident, Node, Num, Pre,
                  Program, Unary, walk)
from .elaborate import CheckedContract, apply_op, select_node


class StreamError(Exception):
    pass


class _Nil:
    """Value of ``pre`` at the first instant; absorbs every operator."""

    def __repr__(self):
        return "nil"

    def __bool__(self):  # an undefined assertion does not fail
        return True


NIL = _Nil()


def _eval(e, lookup, pre_lookup, t: int, call=None):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, BoolLit):
        return e.value
    if isinstance(e, Ident):
        return lookup(e.name)
    if isinstance(e, Unary):
        v = _eval(e.arg, lookup, pre_lookup, t, call)
        if v is NIL:
            return NIL
        return (not v) if e.op == "not" else -v
    if isinstance(e, Binary):
        a = _eval(e.lhs, lookup, pre_lookup, t, call)
        b = _eval(e.rhs, lookup, pre_lookup, t, call)
        if a is NIL or b is NIL:
            return NIL
        if e.op in ("/", "div", "mod") and b == 0:
            raise StreamError("division by zero")
        return apply_op(e.op, a, b)
    if isinstance(e, IfThenElse):
        c = _eval(e.cond, lookup, pre_lookup, t, call)
        if c is NIL:
            return NIL
        return _eval(e.then if c else e.other, lookup, pre_lookup, t, call)
    if isinstance(e, Arrow):
        return _eval(e.init if t == 0 else e.step, lookup, pre_lookup, t, call)
    if isinstance(e, Pre):
        if t == 0:
            return NIL
        return pre_lookup(e)
    if isinstance(e, Call):
        if call is None:
            raise StreamError("node call in a flattened contract")
        return call(e)
    raise TypeError(f"not an expression: {e!r}")


class ContractInterpreter:
    """Steps a checked contract; values are Fractions and bools."""

    def __init__(self, cc: CheckedContract):
        self.cc = cc
        self.t = 0
        self.prev: Optional[Dict[str, object]] = None

    def step(self, inputs: Dict[str, object], free: Dict[str, object]) -> Dict[str, object]:
        env: Dict[str, object] = {}
        env.update({k: inputs[k] for k in self.cc.inputs if k in inputs})
        env.update({k: free[k] for k in self.cc.free})
        prev = self.prev

        def lookup(name):
            if name not in env:
                raise StreamError(f"'{name}' read before it is computed")
            return env[name]

        def pre_lookup(p):
            return prev[p.arg.name]

        for name, rhs in self.cc.defined.items():
            env[name] = _eval(rhs, lookup, pre_lookup, self.t)
        env["__assert__"] = all(_eval(a, lookup, pre_lookup, self.t) for a in self.cc.asserts)
        self.prev = env
        self.t += 1
        return dict(env)


class _Instance:
    def __init__(self, node: Node, program: "ProgramInterpreter"):
        self.node = node
        self.prog = program
        self.t = 0
        self.eqs = {eq.lhs: eq.rhs for eq in node.equations}
        exprs = [eq.rhs for eq in node.equations] + [a.expr for a in node.asserts]
        self.pres: List[Pre] = []
        self.calls: List[Call] = []
        for e in exprs:
            for x in walk(e):
                if isinstance(x, Pre):
                    self.pres.append(x)
                elif isinstance(x, Call):
                    self.calls.append(x)
        self.children = {id(c): _Instance(program.nodes[c.node], program) for c in self.calls}
        self.mem: Dict[int, object] = {}
        self.last_ok = True

    def step(self, args: Dict[str, object]) -> Dict[str, object]:
        env = dict(args)
        busy = set()
        call_out: Dict[int, object] = {}

        def lookup(name):
            if name in env:
                return env[name]
            if name in self.eqs:
                if name in busy:
                    raise StreamError(f"instantaneous cycle through '{name}'")
                busy.add(name)
                env[name] = _eval(self.eqs[name], lookup, pre_lookup, self.t, call)
                busy.discard(name)
                return env[name]
            if name in self.prog.consts:
                return self.prog.consts[name]
            raise StreamError(f"unknown stream '{name}'")

        def pre_lookup(p):
            return self.mem[id(p)]

        def call(c):
            if id(c) not in call_out:
                vals = [_eval(a, lookup, pre_lookup, self.t, call) for a in c.args]
                child = self.children[id(c)]
                ins = {p.name: v for p, v in zip(child.node.inputs, vals)}
                outs = child.step(ins)
                call_out[id(c)] = outs[child.node.outputs[0].name]
            return call_out[id(c)]

        for name in self.eqs:
            lookup(name)
        ok = all(_eval(a.expr, lookup, pre_lookup, self.t, call) for a in self.node.asserts)
        for c in self.calls:
            call(c)
        new_mem = {id(p): _eval(p.arg, lookup, pre_lookup, self.t, call) for p in self.pres}
        ok = ok and all(ch.last_ok for ch in self.children.values())
        self.mem = new_mem
        self.t += 1
        self.last_ok = ok
        env["__assert__"] = ok
        return env


class ProgramInterpreter:
    """Runs a source program with node calls kept as stateful instances."""

    def __init__(self, prog: Program, node_name: Optional[str] = None):
        from .elaborate import _fold_const
        self.nodes = {n.name: n for n in prog.nodes}
        self.consts: Dict[str, object] = {}
        folded = {}
        for c in prog.consts:
            v, s = _fold_const(c.value, folded)
            folded[c.name] = (v, s)
            self.consts[c.name] = v
        self.main = _Instance(select_node(prog, node_name), self)

    def step(self, params: Dict[str, object]) -> Dict[str, object]:
        return self.main.step(params)
