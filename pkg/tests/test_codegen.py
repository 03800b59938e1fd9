from fractions import Fraction

import pytest

from reacsynth import logic as L
from reacsynth.aeval import SkolemCase
from reacsynth.codegen import emit_c, format_inputs, loc, parse_states
from reacsynth.encoder import primed
from reacsynth.logic import Sort, Var
from reacsynth.runtime import Controller, input_script, simulate

from support import c_compiler, compile_c, run_emitted, values_close

pytestmark = pytest.mark.skipif(c_compiler() is None, reason="no C compiler")

s = Var("s", Sort.REAL)
i = Var("i", Sort.REAL)


def _one_case():
    return Controller((s,), (i,), (primed(s),), {s: Fraction(0)},
                      (SkolemCase(L.TRUE, {primed(s): L.add(s, i)}),))


@pytest.mark.parametrize("mode", ["double", "rational"])
def test_trivial_compiles_cleanly(tmp_path, mode):
    src = emit_c(_one_case(), mode=mode)
    res, _ = compile_c(src, tmp_path, main=False)
    assert res.returncode == 0, res.stderr
    assert not res.stderr.strip()


def test_header_and_size():
    src = emit_c(_one_case(), mode="double", source_hash="abc123")
    assert "abc123" in src
    assert "void step(" in src and "void init(" in src
    assert loc(src) == sum(1 for l in src.splitlines() if l.strip())


def test_unknown_mode():
    with pytest.raises(ValueError):
        emit_c(_one_case(), mode="float")


@pytest.mark.parametrize("mode", ["double", "rational"])
def test_trivial_trace(tmp_path, mode):
    c = _one_case()
    script = [{i: Fraction(k, 3)} for k in range(20)]
    res, exe = compile_c(emit_c(c, mode=mode), tmp_path)
    assert res.returncode == 0, res.stderr
    got = parse_states(c, run_emitted(exe, format_inputs(c, script)), mode)
    expected = Fraction(0)
    assert values_close(got[0][s], expected)
    for k, row in enumerate(got[1:]):
        expected += Fraction(k, 3)
        assert row[s] == expected if mode == "rational" else values_close(row[s], expected)


@pytest.mark.parametrize("name", ["counter_ctrl_reset", "integrator"])
@pytest.mark.parametrize("mode", ["double", "rational"])
def test_benchmark_differential(tmp_path, synthesized, name, mode):
    ts, out = synthesized(name)
    c = Controller.from_outcome(ts, out)
    script = input_script(ts, c, 200, seed=4)
    ref = simulate(c, ts, len(script), inputs=script, record=True).trace.states
    res, exe = compile_c(emit_c(c, ts, mode), tmp_path)
    assert res.returncode == 0, res.stderr
    got = parse_states(c, run_emitted(exe, format_inputs(c, script)), mode)
    assert len(got) == len(ref)
    for a, b in zip(got, ref):
        for v in c.state_vars:
            assert (a[v] == b[v]) if mode == "rational" else values_close(a[v], b[v])
