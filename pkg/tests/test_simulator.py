import random

import pytest
from hypothesis import given, settings

from layered_hls.errors import DivByZero, SimulatorError, UninitializedRegister, VectorError
from layered_hls.frontend import parse
from layered_hls.netlist import parse_netlist
from layered_hls.pipeline import synthesize
from layered_hls.simulator import (
    check_equivalence, corner_vectors, interpret, random_vectors, read_vectors, simulate,
    write_results,
)

from helpers import db_for, programs

CONV = """\
int16 conv(int16 p[9], int16 k[9]) {
  int16 s = 0;
  for (i = 0; i < 9; i++) { s = s + p[i] * k[i]; }
  return s;
}
int16 top(int16 x[9]) {
  int16 k[9] = {KERNEL};
  return conv(x, k);
}
"""


def window(values):
    return {f"x[{i}]": v for i, v in enumerate(values)}


def conv_program(kernel):
    return parse(CONV.replace("KERNEL", ", ".join(map(str, kernel))))


def test_identity_kernel_returns_centre():
    p = conv_program([0, 0, 0, 0, 1, 0, 0, 0, 0])
    rng = random.Random(5)
    for _ in range(20):
        px = [rng.randint(-32768, 32767) for _ in range(9)]
        assert interpret(p, window(px))["ret"] == px[4]


def test_zero_kernel():
    assert interpret(conv_program([0] * 9), window(range(9)))["ret"] == 0


def test_laplacian_on_flat_window():
    p = conv_program([0, -1, 0, -1, 4, -1, 0, -1, 0])
    assert interpret(p, window([7] * 9))["ret"] == 4 * 7 - 4 * 7 == 0


def test_wraparound_add():
    p = parse("int8 top(int8 a, int8 b) { return a + b; }")
    r = simulate(synthesize(p, "flat").text, {"a": 200, "b": 100})
    assert r.outputs == {"ret": (300 % 256)} == {"ret": 44} and r.cycles_executed == 1
    assert interpret(p, {"a": 200, "b": 100}) == {"ret": 44}


def test_division_by_zero_is_reported():
    p = parse("int8 top(int8 a, int8 b) { return a / b; }")
    with pytest.raises(DivByZero):
        interpret(p, {"a": 1, "b": 0})
    with pytest.raises(DivByZero):
        simulate(synthesize(p, "flat").text, {"a": 1, "b": 0})
    assert interpret(p, {"a": -7, "b": 2}) == {"ret": -3}


def test_uninitialized_register():
    text = ("fsmd v1 t\nfu 0 add w=8 lut=8 lat=1\nreg 1 w=8\nreg 2 w=8\nport in a w=8\n"
            "port out ret w=8 src=r2\nstate 0\nop 0 add w=8 r2 r1 p:a\n")
    with pytest.raises(UninitializedRegister):
        simulate(text, {"a": 1})


def test_alu_must_be_configured():
    text = ("fsmd v1 t\nfu 0 alu w=8 lut=1 lat=1\nreg 1 w=8\nport in a w=8\n"
            "port out ret w=8 src=r1\nstate 0\nreconf 0 0 sub\nop 0 add w=8 r1 p:a p:a\n")
    with pytest.raises(SimulatorError):
        simulate(text, {"a": 1})


def test_vector_port_mismatch():
    p = parse("int8 top(int8 a) { return a; }")
    with pytest.raises(VectorError):
        interpret(p, {})
    with pytest.raises(VectorError):
        simulate(synthesize(p, "flat").text, {"a": 1, "zz": 2})


def test_cycle_count_equals_schedule(bench_programs, conv_db):
    for mode in ("operator", "frra", "flat"):
        r = synthesize(bench_programs["cascade"], mode, conv_db)
        vec = {p: 3 for p in r.graph.input_ports()}
        assert simulate(r.netlist, vec).cycles_executed == r.schedule.total_steps


def test_corner_vectors():
    ports = [("a", 8), ("b", 12)]
    cv = corner_vectors(ports)
    assert {"a": 0, "b": 0} in cv and {"a": -128, "b": -2048} in cv and {"a": 127, "b": 2047} in cv
    assert random_vectors(ports, 5, 1) == random_vectors(ports, 5, 1)


def test_zero_random_vectors_still_checks_corners():
    p = parse("int8 top(int8 a) { return a * 2; }")
    v = check_equivalence(p, synthesize(p, "flat").text, 0, 0)
    assert v.passed and v.vectors == len(corner_vectors([("a", 8)]))


def test_mutated_constant_is_caught(bench_programs):
    p = bench_programs["single"]
    text = synthesize(p, "flat").text
    mutated = text.replace(" #4", " #5", 1)
    assert mutated != text
    v = check_equivalence(p, mutated, 100, 0)
    assert not v.passed and v.counterexample is not None
    assert v.expected != v.actual


def test_vector_file_round_trip():
    vecs = read_vectors("in a = 3\nin b = -4\n\n# second\nin a = 1\nin b = 2\n")
    assert vecs == [{"a": 3, "b": -4}, {"a": 1, "b": 2}]
    with pytest.raises(VectorError):
        read_vectors("in a 3\n")
    with pytest.raises(VectorError):
        read_vectors("in a = 1\nin a = 2\n")
    p = parse("int8 top(int8 a, int8 b) { return a - b; }")
    nl = parse_netlist(synthesize(p, "flat").text)
    out = write_results([simulate(nl, v) for v in vecs])
    assert out.startswith("out ret = 7\n")


def test_order_independent_statements():
    a = parse("int16 top(int16 x, int16 y) { int16 p = x * 3; int16 q = y - 2; return p + q; }")
    b = parse("int16 top(int16 x, int16 y) { int16 q = y - 2; int16 p = x * 3; return p + q; }")
    for vec in random_vectors([("x", 16), ("y", 16)], 50, 9):
        assert interpret(a, vec) == interpret(b, vec)


@settings(max_examples=120, deadline=None)
@given(programs(with_operator=True))
def test_soundness_all_modes(src):
    p = parse(src)
    db = db_for(p)
    for mode in ("operator", "frra", "flat"):
        v = check_equivalence(p, synthesize(p, mode, db).netlist, 8, 3)
        assert v.passed, f"{mode}: {v}"
