import pytest
from hypothesis import given, settings

from layered_hls.binder import bind
from layered_hls.cdfg import build_cdfg
from layered_hls.emitter import emit
from layered_hls.errors import ConsistencyError, NetlistParseError
from layered_hls.frontend import parse
from layered_hls.netlist import macro_occupancy, parse_netlist, unit_kind_counts
from layered_hls.pe_model import build_pe_config
from layered_hls.pipeline import synthesize
from layered_hls.scheduler import asap

from helpers import db_for, programs

ADD8 = "int8 top(int8 a, int8 b) { return a + b; }"


def compile_parts(src, mode="flat"):
    g = build_cdfg(parse(src))
    s = asap(g)
    b = bind(g, s, None, mode)
    return build_pe_config(g, s, b), g, s, b


def test_single_add_netlist():
    text = emit(*compile_parts(ADD8))
    assert text == (
        "fsmd v1 top\n"
        "fu 0 add w=8 lut=8 lat=1\n"
        "reg 2 w=8\n"
        "port in a w=8\n"
        "port in b w=8\n"
        "port out ret w=8 src=r2\n"
        "state 0\n"
        "op 0 add w=8 r2 p:a p:b\n"
    )


def test_emission_is_deterministic(bench_programs, conv_db):
    for mode in ("operator", "frra", "flat"):
        a = synthesize(bench_programs["cascade"], mode, conv_db).text
        b = synthesize(bench_programs["cascade"], mode, conv_db).text
        assert a == b


def test_operator_cascade_has_one_macro_line(bench_programs, conv_db):
    text = synthesize(bench_programs["cascade"], "operator", conv_db).text
    top = text.split("macrodef")[0]
    assert sum(line.startswith("fu ") and " macro:conv " in line for line in top.splitlines()) == 1


def test_frra_netlist_records_reconfiguration(bench_programs):
    nl = synthesize(bench_programs["single"], "frra").netlist
    events = nl.reconf_events
    # first configuration plus each switch between mul and add on the one ALU
    assert events[0][2] == "mul" and {op for _, _, op in events} == {"mul", "add"}


def test_consistency_error_on_unknown_node():
    arr, g, s, b = compile_parts(ADD8)
    b.unit_of[77] = 0
    with pytest.raises(ConsistencyError):
        emit(arr, g, s, b)


@settings(max_examples=60, deadline=None)
@given(programs(with_operator=True))
def test_parse_back_matches_binding_and_schedule(src):
    p = parse(src)
    for mode in ("operator", "frra", "flat"):
        r = synthesize(p, mode, db_for(p))
        nl = parse_netlist(r.text)
        assert nl.to_text() == r.text
        assert len(nl.units) == len(r.binding.units)
        assert len(nl.regs) == sum(n.is_operation for n in r.graph)
        assert len(nl.states) == r.schedule.total_steps
        assert [s.index for s in nl.states] == list(range(r.schedule.total_steps))


def test_macro_occupancy(bench_programs, conv_db):
    nl = parse_netlist(synthesize(bench_programs["cascade"], "operator", conv_db).text)
    assert macro_occupancy(nl) == {0: [(0, 10), (10, 20), (20, 30)]}
    assert unit_kind_counts(nl)["macro:conv"] == 1


GOOD = ADD8


@pytest.mark.parametrize("text,line", [
    ("", 1),
    ("fsmd v2 top\n", 1),
    ("fsmd v1 top\nfu 0 add w=8 lut=8\n", 2),
    ("fsmd v1 top\nfu 0 add w=8 lut=8 lat=0\n", 2),
    ("fsmd v1 top\nreg 1 w=8\nfu 0 add w=8 lut=8 lat=1\n", 3),
    ("fsmd v1 top\nstate 1\n", 2),
    ("fsmd v1 top\nwire 1 2\n", 2),
    ("fsmd v1 top\nfu 0 add w=8 lut=8 lat=1\nfu 0 add w=8 lut=8 lat=1\n", 3),
    ("fsmd v1 top\nfu 0 add w=8 lut=8 lat=1\nreg 2 w=8\nstate 0\nop 0 add w=8 x2 #1 #2\n", 5),
    ("fsmd v1 top\nfu 0 add w=8 lut=8 lat=1\nreg 2 w=8\nstate 0\nop 0 add w=8 r2 r9 #2\n", 1),
    ("fsmd v1 top\nfu 0 add w=8 lut=8 lat=1\nreg 2 w=8\nstate 0\nop 0 add w=8 r2 p:q #2\n", 1),
    ("fsmd v1 top\nmacrodef m\n  fsmd v1 m\n", 2),
])
def test_malformed_netlists(text, line):
    with pytest.raises(NetlistParseError) as info:
        parse_netlist(text)
    assert info.value.line == line
