import pytest

from layered_hls.binder import bind
from layered_hls.cdfg import build_cdfg
from layered_hls.errors import PlacementError
from layered_hls.frontend import parse
from layered_hls.pe_model import PEArray, build_pe_config, read_placement, validate_adjacency
from layered_hls.pipeline import synthesize
from layered_hls.scheduler import asap

from helpers import db_for

CHAIN = "int16 top(int16 a, int16 b) { int16 x = a * b; int16 y = x + a; return y - b; }"


def chain():
    g = build_cdfg(parse(CHAIN))
    s = asap(g)
    return g, s, bind(g, s, None, "flat")


def unit_of_op(g, b, op):
    return b.unit_of[next(n.id for n in g if n.op == op)]


def test_default_placement_single_pe():
    g, s, b = chain()
    arr = build_pe_config(g, s, b)
    assert len(arr.pes) == 1 and arr.bypass == [] and validate_adjacency(arr) == []
    assert arr.n == 1 and arr.m == 0
    assert sorted(arr.pes[0].nodes) == sorted(g.nodes)


def test_crossing_edge_becomes_bypass():
    g, s, b = chain()
    arr = build_pe_config(g, s, b, {unit_of_op(g, b, "add"): 1, unit_of_op(g, b, "sub"): 1})
    assert arr.bypass == [(0, 1, 16)]
    assert validate_adjacency(arr) == []
    assert sum(len(pe.nodes) for pe in arr.pes) == len(g)
    assert "a" in arr.pes[1].inputs and "b" in arr.pes[1].inputs


def test_non_adjacent_bypass_is_reported():
    g, s, b = chain()
    arr = build_pe_config(g, s, b, {unit_of_op(g, b, "add"): 2, unit_of_op(g, b, "sub"): 2})
    assert validate_adjacency(arr) == [(0, 2, 16)]


def test_vacuous_and_explicit_adjacency():
    assert validate_adjacency(PEArray([], [])) == []
    assert validate_adjacency(PEArray([], [(0, 1, 8)])) == []
    assert validate_adjacency(PEArray([], [(0, 2, 8)])) == [(0, 2, 8)]


def test_placement_errors():
    g, s, b = chain()
    with pytest.raises(PlacementError):
        build_pe_config(g, s, b, {99: 0})
    with pytest.raises(PlacementError):
        build_pe_config(g, s, b, {0: 3}, num_pes=2)
    with pytest.raises(PlacementError):
        read_placement("place 0\n")
    with pytest.raises(PlacementError):
        read_placement("place 0 1\nplace 0 2\n")
    assert read_placement("# comment\nplace 0 1\n\nplace 2 0\n") == {0: 1, 2: 0}


TWO_CALLS = """\
/* Cyber func = operator */
{pragma}int16 f(int16 a, int16 b) {{ return a * b + a; }}

int16 top(int16 x, int16 y) {{ int16 t = f(x, y); return f(t, y); }}
"""


def test_share_name_merges_dynamic_contexts():
    plain = parse(TWO_CALLS.format(pragma=""))
    shared = parse(TWO_CALLS.format(pragma="/* Cyber share name = CTX0 */\n"))
    a = synthesize(plain, "operator", db_for(plain)).array
    b = synthesize(shared, "operator", db_for(shared)).array
    assert a.m == 2 and b.m == 1 == a.m - 1
    assert b.unmerged_contexts == 2 and b.m <= b.unmerged_contexts
    ctx = b.pes[0].dynamic_contexts[0]
    assert ctx.share_name == "CTX0" and len(ctx.members) == 2


def test_frra_context_per_alu(bench_programs):
    arr = synthesize(bench_programs["single"], "frra").array
    assert arr.m == 1
    assert len(arr.pes[0].dynamic_contexts[0].instruction_set) == 18
