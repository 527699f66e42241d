import itertools

import pytest

from layered_hls.errors import CostModelError, UnknownOp
from layered_hls.estimator import (
    CostModel, estimate, load_cost_model, lut_cost, report_csv, report_dat,
)
from layered_hls.netlist import Netlist, NlUnit, parse_netlist

WIDTHS = (8, 12, 14, 16)
ONE_ADD = ("fsmd v1 top\nfu 0 add w=8 lut=8 lat=1\nreg 2 w=8\nport in a w=8\nport in b w=8\n"
           "port out ret w=8 src=r2\nstate 0\nop 0 add w=8 r2 p:a p:b\n")


def full_adder_luts(w):
    """One LUT per sum bit of a ripple-carry adder."""
    return sum(1 for _bit in range(w))


def array_multiplier_cells(w):
    return sum(1 for _i in range(w) for _j in range(w))


@pytest.mark.parametrize("w", WIDTHS)
def test_default_costs_against_cell_count_oracles(w):
    assert lut_cost("add", w) == full_adder_luts(w)
    assert lut_cost("mul", w) == array_multiplier_cells(w)
    assert lut_cost("div", w) == 2 * array_multiplier_cells(w)
    assert lut_cost("mux", w) == (w + 1) // 2


def test_spot_values_and_zero_width():
    assert lut_cost("add", 8) == 8
    assert lut_cost("mul", 16) == 256
    for kind in ("add", "sub", "mul", "div", "cmp", "mux", "alu"):
        assert lut_cost(kind, 0) == 0


def test_alu_cost():
    # widest primitive (divider) plus operand steering for four extra operations
    assert lut_cost("alu", 16) == 512 + 4 * 2 * 8


@pytest.mark.parametrize("kind", ["add", "sub", "mul", "div", "cmp", "mux", "alu"])
def test_monotone_in_width(kind):
    for w1, w2 in itertools.combinations_with_replacement(WIDTHS, 2):
        assert lut_cost(kind, w1) <= lut_cost(kind, w2)


def test_unknown_op():
    with pytest.raises(UnknownOp):
        lut_cost("shift", 8)


def test_one_add_report():
    r = estimate(ONE_ADD)
    assert r.lut_total == 8 + 3 == 11
    assert r.lut_excl_basic == 3
    assert r.register_bits == 8 and r.cycles == 1 and r.macros == 0


def test_empty_netlist():
    r = estimate(Netlist("empty"))
    assert (r.lut_total, r.lut_excl_basic, r.register_bits, r.cycles) == (0, 0, 0, 0)


def test_unit_terms_are_additive():
    model = CostModel()
    a = parse_netlist(ONE_ADD)
    b = Netlist("b", units={0: NlUnit(0, "mul", 12, 0, 1), 1: NlUnit(1, "alu", 16, 0, 1)})
    both = Netlist("ab", units={0: a.units[0], 1: b.units[0], 2: b.units[1]})
    fsm = model.fsm
    assert estimate(both).lut_total == (estimate(a).lut_total - fsm(1)) + estimate(b).lut_total


def test_bypass_costs_a_mux_each():
    nl = parse_netlist(ONE_ADD + "bypass 0 1 w=16\nbypass 1 2 w=8\n")
    assert estimate(nl).lut_total == 11 + 8 + 4


def test_cost_config_file():
    model = load_cost_model("# comment\ncost mul = 3*w + 1\ncost mux2 = ceil(w/4)\ncost fsm = S + T\n")
    assert lut_cost("mul", 16, model) == 49
    assert lut_cost("mux", 14, model) == 4
    assert lut_cost("add", 16, model) == 16
    assert model.fsm(5) == 10


@pytest.mark.parametrize("text", [
    "cost mul w*w\n", "cost mul = w - 1\n", "cost mul = w**2\n", "cost shift = w\n",
    "cost mul = foo(w)\n", "cost add = w\ncost add = w\n", "cost mul = (w\n",
])
def test_bad_cost_config(text):
    with pytest.raises((CostModelError, UnknownOp)):
        load_cost_model(text)


def test_report_files_shape(bench_programs):
    from layered_hls.pipeline import compare_conditions

    reports = compare_conditions(bench_programs)
    csv = report_csv(reports).splitlines()
    assert csv[0] == "benchmark,condition,lut_total,lut_excl_basic,regbits,macros,cycles"
    assert len(csv) == 7
    dat = report_dat(reports).splitlines()
    assert dat[0].startswith("#") and [line.split()[0] for line in dat[1:]] == ["single", "cascade"]
    for r in reports:
        assert r.lut_excl_basic <= r.lut_total
