import pytest
from hypothesis import given, settings

from layered_hls.errors import DslSyntaxError, PragmaError, SemanticError
from layered_hls.frontend import Pragma, SignalType, extract_pragmas, parse, pretty
from layered_hls.frontend.ast import literal_width, wrap

from helpers import programs


def test_pragmas_attach_to_next_function():
    src = "/* Cyber func = operator */\n/* Cyber share name = CTX0 */\nint16 f(int16 a) { return a; }\nint16 top(int16 a) { return f(a); }"
    p = parse(src)
    f = p.function("f")
    assert f.is_operator and f.share_name == "CTX0"
    assert not p.function("top").pragmas
    assert p.entry == "top"


@pytest.mark.parametrize("text", [
    "/*Cyber func=operator*/", "/*  Cyber   func   =   operator  */", "/* Cyber func= operator */",
])
def test_pragma_whitespace_is_flexible(text):
    p = parse(f"{text} int8 f(int8 a) {{ return a; }} int8 top(int8 a) {{ return f(a); }}")
    assert p.function("f").is_operator


def test_extract_pragmas_reports_positions():
    found = extract_pragmas("int8 x;\n  /* Cyber share name = K */")
    assert [(pos.line, pos.col) for pos, _ in found] == [(2, 3)]
    assert found[0][1] == Pragma(Pragma.SHARE_NAME, "K")


@pytest.mark.parametrize("src,exc", [
    ("/* hello */ int8 top(int8 a) { return a; }", DslSyntaxError),
    ("int8 top(int8 a) { /* Cyber func = operator */ return a; }", PragmaError),
    ("/* Cyber share name = A */ int8 f(int8 a) { return a; } int8 top(int8 a) { return f(a); }",
     PragmaError),
    ("/* Cyber func = operator */ /* Cyber func = operator */ int8 f(int8 a) { return a; }"
     " int8 top(int8 a) { return f(a); }", PragmaError),
    ("/* Cyber func = gate */ int8 top(int8 a) { return a; }", PragmaError),
    ("int8 top(int8 a) { return top(a); }", SemanticError),
    ("int16 top(int16 a) { return a + 40000; }", SemanticError),
    ("void top(int8 a) { }", SemanticError),
    ("int8 f(int8 a) { return a; } int8 g(int8 a) { return a; }", SemanticError),
    ("int8 top(int8 a) { return b; }", SemanticError),
    ("int8 top(int8 a) { return a; a = 1; }", SemanticError),
    ("int8 top(int8 a) { return a < 1 < 2; }", DslSyntaxError),
    ("int9 top(int8 a) { return a; }", DslSyntaxError),
    ("int8 top(int8 a) { return a + ; }", DslSyntaxError),
])
def test_rejections(src, exc):
    with pytest.raises(exc):
        parse(src)


def test_syntax_error_carries_position_and_expectation():
    with pytest.raises(DslSyntaxError) as info:
        parse("int8 top(int8 a) {\n  return a + ;\n}")
    assert (info.value.line, info.value.col) == (2, 14)
    assert info.value.expected


def test_explicit_entry_overrides_top():
    src = "int8 top(int8 a) { return a; } int8 other(int8 a) { return a + 1; }"
    assert parse(src, entry="other").entry == "other"


def test_signal_type_widths():
    assert SignalType.parse("int12[4]").width == 12
    assert SignalType.parse("int12[4]").array_len == 4
    assert SignalType("void").width is None


@pytest.mark.parametrize("value,width", [(0, 8), (127, 8), (-128, 8), (128, 12), (-2049, 14),
                                         (8191, 14), (8192, 16), (-32768, 16), (32768, None)])
def test_literal_width(value, width):
    assert literal_width(value) == width


def test_wrap_matches_modular_arithmetic():
    for w in (8, 12, 14, 16):
        for v in range(-70000, 70000, 997):
            r = wrap(v, w)
            assert -(1 << (w - 1)) <= r < (1 << (w - 1)) and (r - v) % (1 << w) == 0


@settings(max_examples=150, deadline=None)
@given(programs(with_operator=True))
def test_pretty_print_round_trips(src):
    p = parse(src)
    assert parse(pretty(p)) == p
    assert pretty(parse(pretty(p))) == pretty(p)
