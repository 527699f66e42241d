import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from layered_hls.errors import DatabaseIoError, DuplicateSignature, FormatError, StaleMacro
from layered_hls.estimator import estimate
from layered_hls.frontend import parse
from layered_hls.frontend.ast import SignalType, Signature
from layered_hls.macrodb import (
    MacroBlock, MacroDatabase, body_digest, load, lookup, parse_db, register_macro, save,
)
from layered_hls.pipeline import synthesize, synthesize_standalone

TYPES = ("int8", "int12", "int14", "int16")


def test_register_conv(bench_programs):
    p = bench_programs["single"]
    db = MacroDatabase()
    block = register_macro(db, p.function("conv"), program=p)
    standalone = synthesize_standalone(p, "conv")
    assert block.lut_cost == estimate(standalone.text).lut_total == 302
    assert block.latency_cycles == standalone.schedule.total_steps == 10
    assert block.register_bits == 9 * 16 + 9 * 16
    assert lookup(db, p.function("conv").signature) == block


def test_register_is_idempotent(bench_programs):
    p = bench_programs["single"]
    db = MacroDatabase()
    register_macro(db, p.function("conv"), program=p)
    first = db.to_text()
    register_macro(db, p.function("conv"), program=p)
    assert db.to_text() == first


def test_changed_body_replaces_or_conflicts():
    a = parse("/* Cyber func = operator */ int8 f(int8 x) { return x + 1; } int8 top(int8 x) { return f(x); }")
    b = parse("/* Cyber func = operator */ int8 f(int8 x) { return x + 2; } int8 top(int8 x) { return f(x); }")
    db = MacroDatabase()
    register_macro(db, a.function("f"), program=a)
    with pytest.raises(DuplicateSignature):
        register_macro(db, b.function("f"), program=b, replace=False)
    block = register_macro(db, b.function("f"), program=b)
    assert block.revision == 1 and block.body_digest == body_digest(b.function("f"), b)
    with pytest.raises(StaleMacro):
        synthesize(a, "operator", db)


def test_digest_ignores_pragmas_and_layout():
    a = parse("/* Cyber func = operator */ int8 f(int8 x) { return x + 1; } int8 top(int8 x) { return f(x); }")
    b = parse("/* Cyber func = operator */\n/* Cyber share name = Q */\nint8 f(int8 x)\n{\n  return x+1;\n}\nint8 top(int8 x) { return f(x); }")
    assert body_digest(a.function("f"), a) == body_digest(b.function("f"), b)


def test_digest_covers_helpers():
    src = "int8 h(int8 x) {{ return x * {k}; }} /* Cyber func = operator */ int8 f(int8 x) {{ return h(x); }} int8 top(int8 x) {{ return f(x); }}"
    a, b = parse(src.format(k=2)), parse(src.format(k=3))
    assert body_digest(a.function("f"), a) != body_digest(b.function("f"), b)


def test_empty_lookup_and_empty_file(tmp_path):
    db = MacroDatabase()
    sig = Signature("conv", (SignalType("int16", 9),) * 2, SignalType("int16"))
    assert lookup(db, sig) is None
    save(db, tmp_path / "e.db")
    assert (tmp_path / "e.db").read_text() == "cyberdb v1\n"


def test_lookup_requires_exact_widths():
    block = MacroBlock("f", (SignalType("int12"), SignalType("int16")), SignalType("int8"),
                       3, 10, 20, "0" * 16)
    db = MacroDatabase()
    db.add(block)
    for params in itertools.product(TYPES, repeat=2):
        for ret in TYPES:
            sig = Signature("f", tuple(map(SignalType, params)), SignalType(ret))
            hit = params == ("int12", "int16") and ret == "int8"
            assert (lookup(db, sig) is not None) == hit


blocks = st.builds(
    MacroBlock,
    name=st.from_regex(r"[a-z][a-z0-9_]{0,6}", fullmatch=True),
    param_types=st.lists(st.builds(SignalType, st.sampled_from(TYPES),
                                   st.one_of(st.none(), st.integers(1, 16))),
                         max_size=3).map(tuple),
    return_type=st.sampled_from(TYPES).map(SignalType),
    latency_cycles=st.integers(1, 500),
    lut_cost=st.integers(0, 10**6),
    register_bits=st.integers(0, 10**5),
    body_digest=st.from_regex(r"[0-9a-f]{16}", fullmatch=True),
    revision=st.integers(0, 9),
)


def make_db(items):
    db = MacroDatabase()
    for b in items:
        db.entries[b.signature] = b
    return db


@settings(max_examples=50, deadline=None)
@given(st.lists(blocks, max_size=6))
def test_save_load_round_trip(tmp_path_factory, items):
    db = make_db(items)
    path = tmp_path_factory.mktemp("db") / "x.db"
    save(db, path)
    first = path.read_bytes()
    loaded = load(path)
    assert loaded == db
    save(loaded, path)
    assert path.read_bytes() == first
    for b in items:
        assert lookup(loaded, b.signature) == lookup(db, b.signature)


def sample_text():
    rng = random.Random(11)
    items = [MacroBlock(f"m{i}", (SignalType(rng.choice(TYPES), 9),), SignalType("int16"),
                        rng.randint(1, 30), rng.randint(0, 999), rng.randint(0, 999),
                        f"{rng.getrandbits(64):016x}") for i in range(3)]
    return make_db(items).to_text()


def mutations(text):
    """Every single-byte substitution, deletion and insertion, plus truncations."""
    rng = random.Random(3)
    for i in range(len(text)):
        c = rng.choice("0123456789abcdefxyz =,[]\n")
        if c != text[i]:
            yield f"sub@{i}", text[:i] + c + text[i + 1:]
        yield f"del@{i}", text[:i] + text[i + 1:]
        yield f"ins@{i}", text[:i] + rng.choice("0a =\n") + text[i:]
    for i in range(len(text)):
        if i == 0 or text[i - 1] != "\n":
            yield f"trunc@{i}", text[:i]


def test_mutated_files_never_load_silently():
    text = sample_text()
    original = parse_db(text)
    for label, mutated in mutations(text):
        try:
            db = parse_db(mutated)
        except FormatError:
            continue
        # the only acceptable silent outcome is an identical database
        assert db == original, label


def test_format_error_names_line():
    lines = sample_text().splitlines(keepends=True)
    bad = lines[0] + lines[1] + lines[2].replace("lut=", "lut=x")
    with pytest.raises(FormatError) as info:
        parse_db(bad)
    assert info.value.line == 3


@pytest.mark.parametrize("text", ["", "cyberdb v2\n", "cyberdb v1", "cyberdb v1\nmacro\n",
                                  "cyberdb v1\n\n"])
def test_format_errors(text):
    with pytest.raises(FormatError):
        parse_db(text)


def test_io_errors(tmp_path):
    with pytest.raises(DatabaseIoError):
        load(tmp_path / "missing.db")
    (tmp_path / "dir.db").mkdir()
    with pytest.raises(DatabaseIoError):
        save(MacroDatabase(), tmp_path / "dir.db")
