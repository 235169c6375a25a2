import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from support import random_working

from hallkit import fixture_path
from hallkit.formats import (
    FormatMismatch,
    ParseError,
    detect_format,
    emit_instance,
    parse_fmp,
    parse_instance,
    parse_smp,
    parse_tri,
)
from hallkit.generators import random_cnf, random_fmp, random_smp, random_tripartite

GENERATORS = {
    "fmp": random_fmp,
    "working": lambda rng: random_working(rng, rng.random() < 0.5),
    "dimacs": random_cnf,
    "smp": random_smp,
    "tri": random_tripartite,
}


@pytest.mark.parametrize("kind", sorted(GENERATORS))
@settings(max_examples=60)
@given(rng=st.randoms(use_true_random=False))
def test_round_trip(kind, rng):
    inst = GENERATORS[kind](rng)
    text = emit_instance(inst)
    assert parse_instance(text) == inst
    assert emit_instance(parse_instance(text)) == text


def test_fixtures_round_trip():
    for path in sorted(fixture_path(".").iterdir()):
        inst = parse_instance(path.read_text())
        assert parse_instance(emit_instance(inst)) == inst, path.name


def test_fmp_syntax():
    inst = parse_fmp("# comment\nfmp v1\ngirl g1: {2/4 a, 1/2 b} ; {1 c}  # trailing\ngirl g2:\n")
    assert inst.elements == ("a", "b", "c")
    assert [len(ts.tradeoffs) for ts in inst.sets] == [2, 0]
    assert not parse_fmp("fmp v1 working\ngirl g: {1/3 a}\n").canonical


@pytest.mark.parametrize(
    "text, line, col",
    [
        ("fmp v1\ngirl g1: {2/0 a}\n", 2, 11),
        ("fmp v1\ngirl g1: {1 a\n", 2, 14),
        ("fmp v1\nboy b1\n", 2, 1),
        ("fmp v1\ngirl g1: {1 a}\ngirl g1: {1 b}\n", 3, 8),
        ("fmp v1\ngirl g1: {1 a} {1 b}\n", 2, 16),
    ],
)
def test_fmp_errors_have_location(text, line, col):
    with pytest.raises(ParseError) as err:
        parse_fmp(text)
    assert (err.value.line, err.value.column) == (line, col)


def test_fmp_semantic_errors():
    with pytest.raises(ParseError, match="weight"):
        parse_fmp("fmp v1\ngirl g: {1/2 a}\n")
    with pytest.raises(ParseError, match="undeclared"):
        parse_fmp("fmp v1\nelements a\ngirl g: {1 b}\n")
    with pytest.raises(ParseError):
        parse_fmp("fmp v2\n")


def test_smp_and_tri_syntax():
    smp = parse_smp("smp v1\ngirl g1 : b1 b2\ngirl g2\nboy b1 : g1 g2\nboy b2\n")
    assert smp.girl_lists == {"g1": ("b1", "b2")} and set(smp.boy_lists) == {"b1"}
    assert parse_smp("smp v1\ngirl g1 :\nboy b1\n").girl_lists == {"g1": ()}
    with pytest.raises(ParseError):
        parse_smp("smp v1\ngirl g1 : b9\n")
    with pytest.raises(ParseError):
        parse_smp("smp v1\ngirl g1\ngirl g1\n")
    assert parse_tri("tri v1\ntriple g1 x1 y1\n").triples == (("g1", "x1", "y1"),)
    with pytest.raises(ParseError):
        parse_tri("tri v1\ntriple g1 x1\n")


def test_detection_and_mismatch():
    assert detect_format("c hi\np cnf 1 0\n") == "dimacs"
    assert detect_format("\n# x\nsmp v1\n") == "smp"
    with pytest.raises(ParseError):
        detect_format("hello\n")
    with pytest.raises(ParseError):
        detect_format("")
    with pytest.raises(FormatMismatch):
        parse_instance("fmp v1\n", "smp")
    with pytest.raises(ValueError):
        parse_instance("fmp v1\n", "xml")
