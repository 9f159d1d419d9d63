import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wtrace.dsl import (
    BS,
    Number,
    ParseError,
    SemanticError,
    UnboundParameter,
    lower,
    parse,
    parse_bytes,
    parse_number,
    reference_text,
    serialize,
)
from wtrace.engine import detection_probability
from wtrace.network import BeamSplitter, PhaseConfig, PhaseShift, build_three_path

from strategies import documents

SIMPLE = "modes 2\nsource 0\nbs 0 1 R=1/2\ndetector out 1"


def test_simple_doc():
    doc = parse(SIMPLE)
    assert doc.mode_count == 2
    assert doc.declarations[2] == BS(0, 1, Number("1/2"))
    net = lower(doc)
    assert net.stages == (BeamSplitter(0, 1, 0.5),)
    assert net.detector_ports == {"out": 1}


def test_mode_out_of_range_is_semantic():
    with pytest.raises(SemanticError) as info:
        parse("modes 2\nbs 0 5 R=1/2")
    assert info.value.line == 2
    assert "mode 5 out of range" in info.value.message


@pytest.mark.parametrize("text, line, column", [
    ("modes 2\nsource 0\nbs 0 1 R=abc\ndetector o 1", 3, 10),
    ("modes 2\nsource 0\nbs 0 1\n", 3, 7),
    ("modes 2\nsource x", 2, 8),
    ("source 0", 1, 1),
    ("modes 2\nlaser 0", 2, 1),
    ("modes 2\nsource 0 1", 2, 10),
    ("modes 2\ncheckpoint A mode=x", 2, 19),
    ("", 1, 1),
])
def test_syntax_errors(text, line, column):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert (info.value.line, info.value.column) == (line, column)


def test_semantic_errors_collected():
    text = "modes 3\nsource 0\ncheckpoint A mode=1\ncheckpoint A mode=2\nbs 1 1 R=2\n"
    with pytest.raises(SemanticError) as info:
        parse(text)
    messages = [i.message for i in info.value.issues]
    assert any("duplicate checkpoint" in m for m in messages)
    assert any("distinct" in m for m in messages)
    assert any("outside [0, 1]" in m for m in messages)
    assert any("missing 'detector'" in m for m in messages)


def test_numbers():
    assert parse_number("1/3") == 1 / 3
    assert parse_number("-pi/2") == -math.pi / 2
    assert parse_number("3pi/4") == 3 * math.pi / 4
    assert parse_number("0.5pi") == 0.5 * math.pi
    assert parse_number("1e-3") == 0.001
    for bad in ("1/0", "pi pi", "1e999", "x", "1//2"):
        with pytest.raises(ValueError):
            parse_number(bad)


def test_phase_parameter_binding():
    doc = parse("modes 2\nsource 0\nphase 1 alpha\ndetector d 1")
    assert lower(doc, {"alpha": 0}).stages == (PhaseShift(1, 0.0),)
    with pytest.raises(UnboundParameter) as info:
        lower(doc)
    assert info.value.name == "alpha"
    assert info.value.span.line == 3


def test_pi_is_a_number_not_a_parameter():
    doc = parse("modes 1\nsource 0\nphase 0 pi\ndetector d 0")
    assert doc.declarations[2].value == Number("pi")
    assert doc.parameters == {}


def test_comments_and_blank_lines():
    doc = parse("# header\n\nmodes 2   # two modes\nsource 0\n  # indented\nbs 0 1 R=0.5\ndetector d 1\n")
    assert len(doc.declarations) == 4
    assert "#" not in serialize(doc)


def test_reference_file_lowers_to_preset():
    doc = parse(reference_text())
    assert set(doc.parameters) == {"alpha", "beta", "gamma"}
    for phases in [(0, 0, 0), (0.3, 1.2, -2.0)]:
        net = lower(doc, dict(zip(("alpha", "beta", "gamma"), phases)))
        assert net == build_three_path(1 / 3, PhaseConfig(*phases))
    net = lower(doc, {"alpha": 0, "beta": 0, "gamma": 0})
    assert detection_probability(net, 0.0, "III") == pytest.approx(1 / 9, abs=1e-12)


def test_reference_round_trip():
    doc = parse(reference_text())
    text = serialize(doc)
    assert parse(text) == doc
    assert serialize(parse(text)) == text
    assert "R=1/3" in text


def test_lower_is_deterministic():
    doc = parse(reference_text())
    b = {"alpha": 0.1, "beta": 0.2, "gamma": 0.3}
    assert lower(doc, b) == lower(doc, dict(b))


@settings(max_examples=200)
@given(documents())
def test_round_trip_property(doc):
    text = serialize(doc)
    again = parse(text)
    assert again == doc
    assert serialize(again) == text


@settings(max_examples=300)
@given(st.binary(max_size=80))
def test_parser_total_on_bytes(data):
    try:
        parse_bytes(data)
    except ParseError as exc:
        assert exc.line >= 1 and exc.column >= 1


@settings(max_examples=300)
@given(st.text(alphabet="modesbphacktnuri0123456789 =/.R#\n-", max_size=80))
def test_parser_total_on_near_miss_text(text):
    try:
        parse(text)
    except ParseError as exc:
        lines = text.splitlines() or [""]
        assert 1 <= exc.line <= len(lines)
        assert 1 <= exc.column <= len(lines[exc.line - 1]) + 1


def test_invalid_utf8_position():
    with pytest.raises(ParseError) as info:
        parse_bytes(b"modes 2\nsou\xffrce 0")
    assert (info.value.line, info.value.column) == (2, 4)
