from hypothesis import given, settings, strategies as st

from minigen import modules
from mutest.minilang import parse_source, render_source
from mutest.minilang.syntax import SubjectModule


def test_round_trip_minimal():
    text = "fn main() { return 1; }"
    assert render_source(parse_source(text)) == text


def test_empty_module_renders_empty():
    assert render_source(SubjectModule(())) == ""
    assert render_source(parse_source("")) == ""


def test_byte_identical_with_comments_and_odd_spacing():
    text = "// c\nfn   f(a,b){return a+  b;}   \n\n\nfn g() {}\n"
    assert render_source(parse_source(text)) == text


@settings(max_examples=200)
@given(modules())
def test_parse_render_round_trip(m):
    text = render_source(m)
    again = parse_source(text)
    assert again == m
    assert render_source(again) == text


@settings(max_examples=50)
@given(modules(), st.data())
def test_canonical_render_is_fixed_point(m, data):
    text = render_source(m)
    stripped = SubjectModule(parse_source(text).functions)
    assert render_source(stripped) == text
