import pytest
from hypothesis import given, settings

from minigen import modules
from mutest.minilang import ParseError, StructureError, parse_expression, parse_source, parse_statement
from mutest.minilang.render import render_source
from mutest.minilang.syntax import (
    Binary, Block, Expr, FunctionDef, IntLit, Paren, Return, Stmt, Unary, Var, walk,
)


def test_empty_source():
    m = parse_source("")
    assert m.functions == ()


def test_minimal_program():
    m = parse_source("fn main() { return 1; }")
    assert len(m.functions) == 1
    assert m.functions[0].body == Block((Return(IntLit(1)),))


def test_malformed_reports_position_and_expected():
    with pytest.raises(ParseError) as info:
        parse_source("fn f( {")
    err = info.value
    assert (err.line, err.col) == (1, 7)
    assert "'{'" in str(err)
    assert ")" in err.expected and "identifier" in err.expected


@pytest.mark.parametrize("text", [
    "fn f() { break; }",
    "fn f() { continue; }",
    "fn f() {} fn f() {}",
    "fn f(a, a) {}",
])
def test_structure_errors(text):
    with pytest.raises(StructureError):
        parse_source(text)


def test_break_inside_nested_if_in_loop_is_fine():
    parse_source("fn f() { while (true) { if (true) { break; } } }")


def test_precedence_and_left_associativity():
    e = parse_expression("1 - 2 - 3 * 4")
    assert e == Binary("-", Binary("-", IntLit(1), IntLit(2)), Binary("*", IntLit(3), IntLit(4)))
    e = parse_expression("a || b && c == d < e + f * -g")
    assert e.op == "||"
    assert e.right.op == "&&"
    assert e.right.right.op == "=="
    assert e.right.right.right.op == "<"


def test_parens_are_kept():
    assert parse_expression("(x)") == Paren(Var("x"))
    assert parse_expression("-(x)") == Unary("-", Paren(Var("x")))


def test_int_literal_limit():
    parse_source("fn f() { return 9223372036854775807; }")
    with pytest.raises(ParseError):
        parse_source("fn f() { return 9223372036854775808; }")


def test_comments_are_skipped():
    m = parse_source("// header\nfn f() { // trailing\n  return 1; }\n")
    assert m.functions[0].name == "f"


def test_else_if_chain():
    m = parse_source("fn f(x) { if (x < 0) { return 1; } else if (x > 0) { return 2; } else { return 3; } }")
    stmt = m.functions[0].body.stmts[0]
    assert stmt.orelse.orelse == Block((Return(IntLit(3)),))


def test_spans_cover_source():
    text = "fn add(a, b) {\n    return a + b;\n}\n"
    m = parse_source(text)
    ret = m.functions[0].body.stmts[0]
    assert ret.span.slice(text) == "return a + b;"
    assert ret.value.span.slice(text) == "a + b"
    assert (ret.value.span.start_line, ret.value.span.start_col) == (2, 12)


@settings(max_examples=60)
@given(modules())
def test_span_soundness(m):
    text = render_source(m)
    parsed = parse_source(text)
    for node in walk(parsed):
        if isinstance(node, Expr):
            assert parse_expression(node.span.slice(text)) == node
        elif isinstance(node, Stmt):
            assert parse_statement(node.span.slice(text)) == node
        elif isinstance(node, FunctionDef):
            assert node.span.slice(text).startswith("fn " + node.name)
