import pytest
from hypothesis import given, strategies as st

from mutest.minilang import Verdict, parse_source, run_test_suite
from mutest.minilang.interp import MAX_CALL_DEPTH, wrap64

INT64 = st.integers(-(2**63), 2**63 - 1)


def run(program, tests, budget=100_000):
    return run_test_suite([parse_source(program, "src/p.mini")], [parse_source(tests, "tests/t.mini")], budget)


def verdicts(outcomes):
    return [(o.test_name, o.verdict) for o in outcomes]


def test_pass_and_fail():
    out = run("", "fn test_a() { assert_true(true); }\nfn test_b() { assert_eq(1, 2); }")
    assert verdicts(out) == [("test_a", Verdict.PASS), ("test_b", Verdict.FAIL)]
    assert "1 != 2" in out[1].message


def test_timeout_uses_whole_budget():
    out = run("fn spin() { while (true) {} }", "fn test_c() { spin(); }")
    assert out[0].verdict is Verdict.TIMEOUT
    assert out[0].steps_used == 100_000


def test_small_budget():
    out = run("fn spin() { while (true) {} }", "fn test_c() { spin(); }", budget=10)
    assert (out[0].verdict, out[0].steps_used) == (Verdict.TIMEOUT, 10)


@pytest.mark.parametrize("expr", ["1 / 0", "1 % 0", "1 + true", "true < false", "-true", "!1"])
def test_runtime_errors(expr):
    out = run(f"fn f() {{ return {expr}; }}", "fn test_e() { f(); }")
    assert out[0].verdict is Verdict.RUNTIME_ERROR


def test_non_bool_condition_is_runtime_error():
    out = run("fn f() { if (1) { return 1; } return 0; }", "fn test_e() { f(); }")
    assert out[0].verdict is Verdict.RUNTIME_ERROR


def test_undefined_function_is_per_test_error():
    out = run("", "fn test_a() { nope(); }\nfn test_b() { assert_true(true); }")
    assert verdicts(out) == [("test_a", Verdict.RUNTIME_ERROR), ("test_b", Verdict.PASS)]
    assert "link error" in out[0].message


def test_unbounded_recursion_is_runtime_error():
    out = run("fn r(n) { return r(n + 1); }", "fn test_r() { r(0); }")
    assert out[0].verdict is Verdict.RUNTIME_ERROR


def test_deep_but_bounded_recursion_runs():
    depth = MAX_CALL_DEPTH - 5
    out = run("fn r(n) { if (n == 0) { return 0; } return 1 + r(n - 1); }",
              f"fn test_r() {{ assert_eq(r({depth}), {depth}); }}")
    assert out[0].verdict is Verdict.PASS


def test_fall_off_end_returns_zero_and_strings_compare():
    out = run("fn f() { let s = \"a\"; }", "fn test_z() { assert_eq(f(), 0); assert_eq(\"x\", \"x\"); }")
    assert out[0].verdict is Verdict.PASS


def test_equality_checks_type():
    out = run("", "fn test_t() { assert_true(1 != true); assert_true(\"1\" != 1); }")
    assert out[0].verdict is Verdict.PASS


def test_only_zero_arg_test_functions_run():
    out = run("", "fn test_a() {}\nfn test_b(x) {}\nfn helper() {}")
    assert [o.test_name for o in out] == ["test_a"]


def test_loop_control():
    prog = """fn f(n) {
    let i = 0;
    let s = 0;
    while (true) {
        i = i + 1;
        if (i > n) { break; }
        if (i % 2 == 0) { continue; }
        s = s + i;
    }
    return s;
}"""
    out = run(prog, "fn test_f() { assert_eq(f(5), 9); }")
    assert out[0].verdict is Verdict.PASS


def lit(v):
    """MiniLang expression text for any int64 value."""
    if v >= 0:
        return str(v)
    if v == -(2**63):
        return "(0 - 9223372036854775807 - 1)"
    return f"(0 - {-v})"


def trunc_div(a, b):
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


@given(INT64, INT64)
def test_arithmetic_wraps_and_truncates(a, b):
    expected = {"+": a + b, "-": a - b, "*": a * b}
    if b != 0:
        expected["/"] = trunc_div(a, b)
        expected["%"] = a - b * trunc_div(a, b)
    body = "".join(f"    assert_eq(x {op} y, {lit(wrap64(v))});\n" for op, v in expected.items())
    tests = f"fn test_w() {{\n    let x = {lit(a)};\n    let y = {lit(b)};\n{body}}}"
    out = run("", tests)
    assert out[0].verdict is Verdict.PASS, out[0].message


def test_determinism():
    prog = "fn f(n) { let s = 0; while (n > 0) { s = s + n; n = n - 1; log(s); } return s; }"
    tests = "fn test_a() { assert_eq(f(10), 55); }\nfn test_b() { assert_eq(f(3), 7); }"
    assert run(prog, tests) == run(prog, tests)


def test_coverage_hook_records_program_lines():
    program = parse_source("fn f(x) {\n    if (x > 0) {\n        return 1;\n    }\n    return 0;\n}\n", "src/p.mini")
    tests = parse_source("fn test_f() { assert_eq(f(-1), 0); }", "tests/t.mini")
    cov = set()
    run_test_suite([program], [tests], coverage=cov)
    assert {line for path, line in cov if path == "src/p.mini"} == {2, 5}
