"""Deterministic MiniLang interpreter and in-process test harness."""

from __future__ import annotations

import sys
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence

from .syntax import (
    Assign,
    Binary,
    Block,
    BoolLit,
    Break,
    Call,
    Continue,
    Expr,
    ExprStmt,
    FunctionDef,
    If,
    IntLit,
    Let,
    Paren,
    Return,
    Stmt,
    StrLit,
    SubjectModule,
    Unary,
    Var,
    While,
)

DEFAULT_STEP_BUDGET = 100_000
MAX_CALL_DEPTH = 200
TEST_PREFIX = "test_"

_MASK = 2**64
_HALF = 2**63


class Verdict(str, Enum):
    PASS = "Pass"
    FAIL = "Fail"
    TIMEOUT = "Timeout"
    RUNTIME_ERROR = "RuntimeError"

    @property
    def failed(self) -> bool:
        return self is not Verdict.PASS


@dataclass(frozen=True)
class TestOutcome:
    test_name: str
    verdict: Verdict
    steps_used: int
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "test_name": self.test_name,
            "verdict": self.verdict.value,
            "steps_used": self.steps_used,
            "message": self.message,
        }


class LinkError(Exception):
    """Function table could not be built, or a call names an unknown function."""


class MiniRuntimeError(Exception):
    pass


class _AssertionFailed(Exception):
    pass


class _OutOfSteps(Exception):
    pass


def wrap64(v: int) -> int:
    return ((v + _HALF) % _MASK) - _HALF


def _type_name(v: object) -> str:
    if isinstance(v, bool):
        return "bool"
    if isinstance(v, int):
        return "int"
    return "str"


def _format(v: object) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _values_equal(a: object, b: object) -> bool:
    return type(a) is type(b) and a == b


def _int(v: object, op: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise MiniRuntimeError(f"operator {op!r} expects int, got {_type_name(v)}")
    return v


def _bool(v: object, what: str) -> bool:
    if not isinstance(v, bool):
        raise MiniRuntimeError(f"{what} expects bool, got {_type_name(v)}")
    return v


_BREAK = object()
_CONTINUE = object()


class _Return:
    __slots__ = ("value",)

    def __init__(self, value: object):
        self.value = value


class Interpreter:
    """Evaluates calls against a linked function table.

    One evaluation step is charged per statement executed and per
    expression evaluated. Reaching the budget aborts the run.
    """

    BUILTINS = ("print", "log", "assert_true", "assert_eq")

    def __init__(self, functions: dict[str, FunctionDef], step_budget: int = DEFAULT_STEP_BUDGET,
                 origins: Optional[dict[str, str]] = None, coverage: Optional[set] = None):
        if step_budget < 1:
            raise ValueError("step_budget must be >= 1")
        self.functions = functions
        self.step_budget = step_budget
        self.steps = 0
        self.depth = 0
        self.log: list[str] = []
        self.origins = origins or {}
        self.coverage = coverage
        self._path_stack: list[str] = []
        if sys.getrecursionlimit() < 20_000:
            sys.setrecursionlimit(20_000)

    def _tick(self) -> None:
        self.steps += 1
        if self.steps >= self.step_budget:
            raise _OutOfSteps()

    # -- calls --------------------------------------------------------------

    def call(self, name: str, args: Sequence[object]) -> object:
        if name in self.functions:
            fn = self.functions[name]
            if len(args) != len(fn.params):
                raise MiniRuntimeError(f"{name}() takes {len(fn.params)} arguments, got {len(args)}")
            if self.depth >= MAX_CALL_DEPTH:
                raise MiniRuntimeError("maximum call depth exceeded")
            env = dict(zip(fn.params, args))
            self.depth += 1
            self._path_stack.append(self.origins.get(name, ""))
            try:
                signal = self._exec_block(fn.body, env)
            finally:
                self.depth -= 1
                self._path_stack.pop()
            if isinstance(signal, _Return):
                return signal.value
            return 0
        if name in self.BUILTINS:
            return self._builtin(name, args)
        raise LinkError(f"undefined function {name!r}")

    def _builtin(self, name: str, args: Sequence[object]) -> object:
        want = 2 if name == "assert_eq" else 1
        if len(args) != want:
            raise MiniRuntimeError(f"{name}() takes {want} arguments, got {len(args)}")
        if name in ("print", "log"):
            self.log.append(_format(args[0]))
        elif name == "assert_true":
            if not _bool(args[0], "assert_true"):
                raise _AssertionFailed("assert_true failed")
        elif not _values_equal(args[0], args[1]):
            raise _AssertionFailed(f"assert_eq failed: {_format(args[0])} != {_format(args[1])}")
        return 0

    # -- statements ---------------------------------------------------------

    def _exec_block(self, block: Block, env: dict) -> object:
        for stmt in block.stmts:
            signal = self._exec(stmt, env)
            if signal is not None:
                return signal
        return None

    def _exec(self, stmt: Stmt, env: dict) -> object:
        self._tick()
        if self.coverage is not None and stmt.span is not None and self._path_stack:
            self.coverage.add((self._path_stack[-1], stmt.span.start_line))
        t = type(stmt)
        if t is ExprStmt:
            self._eval(stmt.expr, env)
            return None
        if t is Let:
            env[stmt.name] = self._eval(stmt.value, env)
            return None
        if t is Assign:
            if stmt.name not in env:
                raise MiniRuntimeError(f"assignment to undeclared variable {stmt.name!r}")
            env[stmt.name] = self._eval(stmt.value, env)
            return None
        if t is If:
            while True:
                if _bool(self._eval(stmt.cond, env), "if condition"):
                    return self._exec_block(stmt.then, env)
                orelse = stmt.orelse
                if orelse is None:
                    return None
                if type(orelse) is If:
                    self._tick()
                    stmt = orelse
                    continue
                return self._exec_block(orelse, env)
        if t is While:
            while _bool(self._eval(stmt.cond, env), "while condition"):
                signal = self._exec_block(stmt.body, env)
                if signal is _BREAK:
                    break
                if isinstance(signal, _Return):
                    return signal
            return None
        if t is Return:
            return _Return(0 if stmt.value is None else self._eval(stmt.value, env))
        if t is Break:
            return _BREAK
        if t is Continue:
            return _CONTINUE
        raise TypeError(f"unknown statement {t.__name__}")

    # -- expressions --------------------------------------------------------

    def _eval(self, expr: Expr, env: dict) -> object:
        self._tick()
        t = type(expr)
        if t is IntLit or t is BoolLit or t is StrLit:
            return expr.value
        if t is Var:
            try:
                return env[expr.name]
            except KeyError:
                raise MiniRuntimeError(f"undefined variable {expr.name!r}") from None
        if t is Binary:
            return self._binary(expr, env)
        if t is Paren:
            return self._eval(expr.inner, env)
        if t is Unary:
            v = self._eval(expr.operand, env)
            if expr.op == "-":
                return wrap64(-_int(v, "-"))
            return not _bool(v, "'!'")
        if t is Call:
            args = [self._eval(a, env) for a in expr.args]
            return self.call(expr.name, args)
        raise TypeError(f"unknown expression {t.__name__}")

    def _binary(self, expr: Binary, env: dict) -> object:
        op = expr.op
        if op == "&&":
            if not _bool(self._eval(expr.left, env), "'&&'"):
                return False
            return _bool(self._eval(expr.right, env), "'&&'")
        if op == "||":
            if _bool(self._eval(expr.left, env), "'||'"):
                return True
            return _bool(self._eval(expr.right, env), "'||'")
        a = self._eval(expr.left, env)
        b = self._eval(expr.right, env)
        if op == "==":
            return _values_equal(a, b)
        if op == "!=":
            return not _values_equal(a, b)
        a, b = _int(a, op), _int(b, op)
        if op == "+":
            return wrap64(a + b)
        if op == "-":
            return wrap64(a - b)
        if op == "*":
            return wrap64(a * b)
        if op in ("/", "%"):
            if b == 0:
                raise MiniRuntimeError("division by zero" if op == "/" else "modulo by zero")
            q = abs(a) // abs(b)
            if (a < 0) != (b < 0):
                q = -q
            return wrap64(q) if op == "/" else wrap64(a - b * q)
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        if op == ">=":
            return a >= b
        raise TypeError(f"unknown operator {op!r}")


# -- harness ----------------------------------------------------------------


def discover_tests(tests: Iterable[SubjectModule]) -> list[str]:
    """Zero-argument ``test_*`` functions, in declaration order."""
    return [fn.name for m in tests for fn in m.functions
            if fn.name.startswith(TEST_PREFIX) and not fn.params]


def link(modules: Iterable[SubjectModule]) -> tuple[dict[str, FunctionDef], dict[str, str]]:
    table: dict[str, FunctionDef] = {}
    origins: dict[str, str] = {}
    for m in modules:
        for fn in m.functions:
            if fn.name in table:
                raise LinkError(f"function {fn.name!r} defined in both {origins[fn.name]!r} and {m.path!r}")
            table[fn.name] = fn
            origins[fn.name] = m.path
    return table, origins


def run_test(table: dict[str, FunctionDef], name: str, step_budget: int = DEFAULT_STEP_BUDGET,
             origins: Optional[dict[str, str]] = None, coverage: Optional[set] = None) -> TestOutcome:
    interp = Interpreter(table, step_budget, origins, coverage)
    try:
        interp.call(name, [])
    except _OutOfSteps:
        return TestOutcome(name, Verdict.TIMEOUT, step_budget, f"step budget of {step_budget} exhausted")
    except _AssertionFailed as e:
        return TestOutcome(name, Verdict.FAIL, interp.steps, str(e))
    except LinkError as e:
        return TestOutcome(name, Verdict.RUNTIME_ERROR, interp.steps, f"link error: {e}")
    except MiniRuntimeError as e:
        return TestOutcome(name, Verdict.RUNTIME_ERROR, interp.steps, str(e))
    except RecursionError:
        return TestOutcome(name, Verdict.RUNTIME_ERROR, interp.steps, "interpreter recursion limit")
    return TestOutcome(name, Verdict.PASS, interp.steps)


def run_test_suite(program: Sequence[SubjectModule], tests: Sequence[SubjectModule],
                   step_budget: int = DEFAULT_STEP_BUDGET, select: Optional[Iterable[str]] = None,
                   fail_fast: bool = False, coverage: Optional[set] = None) -> list[TestOutcome]:
    """Run every test function in ``tests`` against ``program``.

    Returns one outcome per test in declaration order. ``select`` restricts
    the run to the named tests; ``fail_fast`` stops after the first
    non-passing outcome. ``coverage``, when given, collects the
    ``(path, line)`` of every statement executed.
    """
    table, origins = link([*program, *tests])
    names = discover_tests(tests)
    if select is not None:
        wanted = set(select)
        names = [n for n in names if n in wanted]
    outcomes = []
    for name in names:
        outcome = run_test(table, name, step_budget, origins, coverage)
        outcomes.append(outcome)
        if fail_fast and outcome.verdict.failed:
            break
    return outcomes
