"""Mutation point discovery and the five mutation operators.

Mutants are produced by splicing a replacement snippet into the original
source text over the span of the mutated node. Every candidate is re-parsed
and compared against the expected mutated tree; a candidate whose text
would parse differently (operator precedence) is retried with the
replacement parenthesized, and dropped if that still fails.
"""

from __future__ import annotations

import fnmatch
import hashlib
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from typing import Iterable, Optional, Union

from .minilang.parser import ParseError, parse_source, tokenize
from .minilang.render import render_node
from .minilang.syntax import (
    ARITH_OPS,
    ATOMIC_EXPRS,
    LOGICAL_OPS,
    PRECEDENCE,
    RELATIONAL_OPS,
    Assign,
    Binary,
    Block,
    BoolLit,
    Call,
    Expr,
    ExprStmt,
    FunctionDef,
    If,
    IntLit,
    Let,
    Node,
    Paren,
    Return,
    Span,
    Stmt,
    StrLit,
    SubjectModule,
    Unary,
    Var,
    While,
    stmt_kind,
)


class OperatorKind(str, Enum):
    AOR = "AOR"
    LCR = "LCR"
    ROR = "ROR"
    UOI = "UOI"
    SBR = "SBR"

    @property
    def rank(self) -> int:
        return _OPERATOR_ORDER.index(self)


_OPERATOR_ORDER = list(OperatorKind)


class NodeKind(str, Enum):
    BINARY_ARITH = "BinaryArith"
    BINARY_LOGICAL = "BinaryLogical"
    BINARY_RELATIONAL = "BinaryRelational"
    BOOL_EXPR = "BoolExpr"
    NUM_EXPR = "NumExpr"
    STATEMENT = "Statement"


class NotApplicableReason(str, Enum):
    WRONG_NODE_KIND = "WrongNodeKind"
    CONTROL_FLOW_STATEMENT = "ControlFlowStatement"
    DECLARATION = "Declaration"
    WOULD_NOT_PARSE = "WouldNotParse"
    SUPPRESSED = "Suppressed"
    REDUNDANT_UNARY = "RedundantUnary"


class NotApplicable(Exception):
    def __init__(self, reason: NotApplicableReason, detail: str = ""):
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason.value}: {detail}" if detail else reason.value)


class MutantStatus(str, Enum):
    UNKNOWN = "Unknown"
    LIVE = "Live"
    KILLED = "Killed"


# Which operators apply to which point kinds.
OPERATOR_TABLE: dict[NodeKind, OperatorKind] = {
    NodeKind.BINARY_ARITH: OperatorKind.AOR,
    NodeKind.BINARY_LOGICAL: OperatorKind.LCR,
    NodeKind.BINARY_RELATIONAL: OperatorKind.ROR,
    NodeKind.BOOL_EXPR: OperatorKind.UOI,
    NodeKind.NUM_EXPR: OperatorKind.UOI,
    NodeKind.STATEMENT: OperatorKind.SBR,
}

SBR_DELETABLE = ("Assign", "If", "While", "ExprStmt")
SBR_CONTROL_FLOW = ("Return", "Break", "Continue")

DEFAULT_DENYLIST = ("log", "print", "debug*", "trace*")


@dataclass(frozen=True)
class SuppressionConfig:
    callee_denylist: tuple[str, ...] = DEFAULT_DENYLIST
    suppress_uncovered: bool = True


@dataclass(frozen=True)
class MutationPoint:
    path: str
    line: int
    span: Span
    node_kind: NodeKind
    original_snippet: str
    # Child-index path from the module root to the node.
    locator: tuple[int, ...] = field(repr=False)
    # Binary operator, statement kind, or "int"/"bool" for typed expressions.
    detail: str = ""
    # Names of calls enclosing the node (self included), outermost first.
    callees: tuple[str, ...] = field(default=(), repr=False)
    # UOI would stack a unary operator on an identical one.
    redundant_unary: bool = field(default=False, repr=False)

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "line": self.line,
            "span": self.span.to_dict(),
            "node_kind": self.node_kind.value,
            "original_snippet": self.original_snippet,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class Mutant:
    id: str
    point: MutationPoint
    operator: OperatorKind
    variant: int
    replacement_snippet: str
    mutated_source: str = field(repr=False)
    status: MutantStatus = MutantStatus.UNKNOWN
    module: Optional[SubjectModule] = field(default=None, compare=False, repr=False)

    @property
    def path(self) -> str:
        return self.point.path

    @property
    def line(self) -> int:
        return self.point.line

    def mutated_module(self) -> SubjectModule:
        if self.module is not None:
            return self.module
        return parse_source(self.mutated_source, self.point.path)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "path": self.point.path,
            "line": self.point.line,
            "operator": self.operator.value,
            "variant": self.variant,
            "node_kind": self.point.node_kind.value,
            "span": self.point.span.to_dict(),
            "original_snippet": self.point.original_snippet,
            "replacement_snippet": self.replacement_snippet,
            "status": self.status.value,
        }


def mutant_id(path: str, span: Span, operator: OperatorKind, original: str, replacement: str) -> str:
    key = "\x00".join([path, f"{span.start}-{span.end}", operator.value, original, replacement])
    return hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]


# -- type inference ---------------------------------------------------------


def _bool_used_names(fn: FunctionDef) -> set[str]:
    """Variables that appear directly in a boolean-only position."""
    found: set[str] = set()

    def mark(e: Expr) -> None:
        while isinstance(e, Paren):
            e = e.inner
        if isinstance(e, Var):
            found.add(e.name)

    def visit(node: Node) -> None:
        if isinstance(node, Binary) and node.op in LOGICAL_OPS:
            mark(node.left)
            mark(node.right)
        elif isinstance(node, Unary) and node.op == "!":
            mark(node.operand)
        elif isinstance(node, (If, While)):
            mark(node.cond)
        elif isinstance(node, Call) and node.name == "assert_true" and node.args:
            mark(node.args[0])
        for child in node.children():
            visit(child)

    visit(fn.body)
    return found


class _Types:
    """Local type inference: literals, operators, params default to int."""

    def __init__(self, module: SubjectModule):
        self.returns: dict[str, Optional[str]] = {fn.name: None for fn in module.functions}
        # A couple of rounds settle return types through call chains.
        for _ in range(3):
            for fn in module.functions:
                self.returns[fn.name] = self._return_type(fn)

    def function_env(self, fn: FunctionDef) -> dict[str, Optional[str]]:
        bool_names = _bool_used_names(fn)
        return {p: ("bool" if p in bool_names else "int") for p in fn.params}

    def bind_let(self, env: dict, stmt: Let, bool_names: set[str]) -> None:
        t = self.of(stmt.value, env)
        if t is None and stmt.name in bool_names:
            t = "bool"
        env[stmt.name] = t

    def of(self, e: Expr, env: dict) -> Optional[str]:
        if isinstance(e, IntLit):
            return "int"
        if isinstance(e, BoolLit):
            return "bool"
        if isinstance(e, StrLit):
            return "str"
        if isinstance(e, Var):
            return env.get(e.name)
        if isinstance(e, Paren):
            return self.of(e.inner, env)
        if isinstance(e, Unary):
            return "int" if e.op == "-" else "bool"
        if isinstance(e, Binary):
            return "int" if e.op in ARITH_OPS else "bool"
        if isinstance(e, Call):
            return self.returns.get(e.name)
        return None

    def _return_type(self, fn: FunctionDef) -> Optional[str]:
        env = self.function_env(fn)
        bool_names = _bool_used_names(fn)
        result: Optional[str] = None

        def visit(stmts: Iterable[Stmt]) -> None:
            nonlocal result
            for s in stmts:
                if isinstance(s, Let):
                    self.bind_let(env, s, bool_names)
                elif isinstance(s, Return) and s.value is not None and result is None:
                    result = self.of(s.value, env)
                elif isinstance(s, If):
                    visit(s.then.stmts)
                    orelse = s.orelse
                    while isinstance(orelse, If):
                        visit(orelse.then.stmts)
                        orelse = orelse.orelse
                    if orelse is not None:
                        visit(orelse.stmts)
                elif isinstance(s, While):
                    visit(s.body.stmts)

        visit(fn.body.stmts)
        return result


# -- tree helpers -----------------------------------------------------------


def node_at(root: Node, locator: tuple[int, ...]) -> Node:
    node = root
    for i in locator:
        node = list(node.children())[i]
    return node


def replace_at(root: Node, locator: tuple[int, ...], new: Optional[Node]) -> Node:
    """Copy of ``root`` with the node at ``locator`` replaced (or removed, if
    ``new`` is None and the node sits in a tuple field)."""
    if not locator:
        if new is None:
            raise ValueError("cannot remove the root")
        return new
    index, rest = locator[0], locator[1:]
    pos = 0
    changes = {}
    for f in fields(root):  # type: ignore[arg-type]
        if f.name == "span":
            continue
        value = getattr(root, f.name)
        if isinstance(value, Node):
            if pos == index:
                replacement = replace_at(value, rest, new)
                changes[f.name] = replacement
                break
            pos += 1
        elif isinstance(value, tuple) and value and isinstance(value[0], Node):
            if pos <= index < pos + len(value):
                items = list(value)
                k = index - pos
                if rest:
                    items[k] = replace_at(items[k], rest, new)
                elif new is None:
                    del items[k]
                else:
                    items[k] = new
                changes[f.name] = tuple(items)
                break
            pos += len(value)
    else:
        raise IndexError(f"locator index {index} out of range")
    return replace(root, **changes)


# -- discovery --------------------------------------------------------------


def _binary_kind(op: str) -> NodeKind:
    if op in ARITH_OPS:
        return NodeKind.BINARY_ARITH
    if op in LOGICAL_OPS:
        return NodeKind.BINARY_LOGICAL
    return NodeKind.BINARY_RELATIONAL


class _Discovery:
    def __init__(self, module: SubjectModule, lines: set[int]):
        self.module = module
        self.src = module.source_text
        self.lines = lines
        self.types = _Types(module)
        self.points: list[MutationPoint] = []

    def run(self) -> list[MutationPoint]:
        for i, fn in enumerate(self.module.functions):
            env = self.types.function_env(fn)
            self.bool_names = _bool_used_names(fn)
            self.block(fn.body, env, (i, 0))
        self.points.sort(key=lambda p: (p.span.start_line, p.span.start_col))
        return self.points

    def emit(self, node: Node, kind: NodeKind, loc: tuple[int, ...], detail: str,
             callees: tuple[str, ...] = (), redundant: bool = False) -> None:
        span = node.span
        if span is None or span.start_line not in self.lines:
            return
        self.points.append(MutationPoint(
            path=self.module.path,
            line=span.start_line,
            span=span,
            node_kind=kind,
            original_snippet=span.slice(self.src),
            locator=loc,
            detail=detail,
            callees=callees,
            redundant_unary=redundant,
        ))

    def block(self, block: Block, env: dict, loc: tuple[int, ...]) -> None:
        for k, stmt in enumerate(block.stmts):
            sloc = loc + (k,)
            direct = None
            value = getattr(stmt, "expr", None) or getattr(stmt, "value", None)
            if isinstance(value, Call):
                direct = (value.name,)
            self.emit(stmt, NodeKind.STATEMENT, sloc, stmt_kind(stmt), direct or ())
            self.statement(stmt, env, sloc)

    def statement(self, stmt: Stmt, env: dict, loc: tuple[int, ...]) -> None:
        if isinstance(stmt, Let):
            self.expr(stmt.value, env, loc + (0,), (), None)
            self.types.bind_let(env, stmt, self.bool_names)
        elif isinstance(stmt, (Assign, Return)):
            if stmt.value is not None:
                self.expr(stmt.value, env, loc + (0,), (), None)
        elif isinstance(stmt, ExprStmt):
            self.expr(stmt.expr, env, loc + (0,), (), None, discarded=True)
        elif isinstance(stmt, If):
            self.if_chain(stmt, env, loc)
        elif isinstance(stmt, While):
            self.expr(stmt.cond, env, loc + (0,), (), None)
            self.block(stmt.body, env, loc + (1,))

    def if_chain(self, stmt: If, env: dict, loc: tuple[int, ...]) -> None:
        self.expr(stmt.cond, env, loc + (0,), (), None)
        self.block(stmt.then, env, loc + (1,))
        if isinstance(stmt.orelse, If):
            self.if_chain(stmt.orelse, env, loc + (2,))
        elif stmt.orelse is not None:
            self.block(stmt.orelse, env, loc + (2,))

    def expr(self, e: Expr, env: dict, loc: tuple[int, ...], callees: tuple[str, ...],
             parent: Optional[Expr], discarded: bool = False) -> None:
        if isinstance(e, Call):
            callees = callees + (e.name,)
        if isinstance(e, Binary):
            self.emit(e, _binary_kind(e.op), loc, e.op, callees)
        t = self.types.of(e, env)
        # Inside parentheses the Paren node itself takes the insertion.
        if not discarded and t in ("int", "bool") and not isinstance(parent, Paren):
            op = "-" if t == "int" else "!"
            redundant = (isinstance(e, Unary) and e.op == op) or (
                isinstance(parent, Unary) and parent.op == op)
            self.emit(e, NodeKind.NUM_EXPR if t == "int" else NodeKind.BOOL_EXPR, loc, t,
                      callees, redundant)
        for k, child in enumerate(e.children()):
            self.expr(child, env, loc + (k,), callees, e)


def discover_points(module: SubjectModule, lines: Iterable[int]) -> list[MutationPoint]:
    """Mutation points whose node starts on one of ``lines``, in (line, column) order."""
    line_set = set(lines)
    if not line_set:
        raise ValueError("discover_points requires a nonempty line set")
    return _Discovery(module, line_set).run()


# -- operators --------------------------------------------------------------


def _replacement_ops(op: str) -> tuple[str, ...]:
    if op in ARITH_OPS:
        return tuple(o for o in ARITH_OPS if o != op)
    if op in RELATIONAL_OPS:
        return tuple(o for o in RELATIONAL_OPS if o != op)
    return tuple(o for o in LOGICAL_OPS if o != op)


def applicable_operators(point: MutationPoint) -> list[tuple[OperatorKind, int]]:
    kind = point.node_kind
    if kind is NodeKind.STATEMENT:
        return [(OperatorKind.SBR, 1)] if point.detail in SBR_DELETABLE else []
    if kind in (NodeKind.BOOL_EXPR, NodeKind.NUM_EXPR):
        return [(OperatorKind.UOI, 1)]
    return [(OPERATOR_TABLE[kind], len(_replacement_ops(point.detail)))]


def is_suppressed(point: MutationPoint, cfg: SuppressionConfig) -> tuple[bool, str]:
    for name in point.callees:
        if any(fnmatch.fnmatchcase(name, pat) for pat in cfg.callee_denylist):
            return True, "logging callee"
    return False, ""


def _operator_gap(src: str, left: Span, right: Span) -> tuple[int, int]:
    """Absolute offsets of the operator token between two operands."""
    gap = src[left.end : right.start]
    for tok in tokenize(gap):
        if tok.kind == "op":
            return left.end + tok.start, left.end + tok.end
    raise ValueError("no operator token between operands")


def _splice(src: str, span: Span, text: str) -> str:
    return src[: span.start] + text + src[span.end :]


def _build(module: SubjectModule, point: MutationPoint, op: OperatorKind, variant: int,
           attempts: list[tuple[str, Optional[Node]]]) -> Mutant:
    src = module.source_text
    for replacement, new_node in attempts:
        mutated_source = _splice(src, point.span, replacement)
        try:
            mutated = parse_source(mutated_source, module.path)
        except ParseError:
            continue
        expected = replace_at(module, point.locator, new_node)
        if mutated != expected:
            continue
        return Mutant(
            id=mutant_id(point.path, point.span, op, point.original_snippet, replacement),
            point=point,
            operator=op,
            variant=variant,
            replacement_snippet=replacement,
            mutated_source=mutated_source,
            module=mutated,
        )
    raise NotApplicable(NotApplicableReason.WOULD_NOT_PARSE, point.original_snippet)


def apply_operator(module: SubjectModule, point: MutationPoint, op: OperatorKind, variant: int,
                   cfg: Optional[SuppressionConfig] = None) -> Mutant:
    """Apply one operator variant at ``point``. Raises :class:`NotApplicable`."""
    op = OperatorKind(op)
    if cfg is not None and is_suppressed(point, cfg)[0]:
        raise NotApplicable(NotApplicableReason.SUPPRESSED, point.original_snippet)
    if OPERATOR_TABLE[point.node_kind] is not op:
        raise NotApplicable(NotApplicableReason.WRONG_NODE_KIND,
                            f"{op.value} on {point.node_kind.value}")
    src = module.source_text
    node = node_at(module, point.locator)

    if op is OperatorKind.SBR:
        kind = point.detail
        if kind == "Let":
            raise NotApplicable(NotApplicableReason.DECLARATION, point.original_snippet)
        if kind in SBR_CONTROL_FLOW:
            raise NotApplicable(NotApplicableReason.CONTROL_FLOW_STATEMENT, point.original_snippet)
        if variant != 0:
            raise ValueError(f"SBR has 1 variant, got index {variant}")
        return _build(module, point, op, variant, [("", None)])

    if op is OperatorKind.UOI:
        if variant != 0:
            raise ValueError(f"UOI has 1 variant, got index {variant}")
        if point.redundant_unary:
            raise NotApplicable(NotApplicableReason.REDUNDANT_UNARY, point.original_snippet)
        unary = "-" if point.node_kind is NodeKind.NUM_EXPR else "!"
        text = point.original_snippet
        if isinstance(node, ATOMIC_EXPRS):
            attempts = [(unary + text, Unary(unary, node))]
        else:
            attempts = [(f"{unary}({text})", Unary(unary, Paren(node)))]
        return _build(module, point, op, variant, attempts)

    assert isinstance(node, Binary)
    choices = _replacement_ops(node.op)
    if not 0 <= variant < len(choices):
        raise ValueError(f"{op.value} has {len(choices)} variants, got index {variant}")
    new_op = choices[variant]
    start, end = _operator_gap(src, node.left.span, node.right.span)
    text = src[point.span.start : start] + new_op + src[end : point.span.end]
    new_node = Binary(new_op, node.left, node.right)
    attempts: list[tuple[str, Optional[Node]]] = [(text, new_node), (f"({text})", Paren(new_node))]
    # A new operator can bind tighter than an operand did; guard the operands.
    prec = PRECEDENCE[new_op]
    left, right = node.left, node.right
    wrap_left = isinstance(left, Binary) and PRECEDENCE[left.op] < prec
    wrap_right = isinstance(right, Binary) and PRECEDENCE[right.op] <= prec
    if wrap_left or wrap_right:
        lt, rt = left.span.slice(src), right.span.slice(src)
        lt, rt = (f"({lt})" if wrap_left else lt), (f"({rt})" if wrap_right else rt)
        guarded = Binary(new_op, Paren(left) if wrap_left else left, Paren(right) if wrap_right else right)
        text = lt + src[left.span.end : start] + new_op + src[end : right.span.start] + rt
        attempts += [(text, guarded), (f"({text})", Paren(guarded))]
    return _build(module, point, op, variant, attempts)


@dataclass(frozen=True)
class Rejection:
    point: MutationPoint
    operator: OperatorKind
    variant: int
    reason: NotApplicableReason

    def to_dict(self) -> dict:
        return {
            "path": self.point.path,
            "line": self.point.line,
            "node_kind": self.point.node_kind.value,
            "original_snippet": self.point.original_snippet,
            "operator": self.operator.value,
            "variant": self.variant,
            "reason": self.reason.value,
        }


def mutant_sort_key(m: Mutant) -> tuple:
    return (m.point.span.start_line, m.point.span.start_col, m.operator.rank, m.variant)


def enumerate_all_mutants(module: SubjectModule, lines: Iterable[int],
                          cfg: SuppressionConfig = SuppressionConfig(),
                          rejected: Optional[list[Rejection]] = None) -> list[Mutant]:
    """Every valid, unsuppressed mutant for every point on ``lines``.

    Order is (line, column, operator, variant). Rejected operator
    applications are appended to ``rejected`` when a list is supplied.
    """
    line_set = set(lines)
    if not line_set:
        raise ValueError("enumerate_all_mutants requires a nonempty line set")
    mutants: list[Mutant] = []
    for point in discover_points(module, line_set):
        suppressed = is_suppressed(point, cfg)[0]
        ops = applicable_operators(point)
        if point.node_kind is NodeKind.STATEMENT and not ops:
            ops = [(OperatorKind.SBR, 1)]  # surfaces the constraint as a rejection
        for op, count in ops:
            for variant in range(count):
                try:
                    if suppressed:
                        raise NotApplicable(NotApplicableReason.SUPPRESSED)
                    mutants.append(apply_operator(module, point, op, variant))
                except NotApplicable as e:
                    if rejected is not None:
                        rejected.append(Rejection(point, op, variant, e.reason))
    mutants.sort(key=mutant_sort_key)
    return mutants


def candidate_mutants(module: SubjectModule, line: int,
                      cfg: SuppressionConfig = SuppressionConfig()) -> list[Mutant]:
    return [m for m in enumerate_all_mutants(module, {line}, cfg) if m.point.line == line]


def suppressed_points(module: SubjectModule, lines: Iterable[int], cfg: SuppressionConfig) -> list[MutationPoint]:
    line_set = set(lines)
    if not line_set:
        return []
    return [p for p in discover_points(module, line_set) if is_suppressed(p, cfg)[0]]


MutantOrNone = Union[Mutant, None]
