"""AST node types for MiniLang.

Nodes are frozen dataclasses. Spans are excluded from equality, so ``==``
between two nodes is structural equality of the trees.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Iterator, Optional, Union

ARITH_OPS = ("+", "-", "*", "/", "%")
RELATIONAL_OPS = ("<", "<=", ">", ">=", "==", "!=")
LOGICAL_OPS = ("&&", "||")
BINARY_OPS = ARITH_OPS + RELATIONAL_OPS + LOGICAL_OPS
UNARY_OPS = ("-", "!")

# Higher binds tighter.
PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "==": 3,
    "!=": 3,
    "<": 4,
    "<=": 4,
    ">": 4,
    ">=": 4,
    "+": 5,
    "-": 5,
    "*": 6,
    "/": 6,
    "%": 6,
}
UNARY_PRECEDENCE = 7


@dataclass(frozen=True)
class Span:
    """Half-open source region. Lines and columns are 1-based."""

    start_line: int
    start_col: int
    end_line: int
    end_col: int
    start: int
    end: int

    def slice(self, text: str) -> str:
        return text[self.start : self.end]

    def contains(self, other: Span) -> bool:
        return self.start <= other.start and other.end <= self.end

    def to_dict(self) -> dict:
        return {
            "start_line": self.start_line,
            "start_col": self.start_col,
            "end_line": self.end_line,
            "end_col": self.end_col,
            "start": self.start,
            "end": self.end,
        }

    @classmethod
    def from_dict(cls, d: dict) -> Span:
        return cls(**{f.name: int(d[f.name]) for f in fields(cls)})


def _span() -> Optional[Span]:
    return field(default=None, compare=False, repr=False)


class Node:
    span: Optional[Span]

    def children(self) -> Iterator[Node]:
        for f in fields(self):  # type: ignore[arg-type]
            if f.name == "span":
                continue
            value = getattr(self, f.name)
            if isinstance(value, Node):
                yield value
            elif isinstance(value, tuple):
                for item in value:
                    if isinstance(item, Node):
                        yield item


# -- expressions ------------------------------------------------------------


class Expr(Node):
    pass


@dataclass(frozen=True)
class IntLit(Expr):
    value: int
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class StrLit(Expr):
    value: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Var(Expr):
    name: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Call(Expr):
    name: str
    args: tuple[Expr, ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    operand: Expr
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Paren(Expr):
    inner: Expr
    span: Optional[Span] = _span()


ATOMIC_EXPRS = (IntLit, BoolLit, StrLit, Var, Call, Paren)


# -- statements -------------------------------------------------------------


class Stmt(Node):
    pass


@dataclass(frozen=True)
class Block(Node):
    stmts: tuple[Stmt, ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Let(Stmt):
    name: str
    value: Expr
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Assign(Stmt):
    name: str
    value: Expr
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class If(Stmt):
    cond: Expr
    then: Block
    orelse: Union[Block, If, None] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class While(Stmt):
    cond: Expr
    body: Block
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Return(Stmt):
    value: Optional[Expr] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Break(Stmt):
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Continue(Stmt):
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class ExprStmt(Stmt):
    expr: Expr
    span: Optional[Span] = _span()


STMT_KINDS = {
    Let: "Let",
    Assign: "Assign",
    If: "If",
    While: "While",
    Return: "Return",
    Break: "Break",
    Continue: "Continue",
    ExprStmt: "ExprStmt",
}


def stmt_kind(stmt: Stmt) -> str:
    return STMT_KINDS[type(stmt)]


@dataclass(frozen=True)
class FunctionDef(Node):
    name: str
    params: tuple[str, ...]
    body: Block
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class SubjectModule(Node):
    """A parsed ``.mini`` file.

    ``source_text`` and ``path`` do not take part in equality; two modules
    are equal when their function lists are structurally equal.
    """

    functions: tuple[FunctionDef, ...]
    source_text: str = field(default="", compare=False, repr=False)
    path: str = field(default="", compare=False)
    span: Optional[Span] = _span()

    def function(self, name: str) -> Optional[FunctionDef]:
        for fn in self.functions:
            if fn.name == name:
                return fn
        return None


def walk(node: Node) -> Iterator[Node]:
    """Pre-order traversal."""
    yield node
    for child in node.children():
        yield from walk(child)
