"""Source rendering.

A node that carries a span is rendered by slicing the text it was parsed
from, so parsed code round-trips byte for byte (comments included). Nodes
without a span, e.g. ones synthesized by a mutation operator, are printed
in canonical layout with their children rendered recursively.
"""

from __future__ import annotations

from .syntax import (
    Assign,
    Binary,
    Block,
    BoolLit,
    Break,
    Call,
    Continue,
    ExprStmt,
    FunctionDef,
    If,
    IntLit,
    Let,
    Node,
    Paren,
    Return,
    StrLit,
    SubjectModule,
    Unary,
    Var,
    While,
)

INDENT = "    "


def quote_string(value: str) -> str:
    body = value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return f'"{body}"'


def render_source(module: SubjectModule) -> str:
    if module.span is not None:
        return module.source_text
    if not module.functions:
        return ""
    return "\n\n".join(render_node(fn, module.source_text) for fn in module.functions) + "\n"


def render_node(node: Node, source: str = "", indent: int = 0) -> str:
    if node.span is not None and source:
        return node.span.slice(source)
    r = lambda n, i=indent: render_node(n, source, i)  # noqa: E731
    pad = INDENT * indent

    if isinstance(node, IntLit):
        return str(node.value)
    if isinstance(node, BoolLit):
        return "true" if node.value else "false"
    if isinstance(node, StrLit):
        return quote_string(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.name}({', '.join(r(a) for a in node.args)})"
    if isinstance(node, Unary):
        return f"{node.op}{r(node.operand)}"
    if isinstance(node, Binary):
        return f"{r(node.left)} {node.op} {r(node.right)}"
    if isinstance(node, Paren):
        return f"({r(node.inner)})"

    if isinstance(node, Block):
        if not node.stmts:
            return "{\n" + pad + "}"
        inner = "".join(INDENT * (indent + 1) + r(s, indent + 1) + "\n" for s in node.stmts)
        return "{\n" + inner + pad + "}"
    if isinstance(node, Let):
        return f"let {node.name} = {r(node.value)};"
    if isinstance(node, Assign):
        return f"{node.name} = {r(node.value)};"
    if isinstance(node, If):
        text = f"if ({r(node.cond)}) {r(node.then)}"
        if node.orelse is not None:
            text += f" else {r(node.orelse)}"
        return text
    if isinstance(node, While):
        return f"while ({r(node.cond)}) {r(node.body)}"
    if isinstance(node, Return):
        return "return;" if node.value is None else f"return {r(node.value)};"
    if isinstance(node, Break):
        return "break;"
    if isinstance(node, Continue):
        return "continue;"
    if isinstance(node, ExprStmt):
        return f"{r(node.expr)};"
    if isinstance(node, FunctionDef):
        return f"fn {node.name}({', '.join(node.params)}) {r(node.body)}"
    if isinstance(node, SubjectModule):
        return render_source(node)
    raise TypeError(f"cannot render {type(node).__name__}")
