"""Brute-force mutant counting, kept independent of the engine.

Works on modules from ``minigen`` (types are encoded in names) and counts
operator-table entries per line straight off the AST.
"""

from __future__ import annotations

import fnmatch
from collections import Counter

from mutest.minilang.syntax import (
    Assign,
    Binary,
    Block,
    BoolLit,
    Call,
    ExprStmt,
    If,
    IntLit,
    Let,
    Paren,
    Return,
    StrLit,
    Unary,
    Var,
    While,
)

TABLE = {"+": 4, "-": 4, "*": 4, "/": 4, "%": 4,
         "<": 5, "<=": 5, ">": 5, ">=": 5, "==": 5, "!=": 5,
         "&&": 1, "||": 1}
DENY = ("log", "print", "debug*", "trace*")


def denied(name):
    return any(fnmatch.fnmatchcase(name, p) for p in DENY)


def expr_type(e):
    if isinstance(e, IntLit):
        return "int"
    if isinstance(e, BoolLit):
        return "bool"
    if isinstance(e, StrLit):
        return "str"
    if isinstance(e, Var):
        return {"i": "int", "b": "bool"}.get(e.name[0])
    if isinstance(e, Call):
        if e.name.startswith("fi"):
            return "int"
        if e.name.startswith("fb"):
            return "bool"
        return None
    if isinstance(e, Paren):
        return expr_type(e.inner)
    if isinstance(e, Unary):
        return "int" if e.op == "-" else "bool"
    if isinstance(e, Binary):
        return "int" if e.op in ("+", "-", "*", "/", "%") else "bool"
    return None


def sub_exprs(e):
    if isinstance(e, Binary):
        return [e.left, e.right]
    if isinstance(e, Unary):
        return [e.operand]
    if isinstance(e, Paren):
        return [e.inner]
    if isinstance(e, Call):
        return list(e.args)
    return []


def count_expr(e, counts, suppressed, parent=None, discarded=False):
    if isinstance(e, Call) and denied(e.name):
        suppressed = True
    line = e.span.start_line
    if not suppressed:
        if isinstance(e, Binary):
            counts[line] += TABLE[e.op]
        t = expr_type(e)
        if t in ("int", "bool") and not discarded and not isinstance(parent, Paren):
            ins = "-" if t == "int" else "!"
            same_head = isinstance(e, Unary) and e.op == ins
            same_parent = isinstance(parent, Unary) and parent.op == ins
            if not same_head and not same_parent:
                counts[line] += 1
    for c in sub_exprs(e):
        count_expr(c, counts, suppressed, e)


def count_block(b, counts):
    for s in b.stmts:
        top = getattr(s, "expr", None) or getattr(s, "value", None)
        s_suppressed = isinstance(top, Call) and denied(top.name)
        if isinstance(s, (Assign, If, While, ExprStmt)) and not s_suppressed:
            counts[s.span.start_line] += 1
        count_stmt(s, counts)


def count_stmt(s, counts):
    if isinstance(s, (Let, Assign)):
        count_expr(s.value, counts, False)
    elif isinstance(s, Return) and s.value is not None:
        count_expr(s.value, counts, False)
    elif isinstance(s, ExprStmt):
        count_expr(s.expr, counts, False, discarded=True)
    elif isinstance(s, While):
        count_expr(s.cond, counts, False)
        count_block(s.body, counts)
    elif isinstance(s, If):
        count_expr(s.cond, counts, False)
        count_block(s.then, counts)
        if isinstance(s.orelse, If):
            count_stmt(s.orelse, counts)
        elif isinstance(s.orelse, Block):
            count_block(s.orelse, counts)


def mutant_counts(module) -> Counter:
    counts: Counter = Counter()
    for fn in module.functions:
        count_block(fn.body, counts)
    return counts


def naive_spearman(xs, ys):
    """Rank by counting, then textbook Pearson. Quadratic and slow on purpose."""

    def ranks(v):
        return [sum(1 for b in v if b < a) + (sum(1 for b in v if b == a) + 1) / 2 for a in v]

    rx, ry = ranks(xs), ranks(ys)
    n = len(rx)
    mx, my = sum(rx) / n, sum(ry) / n
    num = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    den = (sum((a - mx) ** 2 for a in rx) * sum((b - my) ** 2 for b in ry)) ** 0.5
    return num / den
