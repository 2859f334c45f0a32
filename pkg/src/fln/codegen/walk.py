"""Traversal of C statements shared by the rules and the rewriter."""

from __future__ import annotations

from typing import Optional

from ..frontend import cast as C


def child_stmts(s: C.Stmt) -> list[C.Stmt]:
    if isinstance(s, C.FunctionDef):
        return [s.body]
    if isinstance(s, C.Compound):
        return list(s.items)
    if isinstance(s, C.If):
        return [x for x in (s.then, s.other) if x is not None]
    if isinstance(s, C.While):
        return [s.body]
    if isinstance(s, C.For):
        return [x for x in (s.init, s.body) if x is not None]
    return []


def stmt_exprs(s: C.Stmt) -> list[C.Expr]:
    """Expressions directly owned by a statement (not by its children)."""
    out: list[Optional[C.Expr]] = []
    if isinstance(s, C.Declaration):
        out = [d.init for d in s.declarators]
    elif isinstance(s, C.ExprStmt):
        out = [s.expr]
    elif isinstance(s, (C.If, C.While)):
        out = [s.cond]
    elif isinstance(s, C.For):
        out = [s.cond, s.step]
    elif isinstance(s, C.Return):
        out = [s.value]
    return [e for e in out if e is not None]


def all_stmts(items: list[C.Stmt]):
    stack = list(reversed(items))
    while stack:
        s = stack.pop()
        yield s
        stack.extend(reversed(child_stmts(s)))


def all_exprs(unit: C.TranslationUnit):
    for s in all_stmts(unit.items):
        for root in stmt_exprs(s):
            yield from C.iter_expr(root)
