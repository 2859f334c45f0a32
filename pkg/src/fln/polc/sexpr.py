"""Textual S-expression form of labeled expressions, types and contexts.

Format (stable):
  tag       botS | topS | botI | topI | <atom>
  label     (lab <secrecy-tag> <integrity-tag>)
  policy    (pol bot|top|U <label>...)
  type      unit | (int <policy>) | (ptr <type> <policy>) | (rec <name> <policy>)
            | (fun <pc-policy> <label-policy> <de-index>|none (<type>...) <type>)
  expr      (var x) (num n) (unit) (fn f) (loc n) (record T <v>...) (pair <e> <e>)
            (bop <op> <e> <e>) (app <v> <e>...) (let x <type>|_ <e> <e>)
            (field <v> i) (if <v> <e> <e>) (assign <v> <e>) (new <e>) (deref <v>)
            (relab <policy> <policy> <v>) hole
            (@ <expr> <type>) attaches a tag to a value or allocation
  contexts  (ctx (records (T (<type>...) (<field-name>...))...)
                 (functions (f <type>)...) (vars (x <type>)...) (store (n <type>)...))
"""

from __future__ import annotations

import re
from dataclasses import replace
from typing import Any

from ..lattice import (
    BOTTOM_I,
    BOTTOM_S,
    TOP_I,
    TOP_S,
    IntegrityTag,
    Label,
    Policy,
    SecrecyTag,
    TagKind,
    Terminal,
    integrity_atom,
    secrecy_atom,
)
from . import syntax as S
from .types import UNIT, FunType, IntBase, PtrBase, RecordBase, RecordDef, Simple, TypingContexts, UnitType

_TERMINALS = {Terminal.BOTTOM: "bot", Terminal.TOP: "top", Terminal.UNLABELED: "U"}
_TERMINALS_INV = {v: k for k, v in _TERMINALS.items()}


class SexprError(ValueError):
    pass


# generic reader/writer ---------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")


def parse(text: str):
    pos = 0
    stack: list[list] = [[]]
    while True:
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            break
        pos = m.end()
        if m.group(1):
            stack.append([])
        elif m.group(2):
            if len(stack) == 1:
                raise SexprError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(m.group(3))
    if text[pos:].strip():
        raise SexprError(f"unexpected text at offset {pos}")
    if len(stack) != 1 or len(stack[0]) != 1:
        raise SexprError("expected exactly one expression")
    return stack[0][0]


def dump(tree) -> str:
    if isinstance(tree, list):
        return "(" + " ".join(dump(t) for t in tree) + ")"
    return str(tree)


# policies and types --------------------------------------------------------

def _tag_out(t) -> str:
    if t.kind is TagKind.ATOM:
        return t.name
    comp = "S" if isinstance(t, SecrecyTag) else "I"
    return ("bot" if t.kind is TagKind.BOTTOM else "top") + comp


def _tag_in(tok: str, secrecy: bool):
    fixed = {"botS": BOTTOM_S, "topS": TOP_S, "botI": BOTTOM_I, "topI": TOP_I}
    if tok in fixed:
        tag = fixed[tok]
        if isinstance(tag, SecrecyTag) != secrecy:
            raise SexprError(f"tag {tok} in the wrong component")
        return tag
    return secrecy_atom(tok) if secrecy else integrity_atom(tok)


def policy_to_tree(p: Policy) -> list:
    return ["pol", _TERMINALS[p.terminal]] + [
        ["lab", _tag_out(lab.secrecy), _tag_out(lab.integrity)] for lab in p.labels]


def policy_from_tree(t) -> Policy:
    if not (isinstance(t, list) and t and t[0] == "pol"):
        raise SexprError(f"expected policy, got {dump(t)}")
    labels = []
    for lt in t[2:]:
        if not (isinstance(lt, list) and len(lt) == 3 and lt[0] == "lab"):
            raise SexprError(f"expected label, got {dump(lt)}")
        labels.append(Label(_tag_in(lt[1], True), _tag_in(lt[2], False)))
    return Policy(tuple(labels), _TERMINALS_INV[t[1]])


def type_to_tree(s) -> Any:
    if isinstance(s, UnitType):
        return "unit"
    if isinstance(s, Simple):
        p = policy_to_tree(s.policy)
        if isinstance(s.base, IntBase):
            return ["int", p]
        if isinstance(s.base, PtrBase):
            return ["ptr", type_to_tree(s.base.target), p]
        return ["rec", s.base.name, p]
    if isinstance(s, FunType):
        de = "none" if s.de_index is None else str(s.de_index)
        return ["fun", policy_to_tree(s.pc), policy_to_tree(s.label), de,
                [type_to_tree(x) for x in s.params], type_to_tree(s.ret)]
    raise SexprError(f"not a security type: {s!r}")


def type_from_tree(t):
    if t == "unit":
        return UNIT
    if not isinstance(t, list) or not t:
        raise SexprError(f"expected type, got {dump(t)}")
    head = t[0]
    if head == "int":
        return Simple(IntBase(), policy_from_tree(t[1]))
    if head == "ptr":
        return Simple(PtrBase(type_from_tree(t[1])), policy_from_tree(t[2]))
    if head == "rec":
        return Simple(RecordBase(t[1]), policy_from_tree(t[2]))
    if head == "fun":
        de = None if t[3] == "none" else int(t[3])
        return FunType(tuple(type_from_tree(x) for x in t[4]), type_from_tree(t[5]),
                       policy_from_tree(t[1]), policy_from_tree(t[2]), de)
    raise SexprError(f"unknown type form {head}")


# expressions ----------------------------------------------------------------

def expr_to_tree(e) -> Any:
    tree = _expr_tree(e)
    tag = getattr(e, "tag", None)
    if tag is not None:
        return ["@", tree, type_to_tree(tag)]
    return tree


def _expr_tree(e):
    t = expr_to_tree
    if e is S.HOLE:
        return "hole"
    if isinstance(e, S.Var):
        return ["var", e.name]
    if isinstance(e, S.Int):
        return ["num", str(e.value)]
    if isinstance(e, S.UnitVal):
        return ["unit"]
    if isinstance(e, S.FunRef):
        return ["fn", e.name]
    if isinstance(e, S.Loc):
        return ["loc", str(e.address)]
    if isinstance(e, S.Record):
        return ["record", e.name] + [t(f) for f in e.fields]
    if isinstance(e, S.Pair):
        return ["pair", t(e.left), t(e.right)]
    if isinstance(e, S.BinOp):
        return ["bop", e.op, t(e.left), t(e.right)]
    if isinstance(e, S.App):
        return ["app", t(e.func)] + [t(a) for a in e.args]
    if isinstance(e, S.Let):
        ann = "_" if e.ann is None else type_to_tree(e.ann)
        return ["let", e.name, ann, t(e.bound), t(e.body)]
    if isinstance(e, S.Field):
        return ["field", t(e.value), str(e.index)]
    if isinstance(e, S.If):
        return ["if", t(e.cond), t(e.then), t(e.other)]
    if isinstance(e, S.Assign):
        return ["assign", t(e.target), t(e.value)]
    if isinstance(e, S.New):
        return ["new", t(e.value)]
    if isinstance(e, S.Deref):
        return ["deref", t(e.value)]
    if isinstance(e, S.Relabel):
        return ["relab", policy_to_tree(e.target), policy_to_tree(e.source), t(e.value)]
    raise SexprError(f"cannot serialize {type(e).__name__}")


def expr_from_tree(t):
    f = expr_from_tree
    if t == "hole":
        return S.HOLE
    if not isinstance(t, list) or not t:
        raise SexprError(f"expected expression, got {dump(t)}")
    head, args = t[0], t[1:]
    if head == "@":
        inner = f(args[0])
        if not hasattr(inner, "tag"):
            raise SexprError("tag on a node that cannot carry one")
        return replace(inner, tag=type_from_tree(args[1]))
    if head == "var":
        return S.Var(args[0])
    if head == "num":
        return S.Int(int(args[0]))
    if head == "unit":
        return S.UnitVal()
    if head == "fn":
        return S.FunRef(args[0])
    if head == "loc":
        return S.Loc(int(args[0]))
    if head == "record":
        return S.Record(args[0], tuple(f(a) for a in args[1:]))
    if head == "pair":
        return S.Pair(f(args[0]), f(args[1]))
    if head == "bop":
        return S.BinOp(args[0], f(args[1]), f(args[2]))
    if head == "app":
        return S.App(f(args[0]), tuple(f(a) for a in args[1:]))
    if head == "let":
        ann = None if args[1] == "_" else type_from_tree(args[1])
        return S.Let(args[0], ann, f(args[2]), f(args[3]))
    if head == "field":
        return S.Field(f(args[0]), int(args[1]))
    if head == "if":
        return S.If(f(args[0]), f(args[1]), f(args[2]))
    if head == "assign":
        return S.Assign(f(args[0]), f(args[1]))
    if head == "new":
        return S.New(f(args[0]))
    if head == "deref":
        return S.Deref(f(args[0]))
    if head == "relab":
        return S.Relabel(policy_from_tree(args[0]), policy_from_tree(args[1]), f(args[2]))
    raise SexprError(f"unknown expression form {head}")


def contexts_to_tree(ctx: TypingContexts) -> list:
    return [
        "ctx",
        ["records"] + [[r.name, [type_to_tree(x) for x in r.fields], list(r.field_names)]
                       for r in ctx.records.values()],
        ["functions"] + [[n, type_to_tree(s)] for n, s in ctx.functions.items()],
        ["vars"] + [[n, type_to_tree(s)] for n, s in ctx.variables.items()],
        ["store"] + [[str(n), type_to_tree(s)] for n, s in ctx.store.items()],
    ]


def contexts_from_tree(t) -> TypingContexts:
    if not (isinstance(t, list) and t and t[0] == "ctx"):
        raise SexprError("expected (ctx ...)")
    sections = {sec[0]: sec[1:] for sec in t[1:]}
    ctx = TypingContexts()
    for name, fields, names in sections.get("records", []):
        ctx.records[name] = RecordDef(name, tuple(type_from_tree(x) for x in fields), tuple(names))
    for name, s in sections.get("functions", []):
        ctx.functions[name] = type_from_tree(s)
    for name, s in sections.get("vars", []):
        ctx.variables[name] = type_from_tree(s)
    for n, s in sections.get("store", []):
        ctx.store[int(n)] = type_from_tree(s)
    return ctx


def dump_expr(e) -> str:
    return dump(expr_to_tree(e))


def load_expr(text: str):
    return expr_from_tree(parse(text))


def dump_type(s) -> str:
    return dump(type_to_tree(s))


def load_type(text: str):
    return type_from_tree(parse(text))


def dump_contexts(ctx: TypingContexts) -> str:
    return dump(contexts_to_tree(ctx))


def load_contexts(text: str) -> TypingContexts:
    return contexts_from_tree(parse(text))
