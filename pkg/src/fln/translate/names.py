"""Deterministic names for generated wrapper types.

A name is `__fln__`, one token per label, an optional `top` token for a
Top terminal, then the base-type token, all joined by `_`.  A label token
is `<atom>S` for a secrecy-only label, `<atom>I` for an integrity-only
label, `<atom>SI` when both components carry the same atom, and
`<s>S<i>I` otherwise, with bot/top spelled out.
"""

from __future__ import annotations

import re

from ..errors import FlnError
from ..lattice import Label, Policy, TagKind, Terminal

PREFIX = "__fln__"


class NameCollision(FlnError):
    code = "NameCollision"


class ReservedIdentifier(FlnError):
    code = "ReservedIdentifier"


def _tag_word(t) -> str:
    if t.kind is TagKind.ATOM:
        return t.name
    return "bot" if t.kind is TagKind.BOTTOM else "top"


def label_token(lab: Label) -> str:
    s, i = lab.secrecy, lab.integrity
    if s.kind is TagKind.ATOM and i.kind is TagKind.BOTTOM:
        return f"{s.name}S"
    if i.kind is TagKind.ATOM and s.kind is TagKind.BOTTOM:
        return f"{i.name}I"
    if s.kind is TagKind.ATOM and i.kind is TagKind.ATOM and s.name == i.name:
        return f"{s.name}SI"
    return f"{_tag_word(s)}S{_tag_word(i)}I"


def policy_tokens(p: Policy) -> list[str]:
    if p.terminal is Terminal.UNLABELED:
        raise ValueError("the unlabeled marker has no generated name")
    out = [label_token(lab) for lab in p.labels]
    if p.terminal is Terminal.TOP:
        out.append("top")
    return out


def c_token(spelling: str) -> str:
    """Base-type token from a C spelling: words joined by `_`, `*` as `p`."""
    words = re.findall(r"[A-Za-z_][A-Za-z0-9_]*|\*", spelling)
    out: list[str] = []
    for w in words:
        if w in ("struct", "union"):
            continue
        if w == "*":
            if out:
                out[-1] += "p"
            else:
                out.append("p")
        else:
            out.append(w)
    return "_".join(out)


def gen_name(base_token: str, p: Policy) -> str:
    return PREFIX + "_".join(policy_tokens(p) + [base_token])


def check_user_identifier(name: str, loc=None) -> None:
    if name.startswith(PREFIX):
        raise ReservedIdentifier(f"identifier '{name}' uses the reserved prefix '{PREFIX}'", loc)

