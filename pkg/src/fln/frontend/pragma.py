"""Annotation directives: `#pragma requires|param[(N)]|return ...`."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from ..errors import FlnError, SourceLoc


class PragmaSyntaxError(FlnError):
    code = "SyntaxError"


class Projection(Enum):
    SECRECY = "secrecy"
    INTEGRITY = "integrity"
    BOTH = "(secrecy, integrity)"


class PragmaKind(Enum):
    REQUIRES = "requires"
    PARAM = "param"
    RETURN = "return"


@dataclass
class PragmaDirective:
    kind: PragmaKind
    sequence: list[tuple[str, Projection]]
    index: Optional[int] = None
    field_set: Optional[list[tuple[str, str]]] = None
    location: Optional[SourceLoc] = field(default=None, compare=False)
    span: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)

    def __post_init__(self) -> None:
        if not self.sequence:
            raise ValueError("a directive needs at least one label")
        if self.index is not None and (self.kind is not PragmaKind.PARAM or self.index < 1):
            raise ValueError("only param directives carry a 1-based index")
        if self.field_set is not None and self.kind is not PragmaKind.REQUIRES:
            raise ValueError("field sets are only allowed on requires")

    @property
    def is_sequence(self) -> bool:
        return len(self.sequence) > 1


KEYWORDS = {"requires", "param", "return"}

_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<int>\d+)|(?P<punct>[(){},:.*])|(?P<bad>\S))")


class _Scanner:
    def __init__(self, text: str, base_col: int, loc: Optional[SourceLoc]):
        self.items: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                break
            kind = m.lastgroup
            self.items.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.i = 0
        self.base_col = base_col
        self.loc = loc

    def error(self, message: str, offset: Optional[int] = None) -> PragmaSyntaxError:
        if offset is None:
            offset = self.items[self.i][2] if self.i < len(self.items) else (
                self.items[-1][2] + len(self.items[-1][1]) if self.items else 0
            )
        loc = None
        if self.loc is not None:
            loc = SourceLoc(self.loc.file, self.loc.line, self.base_col + offset)
        return PragmaSyntaxError(message, loc)

    def peek(self) -> Optional[tuple[str, str, int]]:
        return self.items[self.i] if self.i < len(self.items) else None

    def next(self) -> tuple[str, str, int]:
        item = self.peek()
        if item is None:
            raise self.error("unexpected end of directive")
        if item[0] == "bad":
            if item[1] == "-":
                raise self.error("hyphens are not allowed in label names", item[2])
            raise self.error(f"unexpected character {item[1]!r}", item[2])
        self.i += 1
        return item

    def expect(self, text: str, what: str) -> None:
        item = self.peek()
        if item is None or item[1] != text:
            raise self.error(f"expected {what}")
        self.i += 1

    def at(self, text: str) -> bool:
        item = self.peek()
        return item is not None and item[1] == text


def is_annotation(text: str) -> bool:
    """True when a directive line is one of ours rather than a foreign pragma."""
    m = re.match(r"\s*#\s*pragma\s+([A-Za-z_]+)", text)
    return bool(m) and m.group(1) in KEYWORDS


def parse_pragma(text: str, location: Optional[SourceLoc] = None) -> PragmaDirective:
    m = re.match(r"\s*#\s*pragma\b", text)
    if not m:
        raise PragmaSyntaxError("directive does not start with #pragma", location)
    body = text[m.end() :].replace("\\\n", " ")
    base_col = (location.col if location else 1) + m.end()
    sc = _Scanner(body, base_col, location)
    kind_tok = sc.next()
    if kind_tok[1] not in KEYWORDS:
        raise sc.error(f"unknown annotation kind {kind_tok[1]!r}", kind_tok[2])
    kind = PragmaKind(kind_tok[1])
    index = None
    if kind is PragmaKind.PARAM and sc.at("("):
        sc.next()
        tok = sc.next()
        if tok[0] != "int":
            raise sc.error("expected parameter index", tok[2])
        index = int(tok[1])
        if index < 1:
            raise sc.error("parameter indices start at 1", tok[2])
        sc.expect(")", "')'")
    field_set = None
    if sc.at("{"):
        if kind is not PragmaKind.REQUIRES:
            raise sc.error("field sets are only allowed on requires")
        sc.next()
        field_set = []
        while True:
            if sc.at("."):
                sc.next()
            name = sc.next()
            if name[0] != "ident":
                raise sc.error("expected field name", name[2])
            sc.expect(":", "':' after field name")
            parts: list[str] = []
            while sc.peek() is not None and not (sc.at(",") or sc.at("}")):
                parts.append(sc.next()[1])
            if not parts:
                raise sc.error("expected field type")
            field_set.append((name[1], " ".join(parts).replace(" *", "*").replace("*", " *").strip()))
            if sc.at(","):
                sc.next()
                continue
            sc.expect("}", "'}' closing the field set")
            break
    sequence: list[tuple[str, Projection]] = []
    while True:
        atom = sc.peek()
        if atom is None:
            raise sc.error("empty label sequence")
        atom = sc.next()
        if atom[0] != "ident" or atom[1] == "then":
            raise sc.error("expected label name", atom[2])
        sc.expect(":", "':' between label and projection")
        sequence.append((atom[1], _projection(sc)))
        nxt = sc.peek()
        if nxt is None:
            break
        if nxt[1] != "then":
            if nxt[0] == "bad":
                sc.next()
            raise sc.error("expected 'then' or end of directive", nxt[2])
        sc.next()
    return PragmaDirective(kind, sequence, index, field_set, location, (0, 0))


def _projection(sc: _Scanner) -> Projection:
    tok = sc.next()
    if tok[1] == "secrecy":
        return Projection.SECRECY
    if tok[1] == "integrity":
        return Projection.INTEGRITY
    if tok[1] == "(":
        first = sc.next()
        sc.expect(",", "',' in (secrecy, integrity)")
        second = sc.next()
        sc.expect(")", "')'")
        if first[1] == "secrecy" and second[1] == "integrity":
            return Projection.BOTH
        raise sc.error("expected (secrecy, integrity)", first[2])
    raise sc.error("projection must be secrecy, integrity or (secrecy, integrity)", tok[2])


def render_pragma(d: PragmaDirective) -> str:
    head = d.kind.value
    if d.index is not None:
        head += f"({d.index})"
    parts = ["#pragma", head]
    if d.field_set is not None:
        parts.append("{" + ", ".join(f"{n}:{t}" for n, t in d.field_set) + "}")
    parts.append(" then ".join(f"{atom}:{proj.value}" for atom, proj in d.sequence))
    return " ".join(parts)
