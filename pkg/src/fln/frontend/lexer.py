"""Lossless tokenizer for the supported C subset.

Every byte of the input belongs to exactly one token, trivia included, so
concatenating token texts reproduces the source.  Preprocessor lines become
a single DIRECTIVE token.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from ..errors import FlnError, SourceLoc


class LexError(FlnError):
    code = "ParseError"


class Kind(Enum):
    IDENT = "ident"
    NUMBER = "number"
    STRING = "string"
    CHAR = "char"
    PUNCT = "punct"
    DIRECTIVE = "directive"
    COMMENT = "comment"
    SPACE = "space"
    EOF = "eof"


@dataclass(frozen=True)
class Token:
    kind: Kind
    text: str
    start: int
    end: int
    line: int
    col: int

    @property
    def is_trivia(self) -> bool:
        return self.kind in (Kind.SPACE, Kind.COMMENT)

    def loc(self, file: str) -> SourceLoc:
        return SourceLoc(file, self.line, self.col)


PUNCTUATORS = sorted(
    """... <<= >>= -> ++ -- << >> <= >= == != && || *= /= %= += -= &= ^= |= ##
    [ ] ( ) { } . & * + - ~ ! / % < > ^ | ? : ; = , #""".split(),
    key=len,
    reverse=True,
)

_SPACE = re.compile(r"[ \t\r\n\f\v]+")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER = re.compile(
    r"(0[xX][0-9a-fA-F]+|(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?)[uUlLfF]*"
)
_STRING = re.compile(r'"(\\.|[^"\\\n])*"')
_CHAR = re.compile(r"'(\\.|[^'\\\n])+'")


def tokenize(source: str, file: str = "<input>") -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line = 1
    line_start = 0
    at_line_start = True
    n = len(source)

    def emit(kind: Kind, end: int) -> None:
        nonlocal pos, line, line_start
        text = source[pos:end]
        tokens.append(Token(kind, text, pos, end, line, pos - line_start + 1))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rindex("\n") + 1
        pos = end

    while pos < n:
        ch = source[pos]
        if ch in " \t\r\n\f\v":
            m = _SPACE.match(source, pos)
            if "\n" in m.group():
                at_line_start = True
            emit(Kind.SPACE, m.end())
            continue
        if source.startswith("//", pos):
            end = source.find("\n", pos)
            emit(Kind.COMMENT, n if end < 0 else end)
            continue
        if source.startswith("/*", pos):
            end = source.find("*/", pos + 2)
            if end < 0:
                raise LexError("unterminated comment", SourceLoc(file, line, pos - line_start + 1))
            emit(Kind.COMMENT, end + 2)
            continue
        if ch == "#" and at_line_start:
            end = pos
            while True:
                nl = source.find("\n", end)
                if nl < 0:
                    end = n
                    break
                if source[nl - 1] == "\\" or source[nl - 2 : nl] == "\\\r":
                    end = nl + 1
                    continue
                end = nl
                break
            emit(Kind.DIRECTIVE, end)
            continue
        at_line_start = False
        m = _IDENT.match(source, pos)
        if m:
            # string/char literal prefixes such as L"..." stay one token
            if source[m.end() : m.end() + 1] in ("\"", "'") and m.group() in ("L", "u", "U", "u8"):
                lit = (_STRING if source[m.end()] == '"' else _CHAR).match(source, m.end())
                if lit:
                    emit(Kind.STRING if source[m.end()] == '"' else Kind.CHAR, lit.end())
                    continue
            emit(Kind.IDENT, m.end())
            continue
        m = _NUMBER.match(source, pos)
        if m and (ch.isdigit() or (ch == "." and pos + 1 < n and source[pos + 1].isdigit())):
            emit(Kind.NUMBER, m.end())
            continue
        if ch == '"':
            m = _STRING.match(source, pos)
            if not m:
                raise LexError("unterminated string literal", SourceLoc(file, line, pos - line_start + 1))
            emit(Kind.STRING, m.end())
            continue
        if ch == "'":
            m = _CHAR.match(source, pos)
            if not m:
                raise LexError("malformed character literal", SourceLoc(file, line, pos - line_start + 1))
            emit(Kind.CHAR, m.end())
            continue
        for p in PUNCTUATORS:
            if source.startswith(p, pos):
                emit(Kind.PUNCT, pos + len(p))
                break
        else:
            raise LexError(f"stray character {ch!r}", SourceLoc(file, line, pos - line_start + 1))
    tokens.append(Token(Kind.EOF, "", n, n, line, pos - line_start + 1))
    return tokens


def significant(tokens: list[Token]) -> list[Token]:
    return [t for t in tokens if not t.is_trivia]


def token_texts(source: str) -> list[str]:
    """Whitespace- and comment-insensitive token sequence, used for round-trip checks."""
    return [t.text for t in tokenize(source) if not t.is_trivia and t.kind is not Kind.EOF]
