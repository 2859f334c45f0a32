"""Recursive-descent parser for the supported C subset.

Constructs outside the subset do not abort parsing: the parser skips to a
safe synchronization point and keeps the skipped text as an `Opaque` node,
reporting an OpaqueRegion warning.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from ..errors import FlnError, SourceLoc
from . import cast as C
from .lexer import Kind, Token, tokenize
from .pragma import PragmaDirective, PragmaSyntaxError, is_annotation, parse_pragma


class ParseError(FlnError):
    code = "ParseError"


@dataclass
class Problem:
    """A located frontend complaint; severity is 'error' or 'warning'."""

    severity: str
    code: str
    message: str
    loc: SourceLoc


TYPE_WORDS = C.ARITHMETIC | {"void"}
SPEC_WORDS = TYPE_WORDS | C.QUALIFIERS | C.STORAGE | {"struct", "union", "enum", "typedef"}
BUILTIN_TYPEDEFS = {"FILE", "va_list", "wchar_t", "off_t", "time_t", "clock_t"}
STATEMENT_KEYWORDS = {"if", "else", "while", "for", "do", "switch", "case", "default",
                      "return", "break", "continue", "goto"}

BINARY_PRECEDENCE = {
    "||": 1, "&&": 2, "|": 3, "^": 4, "&": 5, "==": 6, "!=": 6,
    "<": 7, ">": 7, "<=": 7, ">=": 7, "<<": 8, ">>": 8, "+": 9, "-": 9,
    "*": 10, "/": 10, "%": 10,
}
ASSIGN_OPS = {"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="}


class _Backtrack(Exception):
    pass


class Parser:
    def __init__(self, source: str, file: str):
        self.source = source
        self.file = file
        self.all_tokens = tokenize(source, file)
        self.toks: list[Token] = [t for t in self.all_tokens if not t.is_trivia]
        self.i = 0
        self.typedefs: set[str] = set(BUILTIN_TYPEDEFS)
        self.problems: list[Problem] = []
        self.directives: list[PragmaDirective] = []
        self.enum_constants: set[str] = set()

    # token helpers ---------------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        j = min(self.i + k, len(self.toks) - 1)
        return self.toks[j]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in (Kind.PUNCT, Kind.IDENT) and t.text in texts

    def advance(self) -> Token:
        t = self.tok
        if t.kind is not Kind.EOF:
            self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected '{text}' before '{self.tok.text or 'end of input'}'")
        return self.advance()

    def error(self, message: str, tok: Optional[Token] = None) -> ParseError:
        t = tok or self.tok
        return ParseError(message, t.loc(self.file))

    def loc(self, t: Token) -> SourceLoc:
        return t.loc(self.file)

    def prev_end(self) -> int:
        return self.toks[self.i - 1].end if self.i > 0 else 0

    def span_from(self, start: Token) -> C.Span:
        return (start.start, max(self.prev_end(), start.start))

    # entry -----------------------------------------------------------------
    def parse(self) -> C.TranslationUnit:
        items: list[C.Stmt] = []
        while self.tok.kind is not Kind.EOF:
            if self.tok.kind is Kind.DIRECTIVE:
                items.append(self.directive())
                continue
            if self.at(";"):
                self.advance()
                continue
            start = self.i
            try:
                items.extend(self.external())
            except ParseError as exc:
                self.i = start
                items.append(self.opaque_top(str(exc.message)))
        unit = C.TranslationUnit(self.file, self.source, items, self.problems)
        unit.enum_constants = self.enum_constants  # type: ignore[attr-defined]
        return unit

    def directive(self) -> C.Stmt:
        t = self.advance()
        span = (t.start, t.end)
        if is_annotation(t.text):
            try:
                d = parse_pragma(t.text, self.loc(t))
            except PragmaSyntaxError as exc:
                self.problems.append(Problem("error", exc.code, exc.message, exc.loc or self.loc(t)))
                return C.Directive(self.loc(t), span, t.text)
            d.span = span
            self.directives.append(d)
            return C.PragmaItem(self.loc(t), span, d)
        return C.Directive(self.loc(t), span, t.text)

    def opaque_top(self, reason: str) -> C.Opaque:
        start = self.tok
        self.skip_to_sync(top_level=True)
        span = self.span_from(start)
        self.problems.append(Problem("warning", "OpaqueRegion",
                                     f"construct outside the checked subset kept verbatim ({reason})",
                                     self.loc(start)))
        return C.Opaque(self.loc(start), span, self.source[span[0]:span[1]], reason)

    def skip_to_sync(self, top_level: bool) -> None:
        depth = 0
        start = self.i
        while self.tok.kind is not Kind.EOF:
            t = self.tok
            if t.kind is Kind.DIRECTIVE and depth == 0 and self.i > start:
                return
            if t.kind is Kind.PUNCT and t.text in ("(", "[", "{"):
                depth += 1
            elif t.kind is Kind.PUNCT and t.text in (")", "]", "}"):
                if depth == 0:
                    if not top_level:
                        return
                    self.advance()
                    continue
                depth -= 1
                if depth == 0 and t.text == "}":
                    self.advance()
                    if self.at(";"):
                        self.advance()
                    return
            elif t.kind is Kind.PUNCT and t.text == ";" and depth == 0:
                self.advance()
                return
            self.advance()

    # declarations ----------------------------------------------------------
    def is_type_start(self, k: int = 0) -> bool:
        t = self.peek(k) if k else self.tok
        if t.kind is not Kind.IDENT:
            return False
        return t.text in SPEC_WORDS or t.text in self.typedefs

    def starts_declaration(self) -> bool:
        if self.is_type_start():
            return True
        t = self.tok
        if t.kind is not Kind.IDENT or t.text in STATEMENT_KEYWORDS or t.text == "sizeof":
            return False
        # unknown type name followed by a declarator: `T x`, `T *x;`, `T *x =`
        n1 = self.peek(1)
        if n1.kind is Kind.IDENT and n1.text not in STATEMENT_KEYWORDS:
            return True
        if n1.text == "*":
            j = 1
            while self.peek(j).text == "*":
                j += 1
            nxt = self.peek(j)
            after = self.peek(j + 1)
            return nxt.kind is Kind.IDENT and after.text in (";", "=", ",", "[", ")")
        return False

    def specifiers(self) -> tuple[C.Specifier, bool]:
        start = self.tok
        storage: list[str] = []
        quals: list[str] = []
        words: list[str] = []
        record: Optional[C.RecordDef] = None
        ctype: Optional[C.CType] = None
        is_typedef = False
        type_start: Optional[int] = None
        type_end = 0
        while True:
            t = self.tok
            if t.kind is not Kind.IDENT:
                break
            w = t.text
            if w == "typedef":
                is_typedef = True
                self.advance()
                continue
            if w in C.STORAGE:
                storage.append(w)
                self.advance()
                continue
            if w in C.QUALIFIERS:
                quals.append(w)
                if type_start is None:
                    type_start = t.start
                type_end = t.end
                self.advance()
                continue
            if ctype is None and not words and w in ("struct", "union"):
                if type_start is None:
                    type_start = t.start
                ctype, record = self.record_specifier()
                type_end = self.prev_end()
                continue
            if ctype is None and not words and w == "enum":
                if type_start is None:
                    type_start = t.start
                self.enum_specifier()
                ctype = C.CNamed("int")
                type_end = self.prev_end()
                continue
            if w in TYPE_WORDS and ctype is None and not (w in C.STD_TYPEDEFS and words):
                words.append(w)
                if type_start is None:
                    type_start = t.start
                type_end = t.end
                self.advance()
                continue
            if ctype is None and not words and w not in STATEMENT_KEYWORDS and w != "sizeof":
                # a typedef name (declared or assumed from context)
                nxt = self.peek(1)
                if w in self.typedefs or nxt.kind is Kind.IDENT or nxt.text in ("*", "(", ")", ",", ";", "["):
                    words.append(w)
                    if type_start is None:
                        type_start = t.start
                    type_end = t.end
                    self.advance()
                    continue
            break
        if ctype is None:
            if not words:
                raise self.error("expected a type")
            if words == ["void"]:
                ctype = C.CVoid(tuple(quals))
            else:
                ctype = C.CNamed(" ".join(words), tuple(quals))
        elif quals:
            if isinstance(ctype, C.CRecord):
                ctype = C.CRecord(ctype.tag, ctype.union, tuple(quals))
        spec = C.Specifier(self.loc(start), self.span_from(start), ctype, tuple(storage),
                           (type_start if type_start is not None else start.start, type_end), record)
        return spec, is_typedef

    def record_specifier(self) -> tuple[C.CType, Optional[C.RecordDef]]:
        kw = self.advance()
        union = kw.text == "union"
        tag = None
        if self.tok.kind is Kind.IDENT:
            tag = self.advance().text
        record = None
        if self.at("{"):
            self.advance()
            fields: list[C.Declarator] = []
            while not self.at("}"):
                if self.tok.kind is Kind.EOF:
                    raise self.error("unterminated record definition")
                if self.tok.kind is Kind.DIRECTIVE:
                    self.advance()
                    continue
                spec, _ = self.specifiers()
                if self.at(";"):
                    self.advance()
                    continue
                while True:
                    d = self.declarator(spec)
                    if self.at(":"):  # bit field
                        self.advance()
                        self.conditional()
                    fields.append(d)
                    if self.at(","):
                        self.advance()
                        continue
                    break
                self.expect(";")
            end = self.advance()
            if tag is None:
                tag = f"__anon_{kw.line}_{kw.col}"
            record = C.RecordDef(self.loc(kw), (kw.start, end.end), tag, fields, union)
        if tag is None:
            raise self.error("anonymous record without a body")
        return C.CRecord(tag, union), record

    def enum_specifier(self) -> None:
        self.advance()
        if self.tok.kind is Kind.IDENT:
            self.advance()
        if self.at("{"):
            self.advance()
            while not self.at("}"):
                name = self.advance()
                if name.kind is not Kind.IDENT:
                    raise self.error("expected enumerator", name)
                self.enum_constants.add(name.text)
                if self.at("="):
                    self.advance()
                    self.conditional()
                if self.at(","):
                    self.advance()
            self.advance()

    def declarator(self, spec: C.Specifier, abstract: bool = False) -> C.Declarator:
        start = self.tok
        name_tok, build, params, variadic = self._declarator(abstract)
        ctype = build(spec.ctype)
        name = name_tok.text if name_tok else None
        name_span = (name_tok.start, name_tok.end) if name_tok else (0, 0)
        return C.Declarator(self.loc(name_tok or start), self.span_from(start), name, ctype, spec,
                            name_span, params, variadic)

    def _declarator(self, abstract: bool):
        stars: list[tuple[str, ...]] = []
        while self.at("*"):
            self.advance()
            q: list[str] = []
            while self.tok.kind is Kind.IDENT and self.tok.text in C.QUALIFIERS:
                q.append(self.advance().text)
            stars.append(tuple(q))
        inner = None
        name_tok: Optional[Token] = None
        if self.at("(") and (self.peek(1).text in ("*", "(") or (
                self.peek(1).kind is Kind.IDENT and not self.is_type_start(1) and not abstract)):
            self.advance()
            inner = self._declarator(abstract)
            self.expect(")")
        elif self.tok.kind is Kind.IDENT and (self.tok.text not in SPEC_WORDS
                                              or self.tok.text in C.STD_TYPEDEFS):
            name_tok = self.advance()
        elif not abstract:
            raise self.error("expected identifier in declaration")
        suffixes: list[tuple] = []
        while self.at("[", "("):
            if self.at("["):
                self.advance()
                depth = 1
                while depth:
                    t = self.advance()
                    if t.kind is Kind.EOF:
                        raise self.error("unterminated array declarator")
                    if t.text == "[":
                        depth += 1
                    elif t.text == "]":
                        depth -= 1
                suffixes.append(("array",))
            else:
                params, variadic = self.parameters()
                suffixes.append(("func", params, variadic))

        def build(base: C.CType) -> C.CType:
            t = base
            for q in stars:
                t = C.CPointer(t, q)
            for s in reversed(suffixes):
                if s[0] == "array":
                    t = C.CPointer(t)
                else:
                    t = C.CFunction(t, tuple(p.ctype for p in s[1]), s[2])
            return t

        if inner is not None:
            itok, ibuild, iparams, ivariadic = inner
            return itok, (lambda b: ibuild(build(b))), iparams, ivariadic
        params = variadic = None
        if suffixes and suffixes[0][0] == "func":
            params, variadic = suffixes[0][1], suffixes[0][2]
        return name_tok, build, params, bool(variadic)

    def parameters(self) -> tuple[list[C.Declarator], bool]:
        self.expect("(")
        params: list[C.Declarator] = []
        variadic = False
        if self.at(")"):
            self.advance()
            return params, False
        if self.tok.text == "void" and self.peek(1).text == ")":
            self.advance()
            self.advance()
            return params, False
        while True:
            if self.at("..."):
                self.advance()
                variadic = True
                break
            spec, _ = self.specifiers()
            params.append(self.declarator(spec, abstract=True))
            if self.at(","):
                self.advance()
                continue
            break
        self.expect(")")
        return params, variadic

    def external(self) -> list[C.Stmt]:
        start = self.tok
        spec, is_typedef = self.specifiers()
        if self.at(";"):
            self.advance()
            if spec.record is not None:
                return [C.RecordDecl(self.loc(start), self.span_from(start), spec.record)]
            return [C.Declaration(self.loc(start), self.span_from(start), spec, [], is_typedef)]
        first = self.declarator(spec)
        if first.is_function and self.at("{") and not is_typedef:
            body = self.compound()
            return [C.FunctionDef(self.loc(start), self.span_from(start), spec, first, body)]
        decls = [first]
        self.finish_declarators(decls, spec)
        decl = C.Declaration(self.loc(start), self.span_from(start), spec, decls, is_typedef)
        if is_typedef:
            for d in decls:
                if d.name:
                    self.typedefs.add(d.name)
        return [decl]

    def finish_declarators(self, decls: list[C.Declarator], spec: C.Specifier) -> None:
        while True:
            d = decls[-1]
            if self.at("="):
                self.advance()
                d.init = self.initializer()
                d.span = (d.span[0], self.prev_end())
            if self.at(","):
                self.advance()
                decls.append(self.declarator(spec))
                continue
            break
        self.expect(";")

    def initializer(self) -> C.Expr:
        if self.at("{"):
            return self.init_list()
        return self.assignment()

    def init_list(self) -> C.InitList:
        start = self.expect("{")
        items: list[tuple[Optional[str], C.Expr]] = []
        dspans: list[Optional[C.Span]] = []
        while not self.at("}"):
            designator = None
            dspan = None
            if self.at(".") and self.peek(1).kind is Kind.IDENT and self.peek(2).text == "=":
                dot = self.advance()
                designator = self.advance().text
                self.advance()
                dspan = (dot.start, self.prev_end())
            elif self.at("["):
                raise self.error("array designators are outside the checked subset")
            items.append((designator, self.initializer()))
            dspans.append(dspan)
            if self.at(","):
                self.advance()
                continue
            break
        self.expect("}")
        return C.InitList(self.loc(start), self.span_from(start), items, dspans)

    # statements ------------------------------------------------------------
    def compound(self) -> C.Compound:
        start = self.expect("{")
        items: list[C.Stmt] = []
        while not self.at("}"):
            if self.tok.kind is Kind.EOF:
                raise self.error("expected '}' at end of input")
            items.append(self.statement())
        self.advance()
        return C.Compound(self.loc(start), self.span_from(start), items)

    def statement(self) -> C.Stmt:
        if self.tok.kind is Kind.DIRECTIVE:
            return self.directive()
        start_i = self.i
        try:
            return self._statement()
        except ParseError as exc:
            self.i = start_i
            start = self.tok
            self.skip_to_sync(top_level=False)
            if self.i == start_i:
                self.advance()
            span = self.span_from(start)
            self.problems.append(Problem("warning", "OpaqueRegion",
                                         f"statement outside the checked subset kept verbatim ({exc.message})",
                                         self.loc(start)))
            return C.Opaque(self.loc(start), span, self.source[span[0]:span[1]], exc.message)

    def _statement(self) -> C.Stmt:
        start = self.tok
        if self.at("{"):
            return self.compound()
        if self.at(";"):
            self.advance()
            return C.ExprStmt(self.loc(start), self.span_from(start), None)
        if start.kind is Kind.IDENT:
            w = start.text
            if w == "if":
                self.advance()
                self.expect("(")
                cond = self.expression()
                self.expect(")")
                then = self.statement()
                other = None
                if self.at("else"):
                    self.advance()
                    other = self.statement()
                return C.If(self.loc(start), self.span_from(start), cond, then, other)
            if w == "while":
                self.advance()
                self.expect("(")
                cond = self.expression()
                self.expect(")")
                body = self.statement()
                return C.While(self.loc(start), self.span_from(start), cond, body)
            if w == "for":
                self.advance()
                self.expect("(")
                init: Optional[C.Stmt] = None
                if self.at(";"):
                    self.advance()
                elif self.starts_declaration():
                    init = self.local_declaration()
                else:
                    e = self.expression()
                    init = C.ExprStmt(e.loc, e.span, e)
                    self.expect(";")
                cond = None if self.at(";") else self.expression()
                self.expect(";")
                step = None if self.at(")") else self.expression()
                self.expect(")")
                body = self.statement()
                return C.For(self.loc(start), self.span_from(start), init, cond, step, body)
            if w == "return":
                self.advance()
                value = None if self.at(";") else self.expression()
                self.expect(";")
                return C.Return(self.loc(start), self.span_from(start), value)
            if w in ("break", "continue"):
                self.advance()
                self.expect(";")
                return C.Jump(self.loc(start), self.span_from(start), w)
            if w == "do":
                self.advance()
                body = self.statement()
                self.expect("while")
                self.expect("(")
                cond = self.expression()
                self.expect(")")
                self.expect(";")
                return C.While(self.loc(start), self.span_from(start), cond, body)
            if w in ("switch", "goto", "case", "default"):
                raise self.error(f"'{w}' statements are outside the checked subset")
            if self.peek(1).text == ":" and w not in self.typedefs:
                raise self.error("labels are outside the checked subset")
            if self.starts_declaration():
                return self.local_declaration()
        e = self.expression()
        self.expect(";")
        return C.ExprStmt(self.loc(start), self.span_from(start), e)

    def local_declaration(self) -> C.Stmt:
        start = self.tok
        spec, is_typedef = self.specifiers()
        if self.at(";"):
            self.advance()
            if spec.record is not None:
                return C.RecordDecl(self.loc(start), self.span_from(start), spec.record)
            return C.Declaration(self.loc(start), self.span_from(start), spec, [], is_typedef)
        decls = [self.declarator(spec)]
        self.finish_declarators(decls, spec)
        if is_typedef:
            for d in decls:
                if d.name:
                    self.typedefs.add(d.name)
        return C.Declaration(self.loc(start), self.span_from(start), spec, decls, is_typedef)

    # expressions -----------------------------------------------------------
    def expression(self) -> C.Expr:
        start = self.tok
        e = self.assignment()
        while self.at(","):
            self.advance()
            r = self.assignment()
            e = C.Comma(self.loc(start), self.span_from(start), e, r)
        return e

    def assignment(self) -> C.Expr:
        start = self.tok
        left = self.conditional()
        if self.tok.kind is Kind.PUNCT and self.tok.text in ASSIGN_OPS:
            op_tok = self.advance()
            right = self.assignment()
            return C.Assign(self.loc(start), self.span_from(start), op_tok.text, left, right,
                            self.loc(op_tok))
        return left

    def conditional(self) -> C.Expr:
        start = self.tok
        cond = self.binary(1)
        if self.at("?"):
            self.advance()
            then = self.expression()
            self.expect(":")
            other = self.conditional()
            return C.Conditional(self.loc(start), self.span_from(start), cond, then, other)
        return cond

    def binary(self, min_prec: int) -> C.Expr:
        start = self.tok
        left = self.cast_expr()
        while True:
            t = self.tok
            prec = BINARY_PRECEDENCE.get(t.text) if t.kind is Kind.PUNCT else None
            if prec is None or prec < min_prec:
                return left
            self.advance()
            right = self.binary(prec + 1)
            left = C.Binary(self.loc(start), self.span_from(start), t.text, left, right)

    def is_type_name_ahead(self) -> bool:
        """At '(' : does a type name follow?"""
        t = self.peek(1)
        if t.kind is not Kind.IDENT:
            return False
        if t.text in SPEC_WORDS or t.text in self.typedefs:
            return True
        # `(T *)` or `(T)` followed by an operand
        n2 = self.peek(2)
        if n2.text == "*":
            j = 2
            while self.peek(j).text == "*":
                j += 1
            return self.peek(j).text == ")"
        return False

    def type_name(self) -> C.CType:
        spec, _ = self.specifiers()
        d = self.declarator(spec, abstract=True)
        return d.ctype

    def cast_expr(self) -> C.Expr:
        start = self.tok
        if self.at("(") and self.is_type_name_ahead():
            self.advance()
            ctype = self.type_name()
            self.expect(")")
            if self.at("{"):
                lit = self.init_list()
                e: C.Expr = C.Cast(self.loc(start), self.span_from(start), ctype, lit)
                return self.postfix_tail(e, start)
            operand = self.cast_expr()
            return C.Cast(self.loc(start), self.span_from(start), ctype, operand)
        return self.unary()

    def unary(self) -> C.Expr:
        start = self.tok
        if self.tok.kind is Kind.PUNCT and self.tok.text in ("++", "--"):
            op = self.advance().text
            operand = self.unary()
            return C.Unary(self.loc(start), self.span_from(start), op, operand)
        if self.tok.kind is Kind.PUNCT and self.tok.text in ("&", "*", "+", "-", "~", "!"):
            op = self.advance().text
            operand = self.cast_expr()
            return C.Unary(self.loc(start), self.span_from(start), op, operand)
        if self.at("sizeof"):
            self.advance()
            if self.at("(") and self.is_type_name_ahead():
                self.advance()
                self.type_name()
                self.expect(")")
            else:
                self.unary()
            return C.SizeOf(self.loc(start), self.span_from(start))
        return self.postfix_tail(self.primary(), start)

    def postfix_tail(self, e: C.Expr, start: Token) -> C.Expr:
        while True:
            if self.at("["):
                self.advance()
                idx = self.expression()
                self.expect("]")
                e = C.Index(self.loc(start), self.span_from(start), e, idx)
            elif self.at("("):
                self.advance()
                args: list[C.Expr] = []
                while not self.at(")"):
                    args.append(self.assignment())
                    if self.at(","):
                        self.advance()
                        continue
                    break
                self.expect(")")
                e = C.Call(self.loc(start), self.span_from(start), e, args)
            elif self.at(".", "->"):
                arrow = self.advance().text == "->"
                name = self.advance()
                if name.kind is not Kind.IDENT:
                    raise self.error("expected member name", name)
                e = C.Member(self.loc(start), self.span_from(start), e, name.text, arrow,
                             (name.start, name.end))
            elif self.at("++", "--"):
                op = self.advance().text
                e = C.Postfix(self.loc(start), self.span_from(start), op, e)
            else:
                return e

    def primary(self) -> C.Expr:
        t = self.tok
        if t.kind is Kind.IDENT and t.text not in STATEMENT_KEYWORDS and t.text not in SPEC_WORDS:
            self.advance()
            return C.Ident(self.loc(t), (t.start, t.end), t.text)
        if t.kind is Kind.NUMBER:
            self.advance()
            return C.IntLit(self.loc(t), (t.start, t.end), t.text)
        if t.kind is Kind.CHAR:
            self.advance()
            return C.CharLit(self.loc(t), (t.start, t.end), t.text)
        if t.kind is Kind.STRING:
            self.advance()
            while self.tok.kind is Kind.STRING:
                self.advance()
            return C.StrLit(self.loc(t), self.span_from(t), self.source[t.start:self.prev_end()])
        if self.at("("):
            self.advance()
            e = self.expression()
            self.expect(")")
            e.span = self.span_from(t)
            return e
        raise self.error(f"expected expression before '{t.text or 'end of input'}'")


def parse_unit(source: str, file: str = "<input>") -> tuple[C.TranslationUnit, list[PragmaDirective]]:
    """Parse one file; returns the tree and the annotation directives found in it."""
    p = Parser(source, file)
    unit = p.parse()
    return unit, p.directives


def parse_type(text: str) -> C.CType:
    """Parse a stand-alone C type name such as `const uint8_t *`."""
    p = Parser(text, "<type>")
    ctype = p.type_name()
    if p.tok.kind is not Kind.EOF:
        raise p.error("trailing tokens after type name")
    return ctype
