"""Syntax tree for the supported C subset.

Nodes compare by identity so later stages can key tables on them.  Every
node records its source location and the character span it covers, which
the code generator uses for in-place rewriting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from ..errors import SourceLoc
from .pragma import PragmaDirective

Span = tuple[int, int]

ARITHMETIC = {
    "char", "short", "int", "long", "signed", "unsigned", "float", "double", "_Bool",
    "bool", "size_t", "ssize_t", "ptrdiff_t", "intptr_t", "uintptr_t",
    "int8_t", "int16_t", "int32_t", "int64_t", "uint8_t", "uint16_t", "uint32_t", "uint64_t",
}
BASIC_KEYWORDS = {"char", "short", "int", "long", "signed", "unsigned", "float", "double",
                  "_Bool", "bool"}
STD_TYPEDEFS = ARITHMETIC - BASIC_KEYWORDS  # may be redefined by the program
QUALIFIERS = {"const", "volatile", "restrict"}
STORAGE = {"static", "extern", "inline", "register", "auto", "_Noreturn"}


# C-level types -------------------------------------------------------------

@dataclass(frozen=True)
class CType:
    pass


@dataclass(frozen=True)
class CVoid(CType):
    quals: tuple[str, ...] = ()


@dataclass(frozen=True)
class CNamed(CType):
    """An arithmetic type or a typedef name, spelled as in the source."""

    name: str
    quals: tuple[str, ...] = ()

    @property
    def spelling(self) -> str:
        return " ".join(self.quals + (self.name,))


@dataclass(frozen=True)
class CRecord(CType):
    tag: str
    union: bool = False
    quals: tuple[str, ...] = ()

    @property
    def spelling(self) -> str:
        kw = "union" if self.union else "struct"
        return " ".join(self.quals + (f"{kw} {self.tag}",))


@dataclass(frozen=True)
class CPointer(CType):
    target: CType
    quals: tuple[str, ...] = ()


@dataclass(frozen=True)
class CFunction(CType):
    ret: CType
    params: tuple[CType, ...]
    variadic: bool = False


def spelling(t: CType) -> str:
    if isinstance(t, CVoid):
        return " ".join(t.quals + ("void",))
    if isinstance(t, (CNamed, CRecord)):
        return t.spelling
    if isinstance(t, CPointer):
        return spelling(t.target) + " *" + (" " + " ".join(t.quals) if t.quals else "")
    if isinstance(t, CFunction):
        params = ", ".join(spelling(p) for p in t.params) + (", ..." if t.variadic else "")
        return f"{spelling(t.ret)} (*)({params})"
    return "?"


# Nodes ---------------------------------------------------------------------

@dataclass(eq=False)
class Node:
    loc: SourceLoc
    span: Span


@dataclass(eq=False)
class Specifier(Node):
    """The declaration-specifier tokens minus storage classes."""

    ctype: CType
    storage: tuple[str, ...] = ()
    type_span: Span = (0, 0)  # span of the type words alone (qualifiers included)
    record: Optional["RecordDef"] = None  # inline struct definition, if any


@dataclass(eq=False)
class Declarator(Node):
    name: Optional[str]
    ctype: CType
    spec: Specifier
    name_span: Span = (0, 0)
    params: Optional[list["Declarator"]] = None  # for function declarators
    variadic: bool = False
    init: Optional["Expr"] = None

    @property
    def is_function(self) -> bool:
        return isinstance(self.ctype, CFunction) and self.params is not None


@dataclass(eq=False)
class RecordDef(Node):
    tag: Optional[str]
    fields: list[Declarator]
    union: bool = False


# Expressions

@dataclass(eq=False)
class Expr(Node):
    pass


@dataclass(eq=False)
class Ident(Expr):
    name: str


@dataclass(eq=False)
class IntLit(Expr):
    text: str

    @property
    def value(self) -> int:
        t = self.text.rstrip("uUlLfF")
        try:
            return int(t, 0) if not t.startswith("0") or t.lower().startswith("0x") or t == "0" else int(t, 8)
        except ValueError:
            try:
                return int(float(t))
            except ValueError:
                return 0


@dataclass(eq=False)
class StrLit(Expr):
    text: str


@dataclass(eq=False)
class CharLit(Expr):
    text: str


@dataclass(eq=False)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(eq=False)
class Unary(Expr):
    op: str  # - + ! ~ & * ++ -- (prefix)
    operand: Expr


@dataclass(eq=False)
class Postfix(Expr):
    op: str  # ++ --
    operand: Expr


@dataclass(eq=False)
class Assign(Expr):
    op: str  # = += -= ...
    target: Expr
    value: Expr
    op_loc: Optional[SourceLoc] = None  # where the operator sits; compilers report here


@dataclass(eq=False)
class Call(Expr):
    func: Expr
    args: list[Expr]


@dataclass(eq=False)
class Member(Expr):
    base: Expr
    name: str
    arrow: bool
    name_span: Span = (0, 0)


@dataclass(eq=False)
class Index(Expr):
    base: Expr
    index: Expr


@dataclass(eq=False)
class Cast(Expr):
    ctype: CType
    operand: Expr


@dataclass(eq=False)
class Conditional(Expr):
    cond: Expr
    then: Expr
    other: Expr


@dataclass(eq=False)
class SizeOf(Expr):
    pass


@dataclass(eq=False)
class InitList(Expr):
    items: list[tuple[Optional[str], Expr]]
    designator_spans: list[Optional[Span]] = field(default_factory=list)


@dataclass(eq=False)
class Comma(Expr):
    left: Expr
    right: Expr


# Statements

@dataclass(eq=False)
class Stmt(Node):
    pass


@dataclass(eq=False)
class Declaration(Stmt):
    """`spec d1 [= e1], d2 ...;` at file or block scope (also prototypes)."""

    spec: Specifier
    declarators: list[Declarator]
    is_typedef: bool = False


@dataclass(eq=False)
class PragmaItem(Stmt):
    directive: PragmaDirective


@dataclass(eq=False)
class Directive(Stmt):
    """Any other preprocessor line, kept verbatim."""

    text: str


@dataclass(eq=False)
class Opaque(Stmt):
    """Source outside the subset; preserved but not analyzed."""

    text: str
    reason: str = ""


@dataclass(eq=False)
class ExprStmt(Stmt):
    expr: Optional[Expr]


@dataclass(eq=False)
class Compound(Stmt):
    items: list[Stmt]


@dataclass(eq=False)
class If(Stmt):
    cond: Expr
    then: Stmt
    other: Optional[Stmt] = None


@dataclass(eq=False)
class While(Stmt):
    cond: Expr
    body: Stmt


@dataclass(eq=False)
class For(Stmt):
    init: Optional[Stmt]
    cond: Optional[Expr]
    step: Optional[Expr]
    body: Stmt


@dataclass(eq=False)
class Return(Stmt):
    value: Optional[Expr]


@dataclass(eq=False)
class Jump(Stmt):
    keyword: str  # break / continue


@dataclass(eq=False)
class FunctionDef(Stmt):
    spec: Specifier
    declarator: Declarator
    body: Compound


@dataclass(eq=False)
class RecordDecl(Stmt):
    """A bare `struct tag { ... };` definition."""

    record: RecordDef


TopLevel = Union[Declaration, FunctionDef, RecordDecl, PragmaItem, Directive, Opaque]


@dataclass(eq=False)
class TranslationUnit:
    file: str
    source: str
    items: list[Stmt]
    problems: list = field(default_factory=list)

    def walk_items(self):
        """Yield (container list, item) pairs for top-level and block-level items."""
        stack: list[list[Stmt]] = [self.items]
        while stack:
            seq = stack.pop()
            for item in seq:
                yield seq, item
                for child in _child_blocks(item):
                    stack.append(child)


def _child_blocks(item: Stmt) -> list[list[Stmt]]:
    out: list[list[Stmt]] = []
    if isinstance(item, FunctionDef):
        out.append(item.body.items)
    elif isinstance(item, Compound):
        out.append(item.items)
    elif isinstance(item, If):
        for s in (item.then, item.other):
            if s is not None:
                out.extend(_child_blocks(s) if not isinstance(s, Compound) else [s.items])
    elif isinstance(item, (While, For)):
        body = item.body
        out.extend([body.items] if isinstance(body, Compound) else _child_blocks(body))
    return out


def iter_expr(e: Optional[Expr]):
    """Pre-order traversal of an expression tree."""
    if e is None:
        return
    yield e
    children: list[Optional[Expr]] = []
    if isinstance(e, Binary):
        children = [e.left, e.right]
    elif isinstance(e, (Unary, Postfix)):
        children = [e.operand]
    elif isinstance(e, Assign):
        children = [e.target, e.value]
    elif isinstance(e, Call):
        children = [e.func, *e.args]
    elif isinstance(e, Member):
        children = [e.base]
    elif isinstance(e, Index):
        children = [e.base, e.index]
    elif isinstance(e, Cast):
        children = [e.operand]
    elif isinstance(e, Conditional):
        children = [e.cond, e.then, e.other]
    elif isinstance(e, InitList):
        children = [x for _, x in e.items]
    elif isinstance(e, Comma):
        children = [e.left, e.right]
    for c in children:
        yield from iter_expr(c)
