"""In-place rewriting of annotated C source into wrapper-typed C.

Edits are recorded against the original text and applied in one pass, so
everything outside an edited span (comments, layout, directives) survives
byte for byte and an unannotated file comes back unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..errors import SourceLoc
from ..frontend import cast as C
from ..mapper.lower import callee_name, is_annotated
from ..mapper.spec import AFun, AInt, AnnotSpec, APtr, ARec, with_policy
from ..lattice import Policy, Terminal
from ..polc import syntax as S
from ..polc.types import IntBase, Simple
from .header import HeaderPlan, Namer, header_name
from .walk import child_stmts

PARAM_SUFFIX = "__fln_p"


@dataclass
class Edits:
    text: str
    repl: dict[tuple[int, int], str] = field(default_factory=dict)
    ins: list[tuple[int, int, int, int, str]] = field(default_factory=list)  # pos, kind, order, seq, text

    def replace(self, span: tuple[int, int], text: str) -> None:
        self.repl[span] = text

    def wrap(self, span: tuple[int, int], pre: str, post: str) -> None:
        if not pre and not post:
            return
        n, k = span[1] - span[0], len(self.ins)
        self.ins.append((span[0], 1, -n, -k, pre))  # outer prefixes first
        self.ins.append((span[1], 0, n, k, post))  # inner suffixes first

    def insert(self, pos: int, text: str) -> None:
        self.ins.append((pos, 1, 1, len(self.ins), text))

    def __bool__(self) -> bool:
        return bool(self.repl or self.ins)

    def first(self) -> Optional[int]:
        pos = [s for s, _ in self.repl] + [i[0] for i in self.ins]
        return min(pos) if pos else None

    def apply(self) -> str:
        starts = {s: (e, t) for (s, e), t in self.repl.items()}
        by_pos: dict[int, list] = {}
        for item in self.ins:
            by_pos.setdefault(item[0], []).append(item)
        out, cur = [], 0
        for p in sorted(set(starts) | set(by_pos)):
            if p < cur:
                continue  # inside a replaced span
            out.append(self.text[cur:p])
            cur = p
            out.extend(i[4] for i in sorted(by_pos.get(p, []), key=lambda i: i[1:4]))
            if p in starts:
                end, t = starts[p]
                out.append(t)
                cur = end
        out.append(self.text[cur:])
        return "".join(out)


def literal_tags(analysis) -> dict[SourceLoc, Simple]:
    """Source locations of integer literals the mapping gave a labeled type."""
    roots = [f.body for f in analysis.code.values()]
    if analysis.main_code is not None:
        roots.append(analysis.main_code)
    out: dict[SourceLoc, Simple] = {}
    stack = list(roots)
    while stack:
        e = stack.pop()
        if isinstance(e, S.Int):
            t = e.tag
            if e.loc is not None and isinstance(t, Simple) and isinstance(t.base, IntBase) \
                    and t.policy.is_meaningful:
                out[e.loc] = t
            continue
        stack.extend(S.children(e))
    return out


class FileEmitter:
    def __init__(self, analysis, name: str, namer: Namer, lits: dict):
        self.a = analysis
        self.name = name
        self.unit: C.TranslationUnit = analysis.units[name]
        self.namer = namer
        self.lits = lits
        self.low = analysis.lowered
        self.edits = Edits(analysis.sources[name])
        self.plan = HeaderPlan()
        self.results: dict[int, AnnotSpec] = {}  # id(call) -> result spec of a relabeling call
        self.ret_wrap: Optional[str] = None
        self.scopes: list[set[str]] = [set()]
        self.includes: list[str] = []

    # names ---------------------------------------------------------------

    def use(self, name: Optional[str]) -> Optional[str]:
        if name is not None:
            self.plan.add(self.namer.entries[name], self.namer)
        return name

    def wrapper(self, spec) -> Optional[str]:
        return self.use(self.namer.wrapper(spec))

    def content(self, spec) -> Optional[str]:
        return self.use(self.namer.content(spec))

    def spec(self, e: C.Expr) -> Optional[AnnotSpec]:
        return self.results.get(id(e), self.low.expr_specs.get(id(e)))

    def text(self, span: tuple[int, int]) -> str:
        return self.edits.text[span[0]:span[1]]

    # items -----------------------------------------------------------------

    def run(self) -> tuple[str, HeaderPlan]:
        for item in self.unit.items:
            if isinstance(item, C.Declaration):
                self.declaration(item)
            elif isinstance(item, C.FunctionDef):
                self.function(item)
        if not self.edits:
            return self.edits.text, self.plan
        self.include()
        return self.edits.apply(), self.plan

    def include(self) -> None:
        """The generated header goes before the first item that uses it."""
        first = self.edits.first()
        items = self.unit.items
        idx = next((i for i, it in enumerate(items) if it.span[1] > first), len(items) - 1)
        while idx > 0 and isinstance(items[idx - 1], C.PragmaItem):
            idx -= 1
        text = self.edits.text
        pos = text.rfind("\n", 0, min(items[idx].span[0], first)) + 1
        line = text.count("\n", 0, pos) + 1
        self.includes.append(f'#include "{header_name(self.name)}"')
        self.edits.insert(pos, f'{self.includes[0]}\n#line {line} "{self.name}"\n')

    def declaration(self, decl: C.Declaration) -> None:
        if decl.is_typedef:
            return
        replaced = False
        for d in decl.declarators:
            if d.name is None:
                continue
            if isinstance(d.ctype, C.CFunction) and d.params is not None:
                self.signature(decl.spec, d, definition=False)
                continue
            self.scopes[-1].add(d.name)
            spec = self.low.decl_specs.get(id(d))
            w = self.content(spec)
            if w and not replaced:
                self.edits.replace(decl.spec.type_span, w)
                replaced = True
            if d.init is not None:
                self.init(d.init, spec)

    def signature(self, spec: C.Specifier, d: C.Declarator, definition: bool) -> list[str]:
        """Rewrite a prototype or definition header; returns the body prologue."""
        fs = self.a.functions.get(d.name)
        prologue: list[str] = []
        if not isinstance(fs, AFun):
            return prologue
        w = self.content(fs.ret)
        if w:
            self.edits.replace(spec.type_span, w)
        for pd, ps in zip(d.params or [], fs.params):
            w = self.content(ps)
            if not w:
                continue
            orig = self.text(pd.spec.type_span)
            self.edits.replace(pd.spec.type_span, w)
            if definition and is_annotated(ps) and pd.name:
                self.edits.replace(pd.name_span, pd.name + PARAM_SUFFIX)
                prologue.append(f" {orig} {pd.name} = {w}_r({pd.name}{PARAM_SUFFIX});")
        return prologue

    def function(self, fd: C.FunctionDef) -> None:
        d = fd.declarator
        prologue = self.signature(fd.spec, d, definition=True)
        if prologue:
            self.edits.insert(fd.body.span[0] + 1, "".join(prologue))
        fs = self.a.functions.get(d.name)
        self.ret_wrap = self.wrapper(fs.ret) if isinstance(fs, AFun) and is_annotated(fs.ret) else None
        self.scopes.append({pd.name for pd in d.params or [] if pd.name})
        try:
            self.stmt(fd.body)
        finally:
            self.scopes.pop()
            self.ret_wrap = None

    # statements --------------------------------------------------------------

    def stmt(self, s: C.Stmt) -> None:
        if isinstance(s, C.Declaration):
            self.declaration(s)
            return
        if isinstance(s, C.ExprStmt):
            self.expr(s.expr)
            return
        if isinstance(s, C.Return):
            if s.value is not None:
                self.expr(s.value)
                if self.ret_wrap:
                    self.edits.wrap(s.value.span, f"{self.ret_wrap}_w(", ")")
            return
        if isinstance(s, (C.If, C.While)):
            self.cond(s.cond)
        scoped = isinstance(s, (C.Compound, C.For))
        if scoped:
            self.scopes.append(set())
        try:
            if isinstance(s, C.For):
                if s.init is not None:
                    self.stmt(s.init)
                self.cond(s.cond)
                self.expr(s.step)
                self.stmt(s.body)
                return
            for c in child_stmts(s):
                self.stmt(c)
        finally:
            if scoped:
                self.scopes.pop()

    def cond(self, e: Optional[C.Expr]) -> None:
        if e is None:
            return
        self.expr(e)
        spec = self.spec(e)
        if is_annotated(spec) and not isinstance(spec, APtr):
            w = self.wrapper(spec)
            if w:
                self.edits.wrap(e.span, f"{w}_r(", ")")

    # expressions -------------------------------------------------------------

    def literal(self, e: C.Expr, in_init: bool) -> bool:
        """Wrap a constant the mapping gave a labeled type."""
        if isinstance(e, C.Unary) and not (e.op == "-" and isinstance(e.operand, C.IntLit)):
            return False
        if not isinstance(e, (C.IntLit, C.CharLit, C.Ident, C.Unary)):
            return False
        if isinstance(e, C.Ident) and self.local(e.name):
            return False
        t = self.lits.get(e.loc)
        if t is None:
            return False
        w = self.use(self.namer.wrapper_of(t))
        if not w:
            return False
        if in_init:
            self.edits.wrap(e.span, "{", "}")
        else:
            self.edits.wrap(e.span, f"{w}_w(", ")")
        return True

    def local(self, name: str) -> bool:
        return any(name in s for s in self.scopes)

    def expr(self, e: Optional[C.Expr], in_init: bool = False) -> None:
        if e is None or self.literal(e, in_init):
            return
        if isinstance(e, C.Member):
            self.expr(e.base)
            self.member(e)
            return
        if isinstance(e, C.Call):
            for c in [e.func, *e.args]:
                self.expr(c)
            self.call(e)
            return
        if isinstance(e, C.Conditional):
            self.cond(e.cond)
            self.expr(e.then)
            self.expr(e.other)
            return
        if isinstance(e, C.InitList):
            self.init(e, self.spec(e))
            return
        for c in _children(e):
            self.expr(c)

    def member(self, e: C.Member) -> None:
        bs = self.spec(e.base)
        if e.arrow and isinstance(bs, APtr):
            bs = bs.target
        if not isinstance(bs, ARec):
            return
        derived = self.low.derived.get(bs.name)
        if (derived is not None and e.name not in derived.fields) or bs.policy is not None:
            self.edits.insert(e.name_span[0], "d.")

    def call(self, e: C.Call) -> None:
        fs = None
        if not (isinstance(e.func, C.Ident) and self.local(e.func.name)):
            fs = self.a.functions.get(callee_name(e.func))
        if not isinstance(fs, AFun) or fs.de_index is None or fs.de_index >= len(e.args):
            return
        k = fs.de_index
        arg = e.args[k]
        s = self.spec(arg)
        param, ret = fs.params[k], fs.ret
        if not is_annotated(s) or not isinstance(s, (AInt, ARec)):
            return
        shape = with_policy(param, None)
        # the argument's own first two labels drive the conversion; a function
        # that does not continue them makes the generated code ill-typed
        rho = s.policy
        l1, l2, rest = rho.at(0), rho.at(1), rho.suffix(2)
        entry, mid = Policy((l1,), Terminal.TOP), Policy((l2,), Terminal.BOTTOM)
        result = Policy((l2,) + rest.labels, rest.terminal)
        self._use_relabel(shape, rho, entry)
        self.edits.wrap(arg.span, *self.namer.relabel(shape, rho, entry))
        self.results[id(e)] = with_policy(shape, result)
        self._use_relabel(shape, mid, result)
        self.edits.wrap(e.span, *self.namer.relabel(shape, mid, result, check=mid != ret.policy))

    def _use_relabel(self, shape, source, target) -> None:
        self.wrapper(with_policy(shape, source))
        self.wrapper(with_policy(shape, target))

    def init(self, e: C.Expr, spec: Optional[AnnotSpec]) -> None:
        if not isinstance(e, C.InitList):
            self.expr(e, in_init=True)
            return
        if isinstance(spec, ARec) and spec.policy is not None:
            self.edits.wrap(e.span, "{.d=", "}")
            self.init(e, with_policy(spec, None))
            return
        rec = self.low.actx.records.get(spec.name) if isinstance(spec, ARec) else None
        derived = self.low.derived.get(spec.name) if isinstance(spec, ARec) else None
        if rec is None:
            inner = spec.target if isinstance(spec, APtr) else None
            for _, x in e.items:
                self.init(x, inner)
            return
        inner_rec = self.low.actx.records.get(derived.base) if derived else None
        outside: list[int] = []
        pos = 0
        for i, (fname, x) in enumerate(e.items):
            if fname is not None and derived is not None and fname not in derived.fields:
                outside.append(i)
                j = inner_rec.field_names.index(fname) if fname in inner_rec.field_names else None
                self.init(x, inner_rec.fields[j] if j is not None else None)
                continue
            if fname is not None and fname in rec.field_names:
                pos = rec.field_names.index(fname)
            self.init(x, rec.fields[pos] if pos < len(rec.fields) else None)
            pos += 1
        if outside:
            self.nest_designators(e, outside)

    def nest_designators(self, e: C.InitList, outside: list[int]) -> None:
        """Members of the original record move under `d`."""
        spans = e.designator_spans or [None] * len(e.items)
        contiguous = outside == list(range(outside[0], outside[-1] + 1))
        if contiguous and all(spans[i] is not None for i in outside):
            start = spans[outside[0]][0]
            end = e.items[outside[-1]][1].span[1]
            self.edits.wrap((start, end), ".d={", "}")
            return
        for i in outside:
            if spans[i] is not None:
                self.edits.insert(spans[i][0] + 1, "d.")


def _children(e: C.Expr) -> list[C.Expr]:
    if isinstance(e, C.Binary):
        return [e.left, e.right]
    if isinstance(e, (C.Unary, C.Postfix, C.Cast)):
        return [e.operand]
    if isinstance(e, C.Assign):
        return [e.target, e.value]
    if isinstance(e, C.Index):
        return [e.base, e.index]
    if isinstance(e, C.Comma):
        return [e.left, e.right]
    return []
