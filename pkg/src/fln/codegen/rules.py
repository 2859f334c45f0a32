"""C features that would bypass the wrapper types, rejected up front.

Each rule reports at the same position a compiler would, so that the
generic type mismatch at that spot is replaced by the more specific
message.
"""

from __future__ import annotations

from typing import Optional

from ..errors import SourceLoc
from ..frontend import cast as C
from ..mapper.lower import content_annotated, is_annotated
from ..mapper.spec import AFun, AnnotSpec, APtr, AUnit, with_policy
from ..driver.diagnostics import Diagnostic
from .header import Namer
from .walk import all_stmts, stmt_exprs

ARITH_ASSIGN = {"+=", "-=", "*=", "/=", "%=", "<<=", ">>=", "&=", "|=", "^="}


def strip(spec: Optional[AnnotSpec]) -> Optional[AnnotSpec]:
    """The annotation with every policy removed."""
    if isinstance(spec, APtr):
        return APtr(strip(spec.target))
    if spec is None or isinstance(spec, (AUnit, AFun)):
        return spec
    return with_policy(spec, None)


def _labeled_value(spec) -> bool:
    return is_annotated(spec) and not isinstance(spec, APtr)


def _labeled_pointer(spec) -> bool:
    return isinstance(spec, APtr) and content_annotated(spec)


class RuleChecker:
    def __init__(self, analysis):
        self.a = analysis
        self.specs = analysis.lowered.expr_specs
        self.namer = Namer(analysis.tt, analysis.lowered)
        self.out: list[Diagnostic] = []

    def name(self, spec) -> str:
        return f"`{self.namer.ctext(spec)}`"

    def report(self, code: str, loc: SourceLoc, message: str, notes=()) -> None:
        self.out.append(Diagnostic("error", code, loc, message, notes=list(notes)))

    def run(self) -> list[Diagnostic]:
        for unit in self.a.units.values():
            for s in all_stmts(unit.items):
                if isinstance(s, C.Declaration) and not s.is_typedef:
                    for d in s.declarators:
                        if d.init is not None and not isinstance(d.init, C.InitList):
                            self.alias(self.a.lowered.decl_specs.get(id(d)), d.init, d.init.loc,
                                       "initialization")
                for root in stmt_exprs(s):
                    for e in C.iter_expr(root):
                        self.expr(e)
        return self.out

    def spec(self, e: C.Expr):
        return self.specs.get(id(e))

    def expr(self, e: C.Expr) -> None:
        if isinstance(e, C.Cast):
            s = self.spec(e.operand)
            # a cast of an annotated pointer goes unnoticed, as the policy
            # lives on the pointed-to type the cast replaces
            if _labeled_value(s):
                self.report("CastOnAnnotated", e.loc,
                            f"cast of a value of annotated type {self.name(s)}",
                            ["a cast would discard the policy; convert through a declared function"])
        elif isinstance(e, C.Binary):
            ls, rs = self.spec(e.left), self.spec(e.right)
            if e.op in ("+", "-") and (_labeled_pointer(ls) or _labeled_pointer(rs)):
                p = ls if _labeled_pointer(ls) else rs
                self.report("PointerArithOnAnnotated", e.loc,
                            f"pointer arithmetic on {self.name(p)} is not allowed")
            elif _labeled_value(ls) or _labeled_value(rs):
                self.report("OperatorOnAnnotated", e.loc,
                            f"invalid operands to binary {e.op} (have {self.name(ls)} and "
                            f"{self.name(rs)})", [_suggest(self.name(ls if _labeled_value(ls) else rs))])
        elif isinstance(e, (C.Unary, C.Postfix)) and e.op not in ("&", "*"):
            s = self.spec(e.operand)
            if e.op in ("++", "--") and _labeled_pointer(s):
                self.report("PointerArithOnAnnotated", e.loc,
                            f"pointer arithmetic on {self.name(s)} is not allowed")
            elif _labeled_value(s):
                self.report("OperatorOnAnnotated", e.loc,
                            f"invalid operand to unary {e.op} (have {self.name(s)})",
                            [_suggest(self.name(s))])
        elif isinstance(e, C.Assign):
            t = self.spec(e.target)
            loc = e.op_loc or e.loc
            if e.op in ARITH_ASSIGN:
                if _labeled_pointer(t) and e.op in ("+=", "-="):
                    self.report("PointerArithOnAnnotated", loc,
                                f"pointer arithmetic on {self.name(t)} is not allowed")
                elif _labeled_value(t) or _labeled_value(self.spec(e.value)):
                    self.report("OperatorOnAnnotated", loc,
                                f"invalid operands to {e.op} (have {self.name(t)} and "
                                f"{self.name(self.spec(e.value))})", [_suggest(self.name(t))])
            elif e.op == "=" and not isinstance(e.value, C.InitList):
                self.alias(t, e.value, loc, "assignment")

    def alias(self, target, value: C.Expr, loc: SourceLoc, what: str) -> None:
        """A pointer may only alias data under the same policy."""
        v = self.spec(value)
        if not (isinstance(target, APtr) and isinstance(v, APtr)):
            return
        if not (content_annotated(target) or content_annotated(v)) or target == v:
            return
        void = isinstance(target.target, AUnit) or isinstance(v.target, AUnit)
        if strip(target) == strip(v) or void:
            self.report("AliasMismatch", loc,
                        f"{what} makes {self.name(target)} alias {self.name(v)}",
                        ["pointers to differently annotated data may not alias"])


def _suggest(name: str) -> str:
    return f"operate on {name} through a function that takes it as an annotated parameter"


def enforce_feature_rules(analysis) -> list[Diagnostic]:
    if analysis.lowered is None or analysis.tt is None:
        return []
    return RuleChecker(analysis).run()
