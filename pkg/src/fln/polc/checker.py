"""Algorithmic information-flow checker for the labeled calculus.

Checking is bidirectional.  Values are checked against an expected type
pushed down from context; without one they synthesize their tag, or a ⊥
policy.  Subsumption is folded into every premise as a `subtype` check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from ..errors import FlnError, SourceLoc
from ..lattice import (
    BOTTOM,
    Policy,
    UnlabeledComparison,
    flow_join,
    flow_leq,
    guards,
)
from . import syntax as S
from .types import (
    UNIT,
    FunType,
    IntBase,
    PtrBase,
    RecordBase,
    SecurityType,
    Simple,
    TypingContexts,
    UnitType,
    join_type,
    lub,
    subtype,
)


class PolicyViolation(FlnError):
    code = "PolicyViolation"

    def __init__(self, rule: str, loc: Optional[SourceLoc], expected, actual, message: str = ""):
        self.rule = rule
        self.expected = expected
        self.actual = actual
        super().__init__(message or f"[{rule}] expected {expected}, found {actual}", loc)


class GuardViolation(FlnError):
    code = "GuardViolation"


class PcViolation(FlnError):
    code = "PcViolation"


class UnboundVariable(FlnError):
    code = "UnboundVariable"


class UnknownRecord(FlnError):
    code = "UnknownRecord"


class FieldArity(FlnError):
    code = "FieldArity"


class IllTyped(FlnError):
    code = "IllTyped"


HighPredicate = Callable[[Policy], bool]


@dataclass
class Checker:
    ctx: TypingContexts
    high: Optional[HighPredicate] = None  # membership in H, needed only for pairs

    # values ------------------------------------------------------------

    def value(self, v, expected: Optional[SecurityType] = None) -> SecurityType:
        t = self._value(v, expected)
        if expected is not None:
            self._sub(t, expected, "Val", v)
        return t

    def _value(self, v, expected):
        loc = getattr(v, "loc", None)
        if isinstance(v, S.Var):
            if v.name not in self.ctx.variables:
                raise UnboundVariable(f"unbound variable '{v.name}'", loc)
            return self.ctx.variables[v.name]
        if isinstance(v, S.UnitVal):
            return UNIT
        if isinstance(v, S.Int):
            hint = expected if expected is not None else v.tag
            if isinstance(hint, Simple) and isinstance(hint.base, IntBase):
                return hint
            if hint is not None:
                raise IllTyped(f"integer used where {hint} is expected", loc)
            return Simple(IntBase(), BOTTOM)
        if isinstance(v, S.FunRef):
            if v.name not in self.ctx.functions:
                raise UnboundVariable(f"unknown function '{v.name}'", loc)
            f = self.ctx.functions[v.name]
            hint = expected if expected is not None else v.tag
            label = hint.label if isinstance(hint, FunType) else BOTTOM
            return f.with_policy(label)
        if isinstance(v, S.Loc):
            if v.address not in self.ctx.store:
                raise UnboundVariable(f"location {v.address} has no store type", loc)
            return self.ctx.store[v.address]
        if isinstance(v, S.Record):
            rec = self.ctx.records.get(v.name)
            if rec is None:
                raise UnknownRecord(f"unknown record '{v.name}'", loc)
            if len(rec.fields) != len(v.fields):
                raise FieldArity(
                    f"record '{v.name}' has {len(rec.fields)} field(s), {len(v.fields)} given", loc)
            for fv, ft in zip(v.fields, rec.fields):
                self.value(fv, ft)
            hint = expected if expected is not None else v.tag
            if isinstance(hint, Simple) and hint.base == RecordBase(v.name):
                return hint
            return Simple(RecordBase(v.name), BOTTOM)
        if isinstance(v, S.Pair):
            s = expected
            if s is None:
                s = self.value(v.left)
            self.value(v.left, s)
            self.value(v.right, s)
            self._require_high(s, v)
            return s
        raise IllTyped(f"not a value: {type(v).__name__}", loc)

    # expressions -------------------------------------------------------

    def expr(self, e, pc: Policy = BOTTOM, expected: Optional[SecurityType] = None) -> SecurityType:
        t = self._expr(e, pc, expected)
        if expected is not None:
            self._sub(t, expected, _rule_of(e), e)
        return t

    def _expr(self, e, pc: Policy, expected):
        loc = getattr(e, "loc", None)
        if isinstance(e, S.VALUE_TYPES):
            t = self.value(e, expected)
            return self._join(t, pc, e)
        if isinstance(e, S.BinOp):
            hint = expected if isinstance(expected, Simple) and isinstance(expected.base, IntBase) else None
            lt = self._int_operand(e.left, pc, hint)
            rt = self._int_operand(e.right, pc, hint)
            return Simple(IntBase(), self._flow_join(lt.policy, rt.policy, e))
        if isinstance(e, S.Field):
            t = self.value(e.value)
            if not (isinstance(t, Simple) and isinstance(t.base, RecordBase)):
                raise IllTyped(f"field access on non-record type {t}", loc)
            rec = self.ctx.records.get(t.base.name)
            if rec is None:
                raise UnknownRecord(f"unknown record '{t.base.name}'", loc)
            if not 1 <= e.index <= len(rec.fields):
                raise FieldArity(f"record '{rec.name}' has no field {e.index}", loc)
            self._pc_leq(pc, t.policy, "Field", e)
            return self._join(rec.fields[e.index - 1], t.policy, e)
        if isinstance(e, S.New):
            hint = expected if expected is not None else e.tag
            if isinstance(hint, Simple) and isinstance(hint.base, PtrBase):
                content = hint.base.target
                self.expr(e.value, pc, content)
                rho = hint.policy
            else:
                content = self.expr(e.value, pc)
                rho = pc
            if not self._leq(pc, rho, e):
                raise PcViolation(f"allocation labeled {rho} under context {pc}", loc)
            return Simple(PtrBase(content), rho)
        if isinstance(e, S.Deref):
            t = self.value(e.value)
            if not (isinstance(t, Simple) and isinstance(t.base, PtrBase)):
                raise IllTyped(f"dereference of non-pointer type {t}", loc)
            self._pc_leq(pc, t.policy, "Deref", e)
            return self._join(t.base.target, t.policy, e)
        if isinstance(e, S.Assign):
            t = self.value(e.target)
            if not (isinstance(t, Simple) and isinstance(t.base, PtrBase)):
                raise IllTyped(f"assignment through non-pointer type {t}", loc)
            content = t.base.target
            self.expr(e.value, pc, content)
            if not self._guards(t.policy, content, e):
                raise GuardViolation(
                    f"pointer policy {t.policy} does not guard content type {content}", loc)
            return UNIT
        if isinstance(e, S.App):
            return self._app(e, pc)
        if isinstance(e, S.Let):
            if e.ann is not None:
                self.expr(e.bound, pc, e.ann)
                s1 = e.ann
            else:
                s1 = self.expr(e.bound, pc)
            inner = Checker(self.ctx.bind(e.name, s1), self.high)
            return inner.expr(e.body, pc, expected)
        if isinstance(e, S.If):
            ct = self.value(e.cond)
            if not (isinstance(ct, Simple) and isinstance(ct.base, IntBase)):
                raise IllTyped(f"branch condition of type {ct}", loc)
            inner_pc = self._flow_join(pc, ct.policy, e)
            if expected is not None:
                self.expr(e.then, inner_pc, expected)
                self.expr(e.other, inner_pc, expected)
                return expected
            a = self.expr(e.then, inner_pc)
            b = self.expr(e.other, inner_pc)
            t = lub(a, b)
            if t is None:
                raise IllTyped(f"branches have incompatible types {a} and {b}", loc)
            return t
        if isinstance(e, S.Relabel):
            t0 = self.value(e.value)
            if not isinstance(t0, Simple):
                raise IllTyped(f"relabel of non-simple type {t0}", loc)
            self.value(e.value, Simple(t0.base, e.source))
            self._pc_leq(pc, e.target, "Relabel", e)
            return Simple(t0.base, e.target)
        if isinstance(e, S.Pair):
            s = expected if expected is not None else self.expr(S.project(e, 1), pc)
            rho = self._outer(s)
            self._require_high(s, e)
            inner_pc = self._flow_join(pc, rho, e)
            self.expr(e.left, inner_pc, s)
            self.expr(e.right, inner_pc, s)
            return s
        raise IllTyped(f"unknown expression {type(e).__name__}", loc)

    def _app(self, e: S.App, pc: Policy) -> SecurityType:
        loc = e.loc
        ft = self.value(e.func)
        if not isinstance(ft, FunType):
            raise IllTyped(f"call of non-function type {ft}", loc)
        n = len(ft.params)
        if ft.prototyped and (len(e.args) < n or (len(e.args) > n and not ft.variadic)):
            raise FieldArity(f"function expects {n} argument(s), {len(e.args)} given", loc)
        rule = "DE" if ft.de_flag else "App"
        for i, a in enumerate(e.args):
            if not ft.prototyped or i >= n:
                self.expr(a, pc)
            elif i != ft.de_index:
                self.expr(a, pc, ft.params[i])
        if not self._leq(self._flow_join(ft.label, pc, e), ft.pc, e):
            raise PcViolation(f"call under context {pc} into function with pc {ft.pc}", loc)
        if not ft.de_flag:
            return ft.ret
        param = ft.params[ft.de_index]
        ret = ft.ret
        if not (isinstance(param, Simple) and isinstance(ret, Simple)):
            raise IllTyped("relabeling function must map simple types", loc)
        if param.policy.is_unlabeled or ret.policy.is_unlabeled:
            raise IllTyped("relabeling function with unlabeled signature", loc)
        l1, l2 = param.policy.head(), ret.policy.head()
        at = self.expr(e.args[ft.de_index], pc)
        if not isinstance(at, Simple) or at.base != param.base:
            raise IllTyped(f"argument of type {at} given to relabeling function over {param.base}", loc)
        rho = at.policy
        if rho.is_unlabeled:
            raise PolicyViolation(rule, loc, Policy((l1, l2), BOTTOM.terminal), rho)
        needed = Policy((l1, l2) + rho.suffix(2).labels, rho.terminal)
        if not flow_leq(rho, needed):
            raise PolicyViolation(rule, loc, needed, rho,
                                  f"[{rule}] argument policy {rho} does not start with {l1}::{l2}")
        return Simple(param.base, Policy((l2,) + needed.labels[2:], needed.terminal))

    # helpers -----------------------------------------------------------

    def _int_operand(self, e, pc, hint) -> Simple:
        t = self._expr(e, pc, hint) if isinstance(e, S.Int) else self.expr(e, pc)
        if not (isinstance(t, Simple) and isinstance(t.base, IntBase)):
            raise IllTyped(f"arithmetic on non-integer type {t}", getattr(e, "loc", None))
        return t

    def _join(self, t: SecurityType, p: Policy, node) -> SecurityType:
        try:
            return join_type(t, p)
        except UnlabeledComparison as exc:
            raise PolicyViolation("Join", getattr(node, "loc", None), p, self._outer(t), str(exc))

    def _flow_join(self, a: Policy, b: Policy, node) -> Policy:
        try:
            return flow_join(a, b)
        except UnlabeledComparison as exc:
            raise PolicyViolation("Join", getattr(node, "loc", None), a, b, str(exc))

    def _leq(self, a: Policy, b: Policy, node) -> bool:
        try:
            return flow_leq(a, b)
        except UnlabeledComparison:
            return False

    def _guards(self, p: Policy, s: SecurityType, node) -> bool:
        try:
            return guards(p, s)
        except UnlabeledComparison:
            return False

    def _pc_leq(self, pc: Policy, p: Policy, rule: str, node) -> None:
        if not self._leq(pc, p, node):
            raise PcViolation(f"[{rule}] context {pc} is not below {p}", getattr(node, "loc", None))

    def _outer(self, s: SecurityType) -> Policy:
        return BOTTOM if isinstance(s, UnitType) else s.outer_policy()

    def _sub(self, actual: SecurityType, expected: SecurityType, rule: str, node) -> None:
        try:
            ok = subtype(actual, expected)
        except UnlabeledComparison:
            ok = False
        if ok:
            return
        loc = getattr(node, "loc", None)
        if _same_shape(actual, expected):
            raise PolicyViolation(rule, loc, _first_diff(expected, actual)[0], _first_diff(expected, actual)[1])
        raise IllTyped(f"[{rule}] expected {expected}, found {actual}", loc)

    def _require_high(self, s: SecurityType, node) -> None:
        if self.high is None:
            raise IllTyped("pair typed without an attacker model", getattr(node, "loc", None))
        rho = self._outer(s)
        if not self.high(rho):
            raise PolicyViolation("Pair", getattr(node, "loc", None), "a high policy", rho)


def _rule_of(e) -> str:
    return {
        S.App: "App", S.Assign: "Assign", S.Let: "Let", S.If: "If", S.New: "New",
        S.Deref: "Deref", S.Field: "Field", S.Relabel: "Relabel", S.BinOp: "BinOp",
        S.Pair: "Pair",
    }.get(type(e), "Val")


def _same_shape(a: SecurityType, b: SecurityType) -> bool:
    if isinstance(a, Simple) and isinstance(b, Simple):
        if isinstance(a.base, PtrBase) and isinstance(b.base, PtrBase):
            return _same_shape(a.base.target, b.base.target)
        return a.base == b.base
    if isinstance(a, FunType) and isinstance(b, FunType):
        return len(a.params) == len(b.params)
    return isinstance(a, UnitType) and isinstance(b, UnitType)


def _first_diff(expected: SecurityType, actual: SecurityType):
    """The outermost pair of policies that breaks the subtype relation."""
    if isinstance(expected, Simple) and isinstance(actual, Simple):
        try:
            if not flow_leq(actual.policy, expected.policy):
                return expected.policy, actual.policy
        except UnlabeledComparison:
            return expected.policy, actual.policy
        if isinstance(expected.base, PtrBase) and isinstance(actual.base, PtrBase):
            return _first_diff(expected.base.target, actual.base.target)
    if isinstance(expected, FunType) and isinstance(actual, FunType):
        return expected, actual
    return getattr(expected, "policy", expected), getattr(actual, "policy", actual)


def typecheck_value(ctx: TypingContexts, v, expected: Optional[SecurityType] = None,
                    high: Optional[HighPredicate] = None) -> SecurityType:
    return Checker(ctx, high).value(v, expected)


def typecheck_expr(ctx: TypingContexts, pc: Policy, e, expected: Optional[SecurityType] = None,
                   high: Optional[HighPredicate] = None) -> SecurityType:
    return Checker(ctx, high).expr(e, pc, expected)


def check_fundef(ctx: TypingContexts, fdef, ftype: FunType) -> None:
    """Body of `fdef` checked under its pc with parameters bound to their types."""
    if len(fdef.params) != len(ftype.params):
        raise FieldArity(f"function '{fdef.name}' declares {len(ftype.params)} parameter(s), "
                         f"defines {len(fdef.params)}")
    inner = ctx
    for name, t in zip(fdef.params, ftype.params):
        inner = inner.bind(name, t)
    Checker(inner).expr(fdef.body, ftype.pc, ftype.ret)


def check_program(ctx: TypingContexts, code: dict, pc: Policy = BOTTOM, main=None,
                  expected: Optional[SecurityType] = None) -> Optional[SecurityType]:
    """Check every function body, then `main` if given."""
    for name, fdef in code.items():
        if name not in ctx.functions:
            raise UnboundVariable(f"no signature for function '{name}'")
        check_fundef(ctx, fdef, ctx.functions[name])
    if main is None:
        return None
    return typecheck_expr(ctx, pc, main, expected)
