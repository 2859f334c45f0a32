"""Nominal type checker for the target calculus.

Record types are equal only by name.  In `c_compat` mode the checker also
accepts what a C compiler accepts silently: all arithmetic types are one
type, `void *` converts to and from any pointer, integers offset pointers,
a literal 0 is a null pointer and calls may go through function pointers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

from ..errors import FlnError, SourceLoc
from ..polc import syntax as S
from .types import (
    INT,
    UNIT,
    MFun,
    MInt,
    MOpaque,
    MPtr,
    MRecord,
    MRecordDef,
    MucType,
    MUnit,
    compatible,
)


class TypeMismatch(FlnError):
    """`context` says where the types met, e.g. ("arg", "f", 2)."""

    code = "TypeMismatch"

    def __init__(self, loc: Optional[SourceLoc], expected: MucType, found: MucType,
                 context: tuple = (), message: str = ""):
        self.expected = expected
        self.found = found
        self.context = context
        super().__init__(message or f"expected '{expected}', found '{found}'", loc)


class UnknownField(FlnError):
    code = "UnknownField"


class NotAFunction(FlnError):
    code = "NotAFunction"


class UnboundName(FlnError):
    code = "UnboundVariable"


@dataclass
class MucProgram:
    records: dict[str, MRecordDef] = field(default_factory=dict)
    functions: dict[str, MFun] = field(default_factory=dict)
    code: dict[str, S.FunDef] = field(default_factory=dict)
    globals: dict[str, MucType] = field(default_factory=dict)
    store: dict[int, MucType] = field(default_factory=dict)


@dataclass
class MucChecker:
    program: MucProgram
    c_compat: bool = False
    env: dict[str, MucType] = field(default_factory=dict)
    errors: Optional[list] = None  # collect mode: record errors and keep going

    def _loc(self, node, fallback=None):
        return getattr(node, "loc", None) or fallback

    def _fail(self, exc: FlnError) -> None:
        if self.errors is None:
            raise exc
        self.errors.append(exc)

    def _require(self, found: MucType, expected: MucType, node, context: tuple, parent=None,
                 at=None) -> None:
        if compatible(found, expected, self.c_compat):
            return
        if self.c_compat and isinstance(node, S.Int) and node.value == 0 and isinstance(expected, MPtr):
            return
        loc = self._loc(at) if at is not None else None
        self._fail(TypeMismatch(loc or self._loc(node, self._loc(parent)), expected, found, context))

    def lookup(self, name: str, node) -> MucType:
        if name in self.env:
            return self.env[name]
        if name in self.program.globals:
            return self.program.globals[name]
        raise UnboundName(f"'{name}' undeclared", self._loc(node))

    def check(self, e, parent=None) -> MucType:
        if self.errors is None:
            return self._check(e, parent)
        try:
            return self._check(e, parent)
        except FlnError as exc:
            self.errors.append(exc)
            return MOpaque("<error>")

    def _check(self, e, parent=None) -> MucType:
        loc = self._loc(e, self._loc(parent))
        if isinstance(e, S.Int):
            return INT
        if isinstance(e, S.UnitVal):
            return UNIT
        if isinstance(e, S.Var):
            return self.lookup(e.name, e)
        if isinstance(e, S.FunRef):
            f = self.program.functions.get(e.name)
            if f is None:
                raise NotAFunction(f"'{e.name}' is not a function", loc)
            return f
        if isinstance(e, S.Loc):
            if e.address not in self.program.store:
                raise UnboundName(f"location {e.address} has no store type", loc)
            return self.program.store[e.address]
        if isinstance(e, S.BinOp):
            return self._binop(e, loc)
        if isinstance(e, S.Record):
            rec = self.program.records.get(e.name)
            if rec is None:
                raise UnknownField(f"unknown record type '{e.name}'", loc)
            if len(rec.fields) != len(e.fields):
                raise UnknownField(f"record '{e.name}' has {len(rec.fields)} field(s), "
                                   f"{len(e.fields)} given", loc)
            for i, (fv, ft) in enumerate(zip(e.fields, rec.fields)):
                self._require(self.check(fv, e), ft, fv, ("field", e.name, i + 1), e)
            return MRecord(e.name)
        if isinstance(e, S.Field):
            t = self.check(e.value, e)
            if isinstance(t, MOpaque) and self.c_compat:
                return t
            if not isinstance(t, MRecord):
                raise UnknownField(f"request for a member in something not a structure ('{t}')", loc)
            rec = self.program.records.get(t.name)
            if rec is None:
                if self.c_compat:
                    return MOpaque(f"{t}.{e.index}")
                raise UnknownField(f"unknown record type '{t.name}'", loc)
            if not 1 <= e.index <= len(rec.fields):
                raise UnknownField(f"'{t}' has no field {e.index}", loc)
            return rec.fields[e.index - 1]
        if isinstance(e, S.New):
            content = self.check(e.value, e)
            if isinstance(e.tag, MPtr):  # typed allocation
                self._require(content, e.tag.target, e.value, ("new",), e)
                return e.tag
            return MPtr(content)
        if isinstance(e, S.Deref):
            t = self.check(e.value, e)
            if isinstance(t, MPtr):
                return t.target
            if isinstance(t, MOpaque) and self.c_compat:
                return t
            raise TypeMismatch(loc, MPtr(t), t, ("deref",),
                               f"invalid type argument of unary '*' (have '{t}')")
        if isinstance(e, S.Assign):
            t = self.check(e.target, e)
            if isinstance(t, MOpaque) and self.c_compat:
                self.check(e.value, e)
                return UNIT
            if not isinstance(t, MPtr):
                raise TypeMismatch(loc, MPtr(t), t, ("deref",), f"assignment through '{t}'")
            self._require(self.check(e.value, e), t.target, e.value, ("assign", e.origin), e, at=e)
            return UNIT
        if isinstance(e, S.App):
            return self._app(e, loc)
        if isinstance(e, S.Let):
            t1 = self.check(e.bound, e)
            if e.ann is not None:
                self._require(t1, e.ann, e.bound, ("let", e.origin), e)
                t1 = e.ann
            saved = self.env
            self.env = {**saved, e.name: t1}
            try:
                return self.check(e.body, e)
            finally:
                self.env = saved
        if isinstance(e, S.If):
            ct = self.check(e.cond, e)
            if not self._scalar(ct):
                self._fail(TypeMismatch(self._loc(e.cond, loc), INT, ct, ("cond",),
                                        f"used '{ct}' where a scalar is required"))
            a = self.check(e.then, e)
            b = self.check(e.other, e)
            if compatible(a, b, self.c_compat):
                return a
            if self.c_compat and (isinstance(a, MUnit) or isinstance(b, MUnit)):
                return UNIT
            self._fail(TypeMismatch(loc, a, b, ("branch",)))
            return a
        if isinstance(e, (S.Relabel, S.Pair)):
            raise TypeMismatch(loc, UNIT, UNIT, (), f"{type(e).__name__} is not a target construct")
        raise TypeMismatch(loc, UNIT, UNIT, (), f"unknown construct {type(e).__name__}")

    def _scalar(self, t: MucType) -> bool:
        if isinstance(t, MInt):
            return True
        return self.c_compat and isinstance(t, (MPtr, MOpaque))

    def _binop(self, e: S.BinOp, loc) -> MucType:
        lt = self.check(e.left, e)
        rt = self.check(e.right, e)
        if isinstance(lt, MInt) and isinstance(rt, MInt):
            return INT
        if self.c_compat:
            if isinstance(lt, MOpaque) or isinstance(rt, MOpaque):
                return lt if isinstance(rt, MOpaque) else rt
            if e.op in ("+", "-") and isinstance(lt, MPtr) and isinstance(rt, MInt):
                return lt
            if e.op == "+" and isinstance(lt, MInt) and isinstance(rt, MPtr):
                return rt
            if isinstance(lt, MPtr) and isinstance(rt, MPtr) and compatible(lt, rt, True):
                if e.op in ("-", "==", "!=", "<", "<=", ">", ">="):
                    return INT
            if e.op in ("&&", "||", "==", "!=") and self._scalar(lt) and self._scalar(rt):
                if e.op in ("&&", "||") or isinstance(lt, MInt) or isinstance(rt, MInt):
                    return INT
        good = lt if not isinstance(lt, MInt) else rt
        raise TypeMismatch(loc, INT, good, ("binop", e.op),
                           f"invalid operands to binary {e.op} (have '{lt}' and '{rt}')")

    def _app(self, e: S.App, loc) -> MucType:
        ft = self.check(e.func, e)
        via_pointer = False
        if self.c_compat and isinstance(ft, MPtr) and isinstance(ft.target, MFun):
            ft, via_pointer = ft.target, True
        if self.c_compat and isinstance(ft, MOpaque):
            for a in e.args:
                self.check(a, e)
            return ft
        if not isinstance(ft, MFun):
            name = e.func.name if isinstance(e.func, (S.Var, S.FunRef)) else "expression"
            raise NotAFunction(f"called object '{name}' is not a function", loc)
        fname = e.func.name if isinstance(e.func, (S.Var, S.FunRef)) else "<call>"
        if isinstance(e.origin, tuple) and e.origin[:1] == ("call",):
            fname = e.origin[1]
        arg_types = [self.check(a, e) for a in e.args]
        if ft.params is not None:
            n = len(ft.params)
            if len(e.args) < n or (len(e.args) > n and not ft.variadic):
                which = "few" if len(e.args) < n else "many"
                self._fail(TypeMismatch(loc, ft, ft, ("arity", fname),
                                        f"too {which} arguments to function '{fname}'"))
            for i, (a, at, pt) in enumerate(zip(e.args, arg_types, ft.params)):
                self._require(at, pt, a, ("arg", fname, i + 1, via_pointer), e)
        return ft.ret


def typecheck_muc(program: MucProgram, e, c_compat: bool = False,
                  env: Optional[dict[str, MucType]] = None) -> MucType:
    return MucChecker(program, c_compat, dict(env or {})).check(e)


def check_muc_fundef(program: MucProgram, fdef: S.FunDef, c_compat: bool = False,
                     errors: Optional[list] = None) -> MucType:
    ft = program.functions[fdef.name]
    params = ft.params or ()
    env = dict(zip(fdef.params, params))
    t = MucChecker(program, c_compat, env, errors).check(fdef.body)
    if c_compat and isinstance(ft.ret, MUnit):
        return t
    if not compatible(t, ft.ret, c_compat):
        exc = TypeMismatch(getattr(fdef.body, "loc", None), ft.ret, t, ("return", fdef.name))
        if errors is None:
            raise exc
        errors.append(exc)
    return t


def collect_muc_errors(program: MucProgram, main=None, c_compat: bool = True) -> list[FlnError]:
    """Every type error in the program, in checking order, instead of the first."""
    errors: list[FlnError] = []
    for fdef in program.code.values():
        check_muc_fundef(program, fdef, c_compat, errors)
    if main is not None:
        MucChecker(program, c_compat, {}, errors).check(main)
    return errors


def check_muc_program(program: MucProgram, main=None, c_compat: bool = False) -> Optional[MucType]:
    for fdef in program.code.values():
        check_muc_fundef(program, fdef, c_compat)
    if main is None:
        return None
    return typecheck_muc(program, main, c_compat)


def eval_muc(program: MucProgram, store: dict, e, fuel: Optional[int] = None) -> tuple[dict, Any]:
    """Deterministic small-step evaluation; relabels and pairs never occur."""
    from ..polc.semantics import DEFAULT_FUEL, Machine, Stuck

    for node in S.walk(e):
        if isinstance(node, (S.Relabel, S.Pair)):
            raise Stuck("labeled construct in a target program", getattr(node, "loc", None))
    m = Machine(program.code, dict(store), fuel=fuel or DEFAULT_FUEL, nonpositive_false=True)
    v = m.run(e)
    return m.store, v
