"""Mapping annotated programs into the labeled calculus.

Every value gets a type tag.  Dereference, assignment, branch conditions
and field access on records whose fields are labeled differently first
relabel the value down to ⊥, expanded eagerly into a chain of single-label
relabels.  Function definitions relabel their parameters to U on entry and
their result to the annotated policy on exit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..errors import FlnError
from ..lattice import (
    BOTTOM,
    TOP,
    TOP_LABEL,
    UNLABELED,
    Policy,
    RelabelCapability,
    Terminal,
    UnlabeledComparison,
    flow_join,
)
from ..polc import syntax as S
from ..polc.types import (
    UNIT,
    FunType,
    IntBase,
    PtrBase,
    RecordBase,
    RecordDef,
    SecurityType,
    Simple,
    TypingContexts,
    UnitType,
    join_type,
    lub,
)
from .spec import AFun, AInt, AnnotContexts, AnnotSpec, APtr, ARec, AUnit, map_type, with_policy

INT_U = Simple(IntBase(), UNLABELED)
INSERTED = ("relabel", "anf", "param", "result")


class UnknownSymbol(FlnError):
    code = "UnknownSymbol"


class UnsupportedConstruct(FlnError):
    code = "UnsupportedConstruct"


class BaseTypeMismatch(FlnError):
    code = "BaseTypeMismatch"


class RecursiveTypeWarning(FlnError):
    code = "RecursiveTypeWarning"
    severity = "warning"


def _meta(e) -> dict:
    return {"loc": getattr(e, "loc", None), "origin": getattr(e, "origin", None)}


def _as_type(ann) -> SecurityType:
    if isinstance(ann, (AUnit, AInt, ARec, APtr, AFun)):
        return map_type(ann)
    return ann


def lab_of_field(s: SecurityType) -> Optional[Policy]:
    return None if isinstance(s, UnitType) else s.outer_policy()


def _join(s: SecurityType, p: Policy) -> SecurityType:
    try:
        return join_type(s, p)
    except UnlabeledComparison:
        return s


def bottom_target(rho: Policy) -> Policy:
    """Where the chain for reLab(⊥⇐ρ) ends: ℓ::⊥ for the terminal label ℓ."""
    if rho.terminal is Terminal.TOP:
        return Policy((TOP_LABEL,), Terminal.BOTTOM)
    return BOTTOM


@dataclass
class MappedUnit:
    """D_l, F_l and Γ_l with the mapped function bodies."""

    ctx: TypingContexts
    code: dict[str, S.FunDef] = field(default_factory=dict)
    capabilities: list[RelabelCapability] = field(default_factory=list)
    warnings: list[FlnError] = field(default_factory=list)
    main: object = None
    main_type: Optional[SecurityType] = None


@dataclass
class Mapper:
    ctx: TypingContexts
    env: dict[str, SecurityType] = field(default_factory=dict)
    counter: int = 0

    def fresh(self, prefix: str = "$m") -> str:
        self.counter += 1
        return f"{prefix}{self.counter}"

    # relabel chains ------------------------------------------------------

    def to_bottom(self, lv, s: SecurityType, m: dict):
        """reLab(⊥⇐ρ) lv as a chain of single-label relabels; returns (expr, type)."""
        if not isinstance(s, Simple):
            raise UnsupportedConstruct(f"cannot relabel a value of type {s}", m["loc"])
        rho, base = s.policy, s.base
        final = bottom_target(rho)
        if not rho.is_meaningful or not rho.labels:
            return S.Relabel(final, rho, lv, **m), Simple(base, final)
        labels = rho.labels
        steps = []
        for k, lab in enumerate(labels):
            target = Policy((labels[k + 1],), Terminal.BOTTOM) if k + 1 < len(labels) else final
            steps.append((Policy((lab,), Terminal.TOP), target))
        return self._chain(lv, base, steps, m), Simple(base, final)

    def _chain(self, lv, base, steps, m):
        source, target = steps[0]
        rel = S.Relabel(target, source, lv, **m)
        if len(steps) == 1:
            return rel
        x = self.fresh()
        t = Simple(base, target)
        rest = self._chain(S.Var(x, tag=t, **m), base, steps[1:], m)
        return S.Let(x, t, rel, rest, loc=m["loc"], origin="relabel")

    def _down(self, lv, s, m, body_fn):
        """let y: b ⊥ = reLab(⊥⇐ρ) lv in body(y@b ⊥)."""
        chain, _ = self.to_bottom(lv, s, m)
        y = self.fresh()
        yt = Simple(s.base, BOTTOM)
        return S.Let(y, yt, chain, body_fn(S.Var(y, tag=yt, **m)), loc=m["loc"], origin="relabel")

    # values ----------------------------------------------------------------

    def lookup(self, name: str, node) -> SecurityType:
        if name in self.env:
            return self.env[name]
        if name in self.ctx.variables:
            return self.ctx.variables[name]
        raise UnknownSymbol(f"'{name}' undeclared", getattr(node, "loc", None))

    def _atom(self, e, expected, binds: list):
        """A value standing for `e`; non-values are let-bound first."""
        le, s = self.map_expr(e, expected)
        if S.is_value(le):
            return le, s
        x = self.fresh("$a")
        binds.append((x, s, le, _meta(e)))
        return S.Var(x, tag=s, **_meta(e)), s

    def _wrap(self, binds: list, body):
        for x, s, le, m in reversed(binds):
            body = S.Let(x, s, le, body, loc=m["loc"], origin="anf")
        return body

    # expressions ---------------------------------------------------------

    def map_expr(self, e, expected: Optional[SecurityType] = None):
        """(labeled expression, its type)."""
        m = _meta(e)
        if isinstance(e, S.Int):
            t = expected if isinstance(expected, Simple) and isinstance(expected.base, IntBase) \
                else INT_U
            return S.Int(e.value, tag=t, **m), t
        if isinstance(e, S.Var):
            t = self.lookup(e.name, e)
            return S.Var(e.name, tag=t, **m), t
        if isinstance(e, S.FunRef):
            f = self.ctx.functions.get(e.name)
            if f is None:
                raise UnknownSymbol(f"implicit declaration of function '{e.name}'", m["loc"])
            return S.FunRef(e.name, tag=f, **m), f
        if isinstance(e, S.UnitVal):
            return S.UnitVal(**m), UNIT
        if isinstance(e, S.Record):
            return self._record(e, expected, m)
        if isinstance(e, S.BinOp):
            le1, _ = self.map_expr(e.left, INT_U)
            le2, _ = self.map_expr(e.right, INT_U)
            return S.BinOp(e.op, le1, le2, **m), INT_U
        if isinstance(e, S.Let):
            return self._let(e, expected, m)
        if isinstance(e, S.Field):
            return self._field(e, m)
        if isinstance(e, S.New):
            if isinstance(expected, Simple) and isinstance(expected.base, PtrBase):
                le, _ = self.map_expr(e.value, expected.base.target)
                return S.New(le, tag=expected, **m), expected
            le, sc = self.map_expr(e.value)
            t = Simple(PtrBase(sc), UNLABELED)
            return S.New(le, tag=t, **m), t
        if isinstance(e, S.Deref):
            binds: list = []
            lv, s = self._atom(e.value, None, binds)
            if not (isinstance(s, Simple) and isinstance(s.base, PtrBase)):
                raise UnsupportedConstruct(f"dereference of non-pointer type {s}", m["loc"])
            content = s.base.target
            return self._wrap(binds, self._down(lv, s, m, lambda y: S.Deref(y, **m))), content
        if isinstance(e, S.Assign):
            binds = []
            lv, s = self._atom(e.target, None, binds)
            if not (isinstance(s, Simple) and isinstance(s.base, PtrBase)):
                raise UnsupportedConstruct(f"assignment through non-pointer type {s}", m["loc"])
            le, _ = self.map_expr(e.value, s.base.target)
            return self._wrap(binds, self._down(lv, s, m, lambda y: S.Assign(y, le, **m))), UNIT
        if isinstance(e, S.If):
            binds = []
            lv, s = self._atom(e.cond, None, binds)
            le2, s2 = self.map_expr(e.then, expected)
            le3, s3 = self.map_expr(e.other, expected)
            t = expected if expected is not None else (lub(s2, s3) or s2)
            body = self._down(lv, s, m, lambda x: S.If(x, le2, le3, **m))
            return self._wrap(binds, body), t
        if isinstance(e, S.App):
            return self._app(e, m)
        raise UnsupportedConstruct(f"{type(e).__name__} is not an annotated-program form", m["loc"])

    def _record(self, e: S.Record, expected, m):
        rec = self.ctx.records.get(e.name)
        if rec is None:
            raise UnknownSymbol(f"unknown record type '{e.name}'", m["loc"])
        if len(rec.fields) != len(e.fields):
            raise UnsupportedConstruct(
                f"record '{e.name}' has {len(rec.fields)} field(s), {len(e.fields)} given", m["loc"])
        binds: list = []
        fields = tuple(self._atom(v, ft, binds)[0] for v, ft in zip(e.fields, rec.fields))
        t = expected if isinstance(expected, Simple) and expected.base == RecordBase(e.name) \
            else Simple(RecordBase(e.name), UNLABELED)
        return self._wrap(binds, S.Record(e.name, fields, tag=t, **m)), t

    def _let(self, e: S.Let, expected, m):
        if e.ann is not None:
            s1 = _as_type(e.ann)
            le1, _ = self.map_expr(e.bound, s1)
        else:
            le1, s1 = self.map_expr(e.bound)
        saved = self.env
        self.env = {**saved, e.name: s1}
        try:
            le2, s2 = self.map_expr(e.body, expected)
        finally:
            self.env = saved
        return S.Let(e.name, s1 if e.ann is not None else None, le1, le2, **m), s2

    def _field(self, e: S.Field, m):
        binds: list = []
        lv, s = self._atom(e.value, None, binds)
        if not (isinstance(s, Simple) and isinstance(s.base, RecordBase)):
            raise UnsupportedConstruct(f"request for member in something not a structure ({s})",
                                       m["loc"])
        rec = self.ctx.records.get(s.base.name)
        if rec is None:
            raise UnknownSymbol(f"unknown record type '{s.base.name}'", m["loc"])
        if not 1 <= e.index <= len(rec.fields):
            raise UnsupportedConstruct(f"record '{rec.name}' has no field {e.index}", m["loc"])
        ft = rec.fields[e.index - 1]
        rho = s.policy
        if all(lab_of_field(f) == rho for f in rec.fields):
            return self._wrap(binds, S.Field(lv, e.index, **m)), _join(ft, rho)
        body = self._down(lv, s, m, lambda y: S.Field(y, e.index, **m))
        return self._wrap(binds, body), ft

    def _app(self, e: S.App, m):
        binds: list = []
        lvf, ft = self._atom(e.func, None, binds)
        if not isinstance(ft, FunType):
            raise UnsupportedConstruct(f"called object of type {ft} is not a function", m["loc"])
        n = len(ft.params)

        def expected_at(i):
            return ft.params[i] if ft.prototyped and i < n else None

        if not ft.de_flag:
            args = tuple(self.map_expr(a, expected_at(i))[0] for i, a in enumerate(e.args))
            return self._wrap(binds, S.App(lvf, args, **m)), ft.ret
        k = ft.de_index
        args = []
        arg_type = None
        for i, a in enumerate(e.args):
            exp = None if i == k else expected_at(i)
            lv, s = self._atom(a, exp, binds)
            args.append(lv)
            if i == k:
                arg_type = s
        return self._wrap(binds, S.App(lvf, tuple(args), **m)), de_result(ft, arg_type)

    # function definitions --------------------------------------------------

    def map_fundef(self, fdef: S.FunDef, ftype: FunType) -> S.FunDef:
        """Parameters relabeled to U on entry, the result to its policy on exit."""
        saved = self.env
        inner = dict(saved)
        entry = []
        for x, t in zip(fdef.params, ftype.params):
            if isinstance(t, Simple):
                tu = Simple(t.base, UNLABELED)
                entry.append((x, tu, S.Relabel(UNLABELED, t.policy, S.Var(x, tag=t))))
                inner[x] = tu
            else:
                inner[x] = t
        ret = ftype.ret
        self.env = inner
        try:
            if isinstance(ret, Simple):
                ru = Simple(ret.base, UNLABELED)
                le, _ = self.map_expr(fdef.body, ru)
                z = self.fresh("$z")
                body = S.Let(z, ru, le, S.Relabel(ret.policy, UNLABELED, S.Var(z, tag=ru)),
                             origin="result")
            else:
                body, _ = self.map_expr(fdef.body, ret)
        finally:
            self.env = saved
        for x, tu, rel in reversed(entry):
            body = S.Let(x, tu, rel, body, origin="param")
        return S.FunDef(fdef.name, fdef.params, body)


def de_result(ft: FunType, arg: Optional[SecurityType]) -> SecurityType:
    """Result type of a relabeling call, as the checker derives it."""
    param, ret = ft.params[ft.de_index], ft.ret
    if not (isinstance(arg, Simple) and isinstance(ret, Simple) and isinstance(param, Simple)) \
            or not arg.policy.is_meaningful:
        return ret
    rho = arg.policy
    rest = rho.suffix(2)
    return Simple(param.base, Policy((ret.policy.head(),) + rest.labels, rest.terminal))


# relabeling functions --------------------------------------------------------


def _base_of(b: AnnotSpec):
    t = map_type(with_policy(b, None))
    return t.base if isinstance(t, Simple) else t


def register_de(name: str, spec: AFun, loc=None) -> tuple[AFun, Optional[RelabelCapability]]:
    """Turn an annotated param + annotated return on one base into a d&e signature."""
    ret = spec.ret
    if not isinstance(ret, (AInt, ARec)) or ret.policy is None:
        return spec, None
    cands = [i for i, p in enumerate(spec.params)
             if isinstance(p, (AInt, ARec)) and p.policy is not None]
    if not cands:
        return spec, None
    same = [i for i in cands if _base_of(spec.params[i]) == _base_of(ret)]
    if not same:
        raise BaseTypeMismatch(
            f"relabeling function '{name}' maps parameter type "
            f"{_base_of(spec.params[cands[0]])} to return type {_base_of(ret)}", loc)
    k = same[0]
    l1, l2 = spec.params[k].policy.head(), ret.policy.head()
    params = list(spec.params)
    params[k] = with_policy(params[k], Policy((l1,), Terminal.TOP))
    new = AFun(tuple(params), with_policy(ret, Policy((l2,), Terminal.BOTTOM)), k,
               spec.variadic, spec.prototyped)
    return new, RelabelCapability(l1, l2, name)


def recursive_records(ctx: AnnotContexts) -> list[str]:
    """Annotated records that reach themselves through fields or pointers."""

    def annotated(b) -> bool:
        if isinstance(b, APtr):
            return b.policy is not None or annotated(b.target)
        return getattr(b, "policy", None) is not None

    def mentions(b, out: set) -> None:
        if isinstance(b, ARec):
            out.add(b.name)
        elif isinstance(b, APtr):
            mentions(b.target, out)

    out = []
    for name, rec in sorted(ctx.records.items()):
        if not any(annotated(f) for f in rec.fields):
            continue
        seen: set = set()
        todo = [name]
        while todo:
            cur = todo.pop()
            r = ctx.records.get(cur)
            if r is None:
                continue
            nxt: set = set()
            for f in r.fields:
                mentions(f, nxt)
            for n in nxt:
                if n not in seen:
                    seen.add(n)
                    todo.append(n)
        if name in seen:
            out.append(name)
    return out


def map_unit(actx: AnnotContexts, code: Optional[dict] = None, main=None,
             main_type: Optional[AnnotSpec] = None) -> MappedUnit:
    """Map contexts, every function body and an optional main expression."""
    caps = []
    functions = {}
    for name, spec in actx.functions.items():
        spec2, cap = register_de(name, spec)
        functions[name] = spec2
        if cap is not None:
            caps.append(cap)
    actx = AnnotContexts(actx.records, functions, actx.variables)
    ctx = actx.labeled()
    unit = MappedUnit(ctx, capabilities=caps)
    for name in recursive_records(actx):
        unit.warnings.append(RecursiveTypeWarning(
            f"annotated record '{name}' refers to itself; relabeling a smaller type may "
            "weaken the sequencing guarantee"))
    mapper = Mapper(ctx)
    for name, fdef in (code or {}).items():
        unit.code[name] = mapper.map_fundef(fdef, ctx.functions[name])
    if main is not None:
        mt = _as_type(main_type) if main_type is not None else None
        unit.main, t = mapper.map_expr(main, mt)
        unit.main_type = mt if mt is not None else t
    return unit


# erasure -------------------------------------------------------------------


def tm_of(le):
    """Drop inserted lets, relabels, tags and annotations."""
    if isinstance(le, S.Let) and le.origin in INSERTED:
        return tm_of(S.subst(le.body, le.name, le.bound))
    if isinstance(le, S.Relabel):
        return tm_of(le.value)
    if isinstance(le, S.Let):
        return S.Let(le.name, None, tm_of(le.bound), tm_of(le.body), loc=le.loc, origin=le.origin)
    if hasattr(le, "tag") and le.tag is not None:
        from dataclasses import replace
        le = replace(le, tag=None)
    if not S.children(le):
        return le
    return S.map_children(le, tm_of)


def erase_annotations(e):
    """The annotated program with its annotations removed."""
    if isinstance(e, S.Let):
        return S.Let(e.name, None, erase_annotations(e.bound), erase_annotations(e.body),
                     loc=e.loc, origin=e.origin)
    e = S.strip_tags(e) if hasattr(e, "tag") else e
    if not S.children(e):
        return e
    return S.map_children(e, erase_annotations)
