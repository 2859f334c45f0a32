"""Expression translation from the labeled calculus to the nominal target.

Values with a meaningful policy become generated records, relabels become
record construction and projection, and calls to relabeling functions get
boundary conversions on both sides.  Tags on values drive every choice;
a missing tag is a contract breach of the mapper.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from ..errors import FlnError
from ..lattice import Policy, Terminal
from ..muc.checker import MucProgram
from ..muc.types import MPtr
from ..polc import syntax as S
from ..polc.types import (
    FunType,
    IntBase,
    PtrBase,
    RecordBase,
    SecurityType,
    Simple,
    TypingContexts,
)
from .types import GeneratedDefs, TypeTranslator, erases


class TagMissing(FlnError):
    code = "TagMissing"


class UnsupportedForm(FlnError):
    code = "UnsupportedConstruct"


def _meta(e) -> dict:
    return {"loc": getattr(e, "loc", None), "origin": getattr(e, "origin", None)}


@dataclass
class ExprTranslator:
    tt: TypeTranslator
    functions: dict[str, FunType] = field(default_factory=dict)
    env: dict[str, SecurityType] = field(default_factory=dict)
    counter: int = 0

    @property
    def nest(self) -> bool:
        return self.tt.layout == "nest"

    def fresh(self) -> str:
        self.counter += 1
        return f"$t{self.counter}"

    # type of a labeled value --------------------------------------------

    def tp_of(self, v) -> SecurityType:
        tag = getattr(v, "tag", None)
        if tag is not None:
            return tag
        if isinstance(v, S.Var) and v.name in self.env:
            return self.env[v.name]
        if isinstance(v, S.FunRef) and v.name in self.functions:
            return self.functions[v.name]
        raise TagMissing(f"value {type(v).__name__} carries no type tag", getattr(v, "loc", None))

    def wrapper_name(self, base, p: Policy) -> str:
        return self.tt.wrapper(base, p).name

    # values ----------------------------------------------------------------

    def value(self, v):
        m = _meta(v)
        if isinstance(v, S.Var):
            return S.Var(v.name, **m)
        if isinstance(v, (S.UnitVal, S.FunRef, S.Loc)):
            return replace(v, tag=None)
        if isinstance(v, S.Int):
            t = self.tp_of(v)
            if not (isinstance(t, Simple) and isinstance(t.base, IntBase)):
                raise TagMissing(f"integer tagged with {t}", m["loc"])
            n = S.Int(v.value, **m)
            if erases(t.policy):
                return n
            return S.Record(self.wrapper_name(t.base, t.policy), (n,), **m)
        if isinstance(v, S.Record):
            t = self.tp_of(v)
            fields = tuple(self.value(f) for f in v.fields)
            plain = S.Record(v.name, fields, **m)
            if not isinstance(t, Simple) or erases(t.policy):
                return plain
            name = self.wrapper_name(t.base, t.policy)
            if self.nest:
                return S.Record(name, (plain,), **m)
            return S.Record(name, fields, **m)
        raise UnsupportedForm(f"not a value: {type(v).__name__}", m["loc"])

    # expressions ---------------------------------------------------------

    def expr(self, e):
        m = _meta(e)
        if isinstance(e, S.VALUE_TYPES):
            return self.value(e)
        if isinstance(e, S.BinOp):
            return S.BinOp(e.op, self.expr(e.left), self.expr(e.right), **m)
        if isinstance(e, S.Let):
            ann = self.tt.type(e.ann) if e.ann is not None else None
            bound = self.expr(e.bound)
            saved = self.env
            if e.ann is not None:
                self.env = {**saved, e.name: e.ann}
            try:
                body = self.expr(e.body)
            finally:
                self.env = saved
            return S.Let(e.name, ann, bound, body, **m)
        if isinstance(e, S.Field):
            v = self.value(e.value)
            if self.nest:
                t = self.tp_of(e.value)
                if isinstance(t, Simple) and isinstance(t.base, RecordBase) and not erases(t.policy):
                    v = S.Field(v, 1, **m)
            return S.Field(v, e.index, **m)
        if isinstance(e, S.New):
            return self._new(e, m)
        if isinstance(e, S.Deref):
            return S.Deref(self.value(e.value), **m)
        if isinstance(e, S.Assign):
            return S.Assign(self.value(e.target), self.expr(e.value), **m)
        if isinstance(e, S.If):
            return S.If(self.value(e.cond), self.expr(e.then), self.expr(e.other), **m)
        if isinstance(e, S.App):
            return self._app(e, m)
        if isinstance(e, S.Relabel):
            return self.relabel(e.target, e.source, e.value, m)
        raise UnsupportedForm(f"{type(e).__name__} has no translation", m["loc"])

    def _new(self, e: S.New, m: dict):
        inner = self.expr(e.value)
        t = e.tag
        if not (isinstance(t, Simple) and isinstance(t.base, PtrBase)):
            return S.New(inner, **m)
        cell = S.New(inner, tag=MPtr(self.tt.type(t.base.target)), **m)
        if erases(t.policy):
            return cell
        return S.Record(self.wrapper_name(t.base, t.policy), (cell,), **m)

    # relabels --------------------------------------------------------------

    def relabel(self, target: Policy, source: Policy, lv, m: dict):
        t = self.tp_of(lv)
        if not isinstance(t, Simple):
            raise TagMissing(f"relabel of a value tagged {t}", m["loc"])
        v = self.value(lv)
        if erases(target) and erases(source):  # Same
            return v
        if target == source:
            return v
        if isinstance(t.base, RecordBase):
            return self._relabel_record(t.base, target, source, v, m)
        if erases(source):  # N2
            return S.Record(self.wrapper_name(t.base, target), (v,), **m)
        if erases(target):  # N3
            return S.Field(v, 1, **m)
        x = self.fresh()  # N1
        return S.Let(x, None, S.Field(v, 1, **m),
                     S.Record(self.wrapper_name(t.base, target), (S.Var(x, **m),), **m), **m)

    def _relabel_record(self, base: RecordBase, target: Policy, source: Policy, v, m: dict):
        if self.nest:
            inner = v if erases(source) else S.Field(v, 1, **m)
            if erases(target):
                return inner
            return S.Record(self.wrapper_name(base, target), (inner,), **m)
        n = len(self.tt.user_record(base.name).fields)
        name = base.name if erases(target) else self.wrapper_name(base, target)
        xs = [self.fresh() for _ in range(n)]
        out = S.Record(name, tuple(S.Var(x, **m) for x in xs), **m)
        for i in reversed(range(n)):
            out = S.Let(xs[i], None, S.Field(v, i + 1, **m), out, **m)
        return out

    # calls -------------------------------------------------------------

    def _app(self, e: S.App, m: dict):
        ft = self.tp_of(e.func)
        vf = self.value(e.func)
        if not isinstance(ft, FunType) or not ft.de_flag:
            return S.App(vf, tuple(self.expr(a) for a in e.args), **m)
        k = ft.de_index
        lv = e.args[k]
        if not S.is_value(lv):
            raise UnsupportedForm("argument of a relabeling function must be a value", m["loc"])
        at = self.tp_of(lv)
        if not isinstance(at, Simple) or not isinstance(ft.params[k], Simple) \
                or erases(at.policy):
            # no conversion applies; the nominal checker reports the argument
            return S.App(vf, tuple(self.expr(a) for a in e.args), **m)
        rho = at.policy
        l1, l2, rest = rho.at(0), rho.at(1), rho.suffix(2)
        fname = e.func.name if isinstance(e.func, (S.Var, S.FunRef)) else "<call>"
        # other arguments keep their evaluation order ahead of the conversion
        lets: list[tuple[str, object]] = []
        args: list = []
        for i, a in enumerate(e.args):
            if i == k:
                args.append(None)
            elif S.is_value(a):
                args.append(self.expr(a))
            else:
                x = self.fresh()
                lets.append((x, self.expr(a)))
                args.append(S.Var(x, **m))
        y, z = self.fresh(), self.fresh()
        pre = self.relabel(Policy((l1,), Terminal.TOP), rho, lv, m)
        mid = Simple(at.base, Policy((l2,), Terminal.BOTTOM))
        post = self.relabel(Policy((l2,) + rest.labels, rest.terminal), mid.policy,
                            S.Var(z, tag=mid, **m), m)
        args[k] = S.Var(y, **m)
        call = S.App(vf, tuple(args), **m)
        out = S.Let(y, self.tt.type(ft.params[k]), pre,
                    S.Let(z, self.tt.type(mid), call, post, loc=m["loc"], origin=("return", fname)),
                    loc=m["loc"], origin=("arg", fname, k + 1))
        for x, a in reversed(lets):
            out = S.Let(x, None, a, out, **m)
        return out


def translate_expr(le, records=None, layout: str = "copy", functions=None,
                   env=None, tt: Optional[TypeTranslator] = None):
    """(target expression, generated definitions)."""
    tt = tt or TypeTranslator(dict(records or {}), layout)
    xt = ExprTranslator(tt, dict(functions or {}), dict(env or {}))
    e = xt.expr(le)
    tt.finish()
    return e, tt.defs


def translate_program(ctx: TypingContexts, code: dict, main=None, layout: str = "copy",
                      tt: Optional[TypeTranslator] = None):
    """(MucProgram, translated main, generated definitions) for a whole unit."""
    tt = tt or TypeTranslator(dict(ctx.records), layout)
    functions = {n: tt.type(f) for n, f in ctx.functions.items()}
    globals_ = {n: tt.type(s) for n, s in ctx.variables.items()}
    store = {n: tt.type(s) for n, s in ctx.store.items()}
    xt = ExprTranslator(tt, dict(ctx.functions), dict(ctx.variables))
    out_code = {}
    for name, fdef in code.items():
        ft = ctx.functions[name]
        xt.env = {**ctx.variables, **dict(zip(fdef.params, ft.params))}
        out_code[name] = S.FunDef(name, fdef.params, xt.expr(fdef.body))
    xt.env = dict(ctx.variables)
    out_main = xt.expr(main) if main is not None else None
    prog = MucProgram(tt.typedefs(), functions, out_code, globals_, store)
    return prog, out_main, tt.defs
