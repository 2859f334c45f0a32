"""Lowering parsed C into the annotated calculus.

Every C object becomes a cell in Γ typed `ptr(β) U`: reading `x` is `*x`,
assigning is `x := e`.  Locals are renamed per function and scope, a
function's parameters arrive as `x$arg` and are copied into their cells, and
`return e` writes the `$ret` cell that the body reads last.  Field lvalues,
casts, string literals and missing values become fresh Γ entries of the
right type; the checks only care about types, so no aliasing is modeled.

Directives are elaborated to annotation specs on the way: `requires` labels
an object (pointer annotations label the innermost content), `param` and
`return` label function signatures, and field sets produce a derived record
holding the labeled fields plus the original record as `d`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from ..errors import FlnError, SourceLoc
from ..frontend import cast as C
from ..frontend.annotate import AnnotatedDecl
from ..frontend.pragma import PragmaDirective, PragmaKind
from ..lattice import Policy
from ..polc import syntax as S
from ..translate.names import c_token, gen_name
from .mapper import UnknownSymbol, UnsupportedConstruct
from .spec import AFun, AInt, AnnotContexts, AnnotSpec, APtr, ARec, ARecDef, AUnit, elaborate_policy, with_policy

CHAR = AInt("char")


class UnknownField(FlnError):
    code = "UnknownField"


class ImplicitDeclaration(FlnError):
    code = "ImplicitDeclaration"
    severity = "warning"


@dataclass
class Derived:
    """A field-set record: `fields` are labeled, the rest is reached through `d`."""

    name: str
    base: str
    policy: Policy
    fields: tuple[str, ...]


@dataclass
class LoweredProgram:
    actx: AnnotContexts
    code: dict[str, S.FunDef] = field(default_factory=dict)
    main: object = None
    display: dict[str, str] = field(default_factory=dict)  # record key -> C spelling
    derived: dict[str, Derived] = field(default_factory=dict)
    decl_specs: dict[int, AnnotSpec] = field(default_factory=dict)  # id(declarator) -> spec
    expr_specs: dict[int, AnnotSpec] = field(default_factory=dict)  # id(C expr) -> spec
    fun_decls: dict[str, list] = field(default_factory=dict)  # name -> declarators
    record_keys: dict[str, str] = field(default_factory=dict)  # C tag -> key
    diagnostics: list[FlnError] = field(default_factory=list)
    policies: list[tuple[PragmaDirective, Policy]] = field(default_factory=list)


def annotate(b: AnnotSpec, p: Policy, loc=None) -> AnnotSpec:
    """Label a spec; on pointers the innermost content carries the policy."""
    if isinstance(b, APtr):
        return APtr(annotate(b.target, p, loc), b.policy)
    if isinstance(b, (AUnit, AFun)):
        raise UnsupportedConstruct("annotations apply to integer, record and pointer types", loc)
    return with_policy(b, p)


def shape(b: AnnotSpec) -> AnnotSpec:
    return with_policy(b, None)


def is_annotated(b: Optional[AnnotSpec]) -> bool:
    return getattr(b, "policy", None) is not None


def content_annotated(b: Optional[AnnotSpec]) -> bool:
    while isinstance(b, APtr):
        if b.policy is not None:
            return True
        b = b.target
    return is_annotated(b)


@dataclass
class _Function:
    name: str
    ret_cell: Optional[str]
    ret: AnnotSpec


class Lowerer:
    def __init__(self) -> None:
        self.out = LoweredProgram(AnnotContexts())
        self.typedefs: dict[str, C.CType] = {}
        self.typedef_names: dict[str, str] = {}  # record key -> first typedef naming it
        self.raw_records: dict[str, C.RecordDef] = {}
        self.scopes: list[dict[str, str]] = [{}]
        self.counter = 0
        self.fn: Optional[_Function] = None
        self.enum_constants: set[str] = set()
        self.bodies: list[C.FunctionDef] = []
        self.inits: list = []
        self.directives: dict[int, list[PragmaDirective]] = {}

    # bookkeeping -----------------------------------------------------------

    def fresh(self, prefix: str) -> str:
        self.counter += 1
        return f"{prefix}{self.counter}"

    def warn(self, exc: FlnError) -> None:
        self.out.diagnostics.append(exc)

    def new_global(self, prefix: str, spec: AnnotSpec) -> S.Var:
        name = self.fresh(prefix)
        self.out.actx.variables[name] = spec
        return S.Var(name)

    def undef(self, spec: AnnotSpec, loc=None) -> S.Var:
        """A value of `spec` standing for something the checks do not model."""
        v = self.new_global("$undef", spec)
        return S.Var(v.name, loc=loc, origin="undef")

    # types -----------------------------------------------------------------

    def record_key(self, tag: str) -> str:
        return self.out.record_keys.get(tag, tag)

    def register_record(self, rec: C.RecordDef, key: Optional[str] = None) -> str:
        key = key or self.record_key(rec.tag)
        self.out.record_keys[rec.tag] = key
        self.raw_records[key] = rec
        for f in rec.fields:
            self.register_spec(f.spec)
        kw = "union" if rec.union else "struct"
        if not rec.tag.startswith("__anon_"):
            self.out.display.setdefault(key, f"{kw} {rec.tag}")
        fields = tuple(self.spec_of(f.ctype) for f in rec.fields)
        names = tuple(f.name or f"$f{i}" for i, f in enumerate(rec.fields))
        self.out.actx.records[key] = ARecDef(key, fields, names)
        return key

    def register_spec(self, spec: C.Specifier) -> None:
        if spec.record is not None and spec.record.fields is not None:
            self.register_record(spec.record)

    def spec_of(self, t: C.CType) -> AnnotSpec:
        if isinstance(t, C.CVoid):
            return AUnit()
        if isinstance(t, C.CNamed):
            spelled = t.spelling
            if t.name in self.typedefs:
                inner = self.spec_of(self.typedefs[t.name])
                if isinstance(inner, AInt):
                    return AInt(spelled, " ".join(t.quals + (inner.aka or inner.cname,)))
                return inner
            return AInt(spelled)
        if isinstance(t, C.CRecord):
            key = self.record_key(t.tag)
            if key not in self.out.actx.records:
                # declared but never defined here: an opaque record
                self.out.actx.records[key] = ARecDef(key, (), ())
                kw = "union" if t.union else "struct"
                self.out.display.setdefault(key, f"{kw} {t.tag}")
            return ARec(key)
        if isinstance(t, C.CPointer):
            if isinstance(t.target, C.CFunction):
                return self.spec_of(t.target)
            return APtr(self.spec_of(t.target))
        if isinstance(t, C.CFunction):
            return AFun(tuple(self.spec_of(p) for p in t.params), self.spec_of(t.ret),
                        variadic=t.variadic)
        raise UnsupportedConstruct(f"unsupported C type {C.spelling(t)}")

    # directives ------------------------------------------------------------

    def object_spec(self, d: C.Declarator, dirs: list[PragmaDirective]) -> AnnotSpec:
        b = self.spec_of(d.ctype)
        for pd in dirs:
            if pd.kind is not PragmaKind.REQUIRES:
                continue
            p = elaborate_policy(pd.sequence)
            self.out.policies.append((pd, p))
            if pd.field_set is not None:
                return self.derived(b, p, pd)
            b = annotate(b, p, pd.location)
        return b

    def derived(self, b: AnnotSpec, p: Policy, pd: PragmaDirective) -> AnnotSpec:
        """Field-set annotation: a new record with the labeled fields and `d`."""
        inner, depth = b, 0
        while isinstance(inner, APtr):
            inner, depth = inner.target, depth + 1
        if not isinstance(inner, ARec):
            raise UnsupportedConstruct("a field set requires a record type", pd.location)
        base = self.out.actx.records[inner.name]
        name = gen_name(c_token(inner.name), p)
        fields, names = [], []
        for fname, _ in pd.field_set:
            if fname not in base.field_names:
                raise UnknownField(f"'{inner.name}' has no member named '{fname}'", pd.location)
            i = base.field_names.index(fname)
            fields.append(annotate(base.fields[i], p, pd.location))
            names.append(fname)
        rec = ARecDef(name, tuple(fields) + (ARec(inner.name),), tuple(names) + ("d",))
        old = self.out.actx.records.get(name)
        if old is not None and old != rec:
            raise UnsupportedConstruct(
                f"field sets {names} and {list(old.field_names[:-1])} of '{inner.name}' "
                f"under one policy are not supported together", pd.location)
        self.out.actx.records[name] = rec
        self.out.derived[name] = Derived(name, inner.name, p, tuple(names))
        out: AnnotSpec = ARec(name)
        for _ in range(depth):
            out = APtr(out)
        return out

    def function_spec(self, d: C.Declarator, dirs: list[PragmaDirective]) -> AFun:
        t = d.ctype
        assert isinstance(t, C.CFunction)
        params = [self.spec_of(p) for p in t.params]
        ret = self.spec_of(t.ret)
        for pd in dirs:
            p = elaborate_policy(pd.sequence)
            self.out.policies.append((pd, p))
            if pd.kind is PragmaKind.PARAM:
                idxs = range(len(params)) if pd.index is None else [pd.index - 1]
                for i in idxs:
                    params[i] = annotate(params[i], p, pd.location)
            elif pd.kind is PragmaKind.RETURN:
                ret = annotate(ret, p, pd.location)
        return AFun(tuple(params), ret, variadic=t.variadic)

    # declarations ------------------------------------------------------------

    def declare_function(self, d: C.Declarator, dirs: list[PragmaDirective]) -> None:
        spec = self.function_spec(d, dirs)
        self.out.fun_decls.setdefault(d.name, []).append(d)
        known = self.out.actx.functions.get(d.name)
        if known is None or dirs or not known.prototyped:
            if known is None or dirs or spec.params:
                self.out.actx.functions[d.name] = spec
        self.out.decl_specs[id(d)] = self.out.actx.functions[d.name]

    def declare_object(self, d: C.Declarator, dirs: list[PragmaDirective], local: bool):
        spec = self.object_spec(d, dirs)
        scope = self.scopes[-1]
        if local:
            cell = f"{self.fn.name}.{d.name}"
            if cell in self.out.actx.variables:
                cell = self.fresh(cell + "#")
        else:
            cell = d.name
            old = self.out.actx.variables.get(cell)
            if old is not None and not dirs and old != APtr(spec):
                spec = old.target  # an earlier annotated declaration governs
        self.out.decl_specs[id(d)] = spec
        scope[d.name] = cell
        self.out.actx.variables[cell] = APtr(spec)
        return cell, spec

    def declaration(self, decl: C.Declaration, local: bool) -> list:
        """Register the declaration; returns initializer code."""
        self.register_spec(decl.spec)
        dirs = self.directives.get(id(decl), [])
        if decl.is_typedef:
            for d in decl.declarators:
                if d.name is None:
                    continue
                self.typedefs[d.name] = d.ctype
                t = d.ctype
                if isinstance(t, C.CRecord):
                    key = self.record_key(t.tag)
                    if t.tag.startswith("__anon_") and key == t.tag:
                        # an anonymous struct is known by its typedef name
                        rec = self.raw_records.pop(key, None)
                        self.out.actx.records.pop(key, None)
                        self.out.record_keys[t.tag] = d.name
                        if rec is not None:
                            self.register_record(rec, d.name)
                        key = d.name
                    self.out.display[key] = d.name
            return []
        code = []
        for d in decl.declarators:
            if d.name is None:
                continue
            if d.is_function or isinstance(d.ctype, C.CFunction):
                if d.params is None:
                    continue
                self.declare_function(d, dirs)
                continue
            cell, spec = self.declare_object(d, dirs, local)
            if d.init is not None:
                code.append(self.initialize(S.Var(cell, loc=d.loc), spec, d.init))
        return code

    def initialize(self, target: S.Var, spec: AnnotSpec, init: C.Expr):
        value = self.init_value(spec, init)
        return S.Assign(target, value, loc=init.loc, origin="init")

    def init_value(self, spec: AnnotSpec, init: C.Expr):
        if not isinstance(init, C.InitList):
            return self.rv(init)[0]
        self.out.expr_specs[id(init)] = spec
        if isinstance(spec, ARec):
            rec = self.out.actx.records.get(spec.name)
            if rec is not None and rec.fields:
                return self.record_init(spec.name, rec, init)
        effects = [self.init_value(AInt(), x) if isinstance(x, C.InitList) else self.rv(x)[0]
                   for _, x in init.items]
        return self.seq(effects, self.undef(shape(spec), init.loc))

    def record_init(self, key: str, rec: ARecDef, init: C.InitList):
        values: list = [None] * len(rec.fields)
        derived = self.out.derived.get(key)
        inner_items: list = []
        pos = 0
        for name, x in init.items:
            if name is not None and name in rec.field_names:
                pos = rec.field_names.index(name)
            elif name is not None and derived is not None:
                inner_items.append((name, x))
                continue
            elif name is not None:
                raise UnknownField(f"'{key}' has no member named '{name}'", x.loc)
            if pos >= len(rec.fields):
                break
            values[pos] = self.init_value(rec.fields[pos], x)
            pos += 1
        if derived is not None and inner_items and values[-1] is None:
            base = self.out.actx.records[derived.base]
            sub = C.InitList(init.loc, init.span, inner_items)
            values[-1] = self.record_init(derived.base, base, sub)
        fields = tuple(v if v is not None else self.undef(shape(f) if not is_annotated(f) else f,
                                                           init.loc)
                       for v, f in zip(values, rec.fields))
        return S.Record(key, fields, loc=init.loc)

    # sequencing ------------------------------------------------------------

    def seq(self, items: list, last=None):
        out = last if last is not None else S.UnitVal()
        for e in reversed(items):
            out = S.Let("_", None, e, out, loc=getattr(e, "loc", None), origin="seq")
        return out

    # expressions -----------------------------------------------------------

    def lookup(self, name: str) -> Optional[str]:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return None

    def note(self, e: C.Expr, spec: AnnotSpec) -> AnnotSpec:
        self.out.expr_specs[id(e)] = spec
        return spec

    def rv(self, e: C.Expr):
        """(calculus expression, spec) for the value of a C expression."""
        le, spec = self._rv(e)
        self.note(e, spec)
        return le, spec

    def _rv(self, e: C.Expr):
        loc = e.loc
        if isinstance(e, C.Ident):
            cell = self.lookup(e.name)
            if cell is not None:
                spec = self.out.actx.variables[cell].target
                return S.Deref(S.Var(cell, loc=loc), loc=loc), spec
            if e.name in self.out.actx.functions:
                return S.FunRef(e.name, loc=loc), self.out.actx.functions[e.name]
            if e.name == "NULL" or e.name in self.enum_constants or e.name.isupper():
                return S.Int(0, loc=loc), AInt()
            self.warn(UnknownSymbol(f"'{e.name}' undeclared", loc))
            return self.undef(AInt(), loc), AInt()
        if isinstance(e, (C.IntLit, C.CharLit)):
            return S.Int(e.value if isinstance(e, C.IntLit) else 1, loc=loc), AInt()
        if isinstance(e, C.StrLit):
            v = self.new_global("$str", APtr(CHAR))
            return S.Var(v.name, loc=loc), APtr(CHAR)
        if isinstance(e, C.SizeOf):
            return S.Int(1, loc=loc), AInt("size_t")
        if isinstance(e, C.Binary):
            l, ls = self.rv(e.left)
            r, rs = self.rv(e.right)
            spec: AnnotSpec = AInt()
            if e.op in ("+", "-") and isinstance(ls, APtr) and not isinstance(rs, APtr):
                spec = ls
            elif e.op == "+" and isinstance(rs, APtr) and not isinstance(ls, APtr):
                spec = rs
            return S.BinOp(e.op, l, r, loc=loc), spec
        if isinstance(e, C.Unary):
            return self._unary(e)
        if isinstance(e, C.Postfix):
            target, spec = self.lv(e.operand)
            cur, _ = self.rv(e.operand)
            step = S.Assign(target, S.BinOp(e.op[0], cur, S.Int(1, loc=loc), loc=loc),
                            loc=loc, origin="assign")
            return S.Let("_", None, step, self.rv(e.operand)[0], loc=loc, origin="seq"), spec
        if isinstance(e, C.Assign):
            return self.assign(e), self.spec_after_assign(e)
        if isinstance(e, C.Call):
            return self.call(e)
        if isinstance(e, C.Member):
            return self.member(e)
        if isinstance(e, C.Index):
            base, bs = self.rv(e.base)
            idx, _ = self.rv(e.index)
            target = bs.target if isinstance(bs, APtr) else AInt()
            return S.Let("_", None, idx, S.Deref(base, loc=loc), loc=loc, origin="seq"), target
        if isinstance(e, C.Cast):
            inner, _ = self.rv(e.operand)
            spec = self.spec_of(e.ctype)
            if isinstance(spec, AUnit):
                return S.Let("_", None, inner, S.UnitVal(loc=loc), loc=loc, origin="seq"), spec
            v = self.new_global("$cast", spec)
            return S.Let("_", None, inner, S.Var(v.name, loc=loc), loc=loc, origin="seq"), spec
        if isinstance(e, C.Conditional):
            c, _ = self.rv(e.cond)
            a, sa = self.rv(e.then)
            b, _ = self.rv(e.other)
            return S.If(c, a, b, loc=loc), sa
        if isinstance(e, C.Comma):
            a, _ = self.rv(e.left)
            b, sb = self.rv(e.right)
            return S.Let("_", None, a, b, loc=loc, origin="seq"), sb
        if isinstance(e, C.InitList):
            return self.init_value(AInt(), e), AInt()
        raise UnsupportedConstruct(f"unsupported expression {type(e).__name__}", loc)

    def _unary(self, e: C.Unary):
        loc = e.loc
        if e.op == "&":
            if isinstance(e.operand, C.Ident) and self.lookup(e.operand.name) is None \
                    and e.operand.name in self.out.actx.functions:
                f = self.out.actx.functions[e.operand.name]
                self.note(e.operand, f)
                return S.FunRef(e.operand.name, loc=loc), f
            target, spec = self.lv(e.operand)
            return replace(target, loc=loc), APtr(spec)
        if e.op == "*":
            v, spec = self.rv(e.operand)
            if isinstance(spec, AFun):
                return v, spec  # calling through `*fp` is calling fp
            target = spec.target if isinstance(spec, APtr) else AInt()
            return S.Deref(v, loc=loc), target
        if e.op in ("++", "--"):
            target, spec = self.lv(e.operand)
            cur, _ = self.rv(e.operand)
            step = S.Assign(target, S.BinOp(e.op[0], cur, S.Int(1, loc=loc), loc=loc),
                            loc=loc, origin="assign")
            return S.Let("_", None, step, self.rv(e.operand)[0], loc=loc, origin="seq"), spec
        if e.op == "-" and isinstance(e.operand, C.IntLit):
            self.note(e.operand, AInt())
            return S.Int(-e.operand.value, loc=loc), AInt()
        v, spec = self.rv(e.operand)
        if e.op == "+":
            return v, spec
        op = {"-": "-", "!": "==", "~": "-"}.get(e.op, e.op)
        return S.BinOp(op, S.Int(0, loc=loc), v, loc=loc), AInt()

    def lv(self, e: C.Expr):
        """(pointer expression, content spec) for the location a C lvalue names."""
        loc = e.loc
        if isinstance(e, C.Ident):
            cell = self.lookup(e.name)
            if cell is not None:
                spec = self.out.actx.variables[cell].target
                self.note(e, spec)
                return S.Var(cell, loc=loc), spec
        if isinstance(e, C.Unary) and e.op == "*":
            v, spec = self.rv(e.operand)
            if isinstance(spec, APtr):
                self.note(e, spec.target)
                return v, spec.target
        if isinstance(e, C.Index):
            base, bs = self.rv(e.base)
            idx, _ = self.rv(e.index)
            if isinstance(bs, APtr):
                self.note(e, bs.target)
                return S.Let("_", None, idx, base, loc=loc, origin="seq"), bs.target
        if isinstance(e, C.Member):
            base, spec, _ = self.member_parts(e)
            v = self.new_global("$field", APtr(spec))
            self.note(e, spec)
            return S.Let("_", None, base, S.Var(v.name, loc=loc), loc=loc, origin="seq"), spec
        # not an addressable object: a fresh cell of the value's type
        val, spec = self.rv(e)
        v = self.new_global("$tmp", APtr(spec))
        return S.Let("_", None, val, S.Var(v.name, loc=loc), loc=loc, origin="seq"), spec

    def spec_after_assign(self, e: C.Assign) -> AnnotSpec:
        return self.out.expr_specs.get(id(e.target), AInt())

    def assign(self, e: C.Assign, as_stmt: bool = False):
        target, spec = self.lv(e.target)
        self.note(e.target, spec)
        # compilers report pointer mismatches at the operator, others at the value
        loc = (e.op_loc or e.loc) if isinstance(spec, APtr) else e.value.loc
        if e.op == "=":
            if isinstance(e.value, C.InitList):
                value = self.init_value(spec, e.value)
            else:
                value, _ = self.rv(e.value)
        else:
            cur, _ = self.rv(e.target)
            rhs, _ = self.rv(e.value)
            value = S.BinOp(e.op[:-1], cur, rhs, loc=loc)
        a = S.Assign(target, value, loc=loc, origin="assign")
        self.note(e, spec)
        if as_stmt:
            return a
        again, _ = self.rv(e.target)
        return S.Let("_", None, a, again, loc=loc, origin="seq")

    def call(self, e: C.Call):
        loc = e.loc
        if isinstance(e.func, C.Ident) and self.lookup(e.func.name) is None \
                and e.func.name not in self.out.actx.functions:
            self.warn(ImplicitDeclaration(
                f"implicit declaration of function '{e.func.name}'", e.func.loc))
            self.out.actx.functions[e.func.name] = AFun((), AInt(), prototyped=False)
        f, fs = self.rv(e.func)
        args = tuple(self.rv(a)[0] for a in e.args)
        ret = fs.ret if isinstance(fs, AFun) else AInt()
        name = callee_name(e.func)
        return S.App(f, args, loc=loc, origin=("call", name)), ret

    def member_parts(self, e: C.Member):
        """(record value, field spec, access path of field indices)."""
        base, bs = self.rv(e.base)
        if e.arrow:
            if not isinstance(bs, APtr):
                raise UnsupportedConstruct(f"'->' on a non-pointer for member '{e.name}'", e.loc)
            base, bs = S.Deref(base, loc=e.loc), bs.target
        if not isinstance(bs, ARec):
            raise UnsupportedConstruct(f"request for member '{e.name}' in something not a structure",
                                       e.loc)
        rec = self.out.actx.records.get(bs.name)
        if rec is None or not rec.fields:
            return base, AInt(), None
        if e.name in rec.field_names[:-1] or (bs.name not in self.out.derived
                                             and e.name in rec.field_names):
            i = rec.field_names.index(e.name)
            return base, rec.fields[i], (i + 1,)
        derived = self.out.derived.get(bs.name)
        if derived is not None:
            inner = self.out.actx.records[derived.base]
            if e.name in inner.field_names:
                i = inner.field_names.index(e.name)
                return base, inner.fields[i], (len(rec.fields), i + 1)
        raise UnknownField(f"'{bs.name}' has no member named '{e.name}'", e.loc)

    def member(self, e: C.Member):
        base, spec, path = self.member_parts(e)
        if path is None:
            return S.Let("_", None, base, self.undef(AInt(), e.loc), loc=e.loc, origin="seq"), spec
        out = base
        for i in path:
            out = S.Field(out, i, loc=e.loc)
        return out, spec

    # statements --------------------------------------------------------------

    def stmts(self, items: list[C.Stmt]) -> list:
        out = []
        for s in items:
            out.extend(self.stmt(s))
        return out

    def stmt(self, s: C.Stmt) -> list:
        if isinstance(s, C.Declaration):
            return self.declaration(s, local=True)
        if isinstance(s, C.RecordDecl):
            self.register_record(s.record)
            return []
        if isinstance(s, C.ExprStmt):
            if s.expr is None:
                return []
            if isinstance(s.expr, C.Assign):
                return [self.assign(s.expr, as_stmt=True)]
            return [self.rv(s.expr)[0]]
        if isinstance(s, C.Compound):
            self.scopes.append({})
            try:
                return [self.seq(self.stmts(s.items))]
            finally:
                self.scopes.pop()
        if isinstance(s, C.If):
            c, _ = self.rv(s.cond)
            then = self.block(s.then)
            other = self.block(s.other) if s.other is not None else S.UnitVal()
            return [S.If(c, then, other, loc=s.cond.loc, origin="if")]
        if isinstance(s, C.While):
            c, _ = self.rv(s.cond)
            return [S.If(c, self.block(s.body), S.UnitVal(), loc=s.cond.loc, origin="if")]
        if isinstance(s, C.For):
            self.scopes.append({})
            try:
                pre = self.stmt(s.init) if s.init is not None else []
                body = self.block(s.body)
                if s.step is not None:
                    body = S.Let("_", None, body, self.seq([self.rv(s.step)[0]]), origin="seq")
                if s.cond is not None:
                    c, _ = self.rv(s.cond)
                    loop = S.If(c, body, S.UnitVal(), loc=s.cond.loc, origin="if")
                else:
                    loop = body
                return [self.seq(pre + [loop])]
            finally:
                self.scopes.pop()
        if isinstance(s, C.Return):
            if s.value is None:
                return []
            if self.fn is None or self.fn.ret_cell is None:
                return [self.rv(s.value)[0]]
            spec = self.fn.ret
            if isinstance(s.value, C.InitList):
                value = self.init_value(spec, s.value)
            else:
                value, _ = self.rv(s.value)
            self.note(s.value, self.out.expr_specs.get(id(s.value), spec))
            return [S.Assign(S.Var(self.fn.ret_cell, loc=s.loc), value, loc=s.value.loc,
                             origin="return")]
        # jumps, directives, opaque regions and pragmas do nothing the checks see
        return []

    def block(self, s: Optional[C.Stmt]):
        if s is None:
            return S.UnitVal()
        self.scopes.append({})
        try:
            return self.seq(self.stmt(s))
        finally:
            self.scopes.pop()

    # functions -----------------------------------------------------------------

    def function(self, fd: C.FunctionDef) -> S.FunDef:
        d = fd.declarator
        spec = self.out.actx.functions[d.name]
        ret_cell = None
        ret = shape(spec.ret)
        if not isinstance(spec.ret, AUnit):
            ret_cell = f"{d.name}.$ret"
            self.out.actx.variables[ret_cell] = APtr(ret)
        self.fn = _Function(d.name, ret_cell, ret)
        self.scopes.append({})
        try:
            params, entry = [], []
            for i, pd in enumerate(d.params or []):
                pname = pd.name or f"$p{i + 1}"
                arg = f"{pname}$arg"
                params.append(arg)
                pspec = spec.params[i] if i < len(spec.params) else self.spec_of(pd.ctype)
                cell = f"{d.name}.{pname}"
                self.out.actx.variables[cell] = APtr(shape(pspec))
                self.out.decl_specs[id(pd)] = pspec
                self.scopes[-1][pname] = cell
                entry.append(S.Assign(S.Var(cell, loc=pd.loc), S.Var(arg, loc=pd.loc),
                                      loc=pd.loc, origin="param-init"))
            body = self.stmts(fd.body.items)
            last = S.Deref(S.Var(ret_cell, loc=fd.loc), loc=fd.loc) if ret_cell else None
            return S.FunDef(d.name, tuple(params), self.seq(entry + body, last))
        finally:
            self.scopes.pop()
            self.fn = None

    # units -------------------------------------------------------------------

    def add_unit(self, unit: C.TranslationUnit, annotated: list[AnnotatedDecl]) -> None:
        """Register the file-scope declarations of one unit."""
        for a in annotated:
            self.directives[id(a.node)] = a.bound
        self.enum_constants |= getattr(unit, "enum_constants", set())
        for item in unit.items:
            try:
                if isinstance(item, C.Declaration):
                    self.inits.extend(self.declaration(item, local=False))
                elif isinstance(item, C.RecordDecl):
                    self.register_record(item.record)
                elif isinstance(item, C.FunctionDef):
                    self.register_spec(item.spec)
                    self.declare_function(item.declarator, self.directives.get(id(item), []))
                    self.bodies.append(item)
            except FlnError as exc:
                self.out.diagnostics.append(exc)

    def finish(self) -> LoweredProgram:
        for fd in self.bodies:
            try:
                self.out.code[fd.declarator.name] = self.function(fd)
            except FlnError as exc:
                self.out.diagnostics.append(exc)
                self.out.code.pop(fd.declarator.name, None)
        self.out.main = self.seq(self.inits)
        return self.out


def callee_name(e: C.Expr) -> str:
    """How a compiler names the called function in diagnostics."""
    while isinstance(e, C.Unary) and e.op == "*":
        e = e.operand
    if isinstance(e, C.Ident):
        return e.name
    if isinstance(e, C.Member):
        return e.name
    return "<call>"


def lower_units(units: list[tuple[C.TranslationUnit, list[AnnotatedDecl]]]) -> LoweredProgram:
    """Lower files in dependency order (dependencies first) into one program."""
    lw = Lowerer()
    for unit, annotated in units:
        lw.add_unit(unit, annotated)
    return lw.finish()
