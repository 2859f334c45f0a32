"""Type translation from the labeled calculus to the nominal target.

Policies U and ⊥ erase to the bare type.  Any other policy turns the type
into a generated record.  Two record layouts exist: "copy" gives T ρ the
translated fields of T (all labelings of T share one layout), "nest"
wraps the whole record as the single field `d`, which is what the emitted
C uses because a struct definition may live outside the project.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..errors import FlnError
from ..lattice import Policy
from ..muc.types import INT, UNIT, MFun, MInt, MPtr, MRecord, MRecordDef, MucType
from ..polc.types import (
    FunType,
    IntBase,
    PtrBase,
    RecordBase,
    RecordDef,
    SecurityType,
    Simple,
    TypingContexts,
    UnitType,
)
from .names import NameCollision, c_token, gen_name

ANONYMOUS = "struct <anonymous>"
LAYOUTS = ("copy", "nest")


class UnknownRecord(FlnError):
    code = "UnknownRecord"


class UnresolvedPlaceholder(FlnError):
    code = "UnresolvedPlaceholder"


def erases(p: Policy) -> bool:
    return not p.is_meaningful


@dataclass
class GeneratedDef:
    """One generated record; `fields` is None while it is a placeholder."""

    name: str
    base: object  # IntBase | PtrBase | RecordBase
    policy: Policy
    kind: str  # "wrap", "copy" or "fields"
    fields: Optional[tuple[MucType, ...]] = None
    field_names: tuple[str, ...] = ()
    c_base: str = "int"  # C spelling of the wrapped type

    @property
    def provenance(self) -> tuple:
        return (self.kind, str(self.base) if not isinstance(self.base, IntBase) else self.c_base,
                self.policy)


@dataclass
class GeneratedDefs:
    defs: dict[str, GeneratedDef] = field(default_factory=dict)

    def add(self, d: GeneratedDef, loc=None) -> GeneratedDef:
        old = self.defs.get(d.name)
        if old is None:
            self.defs[d.name] = d
            return d
        if old.provenance != d.provenance:
            raise NameCollision(
                f"generated name '{d.name}' stands for both {old.provenance[1]} at {old.policy} "
                f"({old.kind}) and {d.provenance[1]} at {d.policy} ({d.kind})", loc)
        return old

    def merge(self, other: "GeneratedDefs") -> None:
        for d in other.defs.values():
            self.add(d)

    @property
    def provenance(self) -> dict[str, tuple]:
        return {n: d.provenance for n, d in self.defs.items()}

    def records(self) -> dict[str, MRecordDef]:
        out = {}
        for n, d in self.defs.items():
            if d.fields is None:
                raise UnresolvedPlaceholder(f"generated record '{n}' was never filled")
            out[n] = MRecordDef(n, d.fields, d.field_names)
        return out

    def __len__(self) -> int:
        return len(self.defs)


@dataclass
class TypeTranslator:
    records: dict[str, RecordDef] = field(default_factory=dict)
    layout: str = "copy"
    defs: GeneratedDefs = field(default_factory=GeneratedDefs)
    display: dict[str, tuple[str, Optional[str]]] = field(default_factory=dict)
    derived: set[str] = field(default_factory=set)  # field-set records, themselves generated
    user: dict[str, MRecordDef] = field(default_factory=dict)
    filling: set[str] = field(default_factory=set)

    def __post_init__(self) -> None:
        if self.layout not in LAYOUTS:
            raise ValueError(f"unknown record layout {self.layout!r}")

    # names -------------------------------------------------------------

    def record_type(self, name: str) -> MRecord:
        if name in self.derived:
            return MRecord(name, aka=ANONYMOUS)
        disp, aka = self.display.get(name, (None, None))
        return MRecord(name, disp, aka)

    def base_token(self, base, inner: Optional[SecurityType] = None) -> str:
        if isinstance(base, IntBase):
            return c_token(base.cname)
        if isinstance(base, RecordBase):
            return c_token(base.name)
        if isinstance(base, PtrBase):
            t = self.type(base.target)
            return c_token(str(t)) + "p"
        raise ValueError(f"no token for base {base!r}")

    # types ---------------------------------------------------------------

    def type(self, s: SecurityType) -> MucType:
        if isinstance(s, UnitType):
            return UNIT
        if isinstance(s, FunType):
            params = tuple(self.type(p) for p in s.params) if s.prototyped else None
            return MFun(params, self.type(s.ret), s.variadic)
        if not isinstance(s, Simple):
            raise TypeError(f"not a security type: {s!r}")
        bare = self.bare(s.base)
        if erases(s.policy):
            return bare
        return MRecord(self.wrapper(s.base, s.policy).name, aka=ANONYMOUS)

    def bare(self, base) -> MucType:
        if isinstance(base, IntBase):
            if base.cname == "int" and base.aka is None:
                return INT
            return MInt(base.cname, base.aka)
        if isinstance(base, PtrBase):
            return MPtr(self.type(base.target))
        if isinstance(base, RecordBase):
            if base.name not in self.records and base.name not in self.user:
                raise UnknownRecord(f"unknown record type '{base.name}'")
            return self.record_type(base.name)
        raise TypeError(f"unknown base {base!r}")

    def wrapper(self, base, p: Policy) -> GeneratedDef:
        name = gen_name(self.base_token(base), p)
        bare = self.bare(base)
        if isinstance(base, RecordBase) and self.layout == "copy":
            d = GeneratedDef(name, base, p, "copy", None, (), str(bare))
        else:
            d = GeneratedDef(name, base, p, "wrap", (bare,), ("d",), str(bare))
        d = self.defs.add(d)
        if d.kind == "copy" and d.fields is None and base.name in self.user \
                and base.name not in self.filling:
            rec = self.user[base.name]
            d.fields, d.field_names = rec.fields, rec.field_names
        return d

    def user_record(self, name: str) -> MRecordDef:
        if name not in self.user:
            rec = self.records.get(name)
            if rec is None:
                raise UnknownRecord(f"unknown record type '{name}'")
            self.filling.add(name)
            self.user[name] = MRecordDef(name, (), rec.field_names)  # placeholder while filling
            try:
                fields = tuple(self.type(f) for f in rec.fields)
            finally:
                self.filling.discard(name)
            self.user[name] = MRecordDef(name, fields, rec.field_names)
        return self.user[name]

    def register_derived(self, name: str, base_record: str, p: Policy, loc=None) -> GeneratedDef:
        """A field-set record: annotated fields plus the original record as `d`."""
        self.derived.add(name)
        return self.defs.add(GeneratedDef(name, RecordBase(base_record), p, "fields",
                                          c_base=str(self.record_type(base_record))), loc)

    def finish(self) -> None:
        """Fill every placeholder from the translated records."""
        for name in list(self.records):
            self.user_record(name)
        while True:
            pending = [d for d in self.defs.defs.values() if d.fields is None]
            if not pending:
                return
            for d in pending:
                source = d.name if d.kind == "fields" else d.base.name
                if source not in self.records:
                    raise UnresolvedPlaceholder(
                        f"'{d.name}' copies record '{source}', which is not defined")
                rec = self.user_record(source)
                d.fields, d.field_names = rec.fields, rec.field_names

    def typedefs(self) -> dict[str, MRecordDef]:
        self.finish()
        out = {n: self.user[n] for n in self.records}
        out.update(self.defs.records())
        return out


def translate_type(s: SecurityType, records: Optional[dict[str, RecordDef]] = None,
                   layout: str = "copy") -> tuple[MucType, GeneratedDefs]:
    tt = TypeTranslator(dict(records or {}), layout)
    t = tt.type(s)
    tt.finish()
    return t, tt.defs


def translate_typedefs(records: dict[str, RecordDef], layout: str = "copy",
                       derived: Optional[set[str]] = None) -> tuple[dict[str, MRecordDef], GeneratedDefs]:
    """Two phases: names with placeholder bodies first, then the fill."""
    tt = TypeTranslator(dict(records), layout, derived=set(derived or ()))
    for name in records:
        for f in records[name].fields:
            tt.type(f)
    return tt.typedefs(), tt.defs


def translate_contexts(ctx: TypingContexts, layout: str = "copy", tt: Optional[TypeTranslator] = None):
    """⟦F⟧, ⟦Γ⟧ and ⟦Σ⟧ pointwise; relabeling-function markers disappear."""
    from ..muc.checker import MucProgram

    tt = tt or TypeTranslator(dict(ctx.records), layout)
    functions = {n: tt.type(f) for n, f in ctx.functions.items()}
    globals_ = {n: tt.type(s) for n, s in ctx.variables.items()}
    store = {n: tt.type(s) for n, s in ctx.store.items()}
    prog = MucProgram(tt.typedefs(), functions, {}, globals_, store)
    return prog, tt.defs
