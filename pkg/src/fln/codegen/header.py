"""Wrapper typedefs, conversion functions and per-file generated headers."""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Optional

from ..lattice import Policy
from ..mapper.lower import LoweredProgram
from ..mapper.spec import AFun, AInt, AnnotSpec, APtr, ARec, AUnit, with_policy
from ..polc.types import IntBase, RecordBase, SecurityType, Simple
from ..translate.types import TypeTranslator

HEADER_SUFFIX = "__fln.h"


def emit_policy_typedef(name: str, base: str, fields: Optional[list[tuple[str, str]]] = None) -> str:
    """One wrapper struct; `fields` lists (C type, member) for a field-set record."""
    if fields is None:
        return f"typedef struct {{{base} d;}} {name};"
    members = " ".join(_member(t, f) for t, f in fields)
    return f"typedef struct {{ {members} {base} d; }} {name};"


def _member(ctype: str, fname: str) -> str:
    return f"{ctype}{'' if ctype.endswith('*') else ' '}{fname};"


def emit_relabel_fns(name: str, base: str) -> tuple[str, str]:
    """Writer (base to wrapper) and reader (wrapper to base)."""
    w = f"static inline {name} {name}_w({base} x) {{ {name} r = {{x}}; return r; }}"
    r = f"static inline {base} {name}_r({name} x) {{ return x.d; }}"
    return w, r


def emit_derived_fns(name: str, base: str, fields: list[tuple[str, str]]) -> tuple[str, str]:
    """Conversions for a field-set record, member by member through `d`."""
    put = "".join(f" r.{f} = {t}_w(x.{f});" for t, f in fields)
    get = "".join(f" r.{f} = {t}_r(x.{f});" for t, f in fields)
    w = f"static inline {name} {name}_w({base} x) {{ {name} r;{put} r.d = x; return r; }}"
    r = f"static inline {base} {name}_r({name} x) {{ {base} r = x.d;{get} return r; }}"
    return w, r


@dataclass
class PlanEntry:
    name: str
    base: str  # C spelling of the wrapped type
    fields: Optional[list[tuple[str, str]]] = None
    deps: tuple[str, ...] = ()
    scalar_fields: bool = True  # every labeled field is a wrapper, so conversions exist

    def typedef(self) -> list[str]:
        guard = f"{self.name}_DEFINED"
        return [f"#ifndef {guard}", f"#define {guard}",
                emit_policy_typedef(self.name, self.base, self.fields), "#endif"]

    def functions(self) -> list[str]:
        if self.fields is None:
            fns = emit_relabel_fns(self.name, self.base)
        elif self.scalar_fields:
            fns = emit_derived_fns(self.name, self.base, self.fields)
        else:
            return []
        guard = f"{self.name}_FNS"
        return [f"#ifndef {guard}", f"#define {guard}", *fns, "#endif"]


@dataclass
class HeaderPlan:
    """Generated types one file needs, deduplicated, in first-use order."""

    entries: dict[str, PlanEntry] = field(default_factory=dict)

    def add(self, entry: PlanEntry, namer: "Namer") -> None:
        if entry.name in self.entries:
            return
        for dep in entry.deps:
            self.add(namer.entries[dep], namer)
        self.entries[entry.name] = entry

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries.values())


def header_name(file: str) -> str:
    stem = re.sub(r"\.[A-Za-z]+$", "", file.replace("\\", "/").rsplit("/", 1)[-1])
    return stem + HEADER_SUFFIX


def generate_header(plan: HeaderPlan, file: str) -> tuple[str, str]:
    """(file name, text): guarded typedefs, then conversion functions, in plan order."""
    hname = header_name(file)
    digest = hashlib.sha1((file + "\0" + "\0".join(plan.entries)).encode()).hexdigest()[:10].upper()
    guard = f"FLN_{digest}_H"
    lines = [f"#ifndef {guard}", f"#define {guard}"]
    for e in plan:
        lines.extend(e.typedef())
    for e in plan:
        lines.extend(e.functions())
    lines.append("#endif")
    return hname, "\n".join(lines) + "\n"


class Namer:
    """C names for annotated specs; remembers how to emit every name it hands out."""

    def __init__(self, tt: TypeTranslator, lowered: LoweredProgram):
        self.tt = tt
        self.lowered = lowered
        self.entries: dict[str, PlanEntry] = {}

    def record_c(self, key: str) -> str:
        if key in self.lowered.derived:
            return key
        return self.lowered.display.get(key, f"struct {key}")

    def base_c(self, spec: AnnotSpec) -> str:
        if isinstance(spec, AInt):
            return spec.cname
        if isinstance(spec, ARec):
            return self.record_c(spec.name)
        if isinstance(spec, AUnit):
            return "void"
        return "int"

    def wrapper(self, spec: Optional[AnnotSpec]) -> Optional[str]:
        """Generated name of a labeled integer or record, or of a field-set record."""
        if isinstance(spec, ARec) and spec.policy is None and spec.name in self.lowered.derived:
            return self._derived(spec.name)
        if not isinstance(spec, (AInt, ARec)) or spec.policy is None or not spec.policy.is_meaningful:
            return None
        base = IntBase(spec.cname, spec.aka) if isinstance(spec, AInt) else RecordBase(spec.name)
        name = self.tt.wrapper(base, spec.policy).name
        if name not in self.entries:
            deps = (self._derived(spec.name),) if isinstance(spec, ARec) \
                and spec.name in self.lowered.derived else ()
            self.entries[name] = PlanEntry(name, self.base_c(with_policy(spec, None)), deps=deps)
        return name

    def wrapper_of(self, t: SecurityType) -> Optional[str]:
        """Same as `wrapper`, from a labeled integer type."""
        if isinstance(t, Simple) and isinstance(t.base, IntBase):
            return self.wrapper(AInt(t.base.cname, t.base.aka, t.policy))
        return None

    def _derived(self, key: str) -> str:
        if key not in self.entries:
            d = self.lowered.derived[key]
            rec = self.lowered.actx.records[key]
            fields, deps, scalar = [], [], True
            for spec, fname in zip(rec.fields[:-1], rec.field_names[:-1]):
                inner = self.content(spec)
                if inner is not None:
                    deps.append(inner)
                fields.append((self.ctext(spec), fname))
                scalar = scalar and not isinstance(spec, APtr) and inner is not None
            self.entries[key] = PlanEntry(key, self.record_c(d.base), fields, tuple(deps), scalar)
        return key

    def content(self, spec: Optional[AnnotSpec]) -> Optional[str]:
        """Generated name of the innermost labeled content, through pointers."""
        while isinstance(spec, APtr):
            spec = spec.target
        return self.wrapper(spec)

    def ctext(self, spec: Optional[AnnotSpec]) -> str:
        if isinstance(spec, APtr):
            inner = self.ctext(spec.target)
            return inner + ("*" if inner.endswith("*") else " *")
        if isinstance(spec, AFun):
            return "function"
        if spec is None:
            return "int"
        return self.wrapper(spec) or self.base_c(spec)

    def relabel(self, shape: AnnotSpec, source: Policy, target: Policy,
                check: bool = False) -> tuple[str, str]:
        """Prefix and suffix that move a value of `shape` from one policy to another.

        With `check`, the value is also required to have the source type even
        when nothing changes, so a compiler rejects a mismatch.
        """
        if source == target and not check:
            return "", ""
        s = self.wrapper(with_policy(shape, source))
        t = self.wrapper(with_policy(shape, target))
        pre = (f"{t}_w(" if t else "") + (f"{s}_r(" if s else "")
        post = ")" * ((t is not None) + (s is not None))
        if check and s is None and isinstance(shape, AInt):
            pre, post = f"({shape.cname})(" + pre, post + ")"
        return pre, post
