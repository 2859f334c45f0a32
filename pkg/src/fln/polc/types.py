"""Security types of the labeled calculus and their subtyping."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from ..lattice import BOTTOM, UNLABELED, Policy, flow_join, flow_leq


@dataclass(frozen=True)
class UnitType:
    is_unit = True

    def __str__(self) -> str:
        return "unit"


UNIT = UnitType()


@dataclass(frozen=True)
class IntBase:
    """Integers; `cname` keeps the C spelling for generated names only."""

    cname: str = field(default="int", compare=False)
    aka: Optional[str] = field(default=None, compare=False)

    def __str__(self) -> str:
        return "int"


@dataclass(frozen=True)
class PtrBase:
    target: "SecurityType"

    def __str__(self) -> str:
        return f"ptr({self.target})"


@dataclass(frozen=True)
class RecordBase:
    name: str

    def __str__(self) -> str:
        return self.name


BaseType = Union[IntBase, PtrBase, RecordBase]


@dataclass(frozen=True)
class Simple:
    base: BaseType
    policy: Policy
    is_unit = False

    def outer_policy(self) -> Policy:
        return self.policy

    def with_policy(self, p: Policy) -> "Simple":
        return Simple(self.base, p)

    def __str__(self) -> str:
        return f"{self.base} {self.policy}"


@dataclass(frozen=True)
class FunType:
    """[pc](t1, ..., tn -> t)^label; `de_index` marks the relabeling parameter."""

    params: tuple["SecurityType", ...]
    ret: "SecurityType"
    pc: Policy = BOTTOM
    label: Policy = BOTTOM
    de_index: Optional[int] = None
    variadic: bool = False
    prototyped: bool = True  # False: arguments are not checked
    is_unit = False

    @property
    def de_flag(self) -> bool:
        return self.de_index is not None

    def outer_policy(self) -> Policy:
        return self.label

    def with_policy(self, p: Policy) -> "FunType":
        return FunType(self.params, self.ret, self.pc, p, self.de_index, self.variadic,
                       self.prototyped)

    def __str__(self) -> str:
        de = "(d&e)" if self.de_flag else ""
        params = ", ".join(str(p) for p in self.params) or "unit"
        return f"{de}[{self.pc}]({params} -> {self.ret})^{self.label}"


SecurityType = Union[UnitType, Simple, FunType]


def int_t(p: Policy = UNLABELED, cname: str = "int") -> Simple:
    return Simple(IntBase(cname), p)


def ptr_t(target: SecurityType, p: Policy = UNLABELED) -> Simple:
    return Simple(PtrBase(target), p)


def rec_t(name: str, p: Policy = UNLABELED) -> Simple:
    return Simple(RecordBase(name), p)


def subtype(a: SecurityType, b: SecurityType) -> bool:
    if a == b:
        return True
    if isinstance(a, UnitType) or isinstance(b, UnitType):
        return False
    if isinstance(a, Simple) and isinstance(b, Simple):
        return a.base == b.base and flow_leq(a.policy, b.policy)
    if isinstance(a, FunType) and isinstance(b, FunType):
        return (
            len(a.params) == len(b.params)
            and a.de_index == b.de_index
            and flow_leq(b.pc, a.pc)
            and all(subtype(pb, pa) for pa, pb in zip(a.params, b.params))
            and subtype(a.ret, b.ret)
            and flow_leq(a.label, b.label)
        )
    return False


def join_type(s: SecurityType, p: Policy) -> SecurityType:
    """s ⊔ ρ: join `p` into the outermost policy (unit is unaffected)."""
    if isinstance(s, UnitType):
        return s
    return s.with_policy(flow_join(s.outer_policy(), p))


def lub(a: SecurityType, b: SecurityType) -> Optional[SecurityType]:
    """Least common supertype when the two differ only in outer policy."""
    if subtype(a, b):
        return b
    if subtype(b, a):
        return a
    if isinstance(a, Simple) and isinstance(b, Simple) and a.base == b.base:
        try:
            return a.with_policy(flow_join(a.policy, b.policy))
        except Exception:
            return None
    return None


def policies_in(s: SecurityType):
    """Every policy mentioned anywhere in a type."""
    if isinstance(s, Simple):
        yield s.policy
        if isinstance(s.base, PtrBase):
            yield from policies_in(s.base.target)
    elif isinstance(s, FunType):
        yield s.pc
        yield s.label
        for p in s.params:
            yield from policies_in(p)
        yield from policies_in(s.ret)


@dataclass
class RecordDef:
    name: str
    fields: tuple[SecurityType, ...]
    field_names: tuple[str, ...] = ()


@dataclass
class TypingContexts:
    """D (records), F (functions), Γ (variables) and Σ (store typing)."""

    records: dict[str, RecordDef] = field(default_factory=dict)
    functions: dict[str, FunType] = field(default_factory=dict)
    variables: dict[str, SecurityType] = field(default_factory=dict)
    store: dict[int, SecurityType] = field(default_factory=dict)

    def bind(self, name: str, s: SecurityType) -> "TypingContexts":
        vs = dict(self.variables)
        vs[name] = s
        return TypingContexts(self.records, self.functions, vs, self.store)
