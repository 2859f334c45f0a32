"""Annotation specs (the β grammar) and their mapping to security types."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from ..lattice import (
    BOTTOM,
    BOTTOM_I,
    BOTTOM_S,
    UNLABELED,
    Label,
    Policy,
    integrity_atom,
    secrecy_atom,
)
from ..frontend.pragma import Projection
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
)


def elaborate_label(atom: str, proj: Projection) -> Label:
    if proj is Projection.SECRECY:
        return Label(secrecy_atom(atom), BOTTOM_I)
    if proj is Projection.INTEGRITY:
        return Label(BOTTOM_S, integrity_atom(atom))
    return Label(secrecy_atom(atom), integrity_atom(atom))


def elaborate_policy(seq) -> Policy:
    """Labels in order with a Bottom terminal appended."""
    seq = list(seq)
    if not seq:
        raise ValueError("an annotation needs at least one label")
    return Policy(tuple(elaborate_label(a, p) for a, p in seq), BOTTOM.terminal)


@dataclass(frozen=True)
class AUnit:
    def __str__(self) -> str:
        return "void"


@dataclass(frozen=True)
class AInt:
    cname: str = "int"
    aka: Optional[str] = None
    policy: Optional[Policy] = None


@dataclass(frozen=True)
class ARec:
    name: str
    policy: Optional[Policy] = None


@dataclass(frozen=True)
class APtr:
    target: "AnnotSpec"
    policy: Optional[Policy] = None


@dataclass(frozen=True)
class AFun:
    params: tuple["AnnotSpec", ...]
    ret: "AnnotSpec"
    de_index: Optional[int] = None
    variadic: bool = False
    prototyped: bool = True


AnnotSpec = Union[AUnit, AInt, ARec, APtr, AFun]


def with_policy(b: AnnotSpec, p: Optional[Policy]) -> AnnotSpec:
    if isinstance(b, (AUnit, AFun)):
        return b
    return type(b)(**{**b.__dict__, "policy": p})


def map_type(b: AnnotSpec) -> SecurityType:
    """Unannotated positions get U; functions get a Bottom pc and label."""
    if isinstance(b, AUnit):
        return UNIT
    if isinstance(b, AFun):
        return FunType(tuple(map_type(p) for p in b.params), map_type(b.ret), BOTTOM, BOTTOM,
                       b.de_index, b.variadic, b.prototyped)
    p = b.policy if b.policy is not None else UNLABELED
    if isinstance(b, AInt):
        return Simple(IntBase(b.cname, b.aka), p)
    if isinstance(b, ARec):
        return Simple(RecordBase(b.name), p)
    if isinstance(b, APtr):
        return Simple(PtrBase(map_type(b.target)), p)
    raise TypeError(f"not an annotation spec: {b!r}")


@dataclass
class ARecDef:
    name: str
    fields: tuple[AnnotSpec, ...]
    field_names: tuple[str, ...] = ()


@dataclass
class AnnotContexts:
    """D_a, F_a and Γ_a of an annotated program."""

    records: dict[str, ARecDef] = field(default_factory=dict)
    functions: dict[str, AFun] = field(default_factory=dict)
    variables: dict[str, AnnotSpec] = field(default_factory=dict)

    def labeled(self) -> TypingContexts:
        return TypingContexts(
            {n: RecordDef(n, tuple(map_type(f) for f in r.fields), r.field_names)
             for n, r in self.records.items()},
            {n: map_type(f) for n, f in self.functions.items()},
            {n: map_type(v) for n, v in self.variables.items()},
        )
