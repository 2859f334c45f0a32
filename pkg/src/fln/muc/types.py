"""Types of the nominal target calculus."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class MInt:
    cname: str = field(default="int", compare=False)
    aka: Optional[str] = field(default=None, compare=False)  # resolved spelling of a typedef name

    def __str__(self) -> str:
        return self.cname


@dataclass(frozen=True)
class MUnit:
    def __str__(self) -> str:
        return "void"


@dataclass(frozen=True)
class MRecord:
    name: str
    display: Optional[str] = field(default=None, compare=False)  # C spelling when it differs
    aka: Optional[str] = field(default=None, compare=False)

    def __str__(self) -> str:
        return self.display or self.name


@dataclass(frozen=True)
class MPtr:
    target: "MucType"

    def __str__(self) -> str:
        inner = str(self.target)
        return inner + ("*" if inner.endswith("*") else " *")


@dataclass(frozen=True)
class MFun:
    params: Optional[tuple["MucType", ...]]  # None: unprototyped, arguments unchecked
    ret: "MucType"
    variadic: bool = False

    def __str__(self) -> str:
        if self.params is None:
            return f"{self.ret} ()"
        ps = [str(p) for p in self.params] + (["..."] if self.variadic else [])
        return f"{self.ret} ({', '.join(ps) or 'void'})"


@dataclass(frozen=True)
class MOpaque:
    """A type the checker cannot see into (system typedefs, arrays, unions)."""

    name: str

    def __str__(self) -> str:
        return self.name


MucType = Union[MInt, MUnit, MRecord, MPtr, MFun, MOpaque]

INT = MInt()
UNIT = MUnit()


@dataclass
class MRecordDef:
    name: str
    fields: tuple[MucType, ...]
    field_names: tuple[str, ...] = ()

    def index_of(self, fname: str) -> Optional[int]:
        try:
            return self.field_names.index(fname) + 1
        except ValueError:
            return None


def describe(t: MucType) -> str:
    """C spelling with the resolved type appended, as compilers print it."""
    aka = getattr(t, "aka", None)
    if isinstance(t, MPtr):
        inner = t.target
        while isinstance(inner, MPtr):
            inner = inner.target
        aka = getattr(inner, "aka", None)
        if aka:
            return f"{t} {{aka {str(t).replace(str(inner), aka, 1)}}}"
    return f"{t} {{aka {aka}}}" if aka else str(t)


def is_void_ptr(t: MucType) -> bool:
    return isinstance(t, MPtr) and isinstance(t.target, MUnit)


def compatible(a: MucType, b: MucType, c_compat: bool = False) -> bool:
    """Type equality; `c_compat` adds the conversions C performs implicitly."""
    if a == b:
        return True
    if not c_compat:
        return False
    if isinstance(a, MOpaque) or isinstance(b, MOpaque):
        return True
    if isinstance(a, MPtr) and isinstance(b, MPtr):
        if is_void_ptr(a) or is_void_ptr(b):
            return True
        return compatible_pointee(a.target, b.target)
    if isinstance(a, MFun) and isinstance(b, MFun):
        return True
    if (isinstance(a, MFun) and is_void_ptr(b)) or (isinstance(b, MFun) and is_void_ptr(a)):
        return True  # function designators convert to `void *` in practice
    return False


def compatible_pointee(a: MucType, b: MucType) -> bool:
    if a == b:
        return True
    if isinstance(a, MOpaque) or isinstance(b, MOpaque):
        return True
    if isinstance(a, MPtr) and isinstance(b, MPtr):
        return compatible_pointee(a.target, b.target)
    if isinstance(a, MFun) and isinstance(b, MFun):
        return True
    return False
