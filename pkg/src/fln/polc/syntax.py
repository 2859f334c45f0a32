"""Expression trees shared by the labeled calculus and the nominal target.

The target calculus uses the same forms without tags, relabels or pairs.
Values appear at elimination positions (dereference, field access,
assignment target, branch condition, relabel argument, callee), so programs
stay close to A-normal form.

Every node may carry `loc` (a source location) and `origin` (a hint naming
the source construct, used when rendering type errors).  Neither takes
part in equality.  Tags (`@s`) on values and allocations are likewise
ignored by equality; `strip_tags` removes them explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Callable, Optional, Union

from ..errors import SourceLoc
from ..lattice import Policy


def _meta():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    tag: Any = _meta()
    loc: Optional[SourceLoc] = _meta()
    origin: Any = _meta()


@dataclass(frozen=True)
class Int:
    value: int
    tag: Any = _meta()
    loc: Optional[SourceLoc] = _meta()
    origin: Any = _meta()


@dataclass(frozen=True)
class UnitVal:
    tag: Any = _meta()
    loc: Optional[SourceLoc] = _meta()
    origin: Any = _meta()


@dataclass(frozen=True)
class FunRef:
    name: str
    tag: Any = _meta()
    loc: Optional[SourceLoc] = _meta()
    origin: Any = _meta()


@dataclass(frozen=True)
class Loc:
    address: int
    tag: Any = _meta()
    loc: Optional[SourceLoc] = _meta()
    origin: Any = _meta()


@dataclass(frozen=True)
class Record:
    name: str
    fields: tuple
    tag: Any = _meta()
    loc: Optional[SourceLoc] = _meta()
    origin: Any = _meta()


@dataclass(frozen=True)
class Hole:
    """The missing side of a one-sided store entry."""

    def __str__(self) -> str:
        return "•"


HOLE = Hole()


@dataclass(frozen=True)
class Pair:
    """⟨left|right⟩ over values or expressions; never nested."""

    left: Any
    right: Any
    loc: Optional[SourceLoc] = _meta()
    origin: Any = _meta()


@dataclass(frozen=True)
class BinOp:
    op: str
    left: Any
    right: Any
    loc: Optional[SourceLoc] = _meta()
    origin: Any = _meta()


@dataclass(frozen=True)
class App:
    func: Any
    args: tuple
    loc: Optional[SourceLoc] = _meta()
    origin: Any = _meta()


@dataclass(frozen=True)
class Let:
    name: str
    ann: Any
    bound: Any
    body: Any
    loc: Optional[SourceLoc] = _meta()
    origin: Any = _meta()


@dataclass(frozen=True)
class Field:
    value: Any
    index: int  # 1-based
    loc: Optional[SourceLoc] = _meta()
    origin: Any = _meta()


@dataclass(frozen=True)
class If:
    cond: Any
    then: Any
    other: Any
    loc: Optional[SourceLoc] = _meta()
    origin: Any = _meta()


@dataclass(frozen=True)
class Assign:
    target: Any
    value: Any
    loc: Optional[SourceLoc] = _meta()
    origin: Any = _meta()


@dataclass(frozen=True)
class New:
    value: Any
    tag: Any = _meta()
    loc: Optional[SourceLoc] = _meta()
    origin: Any = _meta()


@dataclass(frozen=True)
class Deref:
    value: Any
    loc: Optional[SourceLoc] = _meta()
    origin: Any = _meta()


@dataclass(frozen=True)
class Relabel:
    """reLab(target ⇐ source) value."""

    target: Policy
    source: Policy
    value: Any
    loc: Optional[SourceLoc] = _meta()
    origin: Any = _meta()


Value = Union[Var, Int, UnitVal, FunRef, Loc, Record, Pair]
Expr = Any

VALUE_TYPES = (Var, Int, UnitVal, FunRef, Loc, Record)


def is_value(e: Expr) -> bool:
    if isinstance(e, VALUE_TYPES):
        return True
    if isinstance(e, Pair):
        return is_value(e.left) and is_value(e.right)
    return False


def children(e: Expr) -> list:
    if isinstance(e, Record):
        return list(e.fields)
    if isinstance(e, Pair):
        return [e.left, e.right]
    if isinstance(e, BinOp):
        return [e.left, e.right]
    if isinstance(e, App):
        return [e.func, *e.args]
    if isinstance(e, Let):
        return [e.bound, e.body]
    if isinstance(e, (Field, Deref, New, Relabel)):
        return [e.value]
    if isinstance(e, If):
        return [e.cond, e.then, e.other]
    if isinstance(e, Assign):
        return [e.target, e.value]
    return []


def walk(e: Expr):
    yield e
    for c in children(e):
        yield from walk(c)


def map_children(e: Expr, f: Callable[[Expr], Expr]) -> Expr:
    if isinstance(e, Record):
        return replace(e, fields=tuple(f(x) for x in e.fields))
    if isinstance(e, Pair):
        return replace(e, left=f(e.left), right=f(e.right))
    if isinstance(e, BinOp):
        return replace(e, left=f(e.left), right=f(e.right))
    if isinstance(e, App):
        return replace(e, func=f(e.func), args=tuple(f(a) for a in e.args))
    if isinstance(e, Let):
        return replace(e, bound=f(e.bound), body=f(e.body))
    if isinstance(e, (Field, Deref, New, Relabel)):
        return replace(e, value=f(e.value))
    if isinstance(e, If):
        return replace(e, cond=f(e.cond), then=f(e.then), other=f(e.other))
    if isinstance(e, Assign):
        return replace(e, target=f(e.target), value=f(e.value))
    return e


def project(e: Expr, side: int) -> Expr:
    """⌊e⌋ᵢ: pick one side of every pair."""
    if isinstance(e, Pair):
        return e.left if side == 1 else e.right
    if not children(e):
        return e
    return map_children(e, lambda c: project(c, side))


def contains_pair(e: Expr) -> bool:
    return any(isinstance(x, Pair) for x in walk(e))


def subst(e: Expr, name: str, v: Expr) -> Expr:
    """e[name ⇐ v]; inside a pair each side receives its projection of v."""
    if isinstance(e, Var):
        return v if e.name == name else e
    if isinstance(e, Pair):
        return replace(e, left=subst(e.left, name, project(v, 1)),
                       right=subst(e.right, name, project(v, 2)))
    if isinstance(e, Let):
        body = e.body if e.name == name else subst(e.body, name, v)
        return replace(e, bound=subst(e.bound, name, v), body=body)
    if not children(e):
        return e
    return map_children(e, lambda c: subst(c, name, v))


def free_vars(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Let):
        return free_vars(e.bound) | (free_vars(e.body) - {e.name})
    out: set[str] = set()
    for c in children(e):
        out |= free_vars(c)
    return out


def strip_tags(e: Expr) -> Expr:
    if hasattr(e, "tag") and getattr(e, "tag") is not None:
        e = replace(e, tag=None)
    if not children(e):
        return e
    return map_children(e, strip_tags)


def erase(e: Expr) -> Expr:
    """Remove tags and relabels; what remains is the unannotated program."""
    if isinstance(e, Relabel):
        return erase(e.value)
    e = strip_tags(e) if hasattr(e, "tag") else e
    if not children(e):
        return e
    return map_children(e, erase)


def contains_relabel(e: Expr) -> bool:
    return any(isinstance(x, Relabel) for x in walk(e))


@dataclass(frozen=True)
class FunDef:
    name: str
    params: tuple[str, ...]
    body: Expr


def expr_size(e: Expr) -> int:
    return sum(1 for _ in walk(e))
