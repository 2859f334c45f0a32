"""Small-step evaluation, single and paired.

One machine serves both the single-execution and the paired relation.
`side` is None for the shared execution and 1 or 2 inside a pair; store
entries written inside a pair become one-sided (`⟨v|•⟩`).  Relabels
evaluate to their argument.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Callable, Optional

from ..errors import FlnError, SourceLoc
from . import syntax as S

DEFAULT_FUEL = 10**6


class Stuck(FlnError):
    code = "Stuck"


class FuelExhausted(FlnError):
    code = "FuelExhausted"

    def __init__(self, limit: int):
        self.limit = limit
        super().__init__(f"evaluation did not finish within {limit} steps")


def _c_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


BINOPS: dict[str, Callable[[int, int], int]] = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": _c_div,
    "%": lambda a, b: a - b * _c_div(a, b),
    "==": lambda a, b: int(a == b),
    "!=": lambda a, b: int(a != b),
    "<": lambda a, b: int(a < b),
    "<=": lambda a, b: int(a <= b),
    ">": lambda a, b: int(a > b),
    ">=": lambda a, b: int(a >= b),
    "&&": lambda a, b: int(bool(a) and bool(b)),
    "||": lambda a, b: int(bool(a) or bool(b)),
    "&": lambda a, b: a & b,
    "|": lambda a, b: a | b,
    "^": lambda a, b: a ^ b,
    "<<": lambda a, b: a << b,
    ">>": lambda a, b: a >> b,
}


def project_store(store: dict, side: int) -> dict:
    """⌊σ⌋ᵢ: one-sided entries of the other side vanish."""
    out = {}
    for loc, v in store.items():
        pv = S.project(v, side)
        if pv is not S.HOLE:
            out[loc] = pv
    return out


@dataclass
class Machine:
    code: dict[str, S.FunDef]
    store: dict[int, Any] = field(default_factory=dict)
    store_types: dict[int, Any] = field(default_factory=dict)
    fuel: int = DEFAULT_FUEL
    next_loc: int = 0
    steps: int = 0
    nonpositive_false: bool = False  # target truthiness: every n <= 0 takes the else branch

    def __post_init__(self) -> None:
        if self.store:
            self.next_loc = max(self.next_loc, max(self.store) + 1)

    # store operations --------------------------------------------------

    def _alloc(self, v, side: Optional[int], tag) -> S.Loc:
        loc = self.next_loc
        self.next_loc += 1
        if side is None:
            self.store[loc] = v
        elif side == 1:
            self.store[loc] = S.Pair(v, S.HOLE)
        else:
            self.store[loc] = S.Pair(S.HOLE, v)
        if tag is not None:
            self.store_types[loc] = tag
        return S.Loc(loc)

    def _read(self, loc: S.Loc, side: Optional[int], node):
        if loc.address not in self.store:
            raise Stuck(f"read of undefined location {loc.address}", node.loc)
        v = self.store[loc.address]
        if side is not None:
            v = S.project(v, side)
        if any(x is S.HOLE for x in S.walk(v)):
            raise Stuck(f"location {loc.address} is undefined for this execution", node.loc)
        return v

    def _update(self, loc: S.Loc, v, side: Optional[int], node) -> None:
        if loc.address not in self.store:
            raise Stuck(f"write to undefined location {loc.address}", node.loc)
        old = self.store[loc.address]
        if side is None:
            self.store[loc.address] = v
        elif side == 1:
            self.store[loc.address] = S.Pair(v, S.project(old, 2))
        else:
            self.store[loc.address] = S.Pair(S.project(old, 1), v)

    # reduction ---------------------------------------------------------

    def step(self, e, side: Optional[int] = None):
        """One reduction step of `e`; raises Stuck when no rule applies."""
        if S.is_value(e):
            raise Stuck("value cannot step", getattr(e, "loc", None))
        paired = side is None
        if isinstance(e, S.Pair):
            if not paired:
                raise Stuck("nested pair", e.loc)
            if not S.is_value(e.left):
                return replace(e, left=self.step(e.left, 1))
            return replace(e, right=self.step(e.right, 2))
        if isinstance(e, S.Let):
            if not S.is_value(e.bound):
                return replace(e, bound=self.step(e.bound, side))
            return S.subst(e.body, e.name, e.bound)
        if isinstance(e, S.BinOp):
            if not S.is_value(e.left):
                return replace(e, left=self.step(e.left, side))
            if not S.is_value(e.right):
                return replace(e, right=self.step(e.right, side))
            return self._binop(e)
        if isinstance(e, S.App):
            for i, a in enumerate(e.args):
                if not S.is_value(a):
                    args = list(e.args)
                    args[i] = self.step(a, side)
                    return replace(e, args=tuple(args))
            if isinstance(e.func, S.Pair) and paired:
                return S.Pair(
                    replace(e, func=e.func.left, args=tuple(S.project(a, 1) for a in e.args)),
                    replace(e, func=e.func.right, args=tuple(S.project(a, 2) for a in e.args)),
                    loc=e.loc)
            if not isinstance(e.func, S.FunRef):
                raise Stuck("call of a non-function", e.loc)
            fdef = self.code.get(e.func.name)
            if fdef is None:
                raise Stuck(f"no code for function '{e.func.name}'", e.loc)
            if len(fdef.params) != len(e.args):
                raise Stuck(f"arity mismatch calling '{fdef.name}'", e.loc)
            body = fdef.body
            for name, a in zip(fdef.params, e.args):
                body = S.subst(body, name, a)
            return body
        if isinstance(e, S.New):
            if not S.is_value(e.value):
                return replace(e, value=self.step(e.value, side))
            return self._alloc(e.value, side, e.tag)
        if isinstance(e, S.Assign):
            if not S.is_value(e.value):
                return replace(e, value=self.step(e.value, side))
            t = e.target
            if isinstance(t, S.Pair) and paired:
                return S.Pair(replace(e, target=t.left, value=S.project(e.value, 1)),
                              replace(e, target=t.right, value=S.project(e.value, 2)), loc=e.loc)
            if not isinstance(t, S.Loc):
                raise Stuck("assignment through a non-location", e.loc)
            self._update(t, e.value, side, e)
            return S.UnitVal()
        if isinstance(e, S.Deref):
            v = e.value
            if isinstance(v, S.Pair) and paired:
                return S.Pair(replace(e, value=v.left), replace(e, value=v.right), loc=e.loc)
            if not isinstance(v, S.Loc):
                raise Stuck("dereference of a non-location", e.loc)
            return self._read(v, side, e)
        if isinstance(e, S.Field):
            v = e.value
            if isinstance(v, S.Pair) and paired:
                return S.Pair(replace(e, value=v.left), replace(e, value=v.right), loc=e.loc)
            if not isinstance(v, S.Record) or not 1 <= e.index <= len(v.fields):
                raise Stuck("field access on a non-record", e.loc)
            return v.fields[e.index - 1]
        if isinstance(e, S.If):
            c = e.cond
            if isinstance(c, S.Pair) and paired:
                return S.Pair(
                    S.If(c.left, S.project(e.then, 1), S.project(e.other, 1), loc=e.loc),
                    S.If(c.right, S.project(e.then, 2), S.project(e.other, 2), loc=e.loc),
                    loc=e.loc)
            if not isinstance(c, S.Int) or (c.value < 0 and not self.nonpositive_false):
                raise Stuck("branch on a non-boolean value", e.loc)
            return e.then if c.value > 0 else e.other
        if isinstance(e, S.Relabel):
            v = e.value
            if not S.is_value(v):
                raise Stuck("relabel of a non-value", e.loc)
            if isinstance(v, S.Pair) and paired:
                return S.Pair(replace(e, value=v.left), replace(e, value=v.right), loc=e.loc)
            return v
        raise Stuck(f"no rule for {type(e).__name__}", getattr(e, "loc", None))

    def _binop(self, e: S.BinOp):
        l, r = e.left, e.right
        if isinstance(l, S.Pair) or isinstance(r, S.Pair):
            return S.Pair(self._binop(S.BinOp(e.op, S.project(l, 1), S.project(r, 1), loc=e.loc)),
                          self._binop(S.BinOp(e.op, S.project(l, 2), S.project(r, 2), loc=e.loc)),
                          loc=e.loc)
        if not (isinstance(l, S.Int) and isinstance(r, S.Int)):
            raise Stuck(f"operator '{e.op}' on non-integers", e.loc)
        fn = BINOPS.get(e.op)
        if fn is None:
            raise Stuck(f"unknown operator '{e.op}'", e.loc)
        if e.op in ("/", "%") and r.value == 0:
            raise Stuck("division by zero", e.loc)
        if e.op in ("<<", ">>") and not 0 <= r.value < 64:
            raise Stuck("shift out of range", e.loc)
        return S.Int(fn(l.value, r.value))

    def run(self, e, on_step: Optional[Callable[[Any, Any], None]] = None):
        """Reduce `e` to a value; `on_step(before, after)` sees every step."""
        while not S.is_value(e):
            if self.steps >= self.fuel:
                raise FuelExhausted(self.fuel)
            nxt = self.step(e)
            self.steps += 1
            if on_step is not None:
                on_step(e, nxt)
            e = nxt
        return e


def eval_expr(code: dict[str, S.FunDef], store: dict, e, fuel: int = DEFAULT_FUEL):
    """Single execution; returns (store, value)."""
    if S.contains_pair(e):
        raise Stuck("pairs require the paired evaluator", getattr(e, "loc", None))
    m = Machine(code, dict(store), fuel=fuel)
    v = m.run(e)
    return m.store, v


def eval_paired(code: dict[str, S.FunDef], store: dict, e, fuel: int = DEFAULT_FUEL):
    """Paired execution over a store with possibly one-sided entries."""
    m = Machine(code, dict(store), fuel=fuel)
    v = m.run(e)
    return m.store, v


def _locations(v) -> list[int]:
    return [x.address for x in S.walk(v) if isinstance(x, S.Loc)]


def equivalent_runs(store_a: dict, value_a, store_b: dict, value_b) -> bool:
    """Equality of two final configurations up to a renaming of locations.

    Locations are matched in allocation order, which both runs share when
    they perform the same allocations.
    """
    if len(store_a) != len(store_b):
        return False
    ren = dict(zip(sorted(store_a), sorted(store_b)))

    def rename(v):
        if isinstance(v, S.Loc):
            return S.Loc(ren.get(v.address, -1 - v.address))
        if not S.children(v):
            return v
        return S.map_children(v, rename)

    if S.strip_tags(rename(value_a)) != S.strip_tags(value_b):
        return False
    return all(S.strip_tags(rename(store_a[k])) == S.strip_tags(store_b[ren[k]]) for k in store_a)
