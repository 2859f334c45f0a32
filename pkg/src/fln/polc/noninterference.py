"""Test harnesses over the evaluators: noninterference trials, preservation
and the agreement of paired and single execution."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from ..lattice import BOTTOM, Policy, RelabelCapability, in_high
from . import syntax as S
from .checker import IllTyped, check_program
from .semantics import DEFAULT_FUEL, Machine, equivalent_runs, project_store
from .types import FunType, IntBase, PtrBase, RecordBase, SecurityType, Simple, TypingContexts, UnitType


def high_predicate(attacker: Policy, caps: Iterable[RelabelCapability]) -> Callable[[Policy], bool]:
    caps = list(caps)
    cache: dict[Policy, bool] = {}

    def high(p: Policy) -> bool:
        if p not in cache:
            cache[p] = in_high(attacker, caps, p)
        return cache[p]

    return high


def _outer(s: SecurityType) -> Policy:
    return BOTTOM if isinstance(s, UnitType) else s.outer_policy()


@dataclass
class InputBuilder:
    """Draws values for Γ, allocating cells for pointer-typed inputs."""

    rng: random.Random
    ctx: TypingContexts
    store: dict = field(default_factory=dict)
    store_types: dict = field(default_factory=dict)
    next_loc: int = 0

    def _cell(self, content, s: SecurityType) -> S.Loc:
        loc = self.next_loc
        self.next_loc += 1
        self.store[loc] = content
        self.store_types[loc] = s
        return S.Loc(loc)

    def single(self, s: SecurityType):
        if isinstance(s, UnitType):
            return S.UnitVal()
        if isinstance(s, FunType):
            raise IllTyped("function-typed inputs are not generated")
        if isinstance(s.base, IntBase):
            return S.Int(self.rng.randint(0, 9))
        if isinstance(s.base, RecordBase):
            rec = self.ctx.records[s.base.name]
            return S.Record(rec.name, tuple(self.single(ft) for ft in rec.fields))
        return self._cell(self.single(s.base.target), s)

    def paired(self, s: SecurityType, high: Callable[[Policy], bool]):
        """A value whose two projections agree wherever `s` is low."""
        if isinstance(s, UnitType):
            return S.UnitVal()
        if isinstance(s, FunType):
            raise IllTyped("function-typed inputs are not generated")
        if isinstance(s.base, PtrBase):
            content = self.paired(s.base.target, high)
            return self._cell(content, s)
        if high(s.policy):
            a, b = self.single(s), self.single(s)
            return a if a == b else S.Pair(a, b)
        if isinstance(s.base, RecordBase):
            rec = self.ctx.records[s.base.name]
            return S.Record(rec.name, tuple(self.paired(ft, high) for ft in rec.fields))
        return self.single(s)


@dataclass
class Verdict:
    passed: bool
    seed: int
    left: object = None
    right: object = None
    differing_inputs: bool = False  # whether the high inputs actually differed
    witness: Optional[tuple[dict, dict]] = None


def noninterference_trial(e, ctx: TypingContexts, code: dict, attacker: Policy,
                          caps: Iterable[RelabelCapability], seed: int,
                          result: Optional[SecurityType] = None,
                          fuel: int = DEFAULT_FUEL) -> Verdict:
    """Run `e` on two inputs that agree on low variables and compare outputs."""
    high = high_predicate(attacker, caps)
    if S.contains_relabel(e) or any(S.contains_relabel(f.body) for f in code.values()):
        raise IllTyped("noninterference trials require relabel-free programs")
    if any(ctx.functions[n].de_flag for n in code):
        raise IllTyped("noninterference trials require programs without relabeling functions")
    s = check_program(ctx, code, main=e, expected=result)
    if isinstance(s, UnitType) or high(_outer(s)):
        raise IllTyped(f"result type {s} is not observable by the attacker")
    rng = random.Random(seed)
    builder = InputBuilder(rng, ctx)
    subst: dict[str, object] = {}
    for name in sorted(ctx.variables):
        subst[name] = builder.paired(ctx.variables[name], high)
    prog = e
    for name, v in subst.items():
        prog = S.subst(prog, name, v)
    m = Machine(code, dict(builder.store), fuel=fuel, next_loc=builder.next_loc)
    out = m.run(prog)
    left, right = S.project(out, 1), S.project(out, 2)
    delta1 = {n: S.project(v, 1) for n, v in subst.items()}
    delta2 = {n: S.project(v, 2) for n, v in subst.items()}
    for loc, v in builder.store.items():
        delta1[f"loc{loc}"] = S.project(v, 1)
        delta2[f"loc{loc}"] = S.project(v, 2)
    differing = delta1 != delta2
    ok = S.strip_tags(left) == S.strip_tags(right)
    return Verdict(ok, seed, left, right, differing, None if ok else (delta1, delta2))


def paired_agreement(e, ctx: TypingContexts, code: dict, seed: int,
                     high: Callable[[Policy], bool], fuel: int = DEFAULT_FUEL,
                     per_step: bool = True) -> tuple[bool, str]:
    """Paired run against the two single runs it stands for.

    With `per_step`, every paired step is also compared with one step of
    each projected configuration: a projection either takes that step or
    is unchanged.
    """
    rng = random.Random(seed)
    builder = InputBuilder(rng, ctx)
    prog = e
    for name in sorted(ctx.variables):
        prog = S.subst(prog, name, builder.paired(ctx.variables[name], high))
    paired = Machine(code, dict(builder.store), fuel=fuel, next_loc=builder.next_loc)
    problems: list[str] = []

    def check_step(before, after) -> None:
        for side in (1, 2):
            pb, pa = S.project(before, side), S.project(after, side)
            sb = project_store(snapshot[0], side)
            sa = project_store(paired.store, side)
            if pb == pa and sb == sa:
                continue
            single = Machine(code, sb, fuel=fuel, next_loc=snapshot[1])
            try:
                nxt = single.step(pb)
            except Exception as exc:
                problems.append(f"side {side}: projection cannot step ({exc})")
                return
            if nxt != pa or single.store != sa:
                problems.append(f"side {side}: projection took a different step")
        snapshot[0] = dict(paired.store)
        snapshot[1] = paired.next_loc

    snapshot = [dict(paired.store), paired.next_loc]
    out = paired.run(prog, check_step if per_step else None)
    if problems:
        return False, problems[0]
    for side in (1, 2):
        single = Machine(code, project_store(builder.store, side), fuel=fuel,
                         next_loc=builder.next_loc)
        v = single.run(S.project(prog, side))
        if not equivalent_runs(project_store(paired.store, side), S.project(out, side),
                               single.store, v):
            return False, f"side {side}: final configurations differ"
    return True, ""


def preservation_trace(e, ctx: TypingContexts, code: dict, expected: SecurityType, seed: int,
                       fuel: int = DEFAULT_FUEL) -> int:
    """Evaluate on random inputs, re-checking the term at `expected` after each step.

    Returns the number of steps taken; raises on the first failing re-check.
    """
    from .checker import Checker

    rng = random.Random(seed)
    builder = InputBuilder(rng, ctx)
    prog = e
    for name in sorted(ctx.variables):
        prog = S.subst(prog, name, builder.single(ctx.variables[name]))
    m = Machine(code, dict(builder.store), dict(builder.store_types), fuel=fuel,
                next_loc=builder.next_loc)
    closed = TypingContexts(ctx.records, ctx.functions, {}, m.store_types)

    def recheck(before, after) -> None:
        Checker(closed).expr(after, BOTTOM, expected)

    recheck(None, prog)
    m.run(prog, recheck)
    return m.steps
