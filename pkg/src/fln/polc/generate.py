"""Random well-typed programs of the labeled calculus, for property tests.

Generation is type-directed: `expr(target)` only builds forms whose typing
premises hold by construction, under the invariant that the context pc is
below the outer policy of every requested type.  Callers still run the
checker and discard the rare reject.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from ..lattice import (
    BOTTOM,
    BOTTOM_I,
    BOTTOM_S,
    TOP,
    TOP_I,
    Label,
    Policy,
    Terminal,
    flow_join,
    flow_leq,
    guards,
    integrity_atom,
    secrecy_atom,
)
from . import syntax as S
from .types import (
    UNIT,
    FunType,
    IntBase,
    PtrBase,
    RecordBase,
    RecordDef,
    SecurityType,
    Simple,
    TypingContexts,
    UnitType,
    int_t,
    ptr_t,
    rec_t,
)

SECRECY_ATOMS = ("sa", "sb", "sc")
INTEGRITY_ATOMS = ("ia", "ib", "ic")
MAX_DEPTH = 6
MAX_POLICY = 3
ARITH_OPS = ("+", "*", "<", "==", ">=", "&&", "||")


def random_label(rng: random.Random) -> Label:
    sec = rng.choice([BOTTOM_S] * 2 + [secrecy_atom(a) for a in SECRECY_ATOMS])
    integ = rng.choice([BOTTOM_I, TOP_I] + [integrity_atom(a) for a in INTEGRITY_ATOMS])
    return Label(sec, integ)


def random_policy(rng: random.Random, max_len: int = MAX_POLICY) -> Policy:
    n = rng.randint(0, max_len)
    labels = tuple(random_label(rng) for _ in range(n))
    terminal = Terminal.TOP if rng.random() < 0.15 else Terminal.BOTTOM
    return Policy(labels, terminal)


def _outer(s: SecurityType) -> Policy:
    return BOTTOM if isinstance(s, UnitType) else s.outer_policy()


@dataclass
class Generator:
    rng: random.Random
    ctx: TypingContexts = field(default_factory=TypingContexts)
    code: dict[str, S.FunDef] = field(default_factory=dict)
    max_depth: int = MAX_DEPTH
    counter: int = 0

    def fresh(self, prefix: str = "x") -> str:
        self.counter += 1
        return f"{prefix}{self.counter}"

    def policy_above(self, p: Policy) -> Policy:
        """A random policy q with p ⊑ q."""
        for _ in range(8):
            q = random_policy(self.rng)
            if flow_leq(p, q):
                return q
        return flow_join(p, random_policy(self.rng))

    # contexts ------------------------------------------------------------

    def add_records(self, n: int = 2) -> None:
        for i in range(n):
            name = f"R{i + 1}"
            k = self.rng.randint(1, 3)
            fields = tuple(int_t(random_policy(self.rng)) for _ in range(k))
            self.ctx.records[name] = RecordDef(name, fields, tuple(f"f{j + 1}" for j in range(k)))

    def add_functions(self, n: int = 2, depth: int = 3) -> None:
        for i in range(n):
            name = f"fn{i + 1}"
            pc = BOTTOM if self.rng.random() < 0.6 else random_policy(self.rng, 1)
            params = tuple(int_t(random_policy(self.rng)) for _ in range(self.rng.randint(1, 2)))
            ret = int_t(self.policy_above(pc))
            pnames = tuple(f"p{j + 1}" for j in range(len(params)))
            saved = self.ctx.variables
            self.ctx.variables = {**saved, **dict(zip(pnames, params))}
            body = self.expr(ret, pc, depth)
            self.ctx.variables = saved
            self.ctx.functions[name] = FunType(params, ret, pc)
            self.code[name] = S.FunDef(name, pnames, body)

    def random_type(self, pc: Policy, depth: int = 1) -> SecurityType:
        r = self.rng.random()
        if r < 0.55:
            return int_t(self.policy_above(pc))
        if r < 0.75:
            content = int_t(self.policy_above(pc))
            return ptr_t(content, self.policy_above(pc))
        if r < 0.9 and self.ctx.records:
            return rec_t(self.rng.choice(sorted(self.ctx.records)), self.policy_above(pc))
        return UNIT

    # expressions -----------------------------------------------------------

    def _vars(self, pred) -> list[str]:
        return sorted(n for n, t in self.ctx.variables.items() if pred(t))

    def expr(self, target: SecurityType, pc: Policy, depth: Optional[int] = None) -> S.Expr:
        if depth is None:
            depth = self.max_depth
        forms = ["value"]
        if depth > 0:
            forms += ["let", "let", "if"]
            if isinstance(target, Simple) and isinstance(target.base, IntBase):
                forms += ["binop", "deref", "field", "app"]
            if isinstance(target, Simple) and isinstance(target.base, PtrBase):
                forms += ["new", "new"]
            if isinstance(target, UnitType):
                forms += ["assign", "assign"]
        self.rng.shuffle(forms)
        forms.append("value")
        for form in forms:
            e = getattr(self, "_" + form)(target, pc, depth)
            if e is not None:
                return e
        raise AssertionError(f"no generator for {target}")

    def _value(self, target, pc, depth):
        if isinstance(target, Simple) and isinstance(target.base, PtrBase):
            cands = self._vars(lambda t: _sub(flow_t(t, pc), target))
            if cands:
                return S.Var(self.rng.choice(cands))
            if depth >= 0:
                return self._new(target, pc, max(depth, 1))
            return None
        cands = self._vars(lambda t: _sub(flow_t(t, pc), target))
        if cands and self.rng.random() < 0.7:
            return S.Var(self.rng.choice(cands))
        if isinstance(target, Simple) and isinstance(target.base, RecordBase):
            rec = self.ctx.records[target.base.name]
            fields = []
            for ft in rec.fields:
                lits = self._vars(lambda t: _sub(t, ft))
                if lits and self.rng.random() < 0.4:
                    fields.append(S.Var(self.rng.choice(lits)))
                else:
                    fields.append(S.Int(self.rng.randint(0, 5)))
            return S.Record(rec.name, tuple(fields))
        if isinstance(target, UnitType):
            return S.UnitVal()
        if isinstance(target, Simple) and isinstance(target.base, IntBase):
            return S.Int(self.rng.randint(0, 5))
        return None

    def _let(self, target, pc, depth):
        s1 = self.random_type(pc)
        bound = self.expr(s1, pc, depth - 1)
        name = self.fresh()
        saved = self.ctx.variables
        self.ctx.variables = {**saved, name: s1}
        body = self.expr(target, pc, depth - 1)
        self.ctx.variables = saved
        return S.Let(name, s1, bound, body)

    def _if(self, target, pc, depth):
        rho = _outer(target)
        conds = self._vars(lambda t: isinstance(t, Simple) and isinstance(t.base, IntBase)
                           and _leq(flow_join(pc, t.policy), rho))
        if isinstance(target, UnitType):
            conds = self._vars(lambda t: isinstance(t, Simple) and isinstance(t.base, IntBase))
        if conds and self.rng.random() < 0.8:
            cond = S.Var(self.rng.choice(conds))
            inner = flow_join(pc, self.ctx.variables[cond.name].policy)
        else:
            cond = S.Int(self.rng.randint(0, 1))
            inner = pc
        if not isinstance(target, UnitType) and not _leq(inner, rho):
            return None
        if isinstance(target, Simple) and isinstance(target.base, PtrBase) and not _leq(
                inner, _outer(target.base.target)):
            return None
        return S.If(cond, self.expr(target, inner, depth - 1), self.expr(target, inner, depth - 1))

    def _binop(self, target, pc, depth):
        op = self.rng.choice(ARITH_OPS)
        return S.BinOp(op, self.expr(target, pc, depth - 1), self.expr(target, pc, depth - 1))

    def _deref(self, target, pc, depth):
        rho = target.policy
        cands = self._vars(lambda t: isinstance(t, Simple) and isinstance(t.base, PtrBase)
                           and _leq(pc, t.policy)
                           and _sub(_join_t(t.base.target, t.policy), target))
        if cands:
            return S.Deref(S.Var(self.rng.choice(cands)))
        # allocate a fresh cell and read it back
        content = int_t(rho)
        pt = ptr_t(content, pc)
        name = self.fresh("c")
        cell = S.New(self.expr(content, pc, depth - 1), tag=pt)
        return S.Let(name, pt, cell, S.Deref(S.Var(name)))

    def _field(self, target, pc, depth):
        cands = []
        for n, t in self.ctx.variables.items():
            if isinstance(t, Simple) and isinstance(t.base, RecordBase) and _leq(pc, t.policy):
                rec = self.ctx.records[t.base.name]
                for i, ft in enumerate(rec.fields):
                    if _sub(_join_t(ft, t.policy), target):
                        cands.append((n, i + 1))
        if not cands:
            return None
        n, i = self.rng.choice(sorted(cands))
        return S.Field(S.Var(n), i)

    def _app(self, target, pc, depth):
        cands = [n for n, f in self.ctx.functions.items()
                 if not f.de_flag and _leq(pc, f.pc) and _sub(f.ret, target)]
        if not cands:
            return None
        name = self.rng.choice(sorted(cands))
        f = self.ctx.functions[name]
        args = []
        for p in f.params:
            if not _leq(pc, _outer(p)):
                return None
            args.append(self.expr(p, pc, depth - 1))
        return S.App(S.FunRef(name), tuple(args))

    def _new(self, target, pc, depth):
        content = target.base.target
        if not _leq(pc, target.policy) or not _leq(pc, _outer(content)):
            return None
        return S.New(self.expr(content, pc, depth - 1), tag=target)

    def _assign(self, target, pc, depth):
        cands = self._vars(lambda t: isinstance(t, Simple) and isinstance(t.base, PtrBase)
                           and guards(t.policy, t.base.target) and _leq(pc, _outer(t.base.target)))
        if not cands:
            return None
        name = self.rng.choice(cands)
        content = self.ctx.variables[name].base.target
        return S.Assign(S.Var(name), self.expr(content, pc, depth - 1))


def _leq(a: Policy, b: Policy) -> bool:
    try:
        return flow_leq(a, b)
    except Exception:
        return False


def _sub(a: SecurityType, b: SecurityType) -> bool:
    from .types import subtype
    try:
        return subtype(a, b)
    except Exception:
        return False


def _join_t(s: SecurityType, p: Policy) -> SecurityType:
    if isinstance(s, UnitType):
        return s
    return s.with_policy(flow_join(s.outer_policy(), p))


def flow_t(s: SecurityType, pc: Policy) -> SecurityType:
    return _join_t(s, pc)


def generate_program(seed: int, n_funs: int = 2, depth: int = MAX_DEPTH):
    """(ctx, code, main, result type) with random Γ inputs."""
    rng = random.Random(seed)
    g = Generator(rng, max_depth=depth)
    g.add_records(rng.randint(0, 2))
    g.add_functions(rng.randint(0, n_funs))
    for i in range(rng.randint(1, 3)):
        g.ctx.variables[f"in{i + 1}"] = g.random_type(BOTTOM)
    result = int_t(random_policy(rng))
    main = g.expr(result, BOTTOM)
    return g.ctx, g.code, main, result



ATTACKER = Policy((Label(secrecy_atom("sa"), BOTTOM_I),), Terminal.TOP)


def _pick(rng: random.Random, pred) -> Policy:
    while True:
        p = random_policy(rng)
        if pred(p):
            return p


def generate_ni_program(seed: int, attacker: Policy = ATTACKER, depth: int = MAX_DEPTH):
    """A relabel-free program with one high integer input `secret` and a low result.

    Returns (ctx, code, main, result type).
    """
    from ..lattice import in_high

    rng = random.Random(seed)
    g = Generator(rng, max_depth=depth)
    g.add_records(rng.randint(0, 2))
    g.add_functions(rng.randint(0, 2))
    high = lambda p: in_high(attacker, [], p)  # noqa: E731
    g.ctx.variables["secret"] = int_t(_pick(rng, high))
    for i in range(rng.randint(1, 2)):
        g.ctx.variables[f"in{i + 1}"] = g.random_type(BOTTOM)
    result = int_t(_pick(rng, lambda p: not high(p)))
    main = g.expr(result, BOTTOM)
    return g.ctx, g.code, main, result
