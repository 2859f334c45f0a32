"""Random annotated programs and the translation-soundness trial.

Programs are generated by base shape only; policies come from a small pool,
so some programs line up and translate to well-typed target programs while
others do not.  A trial maps, translates and checks both sides.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from ..errors import FlnError
from ..lattice import BOTTOM
from ..polc import syntax as S
from ..polc.checker import check_program
from ..frontend.pragma import Projection
from ..muc.checker import check_muc_program, typecheck_muc
from ..translate.exprs import translate_program
from .mapper import map_unit
from .spec import (
    AFun,
    AInt,
    AnnotContexts,
    AnnotSpec,
    APtr,
    ARec,
    ARecDef,
    AUnit,
    elaborate_policy,
    with_policy,
)

ATOMS = ("sa", "ia", "sb")
MAX_DEPTH = 5
OPS = ("+", "*", "<", "==")


def random_policy(rng: random.Random):
    """None (unannotated) or a short elaborated sequence."""
    if rng.random() < 0.45:
        return None
    n = 1 if rng.random() < 0.7 else 2
    seq = []
    for _ in range(n):
        atom = rng.choice(ATOMS)
        proj = Projection.INTEGRITY if atom.startswith("i") else rng.choice(
            [Projection.SECRECY, Projection.SECRECY, Projection.BOTH])
        seq.append((atom, proj))
    return elaborate_policy(seq)


def _shape(b: AnnotSpec):
    """Base shape: the annotation without its outermost policy."""
    return with_policy(b, None)


@dataclass
class AnnotGenerator:
    rng: random.Random
    ctx: AnnotContexts = field(default_factory=AnnotContexts)
    code: dict[str, S.FunDef] = field(default_factory=dict)
    env: dict[str, AnnotSpec] = field(default_factory=dict)
    max_depth: int = MAX_DEPTH
    careful: bool = True  # every form produces exactly the requested type
    counter: int = 0

    def fresh(self, prefix: str = "v") -> str:
        self.counter += 1
        return f"{prefix}{self.counter}"

    def pol(self):
        return random_policy(self.rng)

    def random_spec(self) -> AnnotSpec:
        r = self.rng.random()
        if r < 0.55:
            return AInt(policy=self.pol())
        if r < 0.8:
            return APtr(AInt(policy=self.pol()), self.pol())
        if self.ctx.records:
            return ARec(self.rng.choice(sorted(self.ctx.records)), self.pol())
        return AInt(policy=self.pol())

    # contexts ------------------------------------------------------------

    def add_records(self, n: int) -> None:
        for i in range(n):
            name = f"R{i + 1}"
            k = self.rng.randint(1, 3)
            fields = tuple(AInt(policy=self.pol()) for _ in range(k))
            self.ctx.records[name] = ARecDef(name, fields, tuple(f"f{j + 1}" for j in range(k)))

    def add_functions(self, n: int) -> None:
        for i in range(n):
            name = f"fn{i + 1}"
            if self.rng.random() < 0.35:
                # a relabeling function: annotated int to annotated int
                spec = AFun((AInt(policy=self.pol() or elaborate_policy([("sa", Projection.SECRECY)])),),
                            AInt(policy=self.pol() or elaborate_policy([("ia", Projection.INTEGRITY)])))
            else:
                params = tuple(self.random_spec() for _ in range(self.rng.randint(1, 2)))
                if any(isinstance(p, AInt) and p.policy is not None for p in params):
                    ret = AInt() if self.rng.random() < 0.8 else AUnit()
                else:
                    ret = AInt(policy=self.pol()) if self.rng.random() < 0.8 else AUnit()
                spec = AFun(params, ret)
            pnames = tuple(f"p{j + 1}" for j in range(len(spec.params)))
            saved = self.env
            # parameters are seen at U inside the body
            self.env = {**saved, **{x: _shape(p) for x, p in zip(pnames, spec.params)}}
            body = self.expr(_shape(spec.ret) if not isinstance(spec.ret, AUnit) else spec.ret, 3)
            self.env = saved
            self.ctx.functions[name] = spec
            self.code[name] = S.FunDef(name, pnames, body)

    # expressions ---------------------------------------------------------

    def _vars(self, pred) -> list[str]:
        scope = {**self.ctx.variables, **self.env}
        return sorted(n for n, t in scope.items() if pred(t))

    def _scope(self) -> dict:
        return {**self.ctx.variables, **self.env}

    def expr(self, target: AnnotSpec, depth: Optional[int] = None):
        if depth is None:
            depth = self.max_depth
        forms = ["value", "value"]
        if depth > 0:
            forms += ["let", "let", "if"]
            if isinstance(target, AInt):
                forms += ["binop", "deref", "field", "app", "app"]
            if isinstance(target, APtr):
                forms += ["new"]
            if isinstance(target, AUnit):
                forms += ["assign", "assign", "app"]
        self.rng.shuffle(forms)
        forms.append("value")
        for form in forms:
            e = getattr(self, "_" + form)(target, depth)
            if e is not None:
                return e
        raise AssertionError(f"no form for {target}")

    def _same_base(self, t: AnnotSpec, target: AnnotSpec) -> bool:
        if isinstance(target, APtr):
            return isinstance(t, APtr) and _shape(t.target) == _shape(target.target)
        return type(t) is type(target) and _shape(t) == _shape(target)

    def _loose(self) -> bool:
        return not self.careful or self.rng.random() < 0.1

    def _value(self, target, depth):
        exact = self._vars(lambda t: t == target)
        if exact and self.rng.random() < 0.7:
            return S.Var(self.rng.choice(exact))
        cands = self._vars(lambda t: self._same_base(t, target))
        if cands and self._loose() and self.rng.random() < 0.4:
            return S.Var(self.rng.choice(cands))
        if isinstance(target, AInt):
            return S.Int(self.rng.randint(0, 5))
        if isinstance(target, AUnit):
            return S.UnitVal()
        if isinstance(target, ARec):
            rec = self.ctx.records[target.name]
            return S.Record(rec.name, tuple(
                S.Var(v) if (v := self._pick_var(f)) else S.Int(self.rng.randint(0, 5))
                for f in rec.fields))
        if isinstance(target, APtr) and depth >= 0:
            return S.New(self.expr(target.target, 0))
        if exact:
            return S.Var(self.rng.choice(exact))
        return None

    def _pick_var(self, spec):
        cands = self._vars(lambda t: t == spec)
        if cands and self.rng.random() < 0.5:
            return self.rng.choice(cands)
        return None

    def _let(self, target, depth):
        spec = self.random_spec()
        bound = self.expr(_shape(spec) if self._loose() and self.rng.random() < 0.3 else spec,
                          depth - 1)
        name = self.fresh()
        saved = self.env
        self.env = {**saved, name: spec}
        body = self.expr(target, depth - 1)
        self.env = saved
        ann = spec if self.rng.random() < 0.85 else None
        return S.Let(name, ann, bound, body)

    def _if(self, target, depth):
        conds = self._vars(lambda t: isinstance(t, AInt))
        cond = S.Var(self.rng.choice(conds)) if conds and self.rng.random() < 0.8 \
            else S.Int(self.rng.randint(0, 1))
        return S.If(cond, self.expr(target, depth - 1), self.expr(target, depth - 1))

    def _binop(self, target, depth):
        if target.policy is not None and not self._loose():
            return None
        return S.BinOp(self.rng.choice(OPS), self.expr(AInt(), depth - 1),
                       self.expr(AInt(), depth - 1))

    def _deref(self, target, depth):
        loose = self._loose()
        cands = self._vars(lambda t: isinstance(t, APtr) and isinstance(t.target, AInt)
                           and (loose or t.target == target))
        if cands and self.rng.random() < 0.8:
            return S.Deref(S.Var(self.rng.choice(cands)))
        return None

    def _field(self, target, depth):
        loose = self._loose()
        cands = []
        for x in self._vars(lambda t: isinstance(t, ARec)):
            rec = self.ctx.records[self._scope()[x].name]
            cands += [(x, i + 1) for i, f in enumerate(rec.fields) if loose or f == target]
        if not cands:
            return None
        x, i = self.rng.choice(cands)
        return S.Field(S.Var(x), i)

    def _app(self, target, depth):
        loose = self._loose()

        def fits(f: AFun) -> bool:
            if isinstance(target, AUnit):
                return isinstance(f.ret, AUnit) or (loose and self.rng.random() < 0.3)
            return isinstance(f.ret, AInt) and (loose or f.ret == target)

        cands = sorted(n for n, f in self.ctx.functions.items() if fits(f))
        if not cands:
            return None
        name = self.rng.choice(cands)
        f = self.ctx.functions[name]
        args = tuple(self.expr(_shape(p) if self._loose() and self.rng.random() < 0.3 else p,
                               depth - 1)
                     for p in f.params)
        return S.App(S.FunRef(name), args)

    def _new(self, target, depth):
        return S.New(self.expr(target.target, depth - 1))

    def _assign(self, target, depth):
        cands = self._vars(lambda t: isinstance(t, APtr))
        if not cands:
            return None
        x = self.rng.choice(cands)
        content = self._scope()[x].target
        return S.Assign(S.Var(x), self.expr(content, depth - 1))


def generate_annotated_program(seed: int, depth: int = MAX_DEPTH):
    """(annotated contexts, function code, main, main annotation)."""
    rng = random.Random(seed)
    g = AnnotGenerator(rng, max_depth=depth, careful=rng.random() < 0.75)
    g.add_records(rng.randint(0, 2))
    for i in range(rng.randint(1, 3)):
        g.ctx.variables[f"in{i + 1}"] = g.random_spec()
    g.add_functions(rng.randint(0, 3))
    result = AInt(policy=g.pol())
    main = g.expr(result if not g._loose() else AInt())
    return g.ctx, g.code, main, result


@dataclass
class SoundnessOutcome:
    seed: int
    verdict: str  # "ok", "rejected" (target checker said no) or "counterexample"
    detail: str = ""


def soundness_trial(seed: int, layout: str = "copy") -> SoundnessOutcome:
    """Target accepts the translation ⇒ the labeled checker accepts the mapped program."""
    actx, code, main, result = generate_annotated_program(seed)
    try:
        unit = map_unit(actx, code, main, result)
    except FlnError as exc:
        return SoundnessOutcome(seed, "rejected", f"mapping: {exc}")
    wrapped = S.Let("$result", unit.main_type, unit.main, S.Var("$result", tag=unit.main_type))
    prog, m, _ = translate_program(unit.ctx, unit.code, wrapped, layout)
    try:
        check_muc_program(prog)
        tau = typecheck_muc(prog, m)
    except FlnError as exc:
        return SoundnessOutcome(seed, "rejected", str(exc))
    try:
        check_program(unit.ctx, unit.code, BOTTOM, unit.main, unit.main_type)
    except FlnError as exc:
        return SoundnessOutcome(seed, "counterexample", f"labeled checker: {exc}")
    from ..translate.types import TypeTranslator

    expected = TypeTranslator(dict(unit.ctx.records), layout).type(unit.main_type)
    if tau != expected:
        return SoundnessOutcome(seed, "counterexample", f"target type {tau} != {expected}")
    return SoundnessOutcome(seed, "ok")
