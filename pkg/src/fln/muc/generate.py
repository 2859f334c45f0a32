"""Random closed, well-typed target programs for the type-safety property.

Programs come from mapping and translating random annotated programs; their free inputs
are then replaced by random values of the translated input types, with
pointers backed by freshly allocated, typed store cells.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import Any, Optional

from ..errors import FlnError
from ..polc import syntax as S
from ..mapper.generate import generate_annotated_program
from ..mapper.mapper import map_unit
from ..translate.exprs import translate_program
from .checker import MucProgram, check_muc_program, typecheck_muc
from .types import MInt, MPtr, MRecord, MucType, MUnit


@dataclass
class ClosedProgram:
    seed: int
    program: MucProgram
    store: dict[int, Any]
    main: Any
    type: MucType


def random_value(rng: random.Random, t: MucType, program: MucProgram, store: dict):
    """A value of `t`; pointers allocate a typed cell in `store`."""
    if isinstance(t, MInt):
        return S.Int(rng.randint(-3, 9))
    if isinstance(t, MUnit):
        return S.UnitVal()
    if isinstance(t, MRecord):
        rec = program.records[t.name]
        return S.Record(t.name, tuple(random_value(rng, f, program, store) for f in rec.fields))
    if isinstance(t, MPtr):
        content = random_value(rng, t.target, program, store)
        addr = max(store, default=-1) + 1
        store[addr] = content
        program.store[addr] = t
        return S.Loc(addr)
    raise ValueError(f"no random value of type {t}")


def closed_program(seed: int) -> Optional[ClosedProgram]:
    """None when the translation of the seed's program does not type-check."""
    rng = random.Random(seed)
    actx, code, main, result = generate_annotated_program(seed)
    try:
        unit = map_unit(actx, code, main, result)
        prog, m, _ = translate_program(unit.ctx, unit.code, unit.main)
    except FlnError:
        return None
    store: dict[int, Any] = {}
    inputs = {}
    for name, t in prog.globals.items():
        inputs[name] = random_value(rng, t, prog, store)
    for name, v in inputs.items():
        m = S.subst(m, name, v)
        prog.code = {f: d if name in d.params else replace(d, body=S.subst(d.body, name, v))
                     for f, d in prog.code.items()}
    prog.globals = {}
    try:
        check_muc_program(prog)
        tau = typecheck_muc(prog, m)
    except FlnError:
        return None
    return ClosedProgram(seed, prog, store, m, tau)
