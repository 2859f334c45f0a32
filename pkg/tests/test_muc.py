import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fln.muc.checker import MucProgram, NotAFunction, TypeMismatch, UnknownField, eval_muc, \
    typecheck_muc
from fln.muc.generate import closed_program
from fln.muc.types import INT, MFun, MInt, MPtr, MRecord, MRecordDef, compatible
from fln.polc import syntax as S
from fln.polc.semantics import FuelExhausted, Stuck


def prog():
    return MucProgram(
        records={"T1": MRecordDef("T1", (INT,), ("d",)), "T2": MRecordDef("T2", (INT,), ("d",)),
                 "T": MRecordDef("T", (INT, INT), ("a", "b"))},
        functions={"f": MFun((MRecord("T2"),), INT)},
    )


def test_nominal_records_are_distinct():
    p = prog()
    with pytest.raises(TypeMismatch) as exc:
        typecheck_muc(p, S.App(S.FunRef("f"), (S.Record("T1", (S.Int(5),)),)))
    assert exc.value.expected == MRecord("T2") and exc.value.found == MRecord("T1")
    assert typecheck_muc(p, S.App(S.FunRef("f"), (S.Record("T2", (S.Int(5),)),))) == INT


def test_basic_typing():
    p = prog()
    assert typecheck_muc(p, S.Int(3)) == INT
    assert typecheck_muc(p, S.Deref(S.Var("p")), env={"p": MPtr(INT)}) == INT
    with pytest.raises(UnknownField):
        typecheck_muc(p, S.Field(S.Record("T", (S.Int(1), S.Int(2))), 3))
    with pytest.raises(NotAFunction):
        typecheck_muc(p, S.App(S.FunRef("g"), ()))


def test_compatibility():
    assert compatible(MInt("char"), INT)  # spelling is kept for messages only
    assert not compatible(MPtr(INT), MPtr(MRecord("T1")))
    assert compatible(MPtr(MRecord("T1")), MPtr(MRecord("T1")), c_compat=True)
    assert not compatible(MPtr(MRecord("T1")), MPtr(MRecord("T2")), c_compat=True)


def test_eval_examples():
    p = prog()
    assert eval_muc(p, {}, S.If(S.Int(0), S.Int(1), S.Int(2)))[1] == S.Int(2)
    e = S.Let("x", None, S.New(S.Int(7)), S.Deref(S.Var("x")))
    assert eval_muc(p, {}, e)[1] == S.Int(7)
    assert eval_muc(p, {}, S.Field(S.Record("T", (S.Int(1), S.Int(2))), 2))[1] == S.Int(2)


def test_truthiness_is_strictly_positive():
    p = prog()
    assert eval_muc(p, {}, S.If(S.Int(-4), S.Int(1), S.Int(2)))[1] == S.Int(2)
    assert eval_muc(p, {}, S.If(S.Int(3), S.Int(1), S.Int(2)))[1] == S.Int(1)


def test_eval_errors():
    p = prog()
    with pytest.raises(Stuck):
        eval_muc(p, {}, S.Deref(S.Int(0)))
    with pytest.raises(Stuck):
        eval_muc(p, {}, S.Relabel(None, None, S.Int(1)))
    p.code["loop"] = S.FunDef("loop", (), S.App(S.FunRef("loop"), ()))
    with pytest.raises(FuelExhausted):
        eval_muc(p, {}, S.App(S.FunRef("loop"), ()), fuel=500)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_well_typed_programs_do_not_get_stuck(seed):
    c = closed_program(seed)
    if c is None:
        return
    try:
        store, v = eval_muc(c.program, c.store, c.main, fuel=100_000)
    except FuelExhausted:
        return
    assert S.is_value(v)


def test_type_safety_campaign():
    evaluated = stuck = seed = 0
    while evaluated < 500:
        c = closed_program(seed)
        seed += 1
        if c is None:
            continue
        evaluated += 1
        try:
            eval_muc(c.program, c.store, c.main, fuel=100_000)
        except FuelExhausted:
            pass
        except Stuck:
            stuck += 1
    assert stuck == 0
