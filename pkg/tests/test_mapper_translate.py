import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fln.frontend.pragma import Projection
from fln.lattice import BOTTOM, BOTTOM_I, BOTTOM_S, UNLABELED, Label, Policy, Terminal, \
    integrity_atom, secrecy_atom
from fln.mapper.generate import soundness_trial
from fln.mapper.mapper import BaseTypeMismatch, map_unit, register_de, tm_of
from fln.mapper.spec import AFun, AInt, AnnotContexts, APtr, ARec, ARecDef, AUnit, \
    elaborate_policy, map_type
from fln.muc.types import INT, MFun, MRecord
from fln.polc import syntax as S
from fln.polc.checker import check_program
from fln.polc.types import FunType, IntBase, RecordDef, Simple, int_t, rec_t
from fln.translate.exprs import translate_program
from fln.translate.names import NameCollision, ReservedIdentifier, c_token, check_user_identifier, \
    gen_name
from fln.translate.types import TypeTranslator, translate_type, translate_typedefs

ALICE = Label(secrecy_atom("AlicePriv"), BOTTOM_I)
ENC = Label(BOTTOM_S, integrity_atom("EncodedBal"))
A = Policy((ALICE,))


def test_elaborate_policy():
    assert elaborate_policy([("AlicePriv", Projection.SECRECY)]) == A
    assert elaborate_policy([("AlicePriv", Projection.SECRECY),
                             ("EncodedBal", Projection.INTEGRITY)]) == Policy((ALICE, ENC))
    g = elaborate_policy([("g", Projection.BOTH)])
    assert g == Policy((Label(secrecy_atom("g"), integrity_atom("g")),))


def test_map_type():
    assert map_type(AInt()) == int_t(UNLABELED)
    assert map_type(AInt(policy=A)) == int_t(A)
    f = map_type(AFun((AInt(policy=A),), AInt(policy=A), de_index=0))
    assert isinstance(f, FunType) and f.de_flag and f.pc == BOTTOM


def test_register_de_encode():
    spec = AFun((AInt(policy=A),), AInt(policy=Policy((ENC,))))
    new, cap = register_de("encodeA", spec)
    assert (cap.from_label, cap.to_label, cap.function) == (ALICE, ENC, "encodeA")
    assert new.de_index == 0
    assert new.params[0].policy == Policy((ALICE,), Terminal.TOP)
    assert new.ret.policy == Policy((ENC,), Terminal.BOTTOM)


def test_register_de_leaves_sinks_and_producers():
    sink = AFun((APtr(AUnit()), AInt(policy=Policy((ENC,)))), AInt())
    assert register_de("yao_execA", sink) == (sink, None)
    producer = AFun((), AInt(policy=A))
    assert register_de("get", producer) == (producer, None)


def test_register_de_requires_one_base():
    with pytest.raises(BaseTypeMismatch):
        register_de("f", AFun((ARec("T", policy=A),), AInt(policy=A)))


def test_map_if_relabels_condition_to_bottom():
    actx = AnnotContexts(variables={"v": AInt(policy=A)})
    unit = map_unit(actx, main=S.If(S.Var("v"), S.Int(1), S.Int(2)), main_type=AInt(policy=A))
    rels = [n for n in S.walk(unit.main) if isinstance(n, S.Relabel)]
    assert any(r.target == BOTTOM and r.source.head() == ALICE for r in rels)
    check_program(unit.ctx, unit.code, main=unit.main, expected=unit.main_type)
    assert S.strip_tags(tm_of(unit.main)) == S.If(S.Var("v"), S.Int(1), S.Int(2))


def test_map_fundef_of_unannotated_identity():
    actx = AnnotContexts(functions={"f": AFun((AInt(),), AInt())})
    unit = map_unit(actx, {"f": S.FunDef("f", ("x",), S.Var("x"))})
    check_program(unit.ctx, unit.code)
    rels = [n for n in S.walk(unit.code["f"].body) if isinstance(n, S.Relabel)]
    assert all(r.target == r.source == UNLABELED for r in rels)


def test_map_fundef_encode_wrapper_checks():
    spec = AFun((AInt(policy=A),), AInt(policy=Policy((ENC,))))
    actx = AnnotContexts(functions={"encodeA": spec})
    unit = map_unit(actx, {"encodeA": S.FunDef("encodeA", ("b",), S.Var("b"))})
    check_program(unit.ctx, unit.code)
    assert unit.capabilities[0].function == "encodeA"


def test_gen_name_examples():
    l1, l2 = Label(secrecy_atom("l1"), BOTTOM_I), Label(secrecy_atom("l2"), BOTTOM_I)
    assert gen_name("int", Policy((l1, l2))) == "__fln__l1S_l2S_int"
    assert gen_name(c_token("volatile int"), Policy((Label(secrecy_atom("test"), BOTTOM_I),))) \
        == "__fln__testS_volatile_int"
    assert gen_name("int", Policy((Label(BOTTOM_S, integrity_atom("check_len")),))) \
        == "__fln__check_lenI_int"
    assert c_token("struct foo *") == "foop"


def test_reserved_prefix():
    with pytest.raises(ReservedIdentifier):
        check_user_identifier("__fln__mine")


def test_translate_type_examples():
    assert translate_type(int_t(UNLABELED)) == (INT, translate_type(int_t(UNLABELED))[1])
    t, defs = translate_type(int_t(UNLABELED))
    assert t == INT and len(defs) == 0
    t, defs = translate_type(int_t(A))
    assert t == MRecord("__fln__AlicePrivS_int") and len(defs) == 1
    recs = {"T": RecordDef("T", (int_t(UNLABELED), int_t(UNLABELED)), ("a", "b"))}
    t, defs = translate_type(rec_t("T", A), recs)
    (d,) = defs.defs.values()
    assert d.fields == (INT, INT)


def test_translate_typedefs():
    assert translate_typedefs({}) == ({}, translate_typedefs({})[1])
    recs = {"T": RecordDef("T", (int_t(A),), ("f",))}
    out, defs = translate_typedefs(recs)
    assert set(out) == {"T", "__fln__AlicePrivS_int"}
    from fln.polc.types import ptr_t
    mutual = {"A": RecordDef("A", (ptr_t(rec_t("B", A), UNLABELED),), ("b",)),
              "B": RecordDef("B", (ptr_t(rec_t("A", A), UNLABELED),), ("a",))}
    one, _ = translate_typedefs(mutual)
    two, _ = translate_typedefs(dict(reversed(list(mutual.items()))))
    assert {k: v.fields for k, v in one.items()} == {k: v.fields for k, v in two.items()}


def test_generated_name_collision():
    tt = TypeTranslator()
    tt.type(int_t(A))
    from fln.translate.types import GeneratedDef
    with pytest.raises(NameCollision):
        tt.defs.add(GeneratedDef("__fln__AlicePrivS_int", IntBase(), Policy((ENC,)), "wrap"))


def test_translate_literal_and_contexts():
    actx = AnnotContexts(
        functions={"encodeA": AFun((AInt(policy=A),), AInt(policy=Policy((ENC,))))},
        variables={"bal": AInt(policy=Policy((ALICE, ENC)))})
    main = S.App(S.FunRef("encodeA"), (S.Var("bal"),))
    unit = map_unit(actx, main=main)
    prog, m, defs = translate_program(unit.ctx, unit.code, unit.main)
    assert prog.globals["bal"] == MRecord("__fln__AlicePrivS_EncodedBalI_int")
    assert prog.functions["encodeA"] == MFun((MRecord("__fln__AlicePrivS_top_int"),),
                                             MRecord("__fln__EncodedBalI_int"))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_translation_soundness_property(seed):
    assert soundness_trial(seed).verdict != "counterexample"
