import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fln.lattice import BOTTOM, BOTTOM_I, BOTTOM_LABEL, BOTTOM_S, TOP, UNLABELED, Label, Policy, \
    Terminal, integrity_atom, secrecy_atom
from fln.polc import syntax as S
from fln.polc.checker import FieldArity, PolicyViolation, check_program, typecheck_expr, \
    typecheck_value
from fln.polc.generate import ATTACKER, generate_ni_program, generate_program
from fln.polc.noninterference import high_predicate, noninterference_trial, paired_agreement, \
    preservation_trace
from fln.polc.semantics import FuelExhausted, Stuck, eval_expr, eval_paired
from fln.polc.sexpr import dump_contexts, dump_expr, dump_type, load_contexts, load_expr, load_type
from fln.polc.types import FunType, RecordDef, TypingContexts, int_t, ptr_t, rec_t, subtype
from fln.polc.checker import IllTyped

ALICE = Label(secrecy_atom("AlicePriv"), BOTTOM_I)
ENC = Label(BOTTOM_S, integrity_atom("EncodedBal"))
A = Policy((ALICE,))
SEQ = Policy((ALICE, ENC))


def ctx(**variables):
    return TypingContexts(variables=dict(variables))


def test_subtype_examples():
    assert subtype(int_t(A), int_t(A))
    assert subtype(int_t(BOTTOM), int_t(A))
    assert not subtype(ptr_t(int_t(A), BOTTOM), ptr_t(int_t(BOTTOM), BOTTOM))


def test_pointer_subtyping_is_invariant_exhaustive():
    labels = [BOTTOM_LABEL, ALICE, ENC]
    pols = [Policy(seq, t) for n in range(2) for seq in itertools.product(labels, repeat=n)
            for t in (Terminal.BOTTOM, Terminal.TOP)]
    for r1, r2 in itertools.product(pols, repeat=2):
        lhs, rhs = ptr_t(int_t(r1), BOTTOM), ptr_t(int_t(r2), BOTTOM)
        assert subtype(lhs, rhs) == (r1 == r2)


def test_value_typing():
    assert typecheck_value(ctx(), S.Int(3), int_t(A)) == int_t(A)
    assert typecheck_value(ctx(x=int_t(A)), S.Var("x")) == int_t(A)
    c = TypingContexts(records={"T": RecordDef("T", (int_t(BOTTOM), int_t(BOTTOM)))})
    with pytest.raises(FieldArity):
        typecheck_value(c, S.Record("T", (S.Int(1),)), rec_t("T", BOTTOM))


def test_secret_into_unannotated_function_is_rejected():
    c = TypingContexts(functions={"postBalance": FunType((int_t(UNLABELED),), int_t(UNLABELED))},
                       variables={"balA": int_t(A)})
    with pytest.raises(PolicyViolation):
        typecheck_expr(c, BOTTOM, S.App(S.FunRef("postBalance"), (S.Var("balA"),)))


def test_relabeling_function_advances_the_policy():
    f = FunType((int_t(Policy((ALICE,), Terminal.TOP)),), int_t(Policy((ENC,))), de_index=0)
    c = TypingContexts(functions={"encodeA": f}, variables={"bal": int_t(SEQ)})
    t = typecheck_expr(c, BOTTOM, S.App(S.FunRef("encodeA"), (S.Var("bal"),)))
    assert t == int_t(Policy((ENC,)))


def test_explicit_relabel_types_at_target():
    e = S.Relabel(A, BOTTOM, S.Int(7))
    assert typecheck_expr(ctx(), BOTTOM, e) == int_t(A)


def test_eval_examples():
    _, v = eval_expr({}, {}, S.Let("x", None, S.Int(2), S.BinOp("+", S.Var("x"), S.Int(3))))
    assert v == S.Int(5)
    _, v = eval_expr({}, {}, S.Relabel(A, BOTTOM, S.Int(7)))
    assert v == S.Int(7)
    _, v = eval_expr({}, {}, S.Let("p", None, S.New(S.Int(4)), S.Deref(S.Var("p"))))
    assert v == S.Int(4)


def test_eval_stuck_and_fuel():
    with pytest.raises(Stuck):
        eval_expr({}, {}, S.Deref(S.Int(1)))
    loop = {"f": S.FunDef("f", ("x",), S.App(S.FunRef("f"), (S.Var("x"),)))}
    with pytest.raises(FuelExhausted):
        eval_expr(loop, {}, S.App(S.FunRef("f"), (S.Int(0),)), fuel=1000)


def test_projection_examples():
    assert S.project(S.Pair(S.Int(1), S.Int(2)), 1) == S.Int(1)
    e = S.BinOp("+", S.Int(1), S.Int(2))
    assert S.project(e, 2) == e
    r = S.Record("T", (S.Pair(S.Int(1), S.Int(2)), S.Int(3)))
    assert S.project(r, 2) == S.Record("T", (S.Int(2), S.Int(3)))


def test_paired_if_lifts():
    e = S.If(S.Pair(S.Int(1), S.Int(0)), S.Int(10), S.Int(20))
    _, v = eval_paired({}, {}, e)
    assert v == S.Pair(S.Int(10), S.Int(20))


def test_paired_assign_updates_both_sides():
    store = {0: S.Int(0), 1: S.Int(0)}
    e = S.Assign(S.Pair(S.Loc(0), S.Loc(1)), S.Int(5))
    out, _ = eval_paired({}, store, e)
    assert S.project(out[0], 1) == S.Int(5) and S.project(out[1], 2) == S.Int(5)
    assert S.project(out[0], 2) == S.Int(0) and S.project(out[1], 1) == S.Int(0)


def test_pair_free_paired_run_matches_single():
    e = S.Let("x", None, S.New(S.Int(3)), S.BinOp("*", S.Deref(S.Var("x")), S.Int(2)))
    assert eval_paired({}, {}, e)[1] == eval_expr({}, {}, e)[1]


def test_noninterference_examples():
    high = Policy((ALICE,))
    low = int_t(BOTTOM)
    c = ctx(x=low)
    v = noninterference_trial(S.BinOp("+", S.Var("x"), S.Int(1)), c, {}, ATTACKER, [], 0, low)
    assert v.passed
    c = ctx(y=int_t(Policy((Label(secrecy_atom("sb"), BOTTOM_I),))))
    with pytest.raises(PolicyViolation):
        noninterference_trial(S.Var("y"), c, {}, ATTACKER, [], 0, low)
    c = ctx(x=int_t(Policy((Label(secrecy_atom("sb"), BOTTOM_I),))))
    e = S.If(S.Var("x"), S.Int(1), S.Int(1))
    with pytest.raises(PolicyViolation):  # the implicit flow is rejected before running
        noninterference_trial(e, c, {}, ATTACKER, [], 0, low)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_generated_programs_check_and_preserve(seed):
    c, code, main, result = generate_program(seed)
    try:
        check_program(c, code, main=main, expected=result)
    except Exception:
        return
    try:
        preservation_trace(main, c, code, result, seed, fuel=20000)
    except FuelExhausted:
        pass


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_noninterference_property(seed):
    c, code, main, result = generate_ni_program(seed)
    try:
        v = noninterference_trial(main, c, code, ATTACKER, [], seed, result, fuel=20000)
    except (IllTyped, FuelExhausted):
        return
    except Exception as exc:
        if exc.__class__.__module__.endswith("checker"):
            return
        raise
    assert v.passed


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_paired_agreement_property(seed):
    c, code, main, _ = generate_ni_program(seed)
    try:
        ok, why = paired_agreement(main, c, code, seed, high_predicate(ATTACKER, []), fuel=20000)
    except FuelExhausted:
        return
    assert ok, why


def test_sexpr_round_trip():
    c, code, main, result = generate_program(7)
    assert load_expr(dump_expr(main)) == main
    assert load_type(dump_type(result)) == result
    again = load_contexts(dump_contexts(c))
    assert again.variables == c.variables and again.functions == c.functions
