import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fln.lattice import (
    BOTTOM,
    BOTTOM_I,
    BOTTOM_LABEL,
    BOTTOM_S,
    TOP,
    TOP_I,
    TOP_LABEL,
    TOP_S,
    UNLABELED,
    IncomparableAtoms,
    Label,
    Policy,
    RelabelCapability,
    Terminal,
    UnlabeledComparison,
    flow_join,
    flow_leq,
    guards,
    in_high,
    integrity_atom,
    label_join,
    label_leq,
    lab_of,
    policy_join,
    policy_leq,
    rewrites_to,
    secrecy_atom,
)
from fln.polc.types import int_t, ptr_t, UNIT

ALICE = Label(secrecy_atom("AlicePriv"), BOTTOM_I)
ENC = Label(BOTTOM_S, integrity_atom("EncodedBal"))

SECRECY = [BOTTOM_S, TOP_S] + [secrecy_atom(a) for a in ("a", "b", "c")]
INTEGRITY = [BOTTOM_I, TOP_I] + [integrity_atom(a) for a in ("a", "b", "c")]
LABELS = [Label(s, i) for s in SECRECY for i in INTEGRITY]


def policies(max_len: int = 2, labels=LABELS):
    for n in range(max_len + 1):
        for seq in itertools.product(labels, repeat=n):
            for t in (Terminal.BOTTOM, Terminal.TOP):
                yield Policy(seq, t)


label_st = st.sampled_from(LABELS)
policy_st = st.builds(Policy, st.lists(label_st, max_size=3).map(tuple),
                      st.sampled_from([Terminal.BOTTOM, Terminal.TOP]))


def test_label_examples():
    assert all(label_leq(BOTTOM_LABEL, lab) for lab in LABELS)
    assert label_leq(ALICE, Label(TOP_S, BOTTOM_I))
    assert not label_leq(Label(secrecy_atom("a"), BOTTOM_I), Label(secrecy_atom("b"), BOTTOM_I))
    assert all(label_leq(lab, TOP_LABEL) for lab in LABELS)


def test_integrity_order_runs_from_trusted_to_untrusted():
    assert label_leq(Label(BOTTOM_S, TOP_I), Label(BOTTOM_S, integrity_atom("a")))
    assert not label_leq(Label(BOTTOM_S, BOTTOM_I), Label(BOTTOM_S, integrity_atom("a")))


def test_policy_examples():
    rho = Policy((ALICE, ENC), Terminal.BOTTOM)
    assert policy_leq(BOTTOM, rho)
    assert policy_leq(rho, TOP)
    assert policy_leq(Policy((ALICE,)), Policy((ALICE, ENC), Terminal.TOP))
    assert not policy_leq(Policy((ALICE,)), BOTTOM)


def _leq_oracle(p: Policy, q: Policy) -> bool:
    # direct recursion over the infinite expansions
    if not p.labels and not q.labels:
        return label_leq(p.terminal_label(), q.terminal_label())
    return label_leq(p.at(0), q.at(0)) and _leq_oracle(p.tail(), q.tail())


def test_policy_leq_matches_oracle_exhaustively():
    small = [Label(s, i) for s in SECRECY[:4] for i in INTEGRITY[:4]]
    ps = list(policies(2, small[:6]))
    for p in ps:
        for q in ps:
            assert policy_leq(p, q) == _leq_oracle(p, q)


def test_policy_leq_preorder_exhaustive():
    small = [BOTTOM_LABEL, TOP_LABEL, ALICE, ENC, Label(secrecy_atom("b"), BOTTOM_I)]
    ps = list(policies(2, small))
    for p in ps:
        assert policy_leq(p, p)
    for p, q, r in itertools.product(ps[:40], repeat=3):
        if policy_leq(p, q) and policy_leq(q, r):
            assert policy_leq(p, r)


@given(policy_st, policy_st)
def test_join_commutative_and_upper_bound(p, q):
    j = policy_join(p, q)
    assert policy_join(q, p) == j
    assert policy_leq(p, j) and policy_leq(q, j)


@given(policy_st, policy_st, policy_st)
def test_join_associative_and_least(p, q, r):
    assert policy_join(policy_join(p, q), r) == policy_join(p, policy_join(q, r))
    if policy_leq(p, r) and policy_leq(q, r):
        assert policy_leq(policy_join(p, q), r)


@given(policy_st)
def test_join_identities(p):
    assert policy_join(p, p) == p
    assert policy_join(p, BOTTOM) == p
    assert policy_join(p, TOP) == TOP


def test_join_of_distinct_atoms_goes_to_top_of_component():
    a = Policy((Label(secrecy_atom("a"), BOTTOM_I),))
    b = Policy((Label(secrecy_atom("b"), BOTTOM_I),))
    assert policy_join(a, b) == Policy((Label(TOP_S, BOTTOM_I),))
    with pytest.raises(IncomparableAtoms):
        label_join(a.at(0), b.at(0), strict=True)


def test_unlabeled_marker_is_outside_the_lattice():
    with pytest.raises(UnlabeledComparison):
        policy_leq(UNLABELED, BOTTOM)
    assert flow_leq(UNLABELED, UNLABELED)
    assert flow_leq(BOTTOM, UNLABELED) and flow_leq(UNLABELED, TOP)
    assert not flow_leq(UNLABELED, Policy((ALICE,)))
    assert flow_join(UNLABELED, BOTTOM) == UNLABELED
    with pytest.raises(UnlabeledComparison):
        flow_join(UNLABELED, Policy((ALICE,)))


def test_lab_of_and_guards():
    rho = Policy((ALICE,))
    assert lab_of(int_t(rho)) == rho
    assert lab_of(ptr_t(int_t(rho), TOP)) == TOP
    assert guards(BOTTOM, int_t(rho))
    assert guards(rho, int_t(rho))
    assert guards(TOP, UNIT)
    assert not guards(TOP, int_t(rho))


@given(policy_st, st.sampled_from([int_t, lambda p: ptr_t(int_t(BOTTOM), p)]), policy_st)
def test_guards_is_leq_on_label(p, mk, q):
    s = mk(q)
    assert guards(p, s) == policy_leq(p, lab_of(s))


ENCODE = RelabelCapability(ALICE, ENC, "encodeA")
YAO = RelabelCapability(ENC, BOTTOM_LABEL, "yao_execA")


def test_rewrites_to_examples():
    rho = Policy((ALICE, ENC))
    assert rewrites_to([], rho, rho)
    assert rewrites_to([ENCODE], rho, Policy((ENC,)))
    assert not rewrites_to([], Policy((ALICE,)), BOTTOM)


def test_high_membership_examples():
    assert in_high(BOTTOM, [], Policy((ALICE, ENC)))
    assert in_high(BOTTOM, [ENCODE], Policy((ENC,)))
    assert not in_high(BOTTOM, [ENCODE, YAO], Policy((ENC,)))


@settings(max_examples=200)
@given(policy_st, st.lists(st.tuples(label_st, label_st), max_size=3),
       st.lists(st.tuples(label_st, label_st), max_size=2))
def test_in_high_antitone_in_capabilities(p, caps, extra):
    small = [RelabelCapability(a, b) for a, b in caps]
    big = small + [RelabelCapability(a, b) for a, b in extra]
    if not in_high(BOTTOM, small, p):
        assert not in_high(BOTTOM, big, p)
