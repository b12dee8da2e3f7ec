from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from proofgrove.elab import Elaborator
from proofgrove.kernel import (
    App, Const, Hypothesis, Lam, MetavarContext, Mvar, NAT, Pi, Sorry, Var,
    check_closed_proof, check_new_assignments, def_eq, infer_type, mk_app,
    nat_literal, show_term, term_size, unify, whnf,
)
from proofgrove.kernel.mctx import AlreadyAssigned
from proofgrove.syntax import parse_term


def fresh_mctx(env):
    return MetavarContext(next_uid=env.uid_floor)


def elab(env, mctx, text, hyps=(), expected=None):
    el = Elaborator(env, mctx, hyps)
    if expected is None:
        return el.elab_type(parse_term(text))
    return el.check(parse_term(text), expected)


# -- whnf -------------------------------------------------------------------

def test_whnf_add_literals(env):
    mctx = fresh_mctx(env)
    t = elab(env, mctx, "2 + 3", expected=NAT)
    assert nat_literal(env, mctx, t) == 5


def test_whnf_beta(env):
    mctx = fresh_mctx(env)
    uid = mctx.fresh_uid()
    t = App(Lam(uid, "x", NAT, Var(uid)), Const("Nat.zero"))
    assert whnf(env, mctx, t) == Const("Nat.zero")


def test_whnf_unfolds_lt(env):
    # oracle: Lt is defined as Le (succ n) m in the prelude
    mctx = fresh_mctx(env)
    hyps = (Hypothesis(mctx.fresh_uid(), "a", NAT), Hypothesis(mctx.fresh_uid(), "b", NAT))
    t = elab(env, mctx, "a < b", hyps)
    names = {h.uid: h.name for h in hyps}
    assert show_term(whnf(env, mctx, t), names) == "Nat.succ a ≤ b"


def test_whnf_idempotent(env):
    mctx = fresh_mctx(env)
    for text in ["2 + 3", "2 * 3", "5 - 2", "0 - 3", "Nat.pred 4"]:
        t = elab(env, mctx, text, expected=NAT)
        once = whnf(env, mctx, t)
        assert whnf(env, mctx, once) == once


def test_truncated_subtraction(env):
    mctx = fresh_mctx(env)
    assert nat_literal(env, mctx, elab(env, mctx, "2 - 5", expected=NAT)) == 0
    assert nat_literal(env, mctx, elab(env, mctx, "5 - 2", expected=NAT)) == 3


# -- infer_type ---------------------------------------------------------------

def test_infer_identity_lambda(env):
    mctx = fresh_mctx(env)
    b = Hypothesis(mctx.fresh_uid(), "b", NAT)
    hyp_ty = elab(env, mctx, "b = 0", (b,))
    uid = mctx.fresh_uid()
    lam = Lam(uid, "h", hyp_ty, Var(uid))
    ty = infer_type(env, mctx, {b.uid: NAT}, lam)
    assert isinstance(ty, Pi)
    assert def_eq(env, mctx, ty.type, hyp_ty) and def_eq(env, mctx, ty.body, hyp_ty)


def test_infer_le_trans_signature(env):
    mctx = fresh_mctx(env)
    ty = infer_type(env, mctx, {}, Const("Nat.le_trans"))
    assert show_term(ty) == "∀ n m k : Nat, n ≤ m → m ≤ k → n ≤ k"


def test_infer_refl_application(env):
    # oracle: substitute into the declared Eq.refl signature by hand
    mctx = fresh_mctx(env)
    five = elab(env, mctx, "5", expected=NAT)
    ty = infer_type(env, mctx, {}, App(Const("Eq.refl"), five))
    assert show_term(ty) == "5 = 5"


def test_infer_unknown_constant(env):
    mctx = fresh_mctx(env)
    with pytest.raises(Exception) as e:
        infer_type(env, mctx, {}, Const("Nat.bogus"))
    assert getattr(e.value, "kind", "") == "unknown-const"


def test_infer_forbid_placeholder(env):
    mctx = fresh_mctx(env)
    mid = mctx.fresh_mvar((), NAT)
    with pytest.raises(Exception) as e:
        infer_type(env, mctx, {}, Mvar(mid), holes="forbid")
    assert e.value.kind == "unsynthesized-placeholder"
    assert infer_type(env, mctx, {}, Mvar(mid), holes="opaque") == NAT


# -- def_eq ---------------------------------------------------------------------

def test_def_eq_arith(env):
    mctx = fresh_mctx(env)
    assert def_eq(env, mctx, elab(env, mctx, "2 + 3", expected=NAT), elab(env, mctx, "5", expected=NAT))
    assert not def_eq(env, mctx, Const("Nat.zero"), App(Const("Nat.succ"), Const("Nat.zero")))


def test_def_eq_sub_zero_rule(env):
    # oracle: the computation rule table says sub x 0 = x
    mctx = fresh_mctx(env)
    a = Hypothesis(mctx.fresh_uid(), "a", NAT)
    lhs = elab(env, mctx, "a - 0", (a,), expected=NAT)
    assert def_eq(env, mctx, lhs, Var(a.uid))


def test_def_eq_alpha(env):
    mctx = fresh_mctx(env)
    u1, u2 = mctx.fresh_uid(), mctx.fresh_uid()
    f = Lam(u1, "x", NAT, Var(u1))
    g = Lam(u2, "y", NAT, Var(u2))
    assert def_eq(env, mctx, f, g)


# -- unify ------------------------------------------------------------------------

def test_unify_le_trans_shape(env):
    mctx = fresh_mctx(env)
    n = mctx.fresh_mvar((), NAT)
    k = mctx.fresh_mvar((), NAT)
    m = mctx.fresh_mvar((), NAT)
    pat = mk_app(Const("Le"), Mvar(n), Mvar(k))
    target = elab(env, mctx, "2 ≤ 5")
    solved = unify(env, mctx, pat, target)
    assert solved is not None
    assert nat_literal(env, solved, solved.instantiate(Mvar(n))) == 2
    assert nat_literal(env, solved, solved.instantiate(Mvar(k))) == 5
    assert not solved.is_assigned(m)  # the middle stays open


def test_unify_occurs_check(env):
    mctx = fresh_mctx(env)
    a = mctx.fresh_mvar((), NAT)
    before = dict(mctx.assignments)
    assert unify(env, mctx, Mvar(a), App(Const("Nat.succ"), Mvar(a))) is None
    assert mctx.assignments == before


def test_unify_reflexive_no_assignments(env):
    mctx = fresh_mctx(env)
    t = elab(env, mctx, "∀ n m : Nat, n * m = 0 ↔ n = 0 ∨ m = 0")
    log_before = len(mctx.log)
    assert unify(env, mctx, t, t) is not None
    assert len(mctx.log) == log_before


def test_unify_failure_leaves_mctx_identical(env):
    mctx = fresh_mctx(env)
    a = mctx.fresh_mvar((), NAT)
    snapshot = (dict(mctx.assignments), list(mctx.log), mctx._next_mid, mctx._next_uid)
    assert unify(env, mctx, App(Const("Nat.succ"), Mvar(a)), Const("Nat.zero")) is None
    assert snapshot == (dict(mctx.assignments), list(mctx.log), mctx._next_mid, mctx._next_uid)


def test_unify_result_is_def_eq(env):
    mctx = fresh_mctx(env)
    a = mctx.fresh_mvar((), NAT)
    lhs = mk_app(Const("Nat.add"), Mvar(a), elab(env, mctx, "1", expected=NAT))
    rhs = elab(env, mctx, "3 + 1", expected=NAT)
    solved = unify(env, mctx, lhs, rhs)
    assert solved is not None and def_eq(env, solved, lhs, rhs)


# -- instantiate -------------------------------------------------------------------

def test_instantiate_chain(env):
    # oracle: repeated single-step substitution to a fixpoint
    mctx = fresh_mctx(env)
    a = mctx.fresh_mvar((), NAT)
    b = mctx.fresh_mvar((), NAT)
    mctx.assign(a, Mvar(b))
    mctx.assign(b, Const("Nat.zero"))
    assert mctx.instantiate(Mvar(a)) == Const("Nat.zero")
    t = elab(env, mctx, "1", expected=NAT)
    assert mctx.instantiate(t) is t  # no metavariables: same object


def test_assignments_never_overwritten(env):
    mctx = fresh_mctx(env)
    a = mctx.fresh_mvar((), NAT)
    mctx.assign(a, Const("Nat.zero"))
    with pytest.raises(AlreadyAssigned):
        mctx.assign(a, Const("Nat.zero"))


def test_log_replay_reproduces_mctx(env):
    mctx = fresh_mctx(env)
    a = mctx.fresh_mvar((), NAT)
    b = mctx.fresh_mvar((), NAT)
    mctx.assign(a, App(Const("Nat.succ"), Mvar(b)))
    mctx.assign(b, Const("Nat.zero"))
    replay = mctx.clone()
    replay.assignments = {}
    replay.log = []
    for mid, value in mctx.log:
        replay.assign(mid, value)
    assert replay.assignments == mctx.assignments
    assert replay.log == mctx.log


# -- verification ---------------------------------------------------------------------

def test_check_new_assignment_have_sorry_shape(env):
    # the bifurcation shape ((fun k ↦ ?_) sorry): ok despite holes in the root
    mctx = fresh_mctx(env)
    target = elab(env, mctx, "True")
    k_ty = elab(env, mctx, "0 = 0")
    goal = mctx.fresh_mvar((), target)
    uid = mctx.fresh_uid()
    cont = mctx.fresh_mvar((Hypothesis(uid, "k", k_ty),), target)
    mctx.assign(goal, App(Lam(uid, "k", k_ty, Mvar(cont)), Sorry(k_ty)))
    assert check_new_assignments(env, mctx, [goal]) is None


def test_check_new_assignment_type_mismatch(env):
    mctx = fresh_mctx(env)
    bad_target = elab(env, mctx, "0 = 1")
    goal = mctx.fresh_mvar((), bad_target)
    mctx.assign(goal, App(Const("Eq.refl"), Const("Nat.zero")))
    failure = check_new_assignments(env, mctx, [goal])
    assert failure is not None and failure.kind == "type-mismatch"
    assert failure.mid == goal


def test_check_closed_rejects_sorry(env):
    target = parse_term("True")
    mctx = fresh_mctx(env)
    ty = elab(env, mctx, "True")
    failure = check_closed_proof(env, Sorry(ty), ty, {}, mctx)
    assert failure is not None and failure.kind == "contains-sorry"


def test_check_closed_rejects_hole(env):
    mctx = fresh_mctx(env)
    ty = elab(env, mctx, "0 = 0")
    hole = mctx.fresh_mvar((), NAT)
    term = App(Const("Eq.refl"), Mvar(hole))
    failure = check_closed_proof(env, term, ty, {}, mctx)
    assert failure is not None and failure.kind == "contains-hole"


def test_kernel_stats_count_sizes(env):
    from proofgrove.kernel import KernelStats
    mctx = fresh_mctx(env)
    ty = elab(env, mctx, "0 = 0")
    goal = mctx.fresh_mvar((), ty)
    value = App(Const("Eq.refl"), Const("Nat.zero"))
    mctx.assign(goal, value)
    stats = KernelStats()
    assert check_new_assignments(env, mctx, [goal], stats) is None
    assert stats.checks == 1
    assert stats.checked_nodes == term_size(value)


@given(st.integers(0, 20), st.integers(0, 20))
def test_property_arith_agrees_with_python(env, a, b):
    mctx = fresh_mctx(env)
    el = Elaborator(env, mctx)
    t = el.check(parse_term(f"{a} + {b}"), NAT)
    assert nat_literal(env, mctx, t) == a + b
    t2 = el.check(parse_term(f"{a} * {b}"), NAT)
    assert nat_literal(env, mctx, t2) == a * b
    t3 = el.check(parse_term(f"{a} - {b}"), NAT)
    assert nat_literal(env, mctx, t3) == max(a - b, 0)
