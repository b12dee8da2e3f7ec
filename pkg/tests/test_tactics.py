from __future__ import annotations

import pytest

from proofgrove.kernel import Mvar, check_closed_proof, check_new_assignments
from proofgrove.syntax import parse_tactic, parse_tactic_script
from proofgrove.tactics import (
    TacticConfig, TacticError, apply_tactic, goal_view, new_session,
    run_script, state_views,
)
from conftest import theorem_named


def closed_ok(env, result):
    mctx = result.final_state.mctx
    decl = mctx.decl(result.root_goal)
    return check_closed_proof(env, Mvar(result.root_goal), decl.target, decl.ctx_types(), mctx) is None


# -- sessions ------------------------------------------------------------------

def test_new_session_sub_zero(paper_file):
    th = theorem_named(paper_file, "sub_zero")
    state = new_session(th.env, th.decl)
    view = state_views(state)[0]
    assert [(h.name, h.type) for h in view.hypotheses] == [
        ("a", "Nat"), ("b", "Nat"), ("h", "b = 0"),
    ]
    assert view.target == "a - b = a"


def test_new_session_listing2(paper_file):
    th = theorem_named(paper_file, "mul_eq_zero_iff")
    view = state_views(new_session(th.env, th.decl))[0]
    assert view.target == "n * m = 0 ↔ n = 0 ∨ m = 0"


def test_new_session_goal_text(env):
    state = new_session(env, "True")
    assert state_views(state)[0].target == "True"
    assert len(state.goals) == 1


def test_new_session_rejects_non_prop(env):
    with pytest.raises(TacticError):
        new_session(env, "Nat")


# -- individual tactics -----------------------------------------------------------

def test_apply_le_trans_three_goals(env):
    state = new_session(env, "2 ≤ 5")
    out = apply_tactic(env, state, parse_tactic("apply Nat.le_trans"))
    views = state_views(out.new_state)
    assert len(views) == 3
    assert views[0].target == "Nat"
    assert views[1].target.startswith("2 ≤ ?")
    assert views[2].target.endswith("≤ 5")
    assert not out.new_assignments or all(
        out.new_state.mctx.is_assigned(m) for m in out.new_assignments
    )


def test_cases_seq_all_four_goals(paper_file):
    th = theorem_named(paper_file, "mul_eq_zero_iff")
    state = new_session(th.env, th.decl)
    out = apply_tactic(th.env, state, parse_tactic("cases n <;> cases m"))
    views = state_views(out.new_state)
    assert len(views) == 4
    assert [v.tag for v in views] == ["zero", "succ", "zero", "succ"]
    assert "Nat.succ n† * 0 = 0 ↔ Nat.succ n† = 0 ∨ 0 = 0" in [v.target for v in views]


def test_banned_tactic_by_default(env):
    state = new_session(env, "True")
    with pytest.raises(TacticError) as e:
        apply_tactic(env, state, parse_tactic("apply?"))
    assert e.value.kind == "banned-tactic"


def test_library_search_opt_in_acts_as_sorry(env):
    state = new_session(env, "True")
    config = TacticConfig(banned=frozenset())
    out = apply_tactic(env, state, parse_tactic("apply?"), config)
    assert out.new_state.finished
    decl = out.new_state.mctx.decl(state.goals[0])
    failure = check_closed_proof(env, Mvar(state.goals[0]), decl.target, {}, out.new_state.mctx)
    assert failure is not None and failure.kind == "contains-sorry"


def test_rfl_closes_eq(env):
    state = new_session(env, "5 = 5")
    out = apply_tactic(env, state, parse_tactic("rfl"))
    assert out.new_state.finished and len(out.new_assignments) == 1


def test_sorry_disallowed_by_config(env):
    state = new_session(env, "True")
    with pytest.raises(TacticError) as e:
        apply_tactic(env, state, parse_tactic("sorry"), TacticConfig(allow_sorry=False))
    assert e.value.kind == "sorry-disallowed"


def test_assumption_uses_first_def_eq_hypothesis(env):
    state = new_session(env, "∀ P Q : Prop, P → Q → P")
    for text in ["intro P Q hp hq", "assumption"]:
        state = apply_tactic(env, state, parse_tactic(text)).new_state
    assert state.finished


def test_rw_found_no_occurrence(paper_file):
    th = theorem_named(paper_file, "sub_zero")
    state = new_session(th.env, th.decl)
    state = apply_tactic(th.env, state, parse_tactic("rw [h]")).new_state
    with pytest.raises(TacticError) as e:
        apply_tactic(th.env, state, parse_tactic("rw [h]"))
    assert e.value.kind == "rewrite-found-no-occurrence"


def test_unknown_hypothesis(paper_file):
    th = theorem_named(paper_file, "sub_zero")
    state = new_session(th.env, th.decl)
    with pytest.raises(TacticError) as e:
        apply_tactic(th.env, state, parse_tactic("rw [h] at nope"))
    assert e.value.kind == "unknown-hypothesis"


def test_no_goals_error(env):
    state = new_session(env, "True")
    state = apply_tactic(env, state, parse_tactic("constructor")).new_state
    with pytest.raises(TacticError) as e:
        apply_tactic(env, state, parse_tactic("rfl"))
    assert e.value.kind == "no-goals"


def test_case_renames_daggered(env):
    state = new_session(env, "∀ n : Nat, n = n")
    state = apply_tactic(env, state, parse_tactic("intro n")).new_state
    state = apply_tactic(env, state, parse_tactic("cases n")).new_state
    assert state_views(state)[1].hypotheses[0].name == "n†"
    state = apply_tactic(env, state, parse_tactic("case succ fresh")).new_state
    view = state_views(state)[0]
    assert view.hypotheses[0].name == "fresh"
    assert view.tag is None  # selection clears the tag


def test_dagger_names_unreferencable(env):
    state = new_session(env, "∀ n : Nat, 0 ≤ n")
    state = apply_tactic(env, state, parse_tactic("intro n")).new_state
    state = apply_tactic(env, state, parse_tactic("cases n")).new_state
    state = apply_tactic(env, state, parse_tactic("rotate_left")).new_state
    with pytest.raises(TacticError):
        apply_tactic(env, state, parse_tactic("exact Nat.zero_le n†"))


def test_focus_must_close(env):
    state = new_session(env, "0 = 0 ∧ 1 = 1")
    state = apply_tactic(env, state, parse_tactic("constructor")).new_state
    with pytest.raises(TacticError):
        apply_tactic(env, state, parse_tactic("· try assumption"))


def test_rotate_left_cycles(env):
    state = new_session(env, "0 = 0 ∧ 1 ≤ 1")
    state = apply_tactic(env, state, parse_tactic("constructor")).new_state
    before = state.goals
    state = apply_tactic(env, state, parse_tactic("rotate_left")).new_state
    assert state.goals == before[1:] + before[:1]


# -- scripts -------------------------------------------------------------------------

def test_run_script_sub_zero(paper_file):
    th = theorem_named(paper_file, "sub_zero")
    result = run_script(th.env, th.decl, th.decl.proof.script)
    assert result.proven and closed_ok(th.env, result)


def test_run_script_empty_unproven(env):
    result = run_script(env, "True", [])
    assert not result.proven
    assert len(result.final_state.goals) == 1


def test_run_script_failure_keeps_earlier_state(env):
    script = parse_tactic_script("constructor\nrw [nope]\nrfl")
    result = run_script(env, "0 = 0 ∧ 1 = 1", script)
    assert result.error is not None and result.error.index == 1
    assert result.error.span == script[1].span
    # the state after step 0 is still retrievable and usable
    mid_state = result.states[0]
    assert len(mid_state.goals) == 2
    out = apply_tactic(env, mid_state, parse_tactic("rfl"))
    assert len(out.new_state.goals) == 1


def test_determinism_same_outcome(paper_file):
    th = theorem_named(paper_file, "mul_eq_zero_iff")
    r1 = run_script(th.env, th.decl, th.decl.proof.script)
    r2 = run_script(th.env, th.decl, th.decl.proof.script)
    v1 = [v.pretty() for s in r1.states for v in state_views(s)]
    v2 = [v.pretty() for s in r2.states for v in state_views(s)]
    assert v1 == v2 and r1.proven and r2.proven


def test_branch_from_anywhere(paper_file):
    th = theorem_named(paper_file, "sub_zero")
    root = new_session(th.env, th.decl)
    s_rw = apply_tactic(th.env, root, parse_tactic("rw [h]")).new_state
    before = [v.pretty() for v in state_views(s_rw)]
    # branching from the root must not perturb outcomes derived from s_rw
    apply_tactic(th.env, root, parse_tactic("cases b"))
    assert [v.pretty() for v in state_views(s_rw)] == before
    out = apply_tactic(th.env, s_rw, parse_tactic("rfl"))
    assert out.new_state.finished


def test_conservation_of_goals(paper_file):
    th = theorem_named(paper_file, "mul_eq_zero_iff")
    state = new_session(th.env, th.decl)
    out = apply_tactic(th.env, state, parse_tactic("cases n <;> cases m"))
    consumed = set()
    produced = []
    for step in out.steps:
        consumed.add(step.consumed)
        consumed.update(step.side_closed)
        produced.extend(step.produced)
    survivors = [g for g in list(state.goals) + produced if g not in consumed]
    assert sorted(survivors) == sorted(out.new_state.goals)


def test_outcomes_pass_incremental_checks(golden_corpus):
    for loaded in golden_corpus.values():
        for th in loaded.theorems:
            proof = th.decl.proof
            from proofgrove.syntax import SBy
            if not isinstance(proof, SBy):
                continue
            state = new_session(th.env, th.decl)
            for tac in proof.script:
                outcome = apply_tactic(th.env, state, tac)
                assert check_new_assignments(th.env, outcome.new_state.mctx, outcome.new_assignments) is None
                state = outcome.new_state


def test_corpus_proofs_close(golden_corpus):
    from proofgrove.syntax import SBy
    for name, loaded in golden_corpus.items():
        for th in loaded.theorems:
            if not isinstance(th.decl.proof, SBy):
                continue
            result = run_script(th.env, th.decl, th.decl.proof.script)
            assert result.proven, f"{name}:{th.decl.name} did not prove"
            assert closed_ok(th.env, result), f"{name}:{th.decl.name} failed the final check"


def test_have_requires_annotation_for_sorry(env):
    state = new_session(env, "True")
    with pytest.raises(TacticError):
        apply_tactic(env, state, parse_tactic("have k := sorry"))
