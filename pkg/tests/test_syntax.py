from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from proofgrove.syntax import (
    ParseError, SApp, SIdent, SMvar, SPi, Span, mk_app, num_tower, parse_file,
    parse_tactic, parse_tactic_script, parse_term, render_tactic, render_term,
    strip_spans, tower_value,
)


def test_parse_listing_one_target():
    t = parse_term("a - b = a")
    sub = mk_app(SIdent("Nat.sub"), SIdent("a"), SIdent("b"))
    assert t == mk_app(SIdent("Eq"), sub, SIdent("a"))


def test_parse_zero_desugars():
    assert parse_term("0") == SIdent("Nat.zero")
    assert tower_value(parse_term("3")) == 3


def test_parse_mvar_reference():
    t = parse_term("2 ≤ ?m")
    assert t == mk_app(SIdent("Le"), num_tower(2), SMvar("m"))


def test_ascii_aliases_match_unicode():
    pairs = [
        ("a <= b", "a ≤ b"),
        ("P /\\ Q", "P ∧ Q"),
        ("P \\/ Q", "P ∨ Q"),
        ("P <-> Q", "P ↔ Q"),
        ("Nat", "ℕ"),
        ("<| a, b |>", "⟨a, b⟩"),
        ("fun x => x", "fun x ↦ x"),
    ]
    for ascii_form, unicode_form in pairs:
        assert parse_term(ascii_form) == parse_term(unicode_form)


def test_arrow_is_right_associative():
    t = parse_term("A → B → C")
    assert isinstance(t, SPi) and isinstance(t.body, SPi)


def test_precedence_of_arith_vs_cmp():
    assert parse_term("a + b * c = d") == parse_term("(a + (b * c)) = d")


def test_forall_multi_binder():
    t = parse_term("∀ n m k : Nat, Le n m")
    assert isinstance(t, SPi)
    assert [name for name, _ in t.binders] == ["n", "m", "k"]


TERM_FIXTURES = [
    "a - b = a",
    "0",
    "2 ≤ ?m",
    "n * m = 0 ↔ n = 0 ∨ m = 0",
    "∀ n m k : Nat, n ≤ m → m ≤ k → n ≤ k",
    "fun k ↦ ?_",
    "⟨by rw [h1, h2]; rfl, rfl⟩",
    "False.elim _ (Nat.succ_ne_zero _ h)",
    "Nat.succ (2 * n')",
    "sorry",
    "(a + 1) * (b - 2)",
]


@pytest.mark.parametrize("text", TERM_FIXTURES)
def test_term_round_trip(text):
    once = parse_term(text)
    again = parse_term(render_term(once))
    assert strip_spans(again) == strip_spans(once)


def test_render_deterministic():
    t = parse_term("n * m = 0 ↔ n = 0 ∨ m = 0")
    assert render_term(t) == render_term(parse_term(render_term(t)))


def test_seq_all_structure():
    script = parse_tactic_script("cases n <;> cases m")
    assert len(script) == 1
    node = script[0]
    assert node.kind == "seq_all"
    assert node.lhs.kind == "cases" and node.rhs.kind == "cases"


def test_single_rfl():
    script = parse_tactic_script("rfl")
    assert [t.kind for t in script] == ["rfl"]


def test_exact_with_nested_by_block():
    script = parse_tactic_script("exact ⟨by rw [h], rfl⟩")
    (node,) = script
    assert node.kind == "exact"
    from proofgrove.syntax import SAnon, SBy
    assert isinstance(node.term, SAnon)
    assert isinstance(node.term.args[0], SBy)
    assert [t.kind for t in node.term.args[0].script] == ["rw"]


def test_render_rw_canonical():
    from proofgrove.syntax import RwRule, TacticNode
    node = TacticNode("rw", rules=(RwRule(SIdent("h")),))
    assert render_tactic(node) == "rw [h]"


def test_render_synthetic_case():
    from proofgrove.syntax import TacticNode
    node = TacticNode("case", tag="succ", names=("n'",))
    assert render_tactic(node) == "case succ n'"


TACTIC_FIXTURES = [
    "intro h k",
    "exact ⟨by rw [a, b]; rfl, rfl⟩",
    "apply Nat.le_trans",
    "rw [h1, h2] at h",
    "rwa [h]",
    "cases n",
    "case succ n'",
    "constructor",
    "left",
    "right",
    "have k : b = 0 := sorry",
    "sorry",
    "cases n <;> rfl",
    "all_goals rfl",
    "try rfl",
    "· rfl; rfl",
    "rotate_left",
    "apply?",
    "exact?",
    "rw?",
]


@pytest.mark.parametrize("text", TACTIC_FIXTURES)
def test_tactic_round_trip(text):
    once = parse_tactic_script(text)
    again = parse_tactic_script("\n".join(render_tactic(t) for t in once))
    assert [strip_spans(t) for t in again] == [strip_spans(t) for t in once]


def test_unknown_tactic_rejected():
    with pytest.raises(ParseError):
        parse_tactic("linarith")
    with pytest.raises(ParseError):
        parse_tactic("switch")


def test_span_fidelity_on_script():
    text = "rw [h]\nrfl"
    script = parse_tactic_script(text)
    for node in script:
        slice_ = node.span.slice(text)
        reparsed = parse_tactic(slice_)
        assert strip_spans(reparsed) == strip_spans(node)


def test_offside_brackets_suspend():
    script = parse_tactic_script("rw [h1,\n      h2]\nrfl")
    assert [t.kind for t in script] == ["rw", "rfl"]
    assert len(script[0].rules) == 2


def test_parse_file_empty():
    sf = parse_file("", "empty.ml")
    assert sf.declarations == [] and sf.imports == []


def test_parse_file_imports_and_opens():
    src = "import Peano\nopen Nat\ntheorem t : True := by constructor\n"
    sf = parse_file(src, "t.ml")
    assert sf.imports == ["Peano"]
    assert sf.theorems[0].open_namespaces == ("Nat",)


def test_parse_file_error_recovery():
    src = "theorem bad (x : := by rfl\n\ntheorem good : True := by constructor\n"
    sf = parse_file(src, "t.ml")
    assert len(sf.errors) == 1
    assert [t.name for t in sf.theorems] == ["good"]


def test_parse_file_sub_zero_shape():
    src = "theorem sub_zero (a b : ℕ) (h : b = 0) : a - b = a := by rw [h]; rfl"
    sf = parse_file(src, "s.ml")
    (th,) = sf.theorems
    assert th.name == "sub_zero"
    assert sum(len(b.names) for b in th.binders) == 3
    from proofgrove.syntax import SBy
    assert isinstance(th.proof, SBy)


def test_spans_are_character_offsets():
    # ℕ is one character; spans must count scalars, not bytes
    src = "theorem t (a : ℕ) : a = a := by rfl"
    sf = parse_file(src, "t.ml")
    (th,) = sf.theorems
    assert src[th.span.start:th.span.finish] == src
    rfl = th.proof.script[0]
    assert src[rfl.span.start:rfl.span.finish] == "rfl"


def test_import_after_declaration_rejected():
    sf = parse_file("open Nat\nimport Peano\n", "t.ml")
    assert any("precede" in e.message for e in sf.errors)


_names = st.sampled_from(["a", "b", "n", "m", "x'"])


@st.composite
def _terms(draw, depth=0):
    if depth > 3:
        return draw(st.sampled_from([SIdent("a"), SIdent("Nat.zero"), num_tower(2)]))
    kind = draw(st.integers(0, 4))
    if kind == 0:
        return SIdent(draw(_names))
    if kind == 1:
        return num_tower(draw(st.integers(0, 5)))
    if kind == 2:
        op = draw(st.sampled_from(["Eq", "Le", "And", "Nat.add", "Nat.mul"]))
        return mk_app(SIdent(op), draw(_terms(depth + 1)), draw(_terms(depth + 1)))
    if kind == 3:
        return SApp(SIdent("Nat.succ"), draw(_terms(depth + 1)))
    return SPi((("_", draw(_terms(depth + 1))),), draw(_terms(depth + 1)))


@given(_terms())
def test_property_render_parse_inverse(term):
    assert parse_term(render_term(term)) == term
