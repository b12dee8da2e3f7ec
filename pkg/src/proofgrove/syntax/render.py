"""Deterministic pretty-printer for surface terms and tactics.

Canonical output uses the unicode spellings (≤, ∧, ∀, ↦, ⟨⟩) and decimal
numerals for closed succ/zero towers.  render ∘ parse ∘ render is stable, and
parse(render(x)) is structurally equal to x for parser output.
"""

from __future__ import annotations

from .ast import (
    CaseBranch, RwRule, SAnon, SApp, SBy, SFun, SHole, SIdent, SMvar, SPi,
    SRfl, SSorry, STerm, TacticNode, spine, tower_value,
)

_INFIX = {
    "Iff": ("↔", 20, True),
    "Or": ("∨", 30, True),
    "And": ("∧", 35, True),
    "Eq": ("=", 50, False),
    "Le": ("≤", 50, False),
    "Lt": ("<", 50, False),
    "Gt": (">", 50, False),
    "Nat.add": ("+", 65, False),
    "Nat.sub": ("-", 65, False),
    "Nat.mul": ("*", 70, False),
}
_ARROW_PREC = 10
_APP_PREC = 100


def _paren(s: str, need: bool) -> str:
    return f"({s})" if need else s


def render_term(t: STerm, prec: int = 0) -> str:
    n = tower_value(t)
    if n is not None:
        return str(n)
    if isinstance(t, SIdent):
        return t.name
    if isinstance(t, SApp):
        head, args = spine(t)
        if isinstance(head, SIdent) and len(args) == 2 and head.name in _INFIX:
            sym, p, right = _INFIX[head.name]
            left = render_term(args[0], p + 1 if right else p)
            rhs = render_term(args[1], p if right else p + 1)
            return _paren(f"{left} {sym} {rhs}", prec > p)
        parts = [render_term(head, _APP_PREC + 1)] + [render_term(a, _APP_PREC + 1) for a in args]
        return _paren(" ".join(parts), prec > _APP_PREC)
    if isinstance(t, SPi):
        if all(name == "_" for name, _ in t.binders):
            doms = [render_term(ty, _ARROW_PREC + 1) for _, ty in t.binders]
            body = f"{' → '.join(doms)} → {render_term(t.body, _ARROW_PREC)}"
            return _paren(body, prec > _ARROW_PREC)
        groups = _group_binders(t.binders)
        bs = ", ".join(
            f"{' '.join(names)} : {render_term(ty)}" for names, ty in groups
        ) if len(groups) == 1 else " ".join(
            f"({' '.join(names)} : {render_term(ty)})" for names, ty in groups
        )
        return _paren(f"∀ {bs}, {render_term(t.body)}", prec > 0)
    if isinstance(t, SFun):
        parts = []
        for name, ty in t.binders:
            parts.append(name if ty is None else f"({name} : {render_term(ty)})")
        return _paren(f"fun {' '.join(parts)} ↦ {render_term(t.body)}", prec > 0)
    if isinstance(t, SAnon):
        return "⟨" + ", ".join(render_term(a) for a in t.args) + "⟩"
    if isinstance(t, SMvar):
        return "?_" if t.name is None else f"?{t.name}"
    if isinstance(t, SHole):
        return "_"
    if isinstance(t, SSorry):
        return "sorry"
    if isinstance(t, SRfl):
        return "rfl"
    if isinstance(t, SBy):
        return _paren("by " + "; ".join(render_tactic(x) for x in t.script), prec > 0)
    raise TypeError(f"cannot render {t!r}")


def _group_binders(binders) -> list[tuple[list[str], STerm]]:
    groups: list[tuple[list[str], STerm]] = []
    for name, ty in binders:
        if groups and groups[-1][1] == ty:
            groups[-1][0].append(name)
        else:
            groups.append(([name], ty))
    return groups


def render_tactic(t: TacticNode) -> str:
    k = t.kind
    if k in {"rfl", "assumption", "constructor", "left", "right", "sorry",
             "rotate_left", "apply?", "exact?", "rw?"}:
        return k
    if k == "intro":
        return "intro " + " ".join(t.names)
    if k in {"exact", "apply"}:
        return f"{k} {render_term(t.term)}"
    if k in {"rw", "rwa"}:
        body = f"{k} [" + ", ".join(render_term(r.term) for r in t.rules) + "]"
        if t.at_hyp is not None:
            body += f" at {t.at_hyp}"
        return body
    if k in {"cases", "induction"}:
        body = f"{k} {render_term(t.term, _APP_PREC + 1)}"
        if t.branches:
            body += " with " + " ".join(_render_branch(b) for b in t.branches)
        return body
    if k == "have":
        if t.have_type is not None:
            return f"have {t.have_name} : {render_term(t.have_type)} := {render_term(t.term)}"
        return f"have {t.have_name} := {render_term(t.term)}"
    if k == "case":
        body = f"case {t.tag}"
        if t.names:
            body += " " + " ".join(t.names)
        if t.script:
            body += " => " + "; ".join(render_tactic(x) for x in t.script)
        return body
    if k == "seq_all":
        return f"{render_tactic(t.lhs)} <;> {render_tactic(t.rhs)}"
    if k in {"all_goals", "try"}:
        return f"{k} {render_tactic(t.script[0])}"
    if k == "focus":
        return "· " + "; ".join(render_tactic(x) for x in t.script)
    raise TypeError(f"cannot render tactic kind {k!r}")


def _render_branch(b: CaseBranch) -> str:
    head = f"| {b.tag}"
    if b.names:
        head += " " + " ".join(b.names)
    return head + " => " + "; ".join(render_tactic(x) for x in b.script)
