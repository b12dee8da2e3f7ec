"""Factorizing proof states into maximal independent components under
metavariable coupling, and canonical state keys for transposition detection.

Coupling is computed on instantiated goals: an assignment can decouple goals,
and the components reflect that immediately.  Keys are digests of a canonical
rendering in which hypothesis names, bound-variable names, and metavariable
ids are all normalized away, so states reached along different search paths
compare equal exactly when they are the same state up to renaming.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from .kernel.mctx import MetavarContext
from .kernel.term import mvars_of
from .syntax import (
    SAnon, SApp, SBy, SFun, SHole, SIdent, SMvar, SPi, SRfl, SSorry, STerm,
    parse_term, render_term,
)
from .tactics import GoalView, ProofState, _next_sid, goal_view


def goal_mvar_occurrences(mctx: MetavarContext, mid: int) -> set[int]:
    """Unassigned metavariables occurring in the goal's instantiated target
    and hypotheses, plus the goal metavariable itself."""
    decl = mctx.decl(mid)
    occ: set[int] = set()
    mvars_of(mctx.instantiate(decl.target), occ)
    for h in decl.context:
        mvars_of(mctx.instantiate(h.type), occ)
        if h.value is not None:
            mvars_of(mctx.instantiate(h.value), occ)
    occ = {m for m in occ if not mctx.is_assigned(m)}
    occ.add(mid)
    return occ


def coupling_components(mctx: MetavarContext, goals) -> list[list[int]]:
    """Connected components of the goal/metavariable bipartite coupling graph,
    projected to goals.  Component order follows the first goal of each
    component; goal order within a component is preserved."""
    goals = list(goals)
    occs = {g: goal_mvar_occurrences(mctx, g) for g in goals}
    parent: dict[int, int] = {g: g for g in goals}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    by_mvar: dict[int, int] = {}
    for g in goals:
        for m in occs[g]:
            if m in by_mvar:
                parent[find(g)] = find(by_mvar[m])
            else:
                by_mvar[m] = g
    groups: dict[int, list[int]] = {}
    order: list[int] = []
    for g in goals:
        root = find(g)
        if root not in groups:
            groups[root] = []
            order.append(root)
        groups[root].append(g)
    return [groups[r] for r in order]


@dataclass(frozen=True)
class FactorizedState:
    """One coupling component, independently usable as a session root."""

    goals: tuple[int, ...]
    mctx: MetavarContext
    key: str

    def to_proof_state(self, opens: tuple[str, ...] = ()) -> ProofState:
        return ProofState(_next_sid(), self.goals, self.mctx, None, opens)

    def views(self) -> list[GoalView]:
        return [goal_view(self.mctx, g) for g in self.goals]


def factorize(state: ProofState) -> list[FactorizedState]:
    out = []
    for group in coupling_components(state.mctx, state.goals):
        views = [goal_view(state.mctx, g) for g in group]
        out.append(FactorizedState(tuple(group), state.mctx, canonical_key_views(views)))
    return out


def canonical_key(mctx: MetavarContext, goals) -> str:
    return canonical_key_views([goal_view(mctx, g) for g in goals])


def canonical_key_views(views: list[GoalView]) -> str:
    """Fingerprint of a component from its rendered goal views.  Invariant
    under renaming of hypotheses (daggered or not), bound variables, and
    metavariable ids; sensitive to goal order, targets, hypothesis types,
    values, and tags."""
    mvar_map: dict[str, str] = {}
    payload = []
    for view in views:
        hyp_map = {h.name: f"h{i}" for i, h in enumerate(view.hypotheses)}
        hyps = []
        for i, h in enumerate(view.hypotheses):
            hyps.append(
                [
                    f"h{i}",
                    _canon_text(h.type, hyp_map, mvar_map),
                    None if h.value is None else _canon_text(h.value, hyp_map, mvar_map),
                ]
            )
        payload.append(
            {
                "tag": view.tag,
                "hyps": hyps,
                "target": _canon_text(view.target, hyp_map, mvar_map),
            }
        )
    blob = json.dumps(payload, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _canon_text(text: str, hyp_map: dict[str, str], mvar_map: dict[str, str]) -> str:
    stx = parse_term(text)
    counter = [0]
    return render_term(_canon(stx, hyp_map, mvar_map, {}, counter))


def _canon(stx: STerm, hyp_map, mvar_map, scope: dict[str, str], counter) -> STerm:
    if isinstance(stx, SIdent):
        if stx.name in scope:
            return SIdent(scope[stx.name])
        if stx.name in hyp_map:
            return SIdent(hyp_map[stx.name])
        return stx
    if isinstance(stx, SApp):
        return SApp(
            _canon(stx.fn, hyp_map, mvar_map, scope, counter),
            _canon(stx.arg, hyp_map, mvar_map, scope, counter),
        )
    if isinstance(stx, SMvar):
        name = stx.name if stx.name is not None else "_anon"
        if name not in mvar_map:
            mvar_map[name] = f"m{len(mvar_map)}"
        return SMvar(mvar_map[name])
    if isinstance(stx, SPi):
        inner = dict(scope)
        binders = []
        for name, ty in stx.binders:
            ty2 = _canon(ty, hyp_map, mvar_map, inner, counter)
            if name == "_":
                binders.append(("_", ty2))
                continue
            fresh = f"x{counter[0]}"
            counter[0] += 1
            inner[name] = fresh
            binders.append((fresh, ty2))
        return SPi(tuple(binders), _canon(stx.body, hyp_map, mvar_map, inner, counter))
    if isinstance(stx, SFun):
        inner = dict(scope)
        binders = []
        for name, ty in stx.binders:
            ty2 = None if ty is None else _canon(ty, hyp_map, mvar_map, inner, counter)
            fresh = f"x{counter[0]}"
            counter[0] += 1
            inner[name] = fresh
            binders.append((fresh, ty2))
        return SFun(tuple(binders), _canon(stx.body, hyp_map, mvar_map, inner, counter))
    if isinstance(stx, SAnon):
        return SAnon(tuple(_canon(a, hyp_map, mvar_map, scope, counter) for a in stx.args))
    if isinstance(stx, (SHole, SSorry, SRfl, SBy)):
        return stx
    return stx
