"""Independent oracles the tests check the engine against.

These deliberately avoid the code paths they audit: coupling is recomputed by
pairwise closure over shared metavariables, proof metrics by a direct
recursive traversal, and provability by breadth-first enumeration over tactic
sequences applied to whole (unfactorized) states.
"""

from __future__ import annotations

from proofgrove.factorize import goal_mvar_occurrences
from proofgrove.syntax import ParseError, parse_tactic
from proofgrove.tactics import TacticConfig, TacticError, apply_tactic, new_session, state_views


def coupling_closure(mctx, goals) -> list[list[int]]:
    """Brute-force pairwise shared-metavariable closure."""
    goals = list(goals)
    occ = {g: goal_mvar_occurrences(mctx, g) for g in goals}
    groups: list[list[int]] = []
    for g in goals:
        hits = [grp for grp in groups if any(occ[g] & occ[x] for x in grp)]
        merged = [x for grp in hits for x in grp] + [g]
        for grp in hits:
            groups.remove(grp)
        groups.append(merged)
    # restore goal-list order inside and across groups
    index = {g: i for i, g in enumerate(goals)}
    for grp in groups:
        grp.sort(key=index.get)
    groups.sort(key=lambda grp: index[grp[0]])
    return groups


def tree_metrics(node) -> tuple[int, int]:
    """(size, depth) by direct recursion, independent of annotate_metrics."""
    sizes = [tree_metrics(c) for c in node.children]
    size = 1 + sum(s for s, _ in sizes)
    depth = 1 + (max((d for _, d in sizes)) if sizes else 0)
    return size, depth


def _state_fingerprint(state) -> str:
    return "||".join(v.pretty() for v in state_views(state))


def bfs_provable(env, goal_text: str, menu: list[str], max_len: int) -> bool:
    """Breadth-first enumeration over tactic sequences of length <= max_len,
    applying each tactic to the whole evolving state's main goal.  States are
    deduplicated by their rendered fingerprint."""
    tactics = []
    for text in menu:
        try:
            tactics.append(parse_tactic(text))
        except ParseError:
            continue
    config = TacticConfig(allow_sorry=False)
    start = new_session(env, goal_text)
    frontier = [start]
    seen = {_state_fingerprint(start)}
    for _ in range(max_len):
        nxt = []
        for state in frontier:
            for tac in tactics:
                try:
                    outcome = apply_tactic(env, state, tac, config)
                except TacticError:
                    continue
                new = outcome.new_state
                if new.finished:
                    return True
                fp = _state_fingerprint(new)
                if fp in seen:
                    continue
                seen.add(fp)
                nxt.append(new)
        frontier = nxt
        if not frontier:
            break
    return False
