"""Linear rollouts: sequential tactic sampling bounded by a step limit.

White-box rollouts feed the policy the current goal views; black-box
rollouts feed only the theorem statement and the tactic prefix.  A rollout
succeeds only if all goals close and the concatenated script independently
re-verifies from scratch, ending in a closed (sorry-free) proof.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..kernel.term import Mvar
from ..kernel.verify import check_closed_proof
from ..syntax import ParseError, TheoremDecl, parse_tactic, render_term
from ..tactics import TacticConfig, TacticError, apply_tactic, new_session, run_script, state_views
from .config import SearchConfig
from .policies import Policy, PolicyQuery


@dataclass
class RolloutStep:
    proposal: str
    ok: bool
    error: str | None = None


@dataclass
class RolloutResult:
    theorem: str
    seed: int
    success: bool
    script: list[str] = field(default_factory=list)
    steps: list[RolloutStep] = field(default_factory=list)
    failure: str | None = None


@dataclass
class RolloutSummary:
    theorem: str
    mode: str
    success: bool
    solved_at: int | None  # index of the first successful rollout
    rollouts: list[RolloutResult]


def theorem_label(theorem) -> str:
    if isinstance(theorem, TheoremDecl):
        name = theorem.name or "<example>"
        return f"{name} : {render_term(theorem.target)}"
    return str(theorem)


def rollout(env, theorem, policy: Policy, config: SearchConfig, seed: int) -> RolloutResult:
    """One linear rollout of at most max_steps tactic applications."""
    white = config.mode != "rollout-black"
    label = theorem_label(theorem)
    result = RolloutResult(label, seed, False)
    tcfg = TacticConfig(banned=config.banned, allow_sorry=config.allow_sorry)
    try:
        state = new_session(env, theorem)
    except TacticError as e:
        result.failure = f"elaboration failed: {e.message}"
        return result
    policy = policy.seeded(seed)
    prefix: list[str] = []
    for _ in range(config.max_steps):
        if state.finished:
            break
        query = PolicyQuery(
            theorem=label,
            mode="white" if white else "black",
            goals=tuple(state_views(state)) if white else None,
            prefix=tuple(prefix),
            k=1,
        )
        proposals = policy.propose(query)
        if not proposals:
            result.failure = "policy proposed nothing"
            break
        text = proposals[0][0]
        try:
            tac = parse_tactic(text)
        except ParseError as e:
            # a malformed proposal consumes a step and is logged
            result.steps.append(RolloutStep(text, False, f"parse error: {e.message}"))
            if not white:
                prefix.append(text)
            continue
        try:
            outcome = apply_tactic(env, state, tac, tcfg)
        except TacticError as e:
            result.steps.append(RolloutStep(text, False, f"{e.kind}: {e.message}"))
            if not white:
                prefix.append(text)
            continue
        state = outcome.new_state
        result.steps.append(RolloutStep(text, True))
        result.script.append(text)
        prefix.append(text)
    if not state.finished:
        result.failure = result.failure or "goals remain after the step limit"
        return result
    # the concatenated tactics must be a valid proof on replay
    result.success = reverify_script(env, theorem, result.script)
    if not result.success:
        result.failure = "replayed script does not verify"
    return result


def reverify_script(env, theorem, script_texts: list[str]) -> bool:
    try:
        script = [parse_tactic(t) for t in script_texts]
    except ParseError:
        return False
    res = run_script(env, theorem, script, TacticConfig())
    if not res.proven:
        return False
    mctx = res.final_state.mctx
    decl = mctx.decl(res.root_goal)
    failure = check_closed_proof(env, Mvar(res.root_goal), decl.target, decl.ctx_types(), mctx)
    return failure is None


def run_rollouts(env, theorem, policy: Policy, config: SearchConfig) -> RolloutSummary:
    """The N-independent-rollouts protocol; search succeeds if any rollout
    finds a valid proof."""
    results = []
    solved_at = None
    for i in range(config.rollouts):
        r = rollout(env, theorem, policy, config, seed=config.seed + i)
        results.append(r)
        if r.success and solved_at is None:
            solved_at = i
    return RolloutSummary(
        theorem_label(theorem),
        config.mode,
        solved_at is not None,
        solved_at,
        results,
    )
