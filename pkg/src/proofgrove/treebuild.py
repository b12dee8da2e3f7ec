"""Three-stage proof-tree builder.

Stage 1 replays a tactic script with instrumentation and turns the recorded
provenance trace into a singleton tree (one goal per node).  Stage 2 rewrites
edges so every tactic is a simple, self-contained step: nested by-blocks are
masked with `sorry` (spawning the child branch the nested script proves),
merged `rw [a, b, c]` and `rwa` tactics are split into chains, and synthetic
`case` renames are kept only when a later tactic needs the name.  Stage 3
merges sibling nodes that share a metavariable, so each node is exactly one
coupling component, and the result can be replayed and verified end to end.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace as dc_replace

from .elab import Elaborator
from .factorize import canonical_key_views, coupling_components
from .kernel.env import Environment
from .kernel.infer import KernelError, infer_type
from .kernel.mctx import Hypothesis, MetavarContext
from .kernel.reduce import whnf
from .kernel.term import PROP, Mvar, Sorry, Term, contains_sorry, mvars_of
from .syntax import (
    EMPTY_SPAN, ParseError, RwRule, SAnon, SApp, SBy, SFun, SIdent, SPi,
    SSorry, STerm, Span, TacticNode, TheoremDecl, parse_tactic_script,
    render_tactic,
)
from .tactics import (
    GoalView, HypView, ProofState, ProvenanceStep, ScriptResult, TacticConfig,
    TacticError, _next_sid, apply_tactic, goal_view, new_session, run_script,
)


class BuildError(Exception):
    pass


class VerifyError(Exception):
    pass


# ---------------------------------------------------------------------------
# stage 1: singleton trees

@dataclass
class SingletonNode:
    mid: int
    view: GoalView
    tactic: TacticNode | None  # None for goals closed by another goal's tactic
    text: str
    span: Span
    synthetic: bool
    children: list["SingletonNode"]
    mctx_before: MetavarContext | None
    mctx_after: MetavarContext | None
    assignments: list[tuple[int, Term]]  # log slice of the consuming step
    side_closed: tuple[int, ...] = ()  # sibling goals this step closed by unification


def _collect_steps(result: ScriptResult) -> list[ProvenanceStep]:
    return [step for outcome in result.outcomes for step in outcome.steps]


def build_singleton_tree(env: Environment, start, script, config: TacticConfig | None = None) -> SingletonNode:
    state = start if isinstance(start, ProofState) else new_session(env, start)
    if len(state.goals) != 1:
        raise BuildError("singleton tree construction expects a single root goal")
    result = run_script(env, state, script, config)
    return build_from_result(state, result)


def build_from_result(state: ProofState, result: ScriptResult) -> SingletonNode:
    """Singleton tree from an instrumented run: edges connect each consumed
    goal to the goals it produced, with combinators already expanded."""
    if result.error is not None:
        raise BuildError(
            f"script failed at step {result.error.index}: {result.error.message}"
        )
    if result.final_state.goals:
        raise BuildError(f"unsolved goals after script ({len(result.final_state.goals)} left)")
    steps = _collect_steps(result)
    consumed: dict[int, ProvenanceStep] = {}
    side: dict[int, ProvenanceStep] = {}
    # a step's own assignments: its log range minus ranges claimed by steps
    # nested inside it (which appear earlier in the trace)
    claimed: set[int] = set()
    own: dict[int, list[tuple[int, Term]]] = {}
    for step in steps:
        if step.consumed in consumed:
            raise BuildError(f"goal ?m{step.consumed} consumed twice (provenance ambiguity)")
        consumed[step.consumed] = step
        for g in step.side_closed:
            side[g] = step
        mine = [
            i for i in range(len(step.mctx_before.log), step.log_end) if i not in claimed
        ]
        claimed.update(mine)
        own[id(step)] = [step.mctx_after.log[i] for i in mine]

    def make(mid: int, view_mctx: MetavarContext) -> SingletonNode:
        # view_mctx: the state in which this goal was created (the producing
        # step's post-state, or the session root state)
        if mid in consumed:
            step = consumed[mid]
            view = goal_view(view_mctx, mid)
            assignments = own[id(step)]
            return SingletonNode(
                mid, view, step.tactic, step.text, step.span, step.synthetic,
                [make(p, step.mctx_after) for p in step.produced],
                step.mctx_before, step.mctx_after, list(assignments), step.side_closed,
            )
        if mid in side:
            step = side[mid]
            return SingletonNode(
                mid, goal_view(view_mctx, mid), None, "", EMPTY_SPAN, True, [],
                step.mctx_before, step.mctx_after, [],
            )
        raise BuildError(f"goal ?m{mid} was never closed (unsolved branch)")

    return make(state.goals[0], state.mctx)


# ---------------------------------------------------------------------------
# stage 2: tactic simplification

def _mask_by_blocks(stx: STerm) -> tuple[STerm, bool]:
    if isinstance(stx, SBy):
        if len(stx.script) == 1 and stx.script[0].kind == "sorry":
            return stx, False  # already masked
        return SBy((TacticNode("sorry"),), EMPTY_SPAN), True
    if isinstance(stx, SApp):
        f, a = _mask_by_blocks(stx.fn)
        g, b = _mask_by_blocks(stx.arg)
        return SApp(f, g), a or b
    if isinstance(stx, SAnon):
        parts = [_mask_by_blocks(x) for x in stx.args]
        return SAnon(tuple(p[0] for p in parts)), any(p[1] for p in parts)
    if isinstance(stx, SFun):
        body, hit = _mask_by_blocks(stx.body)
        return SFun(stx.binders, body), hit
    if isinstance(stx, SPi):
        body, hit = _mask_by_blocks(stx.body)
        return SPi(stx.binders, body), hit
    return stx, False


def _tokens(text: str) -> set[str]:
    out, cur = set(), []
    for c in text:
        if c.isalnum() or c in "_'†.":
            cur.append(c)
        else:
            if cur:
                out.add("".join(cur))
            cur = []
    if cur:
        out.add("".join(cur))
    return out


def _subtree_mentions(node: SingletonNode, names: set[str]) -> bool:
    if _tokens(node.text) & names:
        return True
    return any(_subtree_mentions(c, names) for c in node.children)


def simplify_tactics(env: Environment, tree: SingletonNode) -> SingletonNode:
    """Rewrite edges to simple self-contained steps.  Idempotent."""
    node = tree

    # (a) mask nested by-blocks in term arguments (`rfl` used as a term stays)
    if node.tactic is not None and node.tactic.kind in {"exact", "apply", "have"} and node.tactic.term is not None:
        masked, hit = _mask_by_blocks(node.tactic.term)
        if hit:
            new_tac = dc_replace(node.tactic, term=masked, span=Span(node.span.start, node.span.start))
            node = dc_replace_node(node, tactic=new_tac, text=render_tactic(new_tac), synthetic=True,
                                   span=new_tac.span)

    # (b) drop synthetic case renames nobody references
    if (
        node.tactic is not None
        and node.tactic.kind == "case"
        and node.synthetic
        and len(node.children) == 1
        and not any(_subtree_mentions(c, set(node.tactic.names)) for c in node.children)
    ):
        child = node.children[0]
        lifted = dc_replace_node(
            child, mid=node.mid, view=node.view, mctx_before=node.mctx_before
        )
        return simplify_tactics(env, lifted)

    # (c)+(d) split merged rw lists; rwa additionally appends assumption
    if node.tactic is not None and node.tactic.kind in {"rw", "rwa"} and (
        len(node.tactic.rules) > 1 or node.tactic.kind == "rwa"
    ):
        node = _split_rewrites(env, node)

    node.children = [simplify_tactics(env, c) for c in node.children]
    return node


def dc_replace_node(node: SingletonNode, **kw) -> SingletonNode:
    fields = dict(
        mid=node.mid, view=node.view, tactic=node.tactic, text=node.text,
        span=node.span, synthetic=node.synthetic, children=node.children,
        mctx_before=node.mctx_before, mctx_after=node.mctx_after,
        assignments=node.assignments,
    )
    fields.update(kw)
    return SingletonNode(**fields)


def _split_rewrites(env: Environment, node: SingletonNode) -> SingletonNode:
    """Replay `rw [a, b, c]` / `rwa [...]` as single rewrites, verifying that
    the replay reaches the state the original produced."""
    tac = node.tactic
    assert node.mctx_before is not None
    state = ProofState(_next_sid(), (node.mid,), node.mctx_before)
    steps: list[tuple[TacticNode, ProofState, ProofState]] = []
    empty = Span(node.span.start, node.span.start)
    for rule in tac.rules:
        single = TacticNode("rw", empty, rules=(rule,), at_hyp=tac.at_hyp)
        try:
            out = apply_tactic(env, state, single)
        except TacticError as e:
            raise BuildError(f"rw split failed to replay: {e.message}") from None
        steps.append((single, state, out.new_state))
        state = out.new_state
    if tac.kind == "rwa":
        closer = TacticNode("assumption", empty)
        try:
            out = apply_tactic(env, state, closer)
        except TacticError as e:
            raise BuildError(f"rwa split: assumption failed to replay: {e.message}") from None
        if out.new_state.goals:
            raise BuildError("rwa split left goals open")
        steps.append((closer, state, out.new_state))
        state = out.new_state
        if node.children:
            raise BuildError("rwa node unexpectedly has children")
    else:
        want = canonical_key_views([node.children[0].view]) if node.children else None
        got = canonical_key_views([goal_view(state.mctx, state.goals[0])]) if state.goals else None
        if want != got:
            raise BuildError("rw split replay does not reach the original state")
    return _chain_nodes(node, steps)


def _chain_nodes(node: SingletonNode, steps) -> SingletonNode:
    """Build the replacement chain for a split rewrite."""
    empty = steps[0][0].span

    def slice_log(before: ProofState, after: ProofState):
        return after.mctx.log[len(before.mctx.log):]

    # innermost first: the goal left after step i is consumed by step i+1.
    # The deterministic mid counter makes the replay mint the same goal ids
    # the original composite step minted internally, so the last edge can
    # adopt the original node's post-state and original children unchanged.
    tail_children = node.children
    for i in range(len(steps) - 1, 0, -1):
        single, before, after = steps[i]
        prev_after = steps[i - 1][2]
        mid = prev_after.goals[0]
        last = i == len(steps) - 1
        mctx_after = node.mctx_after if (last and node.tactic.kind == "rw") else after.mctx
        tail_children = [
            SingletonNode(
                mid, goal_view(prev_after.mctx, mid), single, render_tactic(single),
                empty, True, tail_children, prev_after.mctx, mctx_after,
                list(slice_log(before, after)),
            )
        ]
    first, before0, after0 = steps[0]
    return dc_replace_node(
        node,
        tactic=first,
        text=render_tactic(first),
        span=empty,
        synthetic=True,
        children=tail_children,
        mctx_after=after0.mctx,
        assignments=list(slice_log(before0, after0)),
    )


# ---------------------------------------------------------------------------
# stage 3: merging metavariable-coupled siblings

@dataclass
class ProofTreeNode:
    """Final tree node: one coupling component per node."""

    goals: list[GoalView]
    tactic_text: str
    span: Span
    synthetic: bool
    children: list["ProofTreeNode"]
    id: str = ""
    proof_size: int = 0
    proof_depth: int = 0
    depends_on: list[str] = field(default_factory=list)
    _dep_refs: list["ProofTreeNode"] = field(default_factory=list, repr=False, compare=False)


def merge_coupled_siblings(env: Environment, tree: SingletonNode) -> ProofTreeNode:
    """Merge sibling goals sharing an unassigned metavariable into multi-goal
    nodes; node goal sets equal the coupling components at each point."""
    singles: dict[int, SingletonNode] = {}

    def index(n: SingletonNode) -> None:
        singles[n.mid] = n
        for c in n.children:
            index(c)

    index(tree)
    owner: dict[int, ProofTreeNode] = {}

    def build(goal_mids: list[int], mctx_at: MetavarContext) -> ProofTreeNode:
        main = goal_mids[0]
        s = singles.get(main)
        if s is None or s.tactic is None:
            raise BuildError(f"component main goal ?m{main} has no consuming tactic")
        closed = {main, *s.side_closed}
        child_goals = [c.mid for c in s.children] + [g for g in goal_mids[1:] if g not in closed]
        assert s.mctx_after is not None
        groups = coupling_components(s.mctx_after, child_goals) if child_goals else []
        node = ProofTreeNode(
            goals=[goal_view(mctx_at, g) for g in goal_mids],
            tactic_text=s.text,
            span=s.span,
            synthetic=s.synthetic,
            children=[build(g, s.mctx_after) for g in groups],
        )
        for g in goal_mids:
            owner[g] = node
        # cross-branch coupling provenance: nodes whose goal metavariables
        # occur in this edge's new assignments
        deps: set[int] = set()
        for _, value in s.assignments:
            mvars_of(value, deps)
        for m in sorted(deps):
            ref = owner.get(m)
            if (
                ref is not None
                and ref is not node
                and all(ref is not c for c in node.children)
                and all(ref is not r for r in node._dep_refs)
            ):
                node._dep_refs.append(ref)
        return node

    assert tree.mctx_before is not None
    root = build([tree.mid], tree.mctx_before)
    annotate_metrics(root)
    assign_ids(root)
    for n in _walk(root):
        n.depends_on = [r.id for r in n._dep_refs]
    return root


def _walk(root: ProofTreeNode):
    yield root
    for c in root.children:
        yield from _walk(c)


def annotate_metrics(root: ProofTreeNode) -> ProofTreeNode:
    """proof_size: tactic edges in the subtree (inclusive); proof_depth:
    longest edge chain to a leaf."""
    for c in root.children:
        annotate_metrics(c)
    root.proof_size = 1 + sum(c.proof_size for c in root.children)
    root.proof_depth = 1 + max((c.proof_depth for c in root.children), default=0)
    return root


def assign_ids(root: ProofTreeNode) -> None:
    """Stable ids t<depth>.<index>, breadth-first per depth."""
    level = [root]
    depth = 0
    while level:
        nxt: list[ProofTreeNode] = []
        for i, n in enumerate(level):
            n.id = f"t{depth}.{i}"
            nxt.extend(n.children)
        level = nxt
        depth += 1


# ---------------------------------------------------------------------------
# replay verification

def reconstruct_state(env: Environment, views: list[GoalView], opens: tuple[str, ...] = ()) -> ProofState:
    """Rebuild a live proof state from rendered goal views; ?names shared
    between goals reconstruct as shared metavariables."""
    from .syntax import parse_term

    mctx = MetavarContext(next_uid=env.uid_floor)
    registry: dict[str, int] = {}
    goals = []
    for v in views:
        hyps: tuple[Hypothesis, ...] = ()
        for hv in v.hypotheses:
            el = Elaborator(env, mctx, hyps, opens, registry=registry)
            try:
                ty = el.elab_type(parse_term(hv.type))
            except Exception as e:
                raise VerifyError(f"cannot reconstruct hypothesis {hv.name}: {e}") from None
            hyps = hyps + (Hypothesis(mctx.fresh_uid(), hv.name, ty),)
        el = Elaborator(env, mctx, hyps, opens, registry=registry)
        try:
            target = el.elab_type(parse_term(v.target))
        except Exception as e:
            raise VerifyError(f"cannot reconstruct goal target: {e}") from None
        goals.append(mctx.fresh_mvar(hyps, target, tag=v.tag))
    return ProofState(_next_sid(), tuple(goals), mctx, None, opens)


def verify_tree(env: Environment, root: ProofTreeNode, config: TacticConfig | None = None,
                opens: tuple[str, ...] = ()) -> None:
    """Replay the tree from a fresh session at the root component: every
    edge's tactic must apply, children must match the factorized outcomes by
    canonical key, and every branch must end proven (no sorries)."""
    from .syntax import parse_tactic

    config = config or TacticConfig()
    state = reconstruct_state(env, root.goals, opens)

    def check(node: ProofTreeNode, state: ProofState) -> None:
        try:
            tac = parse_tactic(node.tactic_text)
        except ParseError as e:
            raise VerifyError(f"{node.id}: tactic does not parse: {e.message}") from None
        try:
            outcome = apply_tactic(env, state, tac, config)
        except TacticError as e:
            raise VerifyError(f"{node.id}: tactic failed: {e.message}") from None
        new = outcome.new_state
        log_slice = new.mctx.log[len(state.mctx.log):]
        sorried = any(contains_sorry(v) for _, v in log_slice)
        groups = coupling_components(new.mctx, new.goals) if new.goals else []
        actual = {}
        for g in groups:
            key = canonical_key_views([goal_view(new.mctx, m) for m in g])
            actual.setdefault(key, []).append(g)
        if not node.children:
            if new.goals:
                raise VerifyError(f"{node.id}: unproven-leaf: {len(new.goals)} goal(s) remain")
            if sorried:
                raise VerifyError(f"{node.id}: unproven-leaf: branch closed by sorry")
            return
        for child in node.children:
            key = canonical_key_views(child.goals)
            bucket = actual.get(key)
            if not bucket:
                raise VerifyError(
                    f"{node.id}: edge-mismatch: no outcome component matches child {child.id}"
                )
            group = bucket.pop(0)
            check(child, ProofState(_next_sid(), tuple(group), new.mctx, None, state.opens))
        leftovers = [g for b in actual.values() for g in b]
        if leftovers:
            raise VerifyError(f"{node.id}: edge-mismatch: {len(leftovers)} unmatched outcome component(s)")

    check(root, state)


# ---------------------------------------------------------------------------
# theorem conversion driver

@dataclass
class ByBlockResult:
    script: tuple[TacticNode, ...]
    span: Span
    tree: ProofTreeNode | None = None
    error: str | None = None


@dataclass
class TheoremConversion:
    decl: TheoremDecl
    error: str | None = None  # theorem-level failure (elaboration etc.)
    by_blocks: list[ByBlockResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.error is None and all(b.error is None for b in self.by_blocks)


def _find_by_blocks(stx: STerm, acc: list[SBy]) -> STerm:
    """Replace non-nested by-blocks with sorry placeholders, collecting them
    in textual order."""
    if isinstance(stx, SBy):
        acc.append(stx)
        return SSorry()
    if isinstance(stx, SApp):
        return SApp(_find_by_blocks(stx.fn, acc), _find_by_blocks(stx.arg, acc))
    if isinstance(stx, SAnon):
        return SAnon(tuple(_find_by_blocks(a, acc) for a in stx.args))
    if isinstance(stx, SFun):
        return SFun(stx.binders, _find_by_blocks(stx.body, acc))
    if isinstance(stx, SPi):
        return SPi(stx.binders, _find_by_blocks(stx.body, acc))
    return stx


def convert_theorem(env: Environment, decl: TheoremDecl, config: TacticConfig | None = None) -> TheoremConversion:
    """build -> simplify -> merge -> verify for every non-nested by-block of
    a theorem's proof.  Failures are per-theorem records, not exceptions."""
    config = config or TacticConfig()
    result = TheoremConversion(decl)
    try:
        state = new_session(env, decl)
    except TacticError as e:
        result.error = e.message
        return result
    root = state.goals[0]
    proof = decl.proof
    if isinstance(proof, SBy):
        blocks = [proof]
        block_goals = [root]
        mctx = state.mctx
    else:
        acc: list[SBy] = []
        masked = _find_by_blocks(proof, acc)
        blocks = acc
        mctx = state.mctx.clone()
        el = Elaborator(env, mctx, mctx.decl(root).context, state.opens)
        try:
            term = el.check(masked, mctx.decl(root).target)
            for hole in el.unif_holes:
                if not el.mctx.is_assigned(hole):
                    raise TacticError("tactic-failed", "don't know how to synthesize placeholder")
        except Exception as e:
            result.error = str(e)
            return result
        mctx = el.mctx
        mctx.assign(root, term)
        block_goals = el.goal_holes
        if len(block_goals) != len(blocks):
            result.error = "internal: by-block goals out of step with proof term"
            return result
    for sby, goal in zip(blocks, block_goals):
        start = ProofState(_next_sid(), (goal,), mctx, None, state.opens)
        res = run_script(env, start, sby.script, config)
        try:
            singleton = build_from_result(start, res)
            singleton = simplify_tactics(env, singleton)
            tree = merge_coupled_siblings(env, singleton)
            verify_tree(env, tree, config, opens=state.opens)
        except (BuildError, VerifyError, TacticError) as e:
            result.by_blocks.append(ByBlockResult(sby.script, sby.span, None, str(e)))
            mctx = res.final_state.mctx if res.error is None else mctx
            continue
        result.by_blocks.append(ByBlockResult(sby.script, sby.span, tree, None))
        mctx = res.final_state.mctx
    return result
