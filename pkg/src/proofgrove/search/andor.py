"""Best-first AND-OR proof search over factorized states.

OR nodes are coupling components keyed by canonical state fingerprints;
choosing a tactic creates an AND edge whose children must all be proven.
Components reached along different paths merge by key (transpositions).
Statuses propagate monotonically: an OR node is proven when some edge is,
an edge when all its children are; an OR node fails only once its proposal
menu is exhausted and every attempted edge failed.
"""

from __future__ import annotations

import heapq
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from ..factorize import FactorizedState, factorize
from ..kernel.term import contains_sorry
from ..syntax import EMPTY_SPAN, ParseError, parse_tactic
from ..tactics import (
    ProofState, TacticConfig, TacticError, apply_tactic, new_session,
    state_views, _next_sid,
)
from ..treebuild import ProofTreeNode, annotate_metrics, assign_ids
from .config import SearchConfig
from .policies import Policy, PolicyQuery
from .pool import EnvPool
from .rollout import reverify_script, theorem_label

OPEN, PROVEN, FAILED, BUDGET = "open", "proven", "failed", "budget-exceeded"


@dataclass(eq=False)
class AndEdge:
    tactic_text: str
    score: float
    children: list["OrNode"]
    status: str = OPEN
    sorried: bool = False


@dataclass(eq=False)
class OrNode:
    key: str
    component: FactorizedState
    depth: int
    status: str = OPEN
    edges: list[AndEdge] = field(default_factory=list)
    parents: list[tuple["OrNode", AndEdge]] = field(default_factory=list)
    expanded: bool = False
    visits: int = 0


@dataclass
class SearchStats:
    expanded: int = 0
    transpositions: int = 0
    edges_tried: int = 0
    edges_failed: int = 0
    malformed: int = 0
    path_rejections: int = 0
    nodes: int = 0
    pool_max_live: int = 0
    pool_spawned: int = 0


@dataclass
class SearchOutcome:
    proven: bool
    status: str
    script: list[str]
    tree: ProofTreeNode | None
    stats: SearchStats
    root: OrNode
    verified: bool = False


def _ancestor_keys(node: OrNode) -> set[str]:
    seen: set[str] = set()
    stack = [node]
    visited = set()
    while stack:
        n = stack.pop()
        if id(n) in visited:
            continue
        visited.add(id(n))
        seen.add(n.key)
        for parent, _ in n.parents:
            stack.append(parent)
    return seen


def _propagate(changed: list[OrNode]) -> None:
    """Fixpoint of the two rules (OR: any edge proven; AND: all children
    proven), monotone: Proven/Failed never regress."""
    work = list(changed)
    while work:
        node = work.pop()
        for parent, edge in node.parents:
            edge_old, parent_old = edge.status, parent.status
            if edge.status not in (PROVEN, FAILED):
                if edge.sorried or any(c.status == FAILED for c in edge.children):
                    edge.status = FAILED
                elif all(c.status == PROVEN for c in edge.children):
                    edge.status = PROVEN
            if parent.status not in (PROVEN, FAILED):
                if any(e.status == PROVEN for e in parent.edges):
                    parent.status = PROVEN
                elif parent.expanded and all(e.status == FAILED for e in parent.edges):
                    parent.status = FAILED
            if edge.status != edge_old or parent.status != parent_old:
                work.append(parent)


def _refresh_node(node: OrNode) -> None:
    if node.status in (PROVEN, FAILED):
        return
    if any(e.status == PROVEN for e in node.edges):
        node.status = PROVEN
    elif node.expanded and all(e.status == FAILED for e in node.edges):
        node.status = FAILED


def search(env, theorem, policy: Policy, config: SearchConfig | None = None) -> SearchOutcome:
    config = config or SearchConfig()
    stats = SearchStats()
    label = theorem_label(theorem)
    tcfg = TacticConfig(banned=config.banned, allow_sorry=config.allow_sorry)
    policy = policy.seeded(config.seed)
    pool = EnvPool(env, max(config.pool_size, 1))

    root_state = new_session(env, theorem)
    opens = root_state.opens
    components = factorize(root_state)
    assert len(components) == 1, "a fresh session has a single component"
    table: dict[str, OrNode] = {}
    seq = itertools.count()
    queue: list[tuple[float, int, int, OrNode]] = []

    def push(node: OrNode, score: float) -> None:
        # priority: policy score with a depth penalty, insertion order ties
        heapq.heappush(queue, (-(score - 0.01 * node.depth), node.depth, next(seq), node))

    root = OrNode(components[0].key, components[0], 0)
    table[root.key] = root
    stats.nodes = 1
    push(root, 1.0)

    def apply_one(node: OrNode, text: str):
        """Worker body: parse and apply one proposal on a pooled session."""
        lease = pool.acquire(timeout=30.0)
        try:
            try:
                tac = parse_tactic(text)
            except ParseError as e:
                return ("malformed", str(e))
            state = ProofState(_next_sid(), node.component.goals, node.component.mctx, None, opens)
            try:
                outcome = apply_tactic(lease.session.env, state, tac, tcfg)
            except TacticError as e:
                return ("failed", f"{e.kind}: {e.message}")
            log_slice = outcome.new_state.mctx.log[len(state.mctx.log):]
            sorried = any(contains_sorry(v) for _, v in log_slice)
            comps = factorize(outcome.new_state)
            return ("ok", (outcome, comps, sorried))
        finally:
            pool.release(lease)

    executor = ThreadPoolExecutor(max_workers=config.pool_size) if config.pool_size > 1 else None
    try:
        while queue and stats.expanded < config.budget:
            if root.status == PROVEN and not config.exhaustive:
                break
            if root.status == FAILED:
                break
            _, _, _, node = heapq.heappop(queue)
            if node.expanded or node.status in (PROVEN, FAILED):
                continue
            if config.max_depth is not None and node.depth >= config.max_depth:
                continue  # stays open; counts toward no proof at this depth
            stats.expanded += 1
            node.visits += 1
            query = PolicyQuery(
                theorem=label, mode="white",
                goals=tuple(node.component.views()), prefix=(), k=config.k,
            )
            proposals = policy.propose(query)
            if executor is not None:
                results = list(executor.map(lambda p: apply_one(node, p[0]), proposals))
            else:
                results = [apply_one(node, p[0]) for p in proposals]
            ancestors = _ancestor_keys(node)
            changed = False
            for (text, score), (kind, payload) in zip(proposals, results):
                stats.edges_tried += 1
                if kind == "malformed":
                    stats.malformed += 1
                    continue
                if kind == "failed":
                    stats.edges_failed += 1
                    edge = AndEdge(text, score, [], status=FAILED)
                    node.edges.append(edge)
                    continue
                outcome, comps, sorried = payload
                if any(c.key in ancestors for c in comps):
                    # path-repetition guard: no path may repeat a state key
                    stats.path_rejections += 1
                    edge = AndEdge(text, score, [], status=FAILED)
                    node.edges.append(edge)
                    continue
                edge = AndEdge(text, score, [], sorried=sorried)
                node.edges.append(edge)
                for comp in comps:
                    child = table.get(comp.key)
                    if child is None:
                        child = OrNode(comp.key, comp, node.depth + 1)
                        table[comp.key] = child
                        stats.nodes += 1
                        push(child, score)
                    else:
                        stats.transpositions += 1
                        if node.depth + 1 < child.depth:
                            _lower_depth(child, node.depth + 1, push, score)
                    child.parents.append((node, edge))
                    edge.children.append(child)
                if sorried:
                    edge.status = FAILED
                    stats.edges_failed += 1
                elif not edge.children:
                    edge.status = PROVEN
                changed = True
                _propagate(edge.children or [node])
                _refresh_node(node)
                _propagate([node])
            node.expanded = True
            _refresh_node(node)
            _propagate([node])
    finally:
        if executor is not None:
            executor.shutdown(wait=True)
        pool.shutdown()
    stats.pool_max_live = pool.stats.max_live
    stats.pool_spawned = pool.stats.spawned

    if root.status == PROVEN:
        tree = extract_proof(root)
        script = tree_script(tree)
        verified = reverify_script(env, theorem, script)
        return SearchOutcome(True, PROVEN, script, tree, stats, root, verified)
    status = root.status if root.status != OPEN else BUDGET
    return SearchOutcome(False, status, [], None, stats, root)


def _lower_depth(node: OrNode, depth: int, push, score: float) -> None:
    if depth >= node.depth:
        return
    node.depth = depth
    if not node.expanded and node.status == OPEN:
        push(node, score)
    for edge in node.edges:
        for child in edge.children:
            _lower_depth(child, depth + 1, push, score)


def extract_proof(root: OrNode) -> ProofTreeNode:
    """Tree of (component, tactic, children) picking the first proven edge of
    each proven OR node; shared subtrees are duplicated (trees, not DAGs)."""
    if root.status != PROVEN:
        raise ValueError("root is not proven")

    def build(node: OrNode) -> ProofTreeNode:
        edge = next(e for e in node.edges if e.status == PROVEN)
        return ProofTreeNode(
            goals=node.component.views(),
            tactic_text=edge.tactic_text,
            span=EMPTY_SPAN,
            synthetic=True,  # search edges have no source counterpart
            children=[build(c) for c in edge.children],
        )

    tree = build(root)
    annotate_metrics(tree)
    assign_ids(tree)
    return tree


def tree_script(tree: ProofTreeNode) -> list[str]:
    """Pre-order linearization: a valid main-goal-only script."""
    out = [tree.tactic_text]
    for c in tree.children:
        out.extend(tree_script(c))
    return out
