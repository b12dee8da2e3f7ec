"""Tactic interpreter: stateful proof sessions over immutable proof states.

A tactic application clones the state's metavariable context, mutates the
clone, and publishes a new immutable ProofState, so older states can always
be branched from again.  Execution records a runtime-resolved provenance
trace (one step per atomic tactic, with combinators like `<;>` and
`all_goals` expanded per goal) that the proof-tree builder consumes.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field, replace

from .elab import ElabError, Elaborator
from .kernel.env import Environment, UnknownConstant
from .kernel.infer import KernelError, infer_type
from .kernel.mctx import Hypothesis, MetavarContext, MetavarDecl
from .kernel.pp import show_term
from .kernel.reduce import def_eq, whnf
from .kernel.term import (
    App, Const, Lam, Mvar, NAT, PROP, Pi, Sorry, Term, Var, free_vars, mk_app,
    spine, subst,
)
from .kernel.unify import unify
from .kernel.verify import KernelStats, check_new_assignments
from .syntax import (
    SBy, SIdent, SRfl, SSorry, STerm, Span, TacticNode, parse_term,
    render_tactic,
)


class TacticError(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind
        self.message = message


@dataclass(frozen=True)
class HypView:
    name: str
    type: str
    value: str | None = None

    @property
    def inaccessible(self) -> bool:
        return self.name.endswith("†")


@dataclass(frozen=True)
class GoalView:
    tag: str | None
    target: str
    hypotheses: tuple[HypView, ...]

    def pretty(self) -> str:
        lines = [f"{h.name} : {h.type}" + (f" := {h.value}" if h.value else "") for h in self.hypotheses]
        case = f"case {self.tag}\n" if self.tag else ""
        return case + "\n".join(lines) + ("\n" if lines else "") + f"⊢ {self.target}"


@dataclass(frozen=True)
class ProofState:
    sid: int
    goals: tuple[int, ...]
    mctx: MetavarContext
    parent: tuple[int, TacticNode] | None = None
    opens: tuple[str, ...] = ()

    @property
    def finished(self) -> bool:
        return not self.goals


@dataclass
class TacticConfig:
    banned: frozenset[str] = frozenset({"apply?", "exact?", "rw?"})
    allow_sorry: bool = True
    incremental_check: bool = True
    stats: KernelStats | None = None


@dataclass(frozen=True)
class ProvenanceStep:
    """One atomic tactic application: the unit of proof-tree edges."""

    tactic: TacticNode
    text: str
    span: Span
    synthetic: bool
    consumed: int
    produced: tuple[int, ...]
    side_closed: tuple[int, ...]
    mctx_before: MetavarContext  # state just before this step ran
    mctx_after: MetavarContext
    log_end: int  # assignments up to this index existed after the step


@dataclass(frozen=True)
class TacticOutcome:
    new_state: ProofState
    new_assignments: tuple[int, ...]
    steps: tuple[ProvenanceStep, ...]
    messages: tuple[str, ...]

    def affected_goals(self) -> dict[int, tuple[int, ...]]:
        return {s.consumed: s.produced for s in self.steps}


_sid_counter = itertools.count(1)
_sid_lock = threading.Lock()


def _next_sid() -> int:
    with _sid_lock:
        return next(_sid_counter)


def goal_view(mctx: MetavarContext, mid: int) -> GoalView:
    decl = mctx.decl(mid)
    names = {h.uid: h.name for h in decl.context}
    hyps = []
    for h in decl.context:
        hi = mctx.instantiate_hyp(h)
        hyps.append(
            HypView(h.name, show_term(hi.type, names), None if hi.value is None else show_term(hi.value, names))
        )
    return GoalView(decl.tag, show_term(mctx.instantiate(decl.target), names), tuple(hyps))


def state_views(state: ProofState) -> list[GoalView]:
    return [goal_view(state.mctx, g) for g in state.goals]


# ---------------------------------------------------------------------------
# session creation

def new_session(env: Environment, theorem, opens: tuple[str, ...] = ()) -> ProofState:
    """Root state for a theorem declaration or a bare goal text."""
    from .elab import elab_binder_groups
    from .syntax import TheoremDecl

    mctx = MetavarContext(next_uid=env.uid_floor)
    if isinstance(theorem, TheoremDecl):
        opens = theorem.open_namespaces
        try:
            hyps = elab_binder_groups(env, mctx, theorem.binders, opens)
            el = Elaborator(env, mctx, hyps, opens)
            target = el.elab_type(theorem.target)
        except (ElabError, KernelError) as e:
            raise TacticError("elaboration-failure", str(e)) from None
    elif isinstance(theorem, str):
        try:
            el = Elaborator(env, mctx, (), opens)
            target = el.elab_type(parse_term(theorem))
            hyps = ()
        except (ElabError, KernelError) as e:
            raise TacticError("elaboration-failure", str(e)) from None
    else:
        raise TypeError(f"cannot start a session from {theorem!r}")
    sort = whnf(env, mctx, infer_type(env, mctx, {h.uid: h.type for h in hyps}, target))
    if sort != PROP:
        raise TacticError("elaboration-failure", "theorem target is not a proposition")
    root = mctx.fresh_mvar(hyps, target)
    return ProofState(_next_sid(), (root,), mctx, None, opens)


# ---------------------------------------------------------------------------
# banned / sorry scanning (before any state mutation)

def _stx_contains_sorry(stx) -> bool:
    if isinstance(stx, SSorry):
        return True
    if isinstance(stx, SBy):
        return any(_node_contains_sorry(t) for t in stx.script)
    for f in getattr(stx, "__dataclass_fields__", {}):
        v = getattr(stx, f)
        if isinstance(v, tuple):
            if any(_stx_contains_sorry(x) for x in v if hasattr(x, "__dataclass_fields__")):
                return True
        elif hasattr(v, "__dataclass_fields__") and _stx_contains_sorry(v):
            return True
    return False


def _node_contains_sorry(node: TacticNode) -> bool:
    if node.kind == "sorry":
        return True
    for t in (node.term, node.have_type):
        if t is not None and _stx_contains_sorry(t):
            return True
    for r in node.rules:
        if _stx_contains_sorry(r.term):
            return True
    subs = list(node.script) + [b for br in node.branches for b in br.script]
    if node.lhs is not None:
        subs.append(node.lhs)
    if node.rhs is not None:
        subs.append(node.rhs)
    return any(_node_contains_sorry(s) for s in subs)


def _scan_config(node: TacticNode, config: TacticConfig) -> None:
    def walk(n: TacticNode):
        if n.kind in config.banned:
            raise TacticError("banned-tactic", f"tactic {n.kind!r} is banned (library-search tactics are opt-in)")
        for s in n.script:
            walk(s)
        for br in n.branches:
            for s in br.script:
                walk(s)
        if n.lhs is not None:
            walk(n.lhs)
        if n.rhs is not None:
            walk(n.rhs)

    walk(node)
    if not config.allow_sorry and _node_contains_sorry(node):
        raise TacticError("sorry-disallowed", "sorry is not allowed by the current configuration")


# ---------------------------------------------------------------------------
# execution engine

class _Exec:
    def __init__(self, env: Environment, mctx: MetavarContext, goals: list[int],
                 config: TacticConfig, opens: tuple[str, ...]):
        self.env = env
        self.mctx = mctx
        self.goals = goals
        self.config = config
        self.opens = opens
        self.steps: list[ProvenanceStep] = []
        self.messages: list[str] = []
        self._prev_after = mctx.clone()

    # -- helpers -------------------------------------------------------------

    def main(self) -> int:
        if not self.goals:
            raise TacticError("no-goals", "no goals left")
        return self.goals[0]

    def decl(self, mid: int) -> MetavarDecl:
        return self.mctx.decl(mid)

    def elaborator(self, mid: int) -> Elaborator:
        return Elaborator(
            self.env, self.mctx, self.decl(mid).context, self.opens,
            by_runner=self._by_runner,
        )

    def _by_runner(self, el: Elaborator, mid: int, sby: SBy) -> None:
        sub = _Exec(self.env, el.mctx, [mid], self.config, self.opens)
        for tac in sby.script:
            sub.run(tac)
        if sub.goals:
            raise TacticError("tactic-failed", "nested by-block leaves goals unsolved")
        el.mctx = sub.mctx
        self.steps.extend(sub.steps)
        self.messages.extend(sub.messages)

    def snapshot(self):
        return (self.mctx.clone(), list(self.goals), len(self.steps), len(self.messages))

    def restore(self, snap) -> None:
        self.mctx, self.goals, nsteps, nmsgs = snap[0], snap[1], snap[2], snap[3]
        del self.steps[nsteps:]
        del self.messages[nmsgs:]

    def record(self, tactic: TacticNode, consumed: int, produced: list[int],
               synthetic: bool = False, text: str | None = None) -> None:
        side = [g for g in self.goals if g != consumed and self.mctx.is_assigned(g)]
        pos = self.goals.index(consumed) if consumed in self.goals else 0
        remaining = [g for g in self.goals if g != consumed and g not in side]
        open_children = [g for g in produced if not self.mctx.is_assigned(g)]
        self.goals = remaining[:pos] + open_children + remaining[pos:]
        after = self.mctx.clone()
        self.steps.append(
            ProvenanceStep(
                tactic=tactic,
                text=text if text is not None else render_tactic(tactic),
                span=tactic.span,
                synthetic=synthetic,
                consumed=consumed,
                produced=tuple(produced),
                side_closed=tuple(side),
                mctx_before=self._prev_after,
                mctx_after=after,
                log_end=len(self.mctx.log),
            )
        )
        self._prev_after = after

    def run_on_goal(self, mid: int, tactics, require_closed: bool, label: str) -> None:
        if self.mctx.is_assigned(mid):
            return
        pos = self.goals.index(mid)
        rest = self.goals[:pos] + self.goals[pos + 1:]
        self.goals = [mid]
        for t in tactics:
            self.run(t)
        if require_closed and self.goals:
            raise TacticError("tactic-failed", f"{label} leaves {len(self.goals)} goal(s) open")
        inner = self.goals
        merged = rest[:pos] + inner + rest[pos:]
        self.goals = [g for g in merged if not self.mctx.is_assigned(g)]

    # -- dispatch --------------------------------------------------------------

    def run(self, t: TacticNode) -> None:
        k = t.kind
        if k in {"apply?", "exact?", "rw?"}:
            # opt-in library search: same semantics as sorry
            self._sorry(t)
        elif k == "intro":
            self._intro(t)
        elif k == "exact":
            self._exact(t)
        elif k == "apply":
            self._apply(t)
        elif k == "rfl":
            self._rfl(t)
        elif k == "assumption":
            self._assumption(t)
        elif k in {"rw", "rwa"}:
            self._rw(t)
        elif k in {"cases", "induction"}:
            self._cases(t)
        elif k == "constructor":
            self._constructor(t)
        elif k in {"left", "right"}:
            self._left_right(t)
        elif k == "have":
            self._have(t)
        elif k == "case":
            self._case(t, synthetic=False)
        elif k == "sorry":
            self._sorry(t)
        elif k == "seq_all":
            self._seq_all(t)
        elif k == "all_goals":
            self._all_goals(t)
        elif k == "try":
            self._try(t)
        elif k == "focus":
            self._focus(t)
        elif k == "rotate_left":
            self._rotate(t)
        else:
            raise TacticError("tactic-failed", f"unknown tactic kind {k!r}")

    # -- elaboration wrappers ---------------------------------------------------

    def _check_term(self, el: Elaborator, stx: STerm, expected: Term) -> Term:
        try:
            term = el.check(stx, expected)
        except (ElabError, KernelError, UnknownConstant) as e:
            raise TacticError("tactic-failed", str(e)) from None
        self.mctx = el.mctx
        return term

    def _infer_term(self, el: Elaborator, stx: STerm) -> tuple[Term, Term]:
        try:
            pair = el.infer(stx)
        except (ElabError, KernelError, UnknownConstant) as e:
            raise TacticError("tactic-failed", str(e)) from None
        self.mctx = el.mctx
        return pair

    def _require_holes_solved(self, el: Elaborator) -> None:
        for mid in el.unif_holes:
            if not self.mctx.is_assigned(mid):
                raise TacticError(
                    "tactic-failed", "don't know how to synthesize placeholder"
                )

    def _spawned(self, el: Elaborator) -> list[int]:
        # all spawned goals, including by-block goals already closed by their
        # nested script; record() keeps only the open ones on the goal list
        return list(el.spawned)

    # -- tactics -----------------------------------------------------------------

    def _intro(self, t: TacticNode) -> None:
        goal = self.main()
        produced_goal = goal
        for name in t.names:
            decl = self.decl(produced_goal)
            target = whnf(self.env, self.mctx, decl.target)
            if not isinstance(target, Pi):
                raise TacticError("tactic-failed", f"intro {name}: goal is not a ∀ or →")
            taken = {h.name for h in decl.context}
            hname = name
            while hname in taken:
                hname += "'"
            uid = self.mctx.fresh_uid()
            new_target = subst(target.body, target.uid, Var(uid))
            ctx = decl.context + (Hypothesis(uid, hname, target.type),)
            nxt = self.mctx.fresh_mvar(ctx, new_target)
            self.mctx.assign(produced_goal, Lam(uid, hname, target.type, Mvar(nxt)))
            produced_goal = nxt
        self.record(t, goal, [produced_goal])

    def _exact(self, t: TacticNode) -> None:
        goal = self.main()
        el = self.elaborator(goal)
        term = self._check_term(el, t.term, self.decl(goal).target)
        self._require_holes_solved(el)
        produced = self._spawned(el)
        self.mctx.assign(goal, term)
        self.record(t, goal, produced)

    def _apply_term(self, goal: int, fn_term: Term, fn_ty: Term) -> list[int] | None:
        """Try to apply fn_term by peeling its telescope, longest first.
        Returns produced goal mids on success (commits mctx), None on failure."""
        ctx = self.decl(goal).context
        target = self.decl(goal).target
        # count how deep the telescope can be peeled
        depth = 0
        probe = fn_ty
        scratch = self.mctx.clone()
        while True:
            probe = whnf(self.env, scratch, probe)
            if not isinstance(probe, Pi):
                break
            probe = subst(probe.body, probe.uid, Mvar(scratch.fresh_mvar(ctx, probe.type)))
            depth += 1
        for k in range(depth, -1, -1):
            work = self.mctx.clone()
            mvs: list[int] = []
            ty = fn_ty
            ok = True
            for _ in range(k):
                ty = whnf(self.env, work, ty)
                if not isinstance(ty, Pi):
                    ok = False
                    break
                mv = work.fresh_mvar(ctx, ty.type)
                mvs.append(mv)
                ty = subst(ty.body, ty.uid, Mvar(mv))
            if not ok:
                continue
            solved = unify(self.env, work, ty, target)
            if solved is None:
                continue
            self.mctx = solved
            proof = mk_app(fn_term, *[Mvar(m) for m in mvs])
            self.mctx.assign(goal, proof)
            return [m for m in mvs if not self.mctx.is_assigned(m)]
        return None

    def _apply(self, t: TacticNode) -> None:
        goal = self.main()
        el = self.elaborator(goal)
        fn_term, fn_ty = self._infer_term(el, t.term)
        produced = self._apply_term(goal, fn_term, fn_ty)
        if produced is None:
            raise TacticError("tactic-failed", "apply: conclusion does not unify with the goal")
        self._require_holes_solved(el)
        produced = produced + self._spawned(el)
        self.record(t, goal, produced)

    def _rfl(self, t: TacticNode) -> None:
        goal = self.main()
        el = self.elaborator(goal)
        term = self._check_term(el, SRfl(), self.decl(goal).target)
        self.mctx.assign(goal, term)
        self.record(t, goal, [])

    def _assumption(self, t: TacticNode) -> None:
        goal = self.main()
        decl = self.decl(goal)
        target = self.mctx.instantiate(decl.target)
        for h in decl.context:
            if def_eq(self.env, self.mctx, self.mctx.instantiate(h.type), target):
                self.mctx.assign(goal, Var(h.uid))
                self.record(t, goal, [])
                return
        raise TacticError("tactic-failed", "assumption: no hypothesis matches the goal")

    # -- rewriting ----------------------------------------------------------------

    def _rw(self, t: TacticNode) -> None:
        goal = self.main()
        cur = goal
        for rule in t.rules:
            cur = self._rw_once(cur, rule.term, t.at_hyp)
        if t.kind == "rwa":
            decl = self.decl(cur)
            target = self.mctx.instantiate(decl.target)
            closed = False
            for h in decl.context:
                if def_eq(self.env, self.mctx, self.mctx.instantiate(h.type), target):
                    self.mctx.assign(cur, Var(h.uid))
                    closed = True
                    break
            if not closed:
                raise TacticError("tactic-failed", "rwa: no hypothesis matches after rewriting")
            self.record(t, goal, [])
        else:
            self.record(t, goal, [cur])

    def _rw_once(self, goal: int, stx: STerm, at_hyp: str | None) -> int:
        decl = self.decl(goal)
        el = self.elaborator(goal)
        prf, prf_ty = self._infer_term(el, stx)
        pattern: list[int] = []
        ty = prf_ty
        while True:
            ty = whnf(self.env, self.mctx, ty)
            head, args = spine(ty)
            if head == Const("Eq") and len(args) == 2:
                lhs, rhs = args
                break
            if isinstance(ty, Pi):
                mv = self.mctx.fresh_mvar(decl.context, ty.type)
                pattern.append(mv)
                prf = App(prf, Mvar(mv))
                ty = subst(ty.body, ty.uid, Mvar(mv))
                continue
            raise TacticError("tactic-failed", "rw: rewrite rule is not an equation")
        if at_hyp is None:
            subject = self.mctx.instantiate(decl.target)
        else:
            hyp = decl.hyp(at_hyp)
            if hyp is None:
                raise TacticError("unknown-hypothesis", f"unknown hypothesis {at_hyp!r}")
            subject = self.mctx.instantiate(hyp.type)
        solved = self._find_occurrence(lhs, subject, set(pattern))
        if solved is None:
            raise TacticError("rewrite-found-no-occurrence", "rw: no occurrence of the left-hand side")
        self.mctx = solved
        for mv in pattern:
            if not self.mctx.is_assigned(mv):
                raise TacticError("rewrite-found-no-occurrence", "rw: rule variables left undetermined")
        lhs_i = self.mctx.instantiate(lhs)
        rhs_i = self.mctx.instantiate(rhs)
        prf_i = self.mctx.instantiate(prf)
        x = self.mctx.fresh_uid()
        abstracted = _replace(subject, lhs_i, Var(x))
        motive = Lam(x, "x", NAT, abstracted)
        if at_hyp is None:
            new_target = _replace(subject, lhs_i, rhs_i)
            nxt = self.mctx.fresh_mvar(decl.context, new_target)
            self.mctx.assign(
                goal,
                mk_app(
                    Const("Eq.rec"), rhs_i, motive, Mvar(nxt), lhs_i,
                    mk_app(Const("Eq.symm"), lhs_i, rhs_i, prf_i),
                ),
            )
            return nxt
        new_type = _replace(subject, lhs_i, rhs_i)
        uid = self.mctx.fresh_uid()
        ctx = tuple(
            Hypothesis(uid, h.name, new_type) if h.name == at_hyp else h
            for h in decl.context
        )
        nxt = self.mctx.fresh_mvar(ctx, decl.target)
        fwd = mk_app(Const("Eq.rec"), lhs_i, motive, Var(hyp.uid), rhs_i, prf_i)
        self.mctx.assign(goal, App(Lam(uid, at_hyp, new_type, Mvar(nxt)), fwd))
        return nxt

    def _find_occurrence(self, lhs: Term, subject: Term, pattern: set[int]):
        """Leftmost-outermost subterm (not under binders) matching lhs
        syntactically, instantiating only pattern metavariables.  Matching is
        syntactic so the rewritten occurrence is exactly what the goal shows;
        definitional equality is not consulted."""
        stack = [subject]
        while stack:
            s = stack.pop(0)
            if isinstance(s, (Lam, Pi)):
                stack.insert(0, s.type)
                continue
            bindings: dict[int, Term] = {}
            if _syntactic_match(self.mctx.instantiate(lhs), s, pattern, bindings):
                work = self.mctx.clone()
                ok = True
                for mid, val in bindings.items():
                    solved = unify(self.env, work, Mvar(mid), val, assignable={mid})
                    if solved is None:
                        ok = False
                        break
                    work = solved
                if ok:
                    return work
            if isinstance(s, App):
                stack.insert(0, s.fn)
                stack.insert(1, s.arg)
        return None

    # -- case analysis ---------------------------------------------------------------

    def _cases(self, t: TacticNode) -> None:
        goal = self.main()
        if not isinstance(t.term, SIdent):
            raise TacticError("tactic-failed", f"{t.kind} expects a hypothesis name")
        decl = self.decl(goal)
        hyp = decl.hyp(t.term.name)
        if hyp is None:
            raise TacticError("unknown-hypothesis", f"unknown hypothesis {t.term.name!r}")
        hty = whnf(self.env, self.mctx, self.mctx.instantiate(hyp.type))
        head, args = spine(hty)
        children: list[int]
        if hty == NAT:
            children = self._cases_nat(goal, hyp, induction=(t.kind == "induction"))
        elif isinstance(head, Const) and head.name in self.env.inductives and self.env.inductives[head.name].can_cases:
            if t.kind == "induction":
                raise TacticError("tactic-failed", f"induction on {head.name} is not supported")
            children = self._cases_prop(goal, hyp, head.name, args)
        else:
            raise TacticError("tactic-failed", f"{t.kind}: unsupported discriminant type")
        head_node = replace(t, branches=(), span=t.head_span or t.span)
        self.record(head_node, goal, children, text=render_tactic(head_node))
        for branch in t.branches:
            child = next(
                (g for g in children if not self.mctx.is_assigned(g) and self.decl(g).tag == branch.tag),
                None,
            )
            if child is None:
                raise TacticError("tactic-failed", f"no remaining goal with tag {branch.tag!r}")
            case_node = TacticNode(
                "case", Span(t.span.start, t.span.start), tag=branch.tag, names=branch.names
            )
            renamed = self._case_core(case_node, child, synthetic=True)
            self.run_on_goal(renamed, branch.script, require_closed=True, label=f"case {branch.tag}")

    def _fresh_hyp_name(self, ctx, base: str) -> str:
        """Freshen a (possibly daggered) hypothesis name against ctx."""
        taken = {h.name for h in ctx}
        if base not in taken:
            return base
        stem, dag = (base[:-1], "†") if base.endswith("†") else (base, "")
        while stem + dag in taken:
            stem += "'"
        return stem + dag

    def _cases_nat(self, goal: int, hyp: Hypothesis, induction: bool) -> list[int]:
        decl = self.decl(goal)
        pos = decl.context.index(hyp)
        deps: list[Hypothesis] = []
        dep_uids = {hyp.uid}
        for h in decl.context[pos + 1:]:
            if free_vars(self.mctx.instantiate(h.type)) & dep_uids:
                deps.append(h)
                dep_uids.add(h.uid)
        base_ctx = tuple(h for h in decl.context if h is not hyp and h not in deps)
        target = self.mctx.instantiate(decl.target)
        closure = target
        for d in reversed(deps):
            closure = Pi(d.uid, d.name, self.mctx.instantiate(d.type), closure)
        x = self.mctx.fresh_uid()
        motive = Lam(x, hyp.name, NAT, subst(closure, hyp.uid, Var(x)))

        def make_child(ctor_term: Term, extra: tuple[Hypothesis, ...], tag: str) -> tuple[int, Term]:
            new_deps = tuple(
                Hypothesis(self.mctx.fresh_uid(), d.name, subst(self.mctx.instantiate(d.type), hyp.uid, ctor_term))
                for d in deps
            )
            ctx = base_ctx + extra + new_deps
            tgt = subst(target, hyp.uid, ctor_term)
            mid = self.mctx.fresh_mvar(ctx, tgt, tag=tag)
            case_fn: Term = Mvar(mid)
            for h in reversed(new_deps):
                case_fn = Lam(h.uid, h.name, h.type, case_fn)
            return mid, case_fn

        zero_mid, zero_fn = make_child(Const("Nat.zero"), (), "zero")
        n_uid = self.mctx.fresh_uid()
        n_name = self._fresh_hyp_name(base_ctx, "n†")
        n_hyp = Hypothesis(n_uid, n_name, NAT)
        succ_term = App(Const("Nat.succ"), Var(n_uid))
        if induction:
            ih_uid = self.mctx.fresh_uid()
            ih_name = self._fresh_hyp_name(base_ctx + (n_hyp,), "ih†")
            ih_hyp = Hypothesis(ih_uid, ih_name, subst(closure, hyp.uid, Var(n_uid)))
            succ_mid, inner = make_child(succ_term, (n_hyp, ih_hyp), "succ")
            succ_fn = Lam(n_uid, n_name, NAT, Lam(ih_uid, ih_name, ih_hyp.type, inner))
            proof = mk_app(Const("Nat.rec"), motive, zero_fn, succ_fn, Var(hyp.uid))
        else:
            succ_mid, inner = make_child(succ_term, (n_hyp,), "succ")
            succ_fn = Lam(n_uid, n_name, NAT, inner)
            proof = mk_app(Const("Nat.casesOn"), motive, Var(hyp.uid), zero_fn, succ_fn)
        proof = mk_app(proof, *[Var(d.uid) for d in deps])
        self.mctx.assign(goal, proof)
        return [zero_mid, succ_mid]

    def _cases_prop(self, goal: int, hyp: Hypothesis, ind_name: str, params: list[Term]) -> list[int]:
        info = self.env.inductives[ind_name]
        decl = self.decl(goal)
        target = self.mctx.instantiate(decl.target)
        pos = decl.context.index(hyp)
        base_ctx = decl.context[:pos] + decl.context[pos + 1:]
        children: list[int] = []
        case_fns: list[Term] = []
        for ctor in info.ctors:
            cty = self.env.lookup(ctor).type
            for p in params:
                cty = whnf(self.env, self.mctx, cty)
                assert isinstance(cty, Pi)
                cty = subst(cty.body, cty.uid, p)
            fields: list[Hypothesis] = []
            while True:
                cty = whnf(self.env, self.mctx, cty)
                if not isinstance(cty, Pi):
                    break
                uid = self.mctx.fresh_uid()
                name = self._fresh_hyp_name(base_ctx + tuple(fields), cty.name + "†")
                fields.append(Hypothesis(uid, name, cty.type))
                cty = subst(cty.body, cty.uid, Var(uid))
            tag = ctor.rsplit(".", 1)[-1]
            ctx = decl.context[:pos] + tuple(fields) + decl.context[pos + 1:]
            mid = self.mctx.fresh_mvar(ctx, target, tag=tag)
            fn: Term = Mvar(mid)
            for h in reversed(fields):
                fn = Lam(h.uid, h.name, h.type, fn)
            children.append(mid)
            case_fns.append(fn)
        rec = self.env.inductives[ind_name].recursor
        proof = mk_app(Const(rec), *params, target, *case_fns, Var(hyp.uid))
        self.mctx.assign(goal, proof)
        return children

    # -- remaining tactics ----------------------------------------------------------

    def _constructor(self, t: TacticNode) -> None:
        goal = self.main()
        target = whnf(self.env, self.mctx, self.mctx.instantiate(self.decl(goal).target))
        head, _ = spine(target)
        if not isinstance(head, Const) or head.name not in self.env.inductives:
            raise TacticError("tactic-failed", "constructor: goal is not an inductive proposition")
        for ctor in self.env.inductives[head.name].ctors:
            produced = self._apply_term(goal, Const(ctor), self.env.lookup(ctor).type)
            if produced is not None:
                self.record(t, goal, produced)
                return
        raise TacticError("tactic-failed", "constructor: no constructor applies")

    def _left_right(self, t: TacticNode) -> None:
        goal = self.main()
        target = whnf(self.env, self.mctx, self.mctx.instantiate(self.decl(goal).target))
        head, _ = spine(target)
        if not (isinstance(head, Const) and head.name == "Or"):
            raise TacticError("tactic-failed", f"{t.kind}: goal is not a disjunction")
        ctor = "Or.inl" if t.kind == "left" else "Or.inr"
        produced = self._apply_term(goal, Const(ctor), self.env.lookup(ctor).type)
        if produced is None:
            raise TacticError("tactic-failed", f"{t.kind}: constructor does not apply")
        self.record(t, goal, produced)

    def _have(self, t: TacticNode) -> None:
        goal = self.main()
        decl = self.decl(goal)
        el = self.elaborator(goal)
        if t.have_type is not None:
            try:
                ann = el.elab_type(t.have_type)
            except (ElabError, KernelError) as e:
                raise TacticError("tactic-failed", str(e)) from None
            self.mctx = el.mctx
            value = self._check_term(el, t.term, ann)
            vty = ann
        else:
            value, vty = self._infer_term(el, t.term)
        self._require_holes_solved(el)
        uid = self.mctx.fresh_uid()
        ctx = decl.context + (Hypothesis(uid, t.have_name, vty),)
        cont = self.mctx.fresh_mvar(ctx, decl.target)
        self.mctx.assign(goal, App(Lam(uid, t.have_name, vty, Mvar(cont)), value))
        produced = [cont] + self._spawned(el)
        self.record(t, goal, produced)

    def _case_core(self, t: TacticNode, goal: int, synthetic: bool) -> int:
        decl = self.decl(goal)
        daggered = [h for h in decl.context if h.inaccessible]
        if len(t.names) > len(daggered):
            raise TacticError("tactic-failed", "case: more names than inaccessible hypotheses")
        # the given names rename the most recent inaccessible hypotheses
        recent = daggered[len(daggered) - len(t.names):]
        renames = {recent[i].uid: t.names[i] for i in range(len(t.names))}
        ctx = tuple(
            Hypothesis(h.uid, renames.get(h.uid, h.name), h.type, h.value) for h in decl.context
        )
        renamed = self.mctx.fresh_mvar(ctx, decl.target, tag=None)
        self.mctx.assign(goal, Mvar(renamed))
        self.record(t, goal, [renamed], synthetic=synthetic)
        # selection: the renamed goal becomes the main goal
        self.goals.remove(renamed)
        self.goals.insert(0, renamed)
        return renamed

    def _case(self, t: TacticNode, synthetic: bool) -> None:
        target = None
        for g in self.goals:
            if self.decl(g).tag == t.tag:
                target = g
                break
        if target is None:
            raise TacticError("tactic-failed", f"no goal with tag {t.tag!r}")
        node = replace(t, script=())
        renamed = self._case_core(node, target, synthetic=synthetic)
        if t.script:
            self.run_on_goal(renamed, t.script, require_closed=True, label=f"case {t.tag}")

    def _sorry(self, t: TacticNode) -> None:
        goal = self.main()
        target = self.mctx.instantiate(self.decl(goal).target)
        self.mctx.assign(goal, Sorry(target))
        self.record(t, goal, [])

    def _seq_all(self, t: TacticNode) -> None:
        before = set(self.goals)
        main = self.main()
        self.run(t.lhs)
        # goals resulting from the lhs: fresh ones, or the main goal if a
        # no-op combinator (e.g. a failed try) left it in place
        produced = [g for g in self.goals if g not in before or g == main]
        for g in produced:
            if self.mctx.is_assigned(g) or g not in self.goals:
                continue
            self.run_on_goal(g, [t.rhs], require_closed=False, label="<;>")

    def _all_goals(self, t: TacticNode) -> None:
        for g in list(self.goals):
            if self.mctx.is_assigned(g) or g not in self.goals:
                continue
            self.run_on_goal(g, [t.script[0]], require_closed=False, label="all_goals")

    def _try(self, t: TacticNode) -> None:
        snap = self.snapshot()
        try:
            self.run(t.script[0])
        except TacticError:
            self.restore(snap)

    def _focus(self, t: TacticNode) -> None:
        self.run_on_goal(self.main(), t.script, require_closed=True, label="focus block")

    def _rotate(self, t: TacticNode) -> None:
        if not self.goals:
            raise TacticError("no-goals", "no goals left")
        self.goals = self.goals[1:] + self.goals[:1]


def _syntactic_match(pattern: Term, subject: Term, pat_set: set[int], bindings: dict[int, Term]) -> bool:
    if isinstance(pattern, Mvar) and pattern.mid in pat_set:
        if pattern.mid in bindings:
            return bindings[pattern.mid] == subject
        bindings[pattern.mid] = subject
        return True
    if pattern == subject:
        return True
    if isinstance(pattern, App) and isinstance(subject, App):
        return _syntactic_match(pattern.fn, subject.fn, pat_set, bindings) and _syntactic_match(
            pattern.arg, subject.arg, pat_set, bindings
        )
    return False


def _replace(t: Term, old: Term, new: Term) -> Term:
    if t == old:
        return new
    if isinstance(t, App):
        return App(_replace(t.fn, old, new), _replace(t.arg, old, new))
    if isinstance(t, (Lam, Pi)):
        return type(t)(t.uid, t.name, _replace(t.type, old, new), _replace(t.body, old, new))
    if isinstance(t, Sorry):
        return Sorry(_replace(t.type, old, new))
    return t


# ---------------------------------------------------------------------------
# public operations

def apply_tactic(env: Environment, state: ProofState, tactic: TacticNode,
                 config: TacticConfig | None = None) -> TacticOutcome:
    config = config or TacticConfig()
    _scan_config(tactic, config)
    if not state.goals:
        raise TacticError("no-goals", "no goals left")
    ex = _Exec(env, state.mctx.clone(), list(state.goals), config, state.opens)
    log_base = len(ex.mctx.log)
    ex.run(tactic)
    new_assignments = tuple(mid for mid, _ in ex.mctx.log[log_base:])
    if config.incremental_check:
        failure = check_new_assignments(env, ex.mctx, new_assignments, config.stats)
        if failure is not None:
            raise TacticError("kernel-check", f"{failure.kind}: {failure.message}")
    new_state = ProofState(_next_sid(), tuple(ex.goals), ex.mctx, (state.sid, tactic), state.opens)
    return TacticOutcome(new_state, new_assignments, tuple(ex.steps), tuple(ex.messages))


@dataclass
class ScriptError:
    index: int
    span: Span
    kind: str
    message: str


@dataclass
class ScriptResult:
    initial: ProofState
    states: list[ProofState]
    outcomes: list[TacticOutcome]
    error: ScriptError | None

    @property
    def final_state(self) -> ProofState:
        return self.states[-1] if self.states else self.initial

    @property
    def proven(self) -> bool:
        return self.error is None and self.final_state.finished

    @property
    def root_goal(self) -> int:
        return self.initial.goals[0]


def run_script(env: Environment, start, script, config: TacticConfig | None = None) -> ScriptResult:
    """Run tactics sequentially from a theorem declaration, goal text, or an
    existing state.  The first failing step is reported with index and span;
    earlier states remain retrievable."""
    state = start if isinstance(start, ProofState) else new_session(env, start)
    result = ScriptResult(state, [], [], None)
    for i, tac in enumerate(script):
        try:
            outcome = apply_tactic(env, state, tac, config)
        except TacticError as e:
            result.error = ScriptError(i, tac.span, e.kind, e.message)
            return result
        result.outcomes.append(outcome)
        result.states.append(outcome.new_state)
        state = outcome.new_state
    return result
