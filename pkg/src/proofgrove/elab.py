"""Bidirectional elaboration of surface terms into kernel terms.

`sorry` in term position (and the canonical masked form `by sorry`) becomes a
fresh unassigned metavariable recorded in `goal_holes` — a resumable branch.
`_`/`?_` become metavariables in `unif_holes` that must be solved by
unification before the enclosing tactic succeeds.  Other `by` blocks run
their nested script immediately through an injected runner.
"""

from __future__ import annotations

from typing import Callable

from .kernel.env import Environment
from .kernel.infer import KernelError, infer_type, is_sort
from .kernel.mctx import Hypothesis, MetavarContext
from .kernel.reduce import def_eq, whnf
from .kernel.term import App, Const, Lam, Mvar, PROP, Pi, Term, Var, mk_app, spine as term_spine
from .kernel.unify import unify
from .syntax import (
    Binder, SAnon, SApp, SBy, SFun, SHole, SIdent, SMvar, SPi, SRfl, SSorry,
    STerm, TacticNode,
)


class ElabError(Exception):
    pass


# Anonymous-constructor targets: inductive head -> (constructor, field count)
_ANON = {"And": ("And.intro", 2), "Iff": ("Iff.intro", 2), "True": ("True.intro", 0)}

ByRunner = Callable[["Elaborator", int, SBy], None]


def _is_sorry_by(stx: SBy) -> bool:
    return len(stx.script) == 1 and stx.script[0].kind == "sorry"


class Elaborator:
    def __init__(
        self,
        env: Environment,
        mctx: MetavarContext,
        hyps: tuple[Hypothesis, ...] = (),
        opens: tuple[str, ...] = (),
        registry: dict[str, int] | None = None,
        by_runner: ByRunner | None = None,
    ):
        self.env = env
        self.mctx = mctx
        self.hyps = hyps
        self.opens = opens
        self.registry = registry
        self.by_runner = by_runner
        self.scope: list[tuple[str, int, Term]] = []  # binders entered, innermost last
        self.goal_holes: list[int] = []  # sorry / by-sorry holes, textual order
        self.unif_holes: list[int] = []  # _ / ?_ holes; must end up assigned
        self.spawned: list[int] = []  # goal holes plus executed by-block goals, textual order

    # -- context helpers -----------------------------------------------------

    def ctx_types(self) -> dict[int, Term]:
        ctx = {h.uid: h.type for h in self.hyps}
        ctx.update({uid: ty for _, uid, ty in self.scope})
        return ctx

    def hole_context(self) -> tuple[Hypothesis, ...]:
        return self.hyps + tuple(Hypothesis(uid, name, ty) for name, uid, ty in self.scope)

    def _lookup(self, name: str) -> tuple[Term, Term] | None:
        for bname, uid, ty in reversed(self.scope):
            if bname == name:
                return Var(uid), ty
        for h in self.hyps:
            if h.name == name:
                return Var(h.uid), h.type
        full = self.env.resolve(name, self.opens)
        if full is not None:
            return Const(full), self.env.lookup(full).type
        return None

    def _infer_kernel(self, t: Term) -> Term:
        return infer_type(self.env, self.mctx, self.ctx_types(), t, holes="opaque")

    # -- inference mode -------------------------------------------------------

    def infer(self, stx: STerm) -> tuple[Term, Term]:
        if isinstance(stx, SIdent):
            hit = self._lookup(stx.name)
            if hit is None:
                raise ElabError(f"unknown identifier {stx.name!r}")
            return hit
        if isinstance(stx, SApp):
            fn, fn_ty = self.infer(stx.fn)
            fn_ty = whnf(self.env, self.mctx, fn_ty)
            if not isinstance(fn_ty, Pi):
                raise ElabError("applied term is not a function")
            arg = self.check(stx.arg, fn_ty.type)
            from .kernel.term import subst
            return App(fn, arg), subst(fn_ty.body, fn_ty.uid, arg)
        if isinstance(stx, SPi):
            return self._elab_pi(stx)
        if isinstance(stx, SFun):
            binders = []
            for name, ty_stx in stx.binders:
                if ty_stx is None:
                    raise ElabError(f"cannot infer type of binder {name!r}; annotate it")
                ty = self.elab_type(ty_stx)
                uid = self.mctx.fresh_uid()
                binders.append((name, uid, ty))
                self.scope.append((name, uid, ty))
            body, body_ty = self.infer(stx.body)
            del self.scope[len(self.scope) - len(binders):]
            for name, uid, ty in reversed(binders):
                body = Lam(uid, name, ty, body)
                body_ty = Pi(uid, name, ty, body_ty)
            return body, body_ty
        if isinstance(stx, SMvar) and stx.name is not None and self.registry is not None:
            mid = self.registry.get(stx.name)
            if mid is not None:
                return Mvar(mid), self.mctx.decl(mid).target
            raise ElabError(f"unknown metavariable ?{stx.name}")
        if isinstance(stx, SSorry):
            raise ElabError("cannot infer the type of sorry; annotate it")
        if isinstance(stx, (SHole, SMvar)):
            raise ElabError("cannot infer the type of a placeholder here")
        if isinstance(stx, SRfl):
            raise ElabError("rfl needs an expected type")
        if isinstance(stx, SAnon):
            raise ElabError("anonymous constructor needs an expected type")
        if isinstance(stx, SBy):
            raise ElabError("a by-block needs an expected type")
        raise ElabError(f"cannot elaborate {stx!r}")

    # -- checking mode --------------------------------------------------------

    def check(self, stx: STerm, expected: Term) -> Term:
        expected_w = whnf(self.env, self.mctx, expected)
        if isinstance(stx, SFun):
            if not isinstance(expected_w, Pi):
                raise ElabError("function literal against a non-function type")
            name, ty_stx = stx.binders[0]
            ty = expected_w.type
            if ty_stx is not None:
                ann = self.elab_type(ty_stx)
                if not def_eq(self.env, self.mctx, ann, ty):
                    raise ElabError(f"binder annotation on {name!r} does not match expected type")
                ty = ann
            uid = self.mctx.fresh_uid()
            from .kernel.term import subst
            body_expected = subst(expected_w.body, expected_w.uid, Var(uid))
            rest: STerm = stx.body if len(stx.binders) == 1 else SFun(stx.binders[1:], stx.body)
            self.scope.append((name, uid, ty))
            body = self.check(rest, body_expected)
            self.scope.pop()
            return Lam(uid, name, ty, body)
        if isinstance(stx, SAnon):
            head, args = term_spine(expected_w)
            if not isinstance(head, Const) or head.name not in _ANON:
                raise ElabError("anonymous constructor not supported for this type")
            ctor, nfields = _ANON[head.name]
            if len(stx.args) != nfields:
                raise ElabError(f"⟨…⟩ for {head.name} needs {nfields} components")
            term: Term = mk_app(Const(ctor), *args)
            ty = self._infer_kernel(term)
            for comp in stx.args:
                ty = whnf(self.env, self.mctx, ty)
                assert isinstance(ty, Pi)
                arg = self.check(comp, ty.type)
                from .kernel.term import subst
                term, ty = App(term, arg), subst(ty.body, ty.uid, arg)
            return term
        if isinstance(stx, SRfl):
            return self._elab_rfl(expected_w)
        if isinstance(stx, SSorry):
            return self._new_goal_hole(expected)
        if isinstance(stx, SBy):
            if _is_sorry_by(stx):
                return self._new_goal_hole(expected)
            if self.by_runner is None:
                raise ElabError("nested by-blocks are not allowed here")
            mid = self.mctx.fresh_mvar(self.hole_context(), expected)
            self.spawned.append(mid)
            self.by_runner(self, mid, stx)
            return Mvar(mid)
        if isinstance(stx, SHole) or (isinstance(stx, SMvar) and stx.name is None):
            mid = self.mctx.fresh_mvar(self.hole_context(), expected)
            self.unif_holes.append(mid)
            return Mvar(mid)
        if isinstance(stx, SMvar):
            if self.registry is None:
                raise ElabError(f"named metavariable ?{stx.name} not allowed here")
            mid = self.registry.get(stx.name)
            if mid is None:
                mid = self.mctx.fresh_mvar(self.hole_context(), expected)
                self.registry[stx.name] = mid
            return Mvar(mid)
        term, ty = self.infer(stx)
        solved = unify(self.env, self.mctx, ty, expected)
        if solved is None:
            from .kernel.pp import show_term
            names = {h.uid: h.name for h in self.hole_context()}
            raise ElabError(
                f"type mismatch: expected {show_term(self.mctx.instantiate(expected), names)}, "
                f"got {show_term(self.mctx.instantiate(ty), names)}"
            )
        self.mctx = solved
        return term

    # -- helpers --------------------------------------------------------------

    def _new_goal_hole(self, expected: Term) -> Term:
        mid = self.mctx.fresh_mvar(self.hole_context(), expected)
        self.goal_holes.append(mid)
        self.spawned.append(mid)
        return Mvar(mid)

    def _elab_rfl(self, expected: Term) -> Term:
        head, args = term_spine(expected)
        if isinstance(head, Const) and head.name == "Eq" and len(args) == 2:
            if def_eq(self.env, self.mctx, args[0], args[1]):
                return App(Const("Eq.refl"), args[0])
            raise ElabError("rfl: sides are not definitionally equal")
        if isinstance(head, Const) and head.name == "Iff" and len(args) == 2:
            if def_eq(self.env, self.mctx, args[0], args[1]):
                u1, u2 = self.mctx.fresh_uid(), self.mctx.fresh_uid()
                return mk_app(
                    Const("Iff.intro"), args[0], args[1],
                    Lam(u1, "h", args[0], Var(u1)), Lam(u2, "h", args[1], Var(u2)),
                )
            raise ElabError("rfl: sides are not definitionally equal")
        raise ElabError("rfl proves only Eq or Iff goals")

    def _elab_pi(self, stx: SPi) -> tuple[Term, Term]:
        binders = []
        for name, ty_stx in stx.binders:
            ty = self.elab_type(ty_stx)
            uid = self.mctx.fresh_uid()
            binders.append((name, uid, ty))
            self.scope.append((name, uid, ty))
        body = self.elab_type(stx.body)
        body_sort = self._infer_kernel(body)
        del self.scope[len(self.scope) - len(binders):]
        term: Term = body
        for name, uid, ty in reversed(binders):
            term = Pi(uid, name, ty, term)
        return term, whnf(self.env, self.mctx, body_sort)

    def elab_type(self, stx: STerm) -> Term:
        """Elaborate a term expected to be a type (its type is a sort)."""
        if isinstance(stx, SPi):
            term, _ = self._elab_pi(stx)
            return term
        term, ty = self.infer(stx)
        if not is_sort(whnf(self.env, self.mctx, ty)):
            raise ElabError("expected a proposition or type")
        return term


# -- declaration-level helpers -------------------------------------------------

def elab_binder_groups(
    env: Environment,
    mctx: MetavarContext,
    binders: tuple[Binder, ...],
    opens: tuple[str, ...] = (),
) -> tuple[Hypothesis, ...]:
    hyps: tuple[Hypothesis, ...] = ()
    for group in binders:
        el = Elaborator(env, mctx, hyps, opens)
        ty = el.elab_type(group.type)
        for name in group.names:
            hyps = hyps + (Hypothesis(mctx.fresh_uid(), name, ty),)
    return hyps


def pi_closure(hyps: tuple[Hypothesis, ...], body: Term) -> Term:
    for h in reversed(hyps):
        body = Pi(h.uid, h.name, h.type, body)
    return body


def lam_closure(hyps: tuple[Hypothesis, ...], body: Term) -> Term:
    for h in reversed(hyps):
        body = Lam(h.uid, h.name, h.type, body)
    return body
