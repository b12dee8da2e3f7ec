"""First-order syntactic unification up to whnf, with occurs check."""

from __future__ import annotations

from .env import Environment
from .infer import KernelError, infer_type
from .mctx import MetavarContext
from .reduce import def_eq, whnf
from .term import Lam, Mvar, Pi, Sorry, Term, App, Var, free_vars, mvars_of, subst


def unify(
    env: Environment,
    mctx: MetavarContext,
    t: Term,
    u: Term,
    assignable: set[int] | None = None,
) -> MetavarContext | None:
    """Unify t and u.  On success the solving assignments are committed into
    mctx (the same object is returned, so aliases stay coherent); on failure
    mctx is left bit-identical and None is returned.  When `assignable` is
    given, only those metavariables may be assigned (used for rewrite-pattern
    matching).  Never call this on a published snapshot; work on a clone."""
    trial = mctx.clone()
    if _unify(env, trial, t, u, assignable):
        mctx.decls = trial.decls
        mctx.assignments = trial.assignments
        mctx.log = trial.log
        mctx._next_mid = trial._next_mid
        mctx._next_uid = trial._next_uid
        return mctx
    return None


def _unify(env, mctx: MetavarContext, t: Term, u: Term, assignable) -> bool:
    t = whnf(env, mctx, t)
    u = whnf(env, mctx, u)
    if t == u:
        return True
    if isinstance(t, Mvar) and _may_assign(mctx, t.mid, assignable):
        return _solve(env, mctx, t.mid, u)
    if isinstance(u, Mvar) and _may_assign(mctx, u.mid, assignable):
        return _solve(env, mctx, u.mid, t)
    if isinstance(t, App) and isinstance(u, App):
        return _unify(env, mctx, t.fn, u.fn, assignable) and _unify(env, mctx, t.arg, u.arg, assignable)
    if isinstance(t, (Lam, Pi)) and type(t) is type(u):
        if not _unify(env, mctx, t.type, u.type, assignable):
            return False
        return _unify(env, mctx, t.body, subst(u.body, u.uid, Var(t.uid)), assignable)
    if isinstance(t, Sorry) and isinstance(u, Sorry):
        return _unify(env, mctx, t.type, u.type, assignable)
    return False


def _may_assign(mctx: MetavarContext, mid: int, assignable) -> bool:
    if mctx.is_assigned(mid):
        return False
    return assignable is None or mid in assignable


def _solve(env, mctx: MetavarContext, mid: int, value: Term) -> bool:
    value = mctx.instantiate(value)
    if mid in mvars_of(value):
        return False  # occurs check
    decl = mctx.decl(mid)
    scope = set(decl.ctx_types())
    if not free_vars(value) <= scope:
        return False  # value escapes the metavariable's local context
    try:
        vt = infer_type(env, mctx, decl.ctx_types(), value, holes="opaque")
    except KernelError:
        return False
    if not def_eq(env, mctx, vt, decl.target):
        return False
    mctx.assign(mid, value)
    return True
