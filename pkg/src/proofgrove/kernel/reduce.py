"""Weak-head normalization and definitional equality."""

from __future__ import annotations

from .env import Environment
from .mctx import MetavarContext
from .term import App, Const, Lam, Mvar, Pi, Sorry, Term, Var, mk_app, spine, subst


def whnf(env: Environment, mctx: MetavarContext, t: Term) -> Term:
    """Weak-head normal form under beta, recursor-on-constructor and
    computation rules (iota), and definition unfolding (delta), with assigned
    metavariables transparently substituted.  Stuck terms return as-is."""
    while True:
        if isinstance(t, Mvar):
            v = mctx.value(t.mid)
            if v is None:
                return t
            t = v
            continue
        if not isinstance(t, App):
            return t
        head, args = spine(t)
        if isinstance(head, Mvar):
            v = mctx.value(head.mid)
            if v is None:
                return t
            t = mk_app(v, *args)
            continue
        if isinstance(head, Lam):
            t = mk_app(subst(head.body, head.uid, args[0]), *args[1:])
            continue
        if isinstance(head, Const):
            info = env.consts.get(head.name)
            if info is None:
                return t
            if info.body is not None:
                t = mk_app(info.body, *args)
                continue
            if info.reducer is not None and len(args) >= info.arity:
                red = info.reducer(args[: info.arity], lambda x: whnf(env, mctx, x))
                if red is not None:
                    t = mk_app(red, *args[info.arity :])
                    continue
            return t
        return t


def def_eq(env: Environment, mctx: MetavarContext, t: Term, u: Term) -> bool:
    """True iff t and u reduce to alpha-equal normal forms.  Never assigns."""
    t = whnf(env, mctx, t)
    u = whnf(env, mctx, u)
    if t == u:
        return True
    if isinstance(t, App) and isinstance(u, App):
        return def_eq(env, mctx, t.fn, u.fn) and def_eq(env, mctx, t.arg, u.arg)
    if isinstance(t, (Lam, Pi)) and type(t) is type(u):
        if not def_eq(env, mctx, t.type, u.type):
            return False
        return def_eq(env, mctx, t.body, subst(u.body, u.uid, Var(t.uid)))
    if isinstance(t, Sorry) and isinstance(u, Sorry):
        return def_eq(env, mctx, t.type, u.type)
    return False


def nat_literal(env: Environment, mctx: MetavarContext, t: Term) -> int | None:
    """Evaluate a closed succ/zero tower; None if stuck."""
    n = 0
    while True:
        t = whnf(env, mctx, t)
        if t == Const("Nat.zero"):
            return n
        if isinstance(t, App) and t.fn == Const("Nat.succ"):
            n += 1
            t = t.arg
            continue
        return None
