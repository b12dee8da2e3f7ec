"""Type inference for kernel terms."""

from __future__ import annotations

from .env import Environment, UnknownConstant
from .mctx import MetavarContext
from .reduce import def_eq, whnf
from .term import App, Const, Lam, Mvar, PROP, Pi, Sorry, TYPE, Term, Var, subst


class KernelError(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind
        self.message = message


def is_sort(t: Term) -> bool:
    return t == PROP or t == TYPE


def infer_type(
    env: Environment,
    mctx: MetavarContext,
    ctx: dict[int, Term],
    t: Term,
    holes: str = "opaque",
) -> Term:
    """Infer the type of t in local context ctx (uid -> type).

    holes="opaque": unassigned metavariables and Sorry are typed by their
    declared types.  holes="forbid": they raise, mirroring a kernel that
    cannot synthesize placeholders.
    """
    if isinstance(t, Var):
        ty = ctx.get(t.uid)
        if ty is None:
            raise KernelError("unknown-variable", f"variable #{t.uid} not in scope")
        return ty
    if isinstance(t, Const):
        try:
            return env.lookup(t.name).type
        except UnknownConstant:
            raise KernelError("unknown-const", f"unknown constant {t.name!r}") from None
    if isinstance(t, App):
        fn_ty = whnf(env, mctx, infer_type(env, mctx, ctx, t.fn, holes))
        if not isinstance(fn_ty, Pi):
            raise KernelError("type-mismatch", "application head is not a function")
        arg_ty = infer_type(env, mctx, ctx, t.arg, holes)
        if not def_eq(env, mctx, arg_ty, fn_ty.type):
            raise KernelError(
                "type-mismatch",
                f"argument type mismatch: expected {fn_ty.type}, got {arg_ty}",
            )
        return subst(fn_ty.body, fn_ty.uid, t.arg)
    if isinstance(t, Lam):
        _check_is_type(env, mctx, ctx, t.type, holes)
        body_ty = infer_type(env, mctx, {**ctx, t.uid: t.type}, t.body, holes)
        return Pi(t.uid, t.name, t.type, body_ty)
    if isinstance(t, Pi):
        _check_is_type(env, mctx, ctx, t.type, holes)
        body_sort = whnf(env, mctx, infer_type(env, mctx, {**ctx, t.uid: t.type}, t.body, holes))
        if not is_sort(body_sort):
            raise KernelError("not-a-sort", "Pi body is not a proposition or type")
        return body_sort  # impredicative: an implication into Prop is a Prop
    if isinstance(t, Mvar):
        if holes == "forbid":
            raise KernelError(
                "unsynthesized-placeholder",
                f"don't know how to synthesize placeholder ?m{t.mid}",
            )
        return mctx.decl(t.mid).target
    if isinstance(t, Sorry):
        if holes == "forbid":
            raise KernelError("contains-sorry", "term contains sorry")
        return t.type
    raise KernelError("internal", f"cannot infer {t!r}")


def _check_is_type(env, mctx, ctx, ty: Term, holes: str) -> None:
    sort = whnf(env, mctx, infer_type(env, mctx, ctx, ty, holes))
    if not is_sort(sort) and not (isinstance(sort, Mvar) and holes == "opaque"):
        raise KernelError("not-a-sort", f"binder type {ty} is not a proposition or type")
