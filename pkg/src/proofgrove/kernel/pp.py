"""Kernel-term pretty-printing via resugaring into the surface AST, so the
renderer and parser share one grammar and rendered terms re-parse."""

from __future__ import annotations

from ..syntax import SApp, SFun, SIdent, SMvar, SPi, STerm, render_term
from .term import App, Const, Lam, Mvar, Pi, Sorry, Term, Var, free_vars
from ..syntax.ast import SSorry


def to_surface(t: Term, names: dict[int, str] | None = None) -> STerm:
    names = names or {}
    if isinstance(t, Var):
        return SIdent(names.get(t.uid, f"#u{t.uid}"))
    if isinstance(t, Const):
        return SIdent(t.name)
    if isinstance(t, App):
        return SApp(to_surface(t.fn, names), to_surface(t.arg, names))
    if isinstance(t, Lam):
        binders = []
        while isinstance(t, Lam):
            names = {**names, t.uid: t.name}
            binders.append((t.name, to_surface(t.type, names)))
            t = t.body
        return SFun(tuple(binders), to_surface(t, names))
    if isinstance(t, Pi):
        binders = []
        while isinstance(t, Pi):
            dependent = t.uid in free_vars(t.body)
            if dependent:
                names = {**names, t.uid: t.name}
                binders.append((t.name, to_surface(t.type, names)))
                t = t.body
                continue
            if binders:
                # flush the dependent prefix, arrow tail rendered separately
                return SPi(tuple(binders), to_surface(t, names))
            return SPi((("_", to_surface(t.type, names)),), to_surface(t.body, names))
        return SPi(tuple(binders), to_surface(t, names))
    if isinstance(t, Mvar):
        return SMvar(f"m{t.mid}")
    if isinstance(t, Sorry):
        return SSorry()
    raise TypeError(f"cannot resugar {t!r}")


def show_term(t: Term, names: dict[int, str] | None = None) -> str:
    return render_term(to_surface(t, names))
