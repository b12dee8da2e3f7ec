"""Kernel terms.

Binders carry the globally-unique uid of the variable they bind, and bodies
reference that uid directly through Var nodes (a named representation rather
than de Bruijn indices).  Uids are minted once and never reused within a
metavariable-context lineage, so substitution cannot capture and metavariable
assignments may mention variables bound by enclosing lambdas without any
delayed-assignment bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Var:
    uid: int


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class App:
    fn: Term
    arg: Term


@dataclass(frozen=True)
class Lam:
    uid: int
    name: str
    type: Term
    body: Term


@dataclass(frozen=True)
class Pi:
    uid: int
    name: str
    type: Term
    body: Term


@dataclass(frozen=True)
class Mvar:
    mid: int


@dataclass(frozen=True)
class Sorry:
    type: Term


Term = Var | Const | App | Lam | Pi | Mvar | Sorry


def mk_app(fn: Term, *args: Term) -> Term:
    for a in args:
        fn = App(fn, a)
    return fn


def spine(t: Term) -> tuple[Term, list[Term]]:
    args: list[Term] = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fn
    args.reverse()
    return t, args


def subst(t: Term, uid: int, value: Term) -> Term:
    """Replace Var(uid) by value.  Binder uids are globally unique, so no
    capture is possible; a shadowing binder with the same uid stops descent."""
    if isinstance(t, Var):
        return value if t.uid == uid else t
    if isinstance(t, App):
        fn, arg = subst(t.fn, uid, value), subst(t.arg, uid, value)
        return t if fn is t.fn and arg is t.arg else App(fn, arg)
    if isinstance(t, (Lam, Pi)):
        ty = subst(t.type, uid, value)
        body = t.body if t.uid == uid else subst(t.body, uid, value)
        if ty is t.type and body is t.body:
            return t
        return type(t)(t.uid, t.name, ty, body)
    if isinstance(t, Sorry):
        ty = subst(t.type, uid, value)
        return t if ty is t.type else Sorry(ty)
    return t


def subst_many(t: Term, mapping: dict[int, Term]) -> Term:
    for uid, value in mapping.items():
        t = subst(t, uid, value)
    return t


def free_vars(t: Term, acc: set[int] | None = None) -> set[int]:
    if acc is None:
        acc = set()
    if isinstance(t, Var):
        acc.add(t.uid)
    elif isinstance(t, App):
        free_vars(t.fn, acc)
        free_vars(t.arg, acc)
    elif isinstance(t, (Lam, Pi)):
        free_vars(t.type, acc)
        inner: set[int] = set()
        free_vars(t.body, inner)
        inner.discard(t.uid)
        acc |= inner
    elif isinstance(t, Sorry):
        free_vars(t.type, acc)
    return acc


def mvars_of(t: Term, acc: set[int] | None = None) -> set[int]:
    if acc is None:
        acc = set()
    if isinstance(t, Mvar):
        acc.add(t.mid)
    elif isinstance(t, App):
        mvars_of(t.fn, acc)
        mvars_of(t.arg, acc)
    elif isinstance(t, (Lam, Pi)):
        mvars_of(t.type, acc)
        mvars_of(t.body, acc)
    elif isinstance(t, Sorry):
        mvars_of(t.type, acc)
    return acc


def contains_sorry(t: Term) -> bool:
    if isinstance(t, Sorry):
        return True
    if isinstance(t, App):
        return contains_sorry(t.fn) or contains_sorry(t.arg)
    if isinstance(t, (Lam, Pi)):
        return contains_sorry(t.type) or contains_sorry(t.body)
    return False


def term_size(t: Term) -> int:
    if isinstance(t, App):
        return 1 + term_size(t.fn) + term_size(t.arg)
    if isinstance(t, (Lam, Pi)):
        return 1 + term_size(t.type) + term_size(t.body)
    if isinstance(t, Sorry):
        return 1 + term_size(t.type)
    return 1


PROP = Const("Prop")
TYPE = Const("Type")
NAT = Const("Nat")
