"""Metavariable context: the single source of truth for goal state.

Snapshots are copy-on-write: `clone()` copies the dicts but shares the
immutable declarations and terms, so a published snapshot can be branched
from concurrently while the owner keeps mutating its own copy.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .term import App, Lam, Mvar, Pi, Sorry, Term


class AlreadyAssigned(Exception):
    pass


@dataclass(frozen=True)
class Hypothesis:
    uid: int
    name: str  # trailing "†" marks an inaccessible name
    type: Term
    value: Term | None = None

    @property
    def inaccessible(self) -> bool:
        return self.name.endswith("†")


@dataclass(frozen=True)
class MetavarDecl:
    mid: int
    context: tuple[Hypothesis, ...]
    target: Term
    tag: str | None = None

    def hyp(self, name: str) -> Hypothesis | None:
        for h in self.context:
            if h.name == name:
                return h
        return None

    def ctx_types(self) -> dict[int, Term]:
        return {h.uid: h.type for h in self.context}


class MetavarContext:
    def __init__(self, next_mid: int = 0, next_uid: int = 0):
        self.decls: dict[int, MetavarDecl] = {}
        self.assignments: dict[int, Term] = {}
        self.log: list[tuple[int, Term]] = []
        self._next_mid = next_mid
        self._next_uid = next_uid

    def clone(self) -> "MetavarContext":
        c = MetavarContext(self._next_mid, self._next_uid)
        c.decls = dict(self.decls)
        c.assignments = dict(self.assignments)
        c.log = list(self.log)
        return c

    def fresh_uid(self) -> int:
        uid = self._next_uid
        self._next_uid += 1
        return uid

    def fresh_mvar(self, context: tuple[Hypothesis, ...], target: Term, tag: str | None = None) -> int:
        mid = self._next_mid
        self._next_mid += 1
        self.decls[mid] = MetavarDecl(mid, context, target, tag)
        return mid

    def decl(self, mid: int) -> MetavarDecl:
        return self.decls[mid]

    def set_tag(self, mid: int, tag: str | None) -> None:
        self.decls[mid] = replace(self.decls[mid], tag=tag)

    def is_assigned(self, mid: int) -> bool:
        return mid in self.assignments

    def value(self, mid: int) -> Term | None:
        return self.assignments.get(mid)

    def assign(self, mid: int, value: Term) -> None:
        if mid in self.assignments:
            raise AlreadyAssigned(f"?m{mid} is already assigned")
        assert mid in self.decls, f"assigning undeclared ?m{mid}"
        self.assignments[mid] = value
        self.log.append((mid, value))

    def instantiate(self, t: Term) -> Term:
        """Substitute assigned metavariables recursively; unassigned remain."""
        if isinstance(t, Mvar):
            v = self.assignments.get(t.mid)
            return t if v is None else self.instantiate(v)
        if isinstance(t, App):
            fn, arg = self.instantiate(t.fn), self.instantiate(t.arg)
            return t if fn is t.fn and arg is t.arg else App(fn, arg)
        if isinstance(t, (Lam, Pi)):
            ty, body = self.instantiate(t.type), self.instantiate(t.body)
            if ty is t.type and body is t.body:
                return t
            return type(t)(t.uid, t.name, ty, body)
        if isinstance(t, Sorry):
            ty = self.instantiate(t.type)
            return t if ty is t.type else Sorry(ty)
        return t

    def instantiate_hyp(self, h: Hypothesis) -> Hypothesis:
        return Hypothesis(
            h.uid, h.name, self.instantiate(h.type),
            None if h.value is None else self.instantiate(h.value),
        )
