"""Constant environment: built-in inductives, recursors, computation rules,
and declarations loaded from MiniLean source."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .term import Term


class UnknownConstant(Exception):
    pass


class DuplicateConstant(Exception):
    pass


# A reducer implements iota/computation rules for a constant: it receives the
# first `arity` arguments (uninstantiated) and the whnf function, and returns
# the reduct or None when stuck.
Reducer = Callable[[list[Term], Callable[[Term], Term]], Term | None]


@dataclass(frozen=True)
class ConstInfo:
    name: str
    type: Term
    kind: str  # "sort" | "inductive" | "ctor" | "recursor" | "def" | "axiom" | "theorem"
    body: Term | None = None  # delta-unfoldable definitions
    reducer: Reducer | None = None
    arity: int = 0  # args required before the reducer fires
    ctor_of: str | None = None
    ctor_index: int = 0


@dataclass(frozen=True)
class InductiveInfo:
    name: str
    n_params: int
    ctors: tuple[str, ...]
    can_cases: bool  # case analysis supported by the cases/induction tactics
    recursor: str | None = None
    cases_on: str | None = None


@dataclass
class Environment:
    consts: dict[str, ConstInfo] = field(default_factory=dict)
    inductives: dict[str, InductiveInfo] = field(default_factory=dict)
    uid_floor: int = 0  # session uids start above every uid minted while building the env

    def clone(self) -> "Environment":
        return Environment(dict(self.consts), dict(self.inductives), self.uid_floor)

    def add(self, info: ConstInfo) -> None:
        if info.name in self.consts:
            raise DuplicateConstant(info.name)
        self.consts[info.name] = info

    def lookup(self, name: str) -> ConstInfo:
        info = self.consts.get(name)
        if info is None:
            raise UnknownConstant(name)
        return info

    def contains(self, name: str) -> bool:
        return name in self.consts

    def resolve(self, name: str, opens: tuple[str, ...] = ()) -> str | None:
        """Resolve a source-level name against open namespaces."""
        if name in self.consts:
            return name
        for ns in reversed(opens):
            full = f"{ns}.{name}"
            if full in self.consts:
                return full
        return None
