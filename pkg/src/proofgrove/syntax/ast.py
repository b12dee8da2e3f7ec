"""Surface syntax: spans, term AST, tactic AST, and file-level declarations.

Offsets throughout are 0-based character (Unicode scalar) offsets into the
original source text, never byte offsets.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace


@dataclass(frozen=True)
class Span:
    start: int
    finish: int

    def __post_init__(self):
        if not (0 <= self.start <= self.finish):
            raise ValueError(f"bad span ({self.start}, {self.finish})")

    def slice(self, source: str) -> str:
        return source[self.start : self.finish]

    @property
    def empty(self) -> bool:
        return self.start == self.finish


EMPTY_SPAN = Span(0, 0)


# ---------------------------------------------------------------------------
# Terms (surface level).  Operators and numerals are desugared by the parser:
# `a - b = a` becomes SApp(SApp(SIdent("Eq"), SApp(SApp(SIdent("Nat.sub"), a), b)), a)
# and `2` becomes a Nat.succ/Nat.zero application tower.

@dataclass(frozen=True)
class SIdent:
    name: str


@dataclass(frozen=True)
class SApp:
    fn: STerm
    arg: STerm


@dataclass(frozen=True)
class SPi:
    binders: tuple[tuple[str, "STerm"], ...]  # (name, type); "_" for arrows
    body: STerm


@dataclass(frozen=True)
class SFun:
    binders: tuple[tuple[str, "STerm | None"], ...]
    body: STerm


@dataclass(frozen=True)
class SAnon:
    """Anonymous constructor ⟨a, b, ...⟩."""

    args: tuple["STerm", ...]


@dataclass(frozen=True)
class SMvar:
    """?name or ?_ metavariable reference."""

    name: str | None


@dataclass(frozen=True)
class SHole:
    """The `_` placeholder."""


@dataclass(frozen=True)
class SSorry:
    """The `sorry` keyword in term position."""


@dataclass(frozen=True)
class SRfl:
    """The `rfl` keyword in term position."""


@dataclass(frozen=True)
class SBy:
    script: tuple["TacticNode", ...]
    span: Span


STerm = SIdent | SApp | SPi | SFun | SAnon | SMvar | SHole | SSorry | SRfl | SBy


def spine(t: STerm) -> tuple[STerm, list[STerm]]:
    """Split nested applications into (head, args)."""
    args: list[STerm] = []
    while isinstance(t, SApp):
        args.append(t.arg)
        t = t.fn
    args.reverse()
    return t, args


def mk_app(head: STerm, *args: STerm) -> STerm:
    for a in args:
        head = SApp(head, a)
    return head


def num_tower(n: int) -> STerm:
    t: STerm = SIdent("Nat.zero")
    for _ in range(n):
        t = SApp(SIdent("Nat.succ"), t)
    return t


def tower_value(t: STerm) -> int | None:
    """Inverse of num_tower; None if t is not a closed numeral."""
    n = 0
    while isinstance(t, SApp) and t.fn == SIdent("Nat.succ"):
        n += 1
        t = t.arg
    if t == SIdent("Nat.zero"):
        return n
    return None


# ---------------------------------------------------------------------------
# Tactics

@dataclass(frozen=True)
class RwRule:
    term: STerm


@dataclass(frozen=True)
class CaseBranch:
    tag: str
    names: tuple[str, ...]
    script: tuple["TacticNode", ...]


TACTIC_KINDS = frozenset(
    {
        "intro", "exact", "apply", "rfl", "assumption", "rw", "rwa", "cases",
        "induction", "constructor", "left", "right", "have", "case", "sorry",
        "seq_all", "all_goals", "try", "focus", "rotate_left",
        "apply?", "exact?", "rw?",
    }
)

LIBRARY_SEARCH_KINDS = frozenset({"apply?", "exact?", "rw?"})


@dataclass(frozen=True)
class TacticNode:
    kind: str
    span: Span = EMPTY_SPAN
    names: tuple[str, ...] = ()  # intro binders, case renames
    term: STerm | None = None  # exact/apply argument, cases discriminant
    rules: tuple[RwRule, ...] = ()  # rw/rwa rewrite list
    at_hyp: str | None = None  # rw ... at h
    tag: str | None = None  # case tag
    branches: tuple[CaseBranch, ...] = ()  # cases/induction `with` branches
    have_name: str | None = None
    have_type: STerm | None = None
    script: tuple["TacticNode", ...] = ()  # focus / all_goals / try body
    lhs: "TacticNode | None" = None  # seq_all
    rhs: "TacticNode | None" = None
    head_span: Span | None = None  # `cases x` part of a branched cases/induction

    def with_span(self, span: Span) -> "TacticNode":
        return replace(self, span=span)


def strip_spans(node):
    """Structural copy with all spans zeroed, for round-trip comparisons."""
    if isinstance(node, TacticNode):
        return replace(
            node,
            span=EMPTY_SPAN,
            head_span=None,
            term=strip_spans(node.term) if node.term is not None else None,
            rules=tuple(RwRule(strip_spans(r.term)) for r in node.rules),
            have_type=strip_spans(node.have_type) if node.have_type is not None else None,
            branches=tuple(
                CaseBranch(b.tag, b.names, tuple(strip_spans(t) for t in b.script))
                for b in node.branches
            ),
            script=tuple(strip_spans(t) for t in node.script),
            lhs=strip_spans(node.lhs) if node.lhs is not None else None,
            rhs=strip_spans(node.rhs) if node.rhs is not None else None,
        )
    if isinstance(node, SBy):
        return SBy(tuple(strip_spans(t) for t in node.script), EMPTY_SPAN)
    if isinstance(node, SApp):
        return SApp(strip_spans(node.fn), strip_spans(node.arg))
    if isinstance(node, SPi):
        return SPi(tuple((n, strip_spans(t)) for n, t in node.binders), strip_spans(node.body))
    if isinstance(node, SFun):
        return SFun(
            tuple((n, strip_spans(t) if t is not None else None) for n, t in node.binders),
            strip_spans(node.body),
        )
    if isinstance(node, SAnon):
        return SAnon(tuple(strip_spans(a) for a in node.args))
    return node


# ---------------------------------------------------------------------------
# File-level declarations

@dataclass(frozen=True)
class Binder:
    names: tuple[str, ...]
    type: STerm


@dataclass(frozen=True)
class AxiomDecl:
    name: str
    binders: tuple[Binder, ...]
    type: STerm
    span: Span


@dataclass(frozen=True)
class DefDecl:
    name: str
    binders: tuple[Binder, ...]
    type: STerm
    body: STerm
    span: Span


@dataclass(frozen=True)
class OpenDecl:
    namespace: str
    span: Span


@dataclass(frozen=True)
class TheoremDecl:
    name: str | None  # None for `example`
    binders: tuple[Binder, ...]
    target: STerm
    proof: STerm  # often an SBy, or a term containing SBy blocks
    span: Span
    open_namespaces: tuple[str, ...]


@dataclass(frozen=True)
class DeclError:
    message: str
    span: Span


Declaration = AxiomDecl | DefDecl | OpenDecl | TheoremDecl | DeclError


@dataclass
class SourceFile:
    path: str
    text: str
    imports: list[str] = field(default_factory=list)
    declarations: list[Declaration] = field(default_factory=list)

    @property
    def theorems(self) -> list[TheoremDecl]:
        return [d for d in self.declarations if isinstance(d, TheoremDecl)]

    @property
    def errors(self) -> list[DeclError]:
        return [d for d in self.declarations if isinstance(d, DeclError)]
