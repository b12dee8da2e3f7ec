"""Recursive-descent parser for MiniLean terms, tactic scripts, and files.

Tactic blocks use a column-based offside rule like Lean's: the tactics of one
sequence share a column, continuation lines are indented further, and a token
at or left of the sequence's column ends it.  Inside brackets the offside rule
is suspended.  One-line `cases ... with | a => .. | b => ..` is supported as
long as the branch bodies contain no nested `with`-branches (nested ones must
be indented on their own lines).
"""

from __future__ import annotations

from .ast import (
    AxiomDecl, Binder, CaseBranch, DeclError, DefDecl, OpenDecl, RwRule, SAnon,
    SApp, SBy, SFun, SHole, SIdent, SMvar, SPi, SRfl, SSorry, STerm, SourceFile,
    Span, TacticNode, TheoremDecl, mk_app, num_tower,
)
from .lexer import LexError, Token, tokenize


class ParseError(Exception):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.message = message
        self.offset = offset


# Binary operators: token -> (constant, precedence, right-assoc)
_BINOPS = {
    "↔": ("Iff", 20, True),
    "∨": ("Or", 30, True),
    "∧": ("And", 35, True),
    "=": ("Eq", 50, False),
    "≤": ("Le", 50, False),
    "<": ("Lt", 50, False),
    ">": ("Gt", 50, False),
    "+": ("Nat.add", 65, False),
    "-": ("Nat.sub", 65, False),
    "*": ("Nat.mul", 70, False),
}
_ARROW_PREC = 10

# Identifiers that terminate a term rather than begin an application argument.
_RESERVED_BREAK = {"with", "at"}

_BARE_TACTICS = {
    "rfl", "assumption", "constructor", "left", "right", "sorry",
    "rotate_left", "apply?", "exact?", "rw?",
}

_DECL_KEYWORDS = {"import", "open", "axiom", "def", "theorem", "example"}


class _Parser:
    def __init__(self, toks: list[Token], source: str):
        self.toks = toks
        self.i = 0
        self.src = source
        self.depth = 0  # bracket nesting; offside suspended when > 0

    # -- cursor helpers ----------------------------------------------------

    def peek(self, k: int = 0) -> Token:
        j = min(self.i + k, len(self.toks) - 1)
        return self.toks[j]

    def bump(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at_sym(self, v: str) -> bool:
        t = self.peek()
        return t.kind == "sym" and t.value == v

    def at_ident(self, v: str | None = None) -> bool:
        t = self.peek()
        return t.kind == "ident" and (v is None or t.value == v)

    def expect_sym(self, v: str) -> Token:
        if not self.at_sym(v):
            raise ParseError(f"expected {v!r}, found {self.peek().value!r}", self.peek().offset)
        return self.bump()

    def expect_ident(self) -> Token:
        if not self.at_ident():
            raise ParseError(f"expected identifier, found {self.peek().value!r}", self.peek().offset)
        return self.bump()

    def _consumable(self, tok: Token, floor: int, anchor_line: int) -> bool:
        if tok.kind == "eof":
            return False
        if self.depth > 0 or floor < 0:
            return True
        return tok.line == anchor_line or tok.col > floor

    # -- terms --------------------------------------------------------------

    def parse_term(self, floor: int = -1, anchor_line: int | None = None, prec: int = 0) -> STerm:
        if anchor_line is None:
            anchor_line = self.peek().line
        left = self._term_app(floor, anchor_line)
        while True:
            t = self.peek()
            if t.kind != "sym" or not self._consumable(t, floor, anchor_line):
                break
            if t.value == "→" and _ARROW_PREC >= prec:
                self.bump()
                body = self.parse_term(floor, anchor_line, _ARROW_PREC)
                left = SPi((("_", left),), body)
                continue
            op = _BINOPS.get(t.value)
            if op is None:
                break
            const, p, right = op
            if p < prec:
                break
            self.bump()
            rhs = self.parse_term(floor, anchor_line, p if right else p + 1)
            left = mk_app(SIdent(const), left, rhs)
        return left

    def _term_app(self, floor: int, anchor_line: int) -> STerm:
        head = self._term_atom(floor, anchor_line)
        while self._at_atom_start(floor, anchor_line):
            head = SApp(head, self._term_atom(floor, anchor_line))
        return head

    def _at_atom_start(self, floor: int, anchor_line: int) -> bool:
        t = self.peek()
        if not self._consumable(t, floor, anchor_line):
            return False
        if t.kind == "num":
            return True
        if t.kind == "ident":
            return t.value not in _RESERVED_BREAK
        return t.kind == "sym" and t.value in {"(", "⟨", "_", "?", "∀"}

    def _term_atom(self, floor: int, anchor_line: int) -> STerm:
        t = self.peek()
        if t.kind == "num":
            self.bump()
            return num_tower(int(t.value))
        if t.kind == "ident":
            if t.value == "sorry":
                self.bump()
                return SSorry()
            if t.value == "rfl":
                self.bump()
                return SRfl()
            if t.value == "fun":
                return self._term_fun(floor, anchor_line)
            if t.value == "by":
                return self._term_by(floor)
            if t.value in _RESERVED_BREAK:
                raise ParseError(f"unexpected {t.value!r} in term", t.offset)
            self.bump()
            return SIdent(t.value)
        if t.kind == "sym":
            if t.value == "(":
                self.bump()
                self.depth += 1
                inner = self.parse_term()
                self.depth -= 1
                self.expect_sym(")")
                return inner
            if t.value == "⟨":
                self.bump()
                self.depth += 1
                args: list[STerm] = []
                if not self.at_sym("⟩"):
                    args.append(self.parse_term())
                    while self.at_sym(","):
                        self.bump()
                        args.append(self.parse_term())
                self.depth -= 1
                self.expect_sym("⟩")
                return SAnon(tuple(args))
            if t.value == "_":
                self.bump()
                return SHole()
            if t.value == "?":
                self.bump()
                nxt = self.peek()
                if nxt.offset != t.end:
                    raise ParseError("dangling '?'", t.offset)
                if nxt.kind == "ident":
                    self.bump()
                    return SMvar(nxt.value)
                if nxt.kind == "sym" and nxt.value == "_":
                    self.bump()
                    return SMvar(None)
                raise ParseError("expected name after '?'", t.offset)
            if t.value == "∀":
                return self._term_forall(floor, anchor_line)
        raise ParseError(f"unexpected {t.value!r} in term", t.offset)

    def _term_forall(self, floor: int, anchor_line: int) -> STerm:
        self.bump()
        binders: list[tuple[str, STerm]] = []
        if self.at_sym("("):
            while self.at_sym("("):
                self.bump()
                self.depth += 1
                names = [self.expect_ident().value]
                while self.at_ident():
                    names.append(self.bump().value)
                self.expect_sym(":")
                ty = self.parse_term()
                self.depth -= 1
                self.expect_sym(")")
                binders.extend((n, ty) for n in names)
        else:
            names = [self.expect_ident().value]
            while self.at_ident():
                names.append(self.bump().value)
            self.expect_sym(":")
            ty = self.parse_term(floor, anchor_line)
            binders.extend((n, ty) for n in names)
        self.expect_sym(",")
        body = self.parse_term(floor, anchor_line)
        return SPi(tuple(binders), body)

    def _term_fun(self, floor: int, anchor_line: int) -> STerm:
        self.bump()
        binders: list[tuple[str, STerm | None]] = []
        while True:
            if self.at_sym("("):
                self.bump()
                self.depth += 1
                names = [self.expect_ident().value]
                while self.at_ident():
                    names.append(self.bump().value)
                self.expect_sym(":")
                ty = self.parse_term()
                self.depth -= 1
                self.expect_sym(")")
                binders.extend((n, ty) for n in names)
            elif self.at_ident() and self.peek().value not in _RESERVED_BREAK:
                binders.append((self.bump().value, None))
            else:
                break
        if not binders:
            raise ParseError("expected binder after 'fun'", self.peek().offset)
        self.expect_sym("=>")
        body = self.parse_term(floor, anchor_line)
        return SFun(tuple(binders), body)

    def _term_by(self, floor: int) -> STerm:
        by_tok = self.bump()
        script = self.parse_tactic_seq(floor)
        if not script:
            raise ParseError("empty 'by' block", by_tok.offset)
        span = Span(by_tok.offset, script[-1].span.finish)
        return SBy(tuple(script), span)

    # -- tactics ------------------------------------------------------------

    def parse_tactic_seq(self, floor: int) -> list[TacticNode]:
        items: list[TacticNode] = []
        first = self.peek()
        if first.kind == "eof" or not self._consumable(first, floor, -1):
            return items
        if first.kind == "sym" and first.value in {",", ")", "]", "⟩", "|", ";"}:
            return items
        seq_col = first.col
        while True:
            items.append(self.parse_tactic_expr(seq_col))
            nxt = self.peek()
            prev_line = self.toks[self.i - 1].line
            if nxt.kind == "sym" and nxt.value == ";" and (nxt.line == prev_line or nxt.col > floor):
                self.bump()
                if self.peek().kind == "eof":
                    raise ParseError("dangling ';'", nxt.offset)
                continue
            if (
                nxt.kind != "eof"
                and nxt.col == seq_col
                and nxt.line > prev_line
                and not (nxt.kind == "sym" and nxt.value in {",", ")", "]", "⟩", "|"})
            ):
                continue
            break
        return items

    def parse_tactic_expr(self, floor: int) -> TacticNode:
        left = self.parse_tactic_atom(floor)
        while self.at_sym("<;>") and (
            self.peek().line == self.toks[self.i - 1].line or self.peek().col > floor
        ):
            self.bump()
            right = self.parse_tactic_atom(floor)
            left = TacticNode("seq_all", Span(left.span.start, right.span.finish), lhs=left, rhs=right)
        return left

    def parse_tactic_atom(self, floor: int) -> TacticNode:
        t = self.peek()
        if t.kind == "sym" and t.value == "·":
            self.bump()
            body = self.parse_tactic_seq(t.col)
            if not body:
                raise ParseError("empty focus block", t.offset)
            return TacticNode("focus", Span(t.offset, body[-1].span.finish), script=tuple(body))
        if t.kind != "ident":
            raise ParseError(f"expected tactic, found {t.value!r}", t.offset)
        name = t.value
        nxt = self.peek(1)
        if nxt.kind == "sym" and nxt.value == "?" and nxt.offset == t.end:
            name = name + "?"
        anchor = t.line

        if name in {"apply?", "exact?", "rw?"}:
            self.bump()
            q = self.bump()
            return TacticNode(name, Span(t.offset, q.end))
        if name in _BARE_TACTICS:
            self.bump()
            return TacticNode(name, Span(t.offset, t.end))
        if name == "intro":
            self.bump()
            names = [self.expect_ident().value]
            while self.at_ident() and self._consumable(self.peek(), floor, anchor):
                names.append(self.bump().value)
            return TacticNode("intro", Span(t.offset, self.toks[self.i - 1].end), names=tuple(names))
        if name in {"exact", "apply"}:
            self.bump()
            term = self.parse_term(floor, anchor)
            return TacticNode(name, Span(t.offset, self.toks[self.i - 1].end), term=term)
        if name in {"rw", "rwa"}:
            self.bump()
            self.expect_sym("[")
            self.depth += 1
            rules = [RwRule(self.parse_term())]
            while self.at_sym(","):
                self.bump()
                rules.append(RwRule(self.parse_term()))
            self.depth -= 1
            self.expect_sym("]")
            at_hyp = None
            if self.at_ident("at") and self._consumable(self.peek(), floor, anchor):
                self.bump()
                at_hyp = self.expect_ident().value
            return TacticNode(
                name, Span(t.offset, self.toks[self.i - 1].end),
                rules=tuple(rules), at_hyp=at_hyp,
            )
        if name in {"cases", "induction"}:
            self.bump()
            disc = self.parse_term(floor, anchor)
            head_end = self.toks[self.i - 1].end
            branches: list[CaseBranch] = []
            if self.at_ident("with") and self._consumable(self.peek(), floor, anchor):
                self.bump()
                branches = self._parse_branches(floor)
            return TacticNode(
                name, Span(t.offset, self.toks[self.i - 1].end),
                term=disc, branches=tuple(branches),
                head_span=Span(t.offset, head_end) if branches else None,
            )
        if name == "have":
            self.bump()
            hname = self.expect_ident().value
            htype = None
            if self.at_sym(":"):
                self.bump()
                htype = self.parse_term(floor, anchor)
            self.expect_sym(":=")
            value = self.parse_term(floor, anchor)
            return TacticNode(
                "have", Span(t.offset, self.toks[self.i - 1].end),
                have_name=hname, have_type=htype, term=value,
            )
        if name == "case":
            self.bump()
            tag = self.expect_ident().value
            names: list[str] = []
            while self.at_ident() and self._consumable(self.peek(), floor, anchor):
                names.append(self.bump().value)
            script: tuple[TacticNode, ...] = ()
            if self.at_sym("=>"):
                self.bump()
                body = self.parse_tactic_seq(t.col)
                if not body:
                    raise ParseError("empty case block", t.offset)
                script = tuple(body)
            return TacticNode(
                "case", Span(t.offset, self.toks[self.i - 1].end),
                tag=tag, names=tuple(names), script=script,
            )
        if name in {"all_goals", "try"}:
            self.bump()
            inner = self.parse_tactic_atom(floor)
            return TacticNode(name, Span(t.offset, inner.span.finish), script=(inner,))
        raise ParseError(f"unknown tactic {name!r}", t.offset)

    def _parse_branches(self, floor: int) -> list[CaseBranch]:
        branches: list[CaseBranch] = []
        if not self.at_sym("|"):
            raise ParseError("expected '|' after 'with'", self.peek().offset)
        pipe_col = self.peek().col
        pipe_line = self.peek().line
        while self.at_sym("|") and (self.peek().col == pipe_col or self.peek().line == pipe_line):
            pipe = self.bump()
            tag = self.expect_ident().value
            names: list[str] = []
            while self.at_ident():
                names.append(self.bump().value)
            self.expect_sym("=>")
            body = self.parse_tactic_seq(pipe.col)
            if not body:
                raise ParseError(f"empty branch for case {tag!r}", pipe.offset)
            branches.append(CaseBranch(tag, tuple(names), tuple(body)))
        return branches

    # -- declarations --------------------------------------------------------

    def parse_binder_groups(self) -> list[Binder]:
        groups: list[Binder] = []
        while self.at_sym("("):
            self.bump()
            self.depth += 1
            names = [self.expect_ident().value]
            while self.at_ident():
                names.append(self.bump().value)
            self.expect_sym(":")
            ty = self.parse_term()
            self.depth -= 1
            self.expect_sym(")")
            groups.append(Binder(tuple(names), ty))
        return groups

    def parse_file(self, path: str) -> SourceFile:
        sf = SourceFile(path=path, text=self.src)
        seen_decl = False
        while self.peek().kind != "eof":
            t = self.peek()
            if t.kind != "ident" or t.value not in _DECL_KEYWORDS:
                self._record_error(sf, f"expected declaration, found {t.value!r}", t)
                continue
            start = self.i
            try:
                if t.value == "import":
                    self.bump()
                    mod = self.expect_ident().value
                    if seen_decl:
                        raise ParseError("imports must precede all declarations", t.offset)
                    sf.imports.append(mod)
                    continue
                seen_decl = True
                if t.value == "open":
                    self.bump()
                    ns = self.expect_ident()
                    sf.declarations.append(OpenDecl(ns.value, Span(t.offset, ns.end)))
                elif t.value == "axiom":
                    self.bump()
                    name = self.expect_ident().value
                    binders = self.parse_binder_groups()
                    self.expect_sym(":")
                    ty = self.parse_term(t.col, t.line)
                    sf.declarations.append(
                        AxiomDecl(name, tuple(binders), ty, Span(t.offset, self.toks[self.i - 1].end))
                    )
                elif t.value == "def":
                    self.bump()
                    name = self.expect_ident().value
                    binders = self.parse_binder_groups()
                    self.expect_sym(":")
                    ty = self.parse_term(t.col, t.line)
                    self.expect_sym(":=")
                    body = self.parse_term(t.col, t.line)
                    sf.declarations.append(
                        DefDecl(name, tuple(binders), ty, body, Span(t.offset, self.toks[self.i - 1].end))
                    )
                else:  # theorem | example
                    kw = self.bump()
                    name = self.expect_ident().value if kw.value == "theorem" else None
                    binders = self.parse_binder_groups()
                    self.expect_sym(":")
                    target = self.parse_term(kw.col, kw.line)
                    self.expect_sym(":=")
                    proof = self.parse_term(kw.col, kw.line)
                    opens = tuple(d.namespace for d in sf.declarations if isinstance(d, OpenDecl))
                    sf.declarations.append(
                        TheoremDecl(
                            name, tuple(binders), target, proof,
                            Span(kw.offset, self.toks[self.i - 1].end), opens,
                        )
                    )
            except (ParseError, LexError) as e:
                self.i = start
                self._record_error(sf, e.message, self.peek())
        return sf

    def _record_error(self, sf: SourceFile, message: str, at: Token) -> None:
        self.bump()
        while True:
            t = self.peek()
            if t.kind == "eof" or (t.kind == "ident" and t.value in _DECL_KEYWORDS and t.col == 0 and t.offset > at.offset):
                break
            self.bump()
        sf.declarations.append(DeclError(message, Span(at.offset, self.peek().offset)))


# -- public entry points ------------------------------------------------------

def parse_term(text: str) -> STerm:
    p = _Parser(tokenize(text), text)
    t = p.parse_term()
    if p.peek().kind != "eof":
        raise ParseError(f"trailing input {p.peek().value!r}", p.peek().offset)
    return t


def parse_tactic_script(text: str) -> list[TacticNode]:
    p = _Parser(tokenize(text), text)
    script = p.parse_tactic_seq(-1)
    if p.peek().kind != "eof":
        raise ParseError(f"trailing input {p.peek().value!r}", p.peek().offset)
    return script


def parse_tactic(text: str) -> TacticNode:
    script = parse_tactic_script(text)
    if len(script) != 1:
        raise ParseError("expected a single tactic", 0)
    return script[0]


def parse_file(text: str, path: str = "<input>") -> SourceFile:
    try:
        toks = tokenize(text)
    except LexError as e:
        sf = SourceFile(path=path, text=text)
        sf.declarations.append(DeclError(e.message, Span(e.offset, min(e.offset + 1, len(text)))))
        return sf
    return _Parser(toks, text).parse_file(path)
