"""Tokenizer for MiniLean source, tactic scripts, and terms.

Unicode math symbols are normalized to one canonical spelling per token so the
parser only ever sees one form (e.g. both `<|` and `⟨` lex to `⟨`, both `↦`
and `=>` lex to `=>`).  Identifiers may contain dots (`Nat.le_trans`), primes,
and a trailing dagger; `!` is the ASCII alias for the dagger.
"""

from __future__ import annotations

from dataclasses import dataclass


class LexError(Exception):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset
        self.message = message


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "num" | "sym" | "eof"
    value: str
    offset: int
    end: int
    line: int  # 0-based
    col: int  # 0-based, in characters

    def __repr__(self):
        return f"Token({self.kind}:{self.value!r}@{self.offset})"


# Longest match first within each group.
_MULTI = [
    ("<;>", "<;>"),
    ("<->", "↔"),
    (":=", ":="),
    ("<|", "⟨"),
    ("|>", "⟩"),
    ("<=", "≤"),
    ("->", "→"),
    ("=>", "=>"),
    ("/\\", "∧"),
    ("\\/", "∨"),
]

_SINGLE = {
    "(": "(", ")": ")", "[": "[", "]": "]", "⟨": "⟨", "⟩": "⟩",
    ",": ",", ":": ":", "=": "=", "<": "<", ">": ">", "≤": "≤",
    "+": "+", "-": "-", "*": "*", "|": "|", ";": ";", "?": "?",
    "·": "·", ".": "·", "∀": "∀", "→": "→", "↦": "=>", "↔": "↔",
    "∧": "∧", "∨": "∨", "_": "_",
}


def _is_ident_start(c: str) -> bool:
    return c.isalpha() or c == "_"


def _is_ident_char(c: str) -> bool:
    return c.isalnum() or c in "_'"


def tokenize(text: str, base_offset: int = 0, base_line: int = 0) -> list[Token]:
    """Tokenize `text`; offsets are shifted by base_offset so tokens index into
    an enclosing source file when a slice is lexed."""
    toks: list[Token] = []
    i = 0
    line = base_line
    line_start = 0  # offset of current line start within text
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            i += 1
            line_start = i
            continue
        if c.isspace():
            i += 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        col = i - line_start
        if c == "ℕ":
            toks.append(Token("ident", "Nat", base_offset + i, base_offset + i + 1, line, col))
            i += 1
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("num", text[i:j], base_offset + i, base_offset + j, line, col))
            i = j
            continue
        if _is_ident_start(c) and not (c == "_" and (i + 1 == n or not _is_ident_char(text[i + 1]))):
            j = i
            while j < n and _is_ident_char(text[j]):
                j += 1
            # dotted segments: Nat.le_trans
            while j + 1 < n and text[j] == "." and _is_ident_start(text[j + 1]):
                j += 1
                while j < n and _is_ident_char(text[j]):
                    j += 1
            name = text[i:j]
            if j < n and text[j] in "†!":
                name += "†"
                j += 1
            toks.append(Token("ident", name, base_offset + i, base_offset + j, line, col))
            i = j
            continue
        matched = False
        for raw, norm in _MULTI:
            if text.startswith(raw, i):
                toks.append(Token("sym", norm, base_offset + i, base_offset + i + len(raw), line, col))
                i += len(raw)
                matched = True
                break
        if matched:
            continue
        if c in _SINGLE:
            toks.append(Token("sym", _SINGLE[c], base_offset + i, base_offset + i + 1, line, col))
            i += 1
            continue
        raise LexError(f"unexpected character {c!r}", base_offset + i)
    toks.append(Token("eof", "", base_offset + n, base_offset + n, line, n - line_start))
    return toks
