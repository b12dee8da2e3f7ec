"""MiniLean surface syntax: parsing, spans, and pretty-printing."""

from .ast import (
    AxiomDecl, Binder, CaseBranch, DeclError, DefDecl, EMPTY_SPAN, OpenDecl,
    RwRule, SAnon, SApp, SBy, SFun, SHole, SIdent, SMvar, SPi, SRfl, SSorry,
    STerm, SourceFile, Span, TacticNode, TheoremDecl, mk_app, num_tower,
    spine, strip_spans, tower_value, LIBRARY_SEARCH_KINDS,
)
from .lexer import LexError, Token, tokenize
from .parser import ParseError, parse_file, parse_tactic, parse_tactic_script, parse_term
from .render import render_tactic, render_term

__all__ = [
    "AxiomDecl", "Binder", "CaseBranch", "DeclError", "DefDecl", "EMPTY_SPAN",
    "LIBRARY_SEARCH_KINDS", "LexError", "OpenDecl", "ParseError", "RwRule",
    "SAnon", "SApp", "SBy", "SFun", "SHole", "SIdent", "SMvar", "SPi", "SRfl",
    "SSorry", "STerm", "SourceFile", "Span", "TacticNode", "TheoremDecl",
    "Token", "mk_app", "num_tower", "parse_file", "parse_tactic",
    "parse_tactic_script", "parse_term", "render_tactic", "render_term",
    "spine", "strip_spans", "tokenize", "tower_value",
]
