"""The MiniLean kernel: terms, typing, reduction, unification, verification."""

from .env import ConstInfo, DuplicateConstant, Environment, InductiveInfo, UnknownConstant
from .infer import KernelError, infer_type, is_sort
from .mctx import AlreadyAssigned, Hypothesis, MetavarContext, MetavarDecl
from .pp import show_term, to_surface
from .reduce import def_eq, nat_literal, whnf
from .term import (
    App, Const, Lam, Mvar, NAT, PROP, Pi, Sorry, TYPE, Term, Var,
    contains_sorry, free_vars, mk_app, mvars_of, spine, subst, subst_many,
    term_size,
)
from .unify import unify
from .verify import (
    CheckFailure, KernelStats, check_closed_proof, check_new_assignments,
    check_root_whole,
)

__all__ = [
    "AlreadyAssigned", "App", "CheckFailure", "Const", "ConstInfo",
    "DuplicateConstant", "Environment", "Hypothesis", "InductiveInfo",
    "KernelError", "KernelStats", "Lam", "MetavarContext", "MetavarDecl",
    "Mvar", "NAT", "PROP", "Pi", "Sorry", "TYPE", "Term", "UnknownConstant",
    "Var", "check_closed_proof", "check_new_assignments", "check_root_whole",
    "contains_sorry", "def_eq", "free_vars", "infer_type", "is_sort",
    "mk_app", "mvars_of", "nat_literal", "show_term", "spine", "subst",
    "subst_many", "term_size", "to_surface", "unify", "whnf",
]
