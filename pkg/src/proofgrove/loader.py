"""Loading MiniLean files into an environment.

The prelude (module Peano) is always available.  Files are processed in
declaration order; each theorem captures a snapshot of the environment as it
was at that point, so a proof may use any definition, axiom, or theorem
declared above it in the file (or in an imported sibling file).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .elab import ElabError, Elaborator, elab_binder_groups, lam_closure, pi_closure
from .kernel.builtins import build_core_env
from .kernel.env import ConstInfo, DuplicateConstant, Environment
from .kernel.infer import KernelError
from .kernel.mctx import MetavarContext
from .syntax import (
    AxiomDecl, DefDecl, OpenDecl, ParseError, SourceFile, Span, TheoremDecl,
    parse_file,
)

PRELUDE_MODULE = "Peano"

_master_lock = threading.Lock()
_master: Environment | None = None


def _build_master() -> Environment:
    env, mctx = build_core_env()
    text = resources.files("proofgrove").joinpath("prelude.ml").read_text(encoding="utf-8")
    sf = parse_file(text, "prelude.ml")
    if sf.errors:
        raise RuntimeError(f"prelude parse error: {sf.errors[0].message}")
    errors = _load_decls(env, mctx, sf)
    if errors:
        raise RuntimeError(f"prelude elaboration error: {errors[0][0]}")
    env.uid_floor = mctx._next_uid
    return env


def standard_env() -> Environment:
    """A fresh environment with builtins and the Peano prelude loaded."""
    global _master
    with _master_lock:
        if _master is None:
            _master = _build_master()
        return _master.clone()


@dataclass
class LoadedTheorem:
    decl: TheoremDecl
    env: Environment  # environment visible to this theorem's proof
    error: str | None = None


@dataclass
class LoadedFile:
    source: SourceFile
    env: Environment  # final environment including every declaration
    theorems: list[LoadedTheorem]
    load_errors: list[tuple[str, Span]]


def load_source(
    text: str,
    path: str = "<source>",
    import_dir: Path | None = None,
) -> LoadedFile:
    sf = parse_file(text, path)
    env = standard_env()
    mctx = MetavarContext(next_uid=env.uid_floor)
    errors: list[tuple[str, Span]] = [(e.message, e.span) for e in sf.errors]
    for mod in sf.imports:
        if mod == PRELUDE_MODULE:
            continue
        err = _load_import(env, mctx, mod, import_dir, seen=set())
        if err is not None:
            errors.append((err, Span(0, 0)))
    theorems: list[LoadedTheorem] = []
    errors.extend(_load_decls(env, mctx, sf, theorems))
    env.uid_floor = mctx._next_uid
    return LoadedFile(sf, env, theorems, errors)


def load_file(path: str | Path) -> LoadedFile:
    p = Path(path)
    return load_source(p.read_text(encoding="utf-8"), str(path), import_dir=p.parent)


def _load_import(env: Environment, mctx: MetavarContext, mod: str, import_dir: Path | None, seen: set[str]) -> str | None:
    if mod in seen:
        return f"circular import {mod!r}"
    seen.add(mod)
    if import_dir is None:
        return f"cannot resolve import {mod!r} (no import directory)"
    p = import_dir / f"{mod}.ml"
    if not p.exists():
        return f"imported module {mod!r} not found at {p}"
    sub = parse_file(p.read_text(encoding="utf-8"), str(p))
    if sub.errors:
        return f"import {mod!r}: {sub.errors[0].message}"
    for m in sub.imports:
        if m == PRELUDE_MODULE:
            continue
        err = _load_import(env, mctx, m, import_dir, seen)
        if err is not None:
            return err
    errs = _load_decls(env, mctx, sub)
    if errs:
        return f"import {mod!r}: {errs[0][0]}"
    return None


def _load_decls(
    env: Environment,
    mctx: MetavarContext,
    sf: SourceFile,
    theorems: list[LoadedTheorem] | None = None,
) -> list[tuple[str, Span]]:
    errors: list[tuple[str, Span]] = []
    opens: tuple[str, ...] = ()
    for decl in sf.declarations:
        try:
            if isinstance(decl, OpenDecl):
                opens = opens + (decl.namespace,)
            elif isinstance(decl, AxiomDecl):
                hyps = elab_binder_groups(env, mctx, decl.binders, opens)
                ty = Elaborator(env, mctx, hyps, opens).elab_type(decl.type)
                env.add(ConstInfo(decl.name, pi_closure(hyps, ty), "axiom"))
            elif isinstance(decl, DefDecl):
                hyps = elab_binder_groups(env, mctx, decl.binders, opens)
                el = Elaborator(env, mctx, hyps, opens)
                ty = el.elab_type(decl.type)
                body = el.check(decl.body, ty)
                env.add(
                    ConstInfo(decl.name, pi_closure(hyps, ty), "def", lam_closure(hyps, body))
                )
            elif isinstance(decl, TheoremDecl):
                snapshot = env.clone()
                snapshot.uid_floor = mctx._next_uid
                err = None
                try:
                    hyps = elab_binder_groups(env, mctx, decl.binders, opens)
                    target = Elaborator(env, mctx, hyps, opens).elab_type(decl.target)
                    if decl.name is not None:
                        env.add(ConstInfo(decl.name, pi_closure(hyps, target), "theorem"))
                except (ElabError, KernelError, DuplicateConstant) as e:
                    err = str(e)
                    errors.append((err, decl.span))
                if theorems is not None:
                    theorems.append(LoadedTheorem(decl, snapshot, err))
        except (ElabError, KernelError, ParseError, DuplicateConstant) as e:
            errors.append((str(e), getattr(decl, "span", Span(0, 0))))
    return errors
