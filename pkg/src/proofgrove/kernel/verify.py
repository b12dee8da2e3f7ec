"""Proof verification strategies.

check_new_assignments implements the incremental strategy: only the
assignments newly introduced by a tactic application are type-checked, with
remaining holes treated as opaque; whole-proof correctness then follows
transitively.  check_closed_proof is the final whole-term check that rejects
any remaining sorry or hole.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .env import Environment
from .infer import KernelError, infer_type
from .mctx import MetavarContext
from .reduce import def_eq
from .term import Mvar, Sorry, Term, App, Lam, Pi, mvars_of, term_size


@dataclass
class KernelStats:
    """Counts kernel check invocations and the total size of terms submitted."""

    checks: int = 0
    checked_nodes: int = 0
    failures: int = 0

    def record(self, term: Term) -> None:
        self.checks += 1
        self.checked_nodes += term_size(term)


@dataclass
class CheckFailure:
    kind: str
    message: str
    mid: int | None = None


def check_new_assignments(
    env: Environment,
    mctx: MetavarContext,
    new_ids,
    stats: KernelStats | None = None,
) -> CheckFailure | None:
    """Type-check each newly assigned metavariable's value against its
    declared target in its own local context.  Unassigned metavariables and
    Sorry inside the values are opaque holes of their declared types."""
    for mid in new_ids:
        value = mctx.value(mid)
        assert value is not None, f"?m{mid} has no assignment to check"
        decl = mctx.decl(mid)
        if stats is not None:
            stats.record(value)
        try:
            vt = infer_type(env, mctx, decl.ctx_types(), value, holes="opaque")
        except KernelError as e:
            if stats is not None:
                stats.failures += 1
            return CheckFailure(e.kind, f"?m{mid}: {e.message}", mid)
        if not def_eq(env, mctx, vt, decl.target):
            if stats is not None:
                stats.failures += 1
            return CheckFailure("type-mismatch", f"?m{mid}: assignment does not have the goal type", mid)
    return None


def check_closed_proof(
    env: Environment,
    term: Term,
    type_: Term,
    ctx: dict[int, Term] | None = None,
    mctx: MetavarContext | None = None,
    stats: KernelStats | None = None,
) -> CheckFailure | None:
    """Whole-term check: ok iff term (after instantiation) has no Sorry, no
    unassigned metavariable, and infers def_eq to type_."""
    mctx = mctx if mctx is not None else MetavarContext()
    term = mctx.instantiate(term)
    if stats is not None:
        stats.record(term)
    failure = _scan_holes(term)
    if failure is not None:
        if stats is not None:
            stats.failures += 1
        return failure
    try:
        tt = infer_type(env, mctx, dict(ctx or {}), term, holes="forbid")
    except KernelError as e:
        if stats is not None:
            stats.failures += 1
        return CheckFailure(e.kind, e.message)
    if not def_eq(env, mctx, tt, type_):
        if stats is not None:
            stats.failures += 1
        return CheckFailure("type-mismatch", "proof term does not have the theorem type")
    return None


def _scan_holes(t: Term) -> CheckFailure | None:
    if isinstance(t, Sorry):
        return CheckFailure("contains-sorry", "proof contains sorry")
    if isinstance(t, Mvar):
        return CheckFailure("contains-hole", f"proof contains unassigned metavariable ?m{t.mid}")
    if isinstance(t, App):
        return _scan_holes(t.fn) or _scan_holes(t.arg)
    if isinstance(t, (Lam, Pi)):
        return _scan_holes(t.type) or _scan_holes(t.body)
    return None


def check_root_whole(
    env: Environment,
    mctx: MetavarContext,
    root_mid: int,
    stats: KernelStats | None = None,
) -> CheckFailure | None:
    """The whole-per-step strategy: after a tactic, re-check the instantiated
    root proof term as a closed proof.  Mid-proof this fails as soon as the
    term contains a hole or sorry, which is exactly the false-negative
    behavior on bifurcated proofs."""
    decl = mctx.decl(root_mid)
    root = mctx.instantiate(Mvar(root_mid))
    return check_closed_proof(env, root, decl.target, decl.ctx_types(), mctx, stats)
