"""Built-in inductive signatures, recursors, and computation rules.

The base logic: sorts Nat and Prop; inductives Nat, Eq (Nat-valued), Le,
And, Or, Iff, True, False with recursors; arithmetic Nat.add / Nat.mul /
Nat.pred / Nat.sub (truncated) defined by computation rules on the second
argument.  Numerals are succ towers.
"""

from __future__ import annotations

from .env import ConstInfo, Environment, InductiveInfo
from .mctx import MetavarContext
from .term import App, Const, NAT, PROP, TYPE, Term, mk_app, spine


def _ctor_app(t: Term, name: str, nargs: int) -> list[Term] | None:
    head, args = spine(t)
    if head == Const(name) and len(args) == nargs:
        return args
    return None


# -- arithmetic rules (recursion on the second argument) -----------------------

def _red_add(args, whnf):
    n, m = args
    m = whnf(m)
    if m == Const("Nat.zero"):
        return n
    if isinstance(m, App) and m.fn == Const("Nat.succ"):
        return App(Const("Nat.succ"), mk_app(Const("Nat.add"), n, m.arg))
    return None


def _red_mul(args, whnf):
    n, m = args
    m = whnf(m)
    if m == Const("Nat.zero"):
        return Const("Nat.zero")
    if isinstance(m, App) and m.fn == Const("Nat.succ"):
        return mk_app(Const("Nat.add"), mk_app(Const("Nat.mul"), n, m.arg), n)
    return None


def _red_pred(args, whnf):
    (n,) = args
    n = whnf(n)
    if n == Const("Nat.zero"):
        return Const("Nat.zero")
    if isinstance(n, App) and n.fn == Const("Nat.succ"):
        return n.arg
    return None


def _red_sub(args, whnf):
    n, m = args
    m = whnf(m)
    if m == Const("Nat.zero"):
        return n
    if isinstance(m, App) and m.fn == Const("Nat.succ"):
        return App(Const("Nat.pred"), mk_app(Const("Nat.sub"), n, m.arg))
    return None


# -- iota rules -----------------------------------------------------------------

def _red_nat_rec(args, whnf):
    motive, z, s, t = args
    t = whnf(t)
    if t == Const("Nat.zero"):
        return z
    if isinstance(t, App) and t.fn == Const("Nat.succ"):
        return mk_app(s, t.arg, mk_app(Const("Nat.rec"), motive, z, s, t.arg))
    return None


def _red_nat_cases(args, whnf):
    motive, t, z, s = args
    t = whnf(t)
    if t == Const("Nat.zero"):
        return z
    if isinstance(t, App) and t.fn == Const("Nat.succ"):
        return App(s, t.arg)
    return None


def _red_eq_rec(args, whnf):
    a, motive, h, b, p = args
    if _ctor_app(whnf(p), "Eq.refl", 1) is not None:
        return h
    return None


def _red_and_rec(args, whnf):
    P, Q, motive, f, h = args
    fields = _ctor_app(whnf(h), "And.intro", 4)
    if fields is not None:
        return mk_app(f, fields[2], fields[3])
    return None


def _red_or_rec(args, whnf):
    P, Q, motive, f, g, h = args
    h = whnf(h)
    fields = _ctor_app(h, "Or.inl", 3)
    if fields is not None:
        return App(f, fields[2])
    fields = _ctor_app(h, "Or.inr", 3)
    if fields is not None:
        return App(g, fields[2])
    return None


def _red_iff_rec(args, whnf):
    P, Q, motive, f, h = args
    fields = _ctor_app(whnf(h), "Iff.intro", 4)
    if fields is not None:
        return mk_app(f, fields[2], fields[3])
    return None


def _red_true_rec(args, whnf):
    motive, f, h = args
    if whnf(h) == Const("True.intro"):
        return f
    return None


# (name, type source, kind, reducer, arity, ctor_of, ctor_index)
_DECLS: list[tuple] = [
    ("Nat.zero", "Nat", "ctor", None, 0, "Nat", 0),
    ("Nat.succ", "∀ n : Nat, Nat", "ctor", None, 0, "Nat", 1),
    ("Eq", "Nat → Nat → Prop", "inductive", None, 0, None, 0),
    ("Eq.refl", "∀ a : Nat, Eq a a", "ctor", None, 0, "Eq", 0),
    ("Le", "Nat → Nat → Prop", "inductive", None, 0, None, 0),
    ("Le.refl", "∀ n : Nat, Le n n", "ctor", None, 0, "Le", 0),
    ("Le.step", "∀ n m : Nat, Le n m → Le n (Nat.succ m)", "ctor", None, 0, "Le", 1),
    ("And", "Prop → Prop → Prop", "inductive", None, 0, None, 0),
    ("And.intro", "∀ P Q : Prop, ∀ hp : P, ∀ hq : Q, And P Q", "ctor", None, 0, "And", 0),
    ("Or", "Prop → Prop → Prop", "inductive", None, 0, None, 0),
    ("Or.inl", "∀ P Q : Prop, ∀ h : P, Or P Q", "ctor", None, 0, "Or", 0),
    ("Or.inr", "∀ P Q : Prop, ∀ h : Q, Or P Q", "ctor", None, 0, "Or", 1),
    ("Iff", "Prop → Prop → Prop", "inductive", None, 0, None, 0),
    ("Iff.intro", "∀ P Q : Prop, ∀ mp : P → Q, ∀ mpr : Q → P, Iff P Q", "ctor", None, 0, "Iff", 0),
    ("True", "Prop", "inductive", None, 0, None, 0),
    ("True.intro", "True", "ctor", None, 0, "True", 0),
    ("False", "Prop", "inductive", None, 0, None, 0),
    ("Nat.add", "Nat → Nat → Nat", "def", _red_add, 2, None, 0),
    ("Nat.mul", "Nat → Nat → Nat", "def", _red_mul, 2, None, 0),
    ("Nat.pred", "Nat → Nat", "def", _red_pred, 1, None, 0),
    ("Nat.sub", "Nat → Nat → Nat", "def", _red_sub, 2, None, 0),
    ("Nat.rec",
     "∀ motive : Nat → Prop, motive 0 → (∀ n : Nat, motive n → motive (Nat.succ n)) → (∀ t : Nat, motive t)",
     "recursor", _red_nat_rec, 4, None, 0),
    ("Nat.casesOn",
     "∀ motive : Nat → Prop, ∀ t : Nat, motive 0 → (∀ n : Nat, motive (Nat.succ n)) → motive t",
     "recursor", _red_nat_cases, 4, None, 0),
    ("Eq.rec",
     "∀ a : Nat, ∀ motive : Nat → Prop, motive a → (∀ b : Nat, Eq a b → motive b)",
     "recursor", _red_eq_rec, 5, None, 0),
    ("And.rec", "∀ P Q motive : Prop, (P → Q → motive) → And P Q → motive",
     "recursor", _red_and_rec, 5, None, 0),
    ("Or.rec", "∀ P Q motive : Prop, (P → motive) → (Q → motive) → Or P Q → motive",
     "recursor", _red_or_rec, 6, None, 0),
    ("Iff.rec", "∀ P Q motive : Prop, ((P → Q) → (Q → P) → motive) → Iff P Q → motive",
     "recursor", _red_iff_rec, 5, None, 0),
    ("True.rec", "∀ motive : Prop, motive → True → motive", "recursor", _red_true_rec, 3, None, 0),
    ("False.elim", "∀ motive : Prop, False → motive", "recursor", None, 0, None, 0),
]

_INDUCTIVES = [
    InductiveInfo("Nat", 0, ("Nat.zero", "Nat.succ"), True, "Nat.rec", "Nat.casesOn"),
    InductiveInfo("Eq", 2, ("Eq.refl",), False, "Eq.rec", None),
    InductiveInfo("Le", 2, ("Le.refl", "Le.step"), False, None, None),
    InductiveInfo("And", 2, ("And.intro",), True, "And.rec", None),
    InductiveInfo("Or", 2, ("Or.inl", "Or.inr"), True, "Or.rec", None),
    InductiveInfo("Iff", 2, ("Iff.intro",), True, "Iff.rec", None),
    InductiveInfo("True", 0, ("True.intro",), True, "True.rec", None),
    InductiveInfo("False", 0, (), True, "False.elim", None),
]


def build_core_env() -> tuple[Environment, MetavarContext]:
    """Core environment (no prelude axioms yet) plus the bootstrap mctx whose
    uid counter must seed everything elaborated on top."""
    from ..elab import Elaborator
    from ..syntax import parse_term

    env = Environment()
    mctx = MetavarContext()
    env.add(ConstInfo("Prop", TYPE, "sort"))
    env.add(ConstInfo("Type", TYPE, "sort"))
    env.add(ConstInfo("Nat", TYPE, "inductive"))
    for name, src, kind, reducer, arity, ctor_of, idx in _DECLS:
        ty = Elaborator(env, mctx).elab_type(parse_term(src))
        env.add(ConstInfo(name, ty, kind, None, reducer, arity, ctor_of, idx))
    for ind in _INDUCTIVES:
        env.inductives[ind.name] = ind
    env.uid_floor = mctx._next_uid
    return env, mctx
