"""Tactic-proposal policies.

A policy maps a query to at most k (tactic text, score) pairs and must be
deterministic given its seed.  White-box queries carry the current goal
views; black-box queries carry only the theorem statement and the tactic
prefix sampled so far.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from pathlib import Path

from ..tactics import GoalView


@dataclass(frozen=True)
class PolicyQuery:
    theorem: str  # statement text (name : target)
    mode: str  # "white" | "black"
    goals: tuple[GoalView, ...] | None  # None in black-box mode
    prefix: tuple[str, ...]
    k: int


class Policy:
    name = "policy"

    def propose(self, query: PolicyQuery) -> list[tuple[str, float]]:
        raise NotImplementedError

    def seeded(self, seed: int) -> "Policy":
        """A per-run instance; default policies are stateless."""
        return self

    def close(self) -> None:
        pass


DEFAULT_MENU = [
    "rfl",
    "assumption",
    "intro h",
    "constructor",
    "left",
    "right",
    "apply Nat.le_refl",
    "apply Nat.zero_le",
    "apply Le.step",
    "apply Nat.succ_le_succ",
    "apply Nat.le_trans",
    "exact True.intro",
]


@dataclass
class EnumPolicy(Policy):
    """Fixed instantiated tactic menu, proposed in order with decaying scores."""

    menu: list[str] = field(default_factory=lambda: list(DEFAULT_MENU))
    name = "enum"

    def propose(self, query: PolicyQuery) -> list[tuple[str, float]]:
        picks = self.menu[: query.k]
        n = max(len(picks), 1)
        return [(t, 1.0 - i / n) for i, t in enumerate(picks)]


@dataclass
class RandomPolicy(Policy):
    """Seeded uniform sampling from a menu (without replacement per query)."""

    menu: list[str] = field(default_factory=lambda: list(DEFAULT_MENU))
    seed: int = 0
    name = "random"

    def __post_init__(self):
        self._rng = random.Random(self.seed)

    def seeded(self, seed: int) -> "RandomPolicy":
        return RandomPolicy(list(self.menu), seed)

    def propose(self, query: PolicyQuery) -> list[tuple[str, float]]:
        k = min(query.k, len(self.menu))
        picks = self._rng.sample(self.menu, k)
        return [(t, 1.0 - i / max(k, 1)) for i, t in enumerate(picks)]


@dataclass
class ScriptedPolicy(Policy):
    """Per-theorem tactic sequences, proposed by prefix position."""

    scripts: dict[str, list[str]]
    name = "scripted"

    def propose(self, query: PolicyQuery) -> list[tuple[str, float]]:
        script = self.scripts.get(query.theorem) or self.scripts.get("*")
        if script is None or len(query.prefix) >= len(script):
            return []
        return [(script[len(query.prefix)], 1.0)]


@dataclass
class RulePolicy(Policy):
    """Goal-pattern rules: state-dependent proposals in white-box mode.

    Each rule is {"when": {...}, "tactic": text}; conditions:
      target_eq:     main goal target equals the string
      target_head:   main goal target starts with the string
      target_regex:  main goal target matches the regex
      hyp_eq_target: some hypothesis type equals the target
    In black-box mode there is no goal view, so no rule can fire and only
    the fallback menu is proposed.
    """

    rules: list[dict]
    fallback: list[str] = field(default_factory=list)
    name = "rules"

    def propose(self, query: PolicyQuery) -> list[tuple[str, float]]:
        out: list[tuple[str, float]] = []
        if query.goals:
            main = query.goals[0]
            for rule in self.rules:
                if self._fires(rule.get("when", {}), main):
                    out.append((rule["tactic"], 1.0))
        for i, t in enumerate(self.fallback):
            out.append((t, 0.5 - i / (2 * max(len(self.fallback), 1))))
        return out[: query.k]

    @staticmethod
    def _fires(cond: dict, goal: GoalView) -> bool:
        if "target_eq" in cond and goal.target != cond["target_eq"]:
            return False
        if "target_head" in cond and not goal.target.startswith(cond["target_head"]):
            return False
        if "target_regex" in cond and not re.search(cond["target_regex"], goal.target):
            return False
        if cond.get("hyp_eq_target") and not any(h.type == goal.target for h in goal.hypotheses):
            return False
        return bool(cond)


def load_policy(spec: str, seed: int = 0) -> Policy:
    """Build a policy from a CLI spec: scripted:PATH | enum | enum:PATH |
    random | random:PATH | rules:PATH | wire:CMD."""
    from .wire import WirePolicy

    kind, _, arg = spec.partition(":")
    if kind == "enum":
        menu = _load_json_list(arg) if arg else list(DEFAULT_MENU)
        return EnumPolicy(menu)
    if kind == "random":
        menu = _load_json_list(arg) if arg else list(DEFAULT_MENU)
        return RandomPolicy(menu, seed)
    if kind == "scripted":
        data = json.loads(Path(arg).read_text(encoding="utf-8"))
        return ScriptedPolicy({k: list(v) for k, v in data.items()})
    if kind == "rules":
        data = json.loads(Path(arg).read_text(encoding="utf-8"))
        return RulePolicy(list(data.get("rules", [])), list(data.get("fallback", [])))
    if kind == "wire":
        return WirePolicy(arg)
    raise ValueError(f"unknown policy spec {spec!r}")


def _load_json_list(path: str) -> list[str]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, list) or any(not isinstance(x, str) for x in data):
        raise ValueError(f"{path}: expected a JSON list of tactic strings")
    return data
