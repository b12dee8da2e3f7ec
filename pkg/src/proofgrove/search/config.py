"""Search configuration shared by rollouts and AND-OR search."""

from __future__ import annotations

from dataclasses import dataclass, field

DEFAULT_BANNED = frozenset({"apply?", "exact?", "rw?"})


@dataclass
class SearchConfig:
    rollouts: int = 10  # N independent linear rollouts
    max_steps: int = 25  # M steps per rollout
    budget: int = 500  # AND-OR node expansions
    k: int = 12  # proposals requested per node
    seed: int = 0
    mode: str = "andor-best-first"  # | rollout-white | rollout-black
    max_depth: int | None = None  # per-path edge limit for AND-OR search
    pool_size: int = 1
    exhaustive: bool = False  # keep expanding after the root is proven
    allow_sorry: bool = True  # sorry-closed edges never count as proven
    banned: frozenset[str] = DEFAULT_BANNED

    def __post_init__(self):
        if self.rollouts <= 0 or self.max_steps <= 0 or self.budget <= 0 or self.k <= 0:
            raise ValueError("rollout/step/budget/proposal counts must be positive")
