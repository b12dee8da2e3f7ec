"""Proof search: AND-OR best-first with transpositions, linear rollouts,
pluggable policies, and a dynamic session pool."""

from .andor import (
    AndEdge, BUDGET, FAILED, OPEN, OrNode, PROVEN, SearchOutcome, SearchStats,
    extract_proof, search, tree_script,
)
from .config import SearchConfig
from .policies import (
    DEFAULT_MENU, EnumPolicy, Policy, PolicyQuery, RandomPolicy, RulePolicy,
    ScriptedPolicy, load_policy,
)
from .pool import EnvPool, Lease, PoolExhausted, ProverSession
from .rollout import RolloutResult, RolloutSummary, reverify_script, rollout, run_rollouts
from .wire import ProtocolViolation, WirePolicy

__all__ = [
    "AndEdge", "BUDGET", "DEFAULT_MENU", "EnumPolicy", "EnvPool", "FAILED",
    "Lease", "OPEN", "OrNode", "PROVEN", "Policy", "PolicyQuery",
    "PoolExhausted", "ProtocolViolation", "ProverSession", "RandomPolicy",
    "RolloutResult", "RolloutSummary", "RulePolicy", "ScriptedPolicy",
    "SearchConfig", "SearchOutcome", "SearchStats", "WirePolicy",
    "extract_proof", "load_policy", "reverify_script", "rollout",
    "run_rollouts", "search", "tree_script",
]
