"""Dynamic pool of prover sessions for parallel execution.

A session is held by at most one worker at a time; the pool grows on demand
up to its cap and reuses released sessions.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field

from ..kernel.env import Environment


class PoolExhausted(Exception):
    pass


class ProverSession:
    """A reusable prover context bound to one environment."""

    def __init__(self, env: Environment, session_id: int):
        self.env = env
        self.session_id = session_id

    def reset(self) -> None:
        # sessions hold no cross-proof state; published ProofStates own theirs
        pass


@dataclass(frozen=True)
class Lease:
    session: ProverSession
    token: int


@dataclass
class PoolStats:
    spawned: int = 0
    acquires: int = 0
    releases: int = 0
    max_live: int = 0


class EnvPool:
    def __init__(self, env: Environment, max_size: int = 4):
        if max_size < 1:
            raise ValueError("pool size must be positive")
        self.env = env
        self.max_size = max_size
        self.stats = PoolStats()
        self._idle: list[ProverSession] = []
        self._held: dict[int, ProverSession] = {}
        self._tokens = itertools.count(1)
        self._ids = itertools.count(1)
        self._cond = threading.Condition()
        self._closed = False

    @property
    def live(self) -> int:
        return len(self._idle) + len(self._held)

    def acquire(self, timeout: float | None = None) -> Lease:
        with self._cond:
            deadline = None
            while True:
                if self._closed:
                    raise PoolExhausted("pool is shut down")
                if self._idle:
                    session = self._idle.pop()
                    break
                if self.live < self.max_size:
                    session = ProverSession(self.env, next(self._ids))
                    self.stats.spawned += 1
                    break
                if timeout is not None:
                    import time
                    if deadline is None:
                        deadline = time.monotonic() + timeout
                    remaining = deadline - time.monotonic()
                    if remaining <= 0 or not self._cond.wait(remaining):
                        raise PoolExhausted(f"no session available within {timeout}s")
                else:
                    self._cond.wait()
                    continue
            token = next(self._tokens)
            self._held[token] = session
            self.stats.acquires += 1
            self.stats.max_live = max(self.stats.max_live, self.live)
            return Lease(session, token)

    def release(self, lease: Lease) -> None:
        with self._cond:
            session = self._held.pop(lease.token, None)
            if session is None:
                raise ValueError("lease already released or not issued by this pool")
            session.reset()
            self._idle.append(session)
            self.stats.releases += 1
            self._cond.notify()

    def shutdown(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify_all()
