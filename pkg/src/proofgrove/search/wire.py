"""Policy adapter over a child process speaking a line-delimited protocol.

Request (one JSON object per line on the child's stdin):
  {"request_id": int, "mode": "white"|"black", "theorem": str,
   "goals": [str] | null, "prefix": [str], "k": int}
Response (one JSON object per line on the child's stdout):
  {"request_id": int, "tactics": [{"text": str, "score": float}]}

A response that is not valid JSON or violates the shape raises
ProtocolViolation; a timeout is logged and treated as an empty proposal.
"""

from __future__ import annotations

import json
import queue
import shlex
import subprocess
import threading

from .policies import Policy, PolicyQuery


class ProtocolViolation(Exception):
    pass


class WirePolicy(Policy):
    name = "wire"

    def __init__(self, command: str | list[str], timeout: float = 10.0):
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.timeout = timeout
        self._proc: subprocess.Popen | None = None
        self._lines: queue.Queue[str | None] = queue.Queue()
        self._reader: threading.Thread | None = None
        self._next_id = 0
        self._lock = threading.Lock()
        self.timeouts = 0

    def _ensure(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
            self._reader = threading.Thread(target=self._pump, args=(self._proc,), daemon=True)
            self._reader.start()
        return self._proc

    def _pump(self, proc: subprocess.Popen) -> None:
        assert proc.stdout is not None
        for line in proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def propose(self, query: PolicyQuery) -> list[tuple[str, float]]:
        with self._lock:
            proc = self._ensure()
            self._next_id += 1
            rid = self._next_id
            request = {
                "request_id": rid,
                "mode": query.mode,
                "theorem": query.theorem,
                "goals": [g.pretty() for g in query.goals] if query.goals is not None else None,
                "prefix": list(query.prefix),
                "k": query.k,
            }
            assert proc.stdin is not None
            try:
                proc.stdin.write(json.dumps(request, ensure_ascii=False) + "\n")
                proc.stdin.flush()
            except (BrokenPipeError, OSError) as e:
                raise ProtocolViolation(f"policy process is gone: {e}") from None
            try:
                line = self._lines.get(timeout=self.timeout)
            except queue.Empty:
                self.timeouts += 1
                return []
            if line is None:
                raise ProtocolViolation("policy process closed its stdout")
            try:
                resp = json.loads(line)
            except json.JSONDecodeError as e:
                raise ProtocolViolation(f"malformed response line: {e.msg}") from None
            if not isinstance(resp, dict) or resp.get("request_id") != rid:
                raise ProtocolViolation("response id does not match the request")
            tactics = resp.get("tactics")
            if not isinstance(tactics, list):
                raise ProtocolViolation("response field 'tactics' must be a list")
            out: list[tuple[str, float]] = []
            for t in tactics[: query.k]:
                if not isinstance(t, dict) or not isinstance(t.get("text"), str):
                    raise ProtocolViolation("each tactic needs a string 'text'")
                score = t.get("score", 0.0)
                if not isinstance(score, (int, float)):
                    raise ProtocolViolation("tactic 'score' must be a number")
                out.append((t["text"], float(score)))
            return out

    def close(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            try:
                self._proc.stdin.close()  # type: ignore[union-attr]
            except OSError:
                pass
            try:
                self._proc.wait(timeout=2)
            except subprocess.TimeoutExpired:
                self._proc.kill()
        self._proc = None
