"""Dataset serialization: the JSONL sample schema, validation, and stats.

One JSON object per line, one sample per source file.  Key order is fixed to
the schema order so deterministic input gives byte-deterministic output.
Children of a proof node are nested node objects (their ids also appear, so
id references like tactic_depends_on stay closed within the tree); `synthetic`
is an extension flag on the tactic record, and synthetic tactics carry an
empty span (start = finish) rather than null.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from io import StringIO

from .syntax import ParseError, Span, parse_tactic
from .tactics import GoalView, HypView
from .treebuild import ProofTreeNode


class SchemaViolation(Exception):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


@dataclass(frozen=True)
class ErrorRecord:
    error: str


@dataclass
class ByBlockRecord:
    tree: ProofTreeNode | ErrorRecord


@dataclass
class TheoremRecord:
    span: Span
    name: str | None
    context: list[str]
    by_blocks: list[ByBlockRecord]


@dataclass
class SampleRecord:
    path: str
    imports: list[str]
    theorems: list[TheoremRecord | ErrorRecord]


# -- serialization --------------------------------------------------------------

def _span_json(s: Span) -> dict:
    return {"start": s.start, "finish": s.finish}


def _node_json(n: ProofTreeNode) -> dict:
    return {
        "id": n.id,
        "proof_size": n.proof_size,
        "proof_depth": n.proof_depth,
        "tactic": {
            "tactic_string": n.tactic_text,
            "span": _span_json(n.span),
            "children": [_node_json(c) for c in n.children],
            "tactic_depends_on": list(n.depends_on),
            "synthetic": n.synthetic,
        },
        "state": {
            "goals": [
                {
                    "tag": g.tag,
                    "type": g.target,
                    "hypotheses": [
                        {"type": h.type, "user_name": h.name, "value": h.value}
                        for h in g.hypotheses
                    ],
                }
                for g in n.goals
            ]
        },
    }


def sample_to_json(rec: SampleRecord) -> dict:
    theorems = []
    for t in rec.theorems:
        if isinstance(t, ErrorRecord):
            theorems.append({"error": t.error})
            continue
        blocks = []
        for b in t.by_blocks:
            if isinstance(b.tree, ErrorRecord):
                blocks.append({"tree": {"error": b.tree.error}})
            else:
                blocks.append({"tree": {"root": _node_json(b.tree)}})
        theorems.append(
            {
                "span": _span_json(t.span),
                "name": t.name,
                "context": list(t.context),
                "by_blocks": blocks,
            }
        )
    return {"path": rec.path, "imports": list(rec.imports), "theorems": theorems}


def emit_jsonl(records, destination) -> None:
    """Write records as JSONL.  destination is a path or a text file object.
    Records are validated before anything is written."""
    payloads = []
    for i, rec in enumerate(records):
        obj = sample_to_json(rec)
        violations = validate(obj)
        if violations:
            raise SchemaViolation(f"record[{i}].{violations[0][0]}", violations[0][1])
        payloads.append(json.dumps(obj, ensure_ascii=False))
    if hasattr(destination, "write"):
        for line in payloads:
            destination.write(line + "\n")
    else:
        with open(destination, "w", encoding="utf-8") as f:
            for line in payloads:
                f.write(line + "\n")


def emit_jsonl_str(records) -> str:
    buf = StringIO()
    emit_jsonl(records, buf)
    return buf.getvalue()


# -- loading --------------------------------------------------------------------

class LoadError(Exception):
    pass


def _node_from_json(obj: dict) -> ProofTreeNode:
    tac = obj["tactic"]
    goals = [
        GoalView(
            g["tag"],
            g["type"],
            tuple(HypView(h["user_name"], h["type"], h["value"]) for h in g["hypotheses"]),
        )
        for g in obj["state"]["goals"]
    ]
    return ProofTreeNode(
        goals=goals,
        tactic_text=tac["tactic_string"],
        span=Span(tac["span"]["start"], tac["span"]["finish"]),
        synthetic=tac.get("synthetic", False),
        children=[_node_from_json(c) for c in tac["children"]],
        id=obj["id"],
        proof_size=obj["proof_size"],
        proof_depth=obj["proof_depth"],
        depends_on=list(tac["tactic_depends_on"]),
    )


def sample_from_json(obj: dict) -> SampleRecord:
    violations = validate(obj)
    if violations:
        raise SchemaViolation(violations[0][0], violations[0][1])
    theorems: list[TheoremRecord | ErrorRecord] = []
    for t in obj["theorems"]:
        if "error" in t:
            theorems.append(ErrorRecord(t["error"]))
            continue
        blocks = []
        for b in t["by_blocks"]:
            tree = b["tree"]
            if "error" in tree:
                blocks.append(ByBlockRecord(ErrorRecord(tree["error"])))
            else:
                blocks.append(ByBlockRecord(_node_from_json(tree["root"])))
        theorems.append(
            TheoremRecord(
                Span(t["span"]["start"], t["span"]["finish"]),
                t["name"],
                list(t["context"]),
                blocks,
            )
        )
    return SampleRecord(obj["path"], list(obj["imports"]), theorems)


def load_jsonl(source) -> list[SampleRecord]:
    """Parse a JSONL dataset from a path, text file object, or string."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        try:
            with open(source, "r", encoding="utf-8") as f:
                text = f.read()
        except (OSError, ValueError):
            text = source
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise LoadError(f"line {lineno}: malformed JSON: {e.msg}") from None
        try:
            records.append(sample_from_json(obj))
        except SchemaViolation as e:
            raise LoadError(f"line {lineno}: {e}") from None
    return records


# -- schema validation ------------------------------------------------------------

def _want(obj, path, keys: list[str], out) -> bool:
    if not isinstance(obj, dict):
        out.append((path, "expected an object"))
        return False
    ok = True
    for k in keys:
        if k not in obj:
            out.append((f"{path}.{k}", "missing required field"))
            ok = False
    for k in obj:
        if k not in keys:
            out.append((f"{path}.{k}", "unknown field"))
            ok = False
    return ok


def _check_span(obj, path, out) -> None:
    if not _want(obj, path, ["start", "finish"], out):
        return
    for k in ("start", "finish"):
        if not isinstance(obj[k], int) or isinstance(obj[k], bool):
            out.append((f"{path}.{k}", "expected an integer"))
            return
    if obj["start"] < 0:
        out.append((f"{path}.start", "negative offset"))
    elif obj["start"] > obj["finish"]:
        out.append((path, "start exceeds finish"))


def _check_str_list(v, path, out) -> None:
    if not isinstance(v, list) or any(not isinstance(x, str) for x in v):
        out.append((path, "expected a list of strings"))


def _check_node(obj, path, out) -> None:
    if not _want(obj, path, ["id", "proof_size", "proof_depth", "tactic", "state"], out):
        return
    if not isinstance(obj["id"], str):
        out.append((f"{path}.id", "expected a string"))
    for k in ("proof_size", "proof_depth"):
        if not isinstance(obj[k], int) or isinstance(obj[k], bool) or obj[k] < 1:
            out.append((f"{path}.{k}", "expected a positive integer"))
    tac = obj["tactic"]
    tp = f"{path}.tactic"
    if _want(tac, tp, ["tactic_string", "span", "children", "tactic_depends_on", "synthetic"], out):
        if not isinstance(tac["tactic_string"], str):
            out.append((f"{tp}.tactic_string", "expected a string"))
        _check_span(tac["span"], f"{tp}.span", out)
        if not isinstance(tac["children"], list):
            out.append((f"{tp}.children", "expected a list"))
        else:
            for i, c in enumerate(tac["children"]):
                _check_node(c, f"{tp}.children[{i}]", out)
        _check_str_list(tac["tactic_depends_on"], f"{tp}.tactic_depends_on", out)
        if not isinstance(tac["synthetic"], bool):
            out.append((f"{tp}.synthetic", "expected a boolean"))
    state = obj["state"]
    sp = f"{path}.state"
    if _want(state, sp, ["goals"], out):
        if not isinstance(state["goals"], list) or not state["goals"]:
            out.append((f"{sp}.goals", "expected a nonempty list"))
            return
        for i, g in enumerate(state["goals"]):
            gp = f"{sp}.goals[{i}]"
            if not _want(g, gp, ["tag", "type", "hypotheses"], out):
                continue
            if g["tag"] is not None and not isinstance(g["tag"], str):
                out.append((f"{gp}.tag", "expected a string or null"))
            if not isinstance(g["type"], str):
                out.append((f"{gp}.type", "expected a string"))
            if not isinstance(g["hypotheses"], list):
                out.append((f"{gp}.hypotheses", "expected a list"))
                continue
            for j, h in enumerate(g["hypotheses"]):
                hp = f"{gp}.hypotheses[{j}]"
                if not _want(h, hp, ["type", "user_name", "value"], out):
                    continue
                if not isinstance(h["type"], str):
                    out.append((f"{hp}.type", "expected a string"))
                if not isinstance(h["user_name"], str):
                    out.append((f"{hp}.user_name", "expected a string"))
                if h["value"] is not None and not isinstance(h["value"], str):
                    out.append((f"{hp}.value", "expected a string or null"))


def validate(obj: dict) -> list[tuple[str, str]]:
    """Structural check of one sample against the schema, including
    nullability and span bounds.  Returns (path, message) violations."""
    out: list[tuple[str, str]] = []
    if not _want(obj, "sample", ["path", "imports", "theorems"], out):
        return out
    if not isinstance(obj["path"], str):
        out.append(("sample.path", "expected a string"))
    _check_str_list(obj["imports"], "sample.imports", out)
    if not isinstance(obj["theorems"], list):
        out.append(("sample.theorems", "expected a list"))
        return out
    for i, t in enumerate(obj["theorems"]):
        path = f"sample.theorems[{i}]"
        if not isinstance(t, dict):
            out.append((path, "expected an object"))
            continue
        if "error" in t:
            if not _want(t, path, ["error"], out):
                continue
            if not isinstance(t["error"], str):
                out.append((f"{path}.error", "expected a string"))
            continue
        if not _want(t, path, ["span", "name", "context", "by_blocks"], out):
            continue
        _check_span(t["span"], f"{path}.span", out)
        if t["name"] is not None and not isinstance(t["name"], str):
            out.append((f"{path}.name", "expected a string or null"))
        _check_str_list(t["context"], f"{path}.context", out)
        if not isinstance(t["by_blocks"], list):
            out.append((f"{path}.by_blocks", "expected a list"))
            continue
        for j, b in enumerate(t["by_blocks"]):
            bp = f"{path}.by_blocks[{j}]"
            if not _want(b, bp, ["tree"], out):
                continue
            tree = b["tree"]
            if not isinstance(tree, dict):
                out.append((f"{bp}.tree", "expected an object"))
                continue
            if "error" in tree:
                if _want(tree, f"{bp}.tree", ["error"], out) and not isinstance(tree["error"], str):
                    out.append((f"{bp}.tree.error", "expected a string"))
                continue
            if not _want(tree, f"{bp}.tree", ["root"], out):
                continue
            _check_node(tree["root"], f"{bp}.tree.root", out)
    return out


# -- corpus statistics ------------------------------------------------------------

@dataclass
class CorpusStats:
    files: int = 0
    theorems: int = 0
    theorem_errors: int = 0
    by_blocks: int = 0
    converted: int = 0
    tree_errors: int = 0
    nodes: int = 0
    edges: int = 0
    tactic_kinds: dict[str, int] = field(default_factory=dict)
    root_sizes: dict[int, int] = field(default_factory=dict)
    root_depths: dict[int, int] = field(default_factory=dict)

    @property
    def failure_rate(self) -> float:
        total = self.by_blocks + self.theorem_errors
        failed = self.tree_errors + self.theorem_errors
        return failed / total if total else 0.0

    def table(self) -> str:
        lines = [
            f"files              {self.files}",
            f"theorems           {self.theorems}",
            f"theorem errors     {self.theorem_errors}",
            f"by-blocks          {self.by_blocks}",
            f"converted trees    {self.converted}",
            f"tree errors        {self.tree_errors}",
            f"conversion failure {self.failure_rate:.1%}",
            f"nodes              {self.nodes}",
            f"tactic edges       {self.edges}",
            "tactic kinds       "
            + ", ".join(f"{k}:{v}" for k, v in sorted(self.tactic_kinds.items())),
            "root sizes         "
            + ", ".join(f"{k}:{v}" for k, v in sorted(self.root_sizes.items())),
            "root depths        "
            + ", ".join(f"{k}:{v}" for k, v in sorted(self.root_depths.items())),
        ]
        return "\n".join(lines)


def corpus_stats(records) -> CorpusStats:
    st = CorpusStats()
    for rec in records:
        st.files += 1
        for t in rec.theorems:
            st.theorems += 1
            if isinstance(t, ErrorRecord):
                st.theorem_errors += 1
                continue
            for b in t.by_blocks:
                st.by_blocks += 1
                if isinstance(b.tree, ErrorRecord):
                    st.tree_errors += 1
                    continue
                st.converted += 1
                _tree_stats(b.tree, st)
    return st


def _tree_stats(n: ProofTreeNode, st: CorpusStats) -> None:
    if n.id.startswith("t0."):
        st.root_sizes[n.proof_size] = st.root_sizes.get(n.proof_size, 0) + 1
        st.root_depths[n.proof_depth] = st.root_depths.get(n.proof_depth, 0) + 1
    stack = [n]
    while stack:
        node = stack.pop()
        st.nodes += 1
        st.edges += 1
        try:
            kind = parse_tactic(node.tactic_text).kind
        except ParseError:
            kind = "unparsed"
        st.tactic_kinds[kind] = st.tactic_kinds.get(kind, 0) + 1
        stack.extend(node.children)
