"""Command-line interface.

Subcommands: prove, extract, verify, check, stats.  Options resolve with
precedence flags > config file > environment (PROOFGROVE_ prefix); the config
file is `key = value` lines selected via --config or PROOFGROVE_CONFIG.
Exit codes: 0 success, 1 proof/verification failure, 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import dataset
from .kernel.term import Mvar
from .kernel.verify import KernelStats, check_closed_proof, check_root_whole
from .loader import LoadedFile, load_file
from .search import SearchConfig, load_policy, run_rollouts, search
from .syntax import SBy
from .tactics import TacticConfig, TacticError, apply_tactic, new_session
from .treebuild import ByBlockResult, convert_theorem

ENV_PREFIX = "PROOFGROVE_"


def _read_config_file(path: str | None) -> dict[str, str]:
    if path is None:
        path = os.environ.get(ENV_PREFIX + "CONFIG")
    if path is None or not Path(path).exists():
        return {}
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            continue
        out[key.strip()] = value.strip()
    return out


@dataclass
class RunConfig:
    """Per-invocation options resolved from flags, config file, and env."""

    values: dict
    sources: dict

    @classmethod
    def resolve(cls, args: argparse.Namespace, file_cfg: dict[str, str], spec: dict) -> "RunConfig":
        values, sources = {}, {}
        for key, (cast, default) in spec.items():
            flag = getattr(args, key, None)
            if flag is not None:
                values[key], sources[key] = flag, "flag"
                continue
            if key in file_cfg:
                values[key], sources[key] = cast(file_cfg[key]), "file"
                continue
            env = os.environ.get(ENV_PREFIX + key.upper())
            if env is not None:
                values[key], sources[key] = cast(env), "env"
                continue
            values[key], sources[key] = default, "default"
        return cls(values, sources)

    def __getitem__(self, key):
        return self.values[key]

    def echo(self) -> str:
        return " ".join(f"{k}={self.values[k]}" for k in sorted(self.values))


def _bool(v: str) -> bool:
    return v.strip().lower() in {"1", "true", "yes", "on"}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="proofgrove", description="MiniLean prover and dataset tool")
    p.add_argument("--config", help="key=value config file (or PROOFGROVE_CONFIG)")
    sub = p.add_subparsers(dest="command", required=True)

    pv = sub.add_parser("prove", help="prove theorems in a MiniLean file")
    pv.add_argument("file")
    pv.add_argument("--theorem", help="prove only this theorem")
    pv.add_argument("--policy", dest="policy")
    pv.add_argument("--mode", dest="mode", choices=["rollout-white", "rollout-black", "andor"])
    pv.add_argument("--rollouts", dest="rollouts", type=int)
    pv.add_argument("--max-steps", dest="max_steps", type=int)
    pv.add_argument("--budget", dest="budget", type=int)
    pv.add_argument("--proposals", dest="proposals", type=int)
    pv.add_argument("--max-depth", dest="max_depth", type=int)
    pv.add_argument("--seed", dest="seed", type=int)
    pv.add_argument("--pool", dest="pool", type=int)
    pv.add_argument("--exhaustive", action="store_const", const=True, dest="exhaustive")
    pv.add_argument("--allow-library-search", action="store_const", const=True, dest="allow_library_search")
    pv.add_argument("--tree-out", help="write proof trees for proven theorems as JSONL")
    pv.add_argument("--format", dest="format", choices=["text", "records"])

    ex = sub.add_parser("extract", help="extract proof-tree dataset from .ml files")
    ex.add_argument("path", help="directory of .ml files (or a single file)")
    ex.add_argument("-o", "--output", required=True)
    ex.add_argument("--jobs", dest="jobs", type=int)

    vf = sub.add_parser("verify", help="replay-verify a proof-tree dataset")
    vf.add_argument("dataset")
    vf.add_argument("--format", dest="format", choices=["text", "records"])

    ck = sub.add_parser("check", help="compare kernel verification modes on a file")
    ck.add_argument("file")
    ck.add_argument("--kernel-mode", dest="kernel_mode",
                    choices=["incremental", "whole-per-step", "final-only"])
    ck.add_argument("--format", dest="format", choices=["text", "records"])

    st = sub.add_parser("stats", help="corpus statistics for a dataset")
    st.add_argument("dataset")
    return p


# ---------------------------------------------------------------------------
# prove

_PROVE_SPEC = {
    "policy": (str, "enum"),
    "mode": (str, "andor"),
    "rollouts": (int, 10),
    "max_steps": (int, 25),
    "budget": (int, 500),
    "proposals": (int, 12),
    "max_depth": (int, None),
    "seed": (int, 0),
    "pool": (int, 1),
    "exhaustive": (_bool, False),
    "allow_library_search": (_bool, False),
    "format": (str, "text"),
}


def cmd_prove(args, file_cfg) -> int:
    cfg = RunConfig.resolve(args, file_cfg, _PROVE_SPEC)
    loaded = load_file(args.file)
    theorems = [t for t in loaded.theorems if t.error is None]
    if args.theorem is not None:
        theorems = [t for t in theorems if t.decl.name == args.theorem]
        if not theorems:
            print(f"no theorem named {args.theorem!r} in {args.file}", file=sys.stderr)
            return 2
    banned = frozenset() if cfg["allow_library_search"] else frozenset({"apply?", "exact?", "rw?"})
    scfg = SearchConfig(
        rollouts=cfg["rollouts"], max_steps=cfg["max_steps"], budget=cfg["budget"],
        k=cfg["proposals"], seed=cfg["seed"],
        mode="andor-best-first" if cfg["mode"] == "andor" else cfg["mode"],
        max_depth=cfg["max_depth"], pool_size=cfg["pool"],
        exhaustive=cfg["exhaustive"], banned=banned,
    )
    policy = load_policy(cfg["policy"], cfg["seed"])
    records_mode = cfg["format"] == "records"
    all_proven = True
    tree_records = []
    if not records_mode:
        print(f"# prove {args.file} [{cfg.echo()}]")
    try:
        for th in theorems:
            name = th.decl.name or "<example>"
            if cfg["mode"] == "andor":
                out = search(th.env, th.decl, policy, scfg)
                proven = out.proven and out.verified
                record = {
                    "theorem": name,
                    "mode": cfg["mode"],
                    "proven": proven,
                    "script": out.script,
                    "stats": {
                        "expanded": out.stats.expanded,
                        "transpositions": out.stats.transpositions,
                        "nodes": out.stats.nodes,
                        "edges_tried": out.stats.edges_tried,
                        "edges_failed": out.stats.edges_failed,
                        "pool_max_live": out.stats.pool_max_live,
                    },
                }
                if proven and args.tree_out and out.tree is not None:
                    tree_records.append((th, out.tree))
            else:
                summary = run_rollouts(th.env, th.decl, policy, scfg)
                proven = summary.success
                record = {
                    "theorem": name,
                    "mode": cfg["mode"],
                    "proven": proven,
                    "script": summary.rollouts[summary.solved_at].script if proven else [],
                    "stats": {
                        "rollouts": len(summary.rollouts),
                        "solved_at": summary.solved_at,
                    },
                }
            all_proven &= proven
            if records_mode:
                print(json.dumps(record, ensure_ascii=False))
            else:
                mark = "proved" if proven else "FAILED"
                print(f"{mark:7} {name}")
                for line in record["script"]:
                    print(f"    {line}")
                print(f"    -- {json.dumps(record['stats'], ensure_ascii=False)}")
    finally:
        policy.close()
    if args.tree_out and tree_records:
        samples = []
        for th, tree in tree_records:
            samples.append(
                dataset.SampleRecord(
                    path=args.file,
                    imports=list(loaded.source.imports),
                    theorems=[
                        dataset.TheoremRecord(
                            th.decl.span, th.decl.name, list(th.decl.open_namespaces),
                            [dataset.ByBlockRecord(tree)],
                        )
                    ],
                )
            )
        dataset.emit_jsonl(samples, args.tree_out)
        if not records_mode:
            print(f"# wrote {len(samples)} proof tree(s) to {args.tree_out}")
    return 0 if all_proven else 1


# ---------------------------------------------------------------------------
# extract

def _sample_for_file(loaded: LoadedFile) -> dataset.SampleRecord:
    from .syntax import DeclError, TheoremDecl

    by_decl = {id(t.decl): t for t in loaded.theorems}
    elab_errors = dict()
    for msg, span in loaded.load_errors:
        elab_errors.setdefault((span.start, span.finish), msg)
    theorems: list = []
    for decl in loaded.source.declarations:
        if isinstance(decl, DeclError):
            theorems.append(dataset.ErrorRecord(decl.message))
        elif isinstance(decl, TheoremDecl):
            lt = by_decl.get(id(decl))
            if lt is None:
                continue
            if lt.error is not None:
                theorems.append(dataset.ErrorRecord(lt.error))
                continue
            conv = convert_theorem(lt.env, decl)
            if conv.error is not None:
                theorems.append(dataset.ErrorRecord(conv.error))
                continue
            blocks = []
            for b in conv.by_blocks:
                if b.error is not None:
                    blocks.append(dataset.ByBlockRecord(dataset.ErrorRecord(b.error)))
                else:
                    blocks.append(dataset.ByBlockRecord(b.tree))
            theorems.append(
                dataset.TheoremRecord(
                    decl.span, decl.name, list(decl.open_namespaces), blocks
                )
            )
    return dataset.SampleRecord(
        path=loaded.source.path, imports=list(loaded.source.imports), theorems=theorems
    )


def cmd_extract(args, file_cfg) -> int:
    cfg = RunConfig.resolve(args, file_cfg, {"jobs": (int, 1)})
    root = Path(args.path)
    files = sorted(root.glob("*.ml")) if root.is_dir() else [root]
    if not files:
        print(f"no .ml files under {root}", file=sys.stderr)
        return 2

    def one(path: Path) -> dataset.SampleRecord:
        return _sample_for_file(load_file(path))

    jobs = max(cfg["jobs"], 1)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            samples = list(pool.map(one, files))
    else:
        samples = [one(p) for p in files]
    dataset.emit_jsonl(samples, args.output)
    stats = dataset.corpus_stats(samples)
    print(f"# extracted {stats.converted}/{stats.by_blocks} proofs from {stats.files} file(s) -> {args.output}")
    if stats.tree_errors or stats.theorem_errors:
        print(f"# {stats.tree_errors} tree error(s), {stats.theorem_errors} theorem error(s)")
    return 0


# ---------------------------------------------------------------------------
# verify

def cmd_verify(args, file_cfg) -> int:
    from .treebuild import VerifyError, verify_tree

    cfg = RunConfig.resolve(args, file_cfg, {"format": (str, "text")})
    records = dataset.load_jsonl(args.dataset)
    base = Path(args.dataset).parent
    all_ok = True
    for rec in records:
        src = Path(rec.path)
        if not src.exists():
            src = base / rec.path
        env = None
        env_error = None
        if src.exists():
            env = load_file(src).env
        else:
            env_error = f"source file {rec.path!r} not found"
        for t in rec.theorems:
            if isinstance(t, dataset.ErrorRecord):
                continue
            name = t.name or "<example>"
            for i, b in enumerate(t.by_blocks):
                if isinstance(b.tree, dataset.ErrorRecord):
                    continue
                if env is None:
                    ok, msg = False, env_error
                else:
                    try:
                        verify_tree(env, b.tree, opens=tuple(t.context))
                        ok, msg = True, ""
                    except VerifyError as e:
                        ok, msg = False, str(e)
                all_ok &= ok
                if cfg["format"] == "records":
                    print(json.dumps({"path": rec.path, "theorem": name, "by_block": i,
                                      "verified": ok, "error": msg or None}, ensure_ascii=False))
                else:
                    mark = "ok    " if ok else "FAILED"
                    print(f"{mark} {rec.path}:{name}[{i}]" + (f" -- {msg}" if msg else ""))
    return 0 if all_ok else 1


# ---------------------------------------------------------------------------
# check (kernel verification mode comparison)

def run_check(env, decl, mode: str):
    """Run one theorem's by-block script under a kernel verification mode.
    Returns a dict report with per-step verdicts and kernel counters."""
    report = {
        "theorem": decl.name or "<example>",
        "mode": mode,
        "steps": [],
        "accepted": False,
        "proven": False,
        "checks": 0,
        "checked_nodes": 0,
        "final_ok": None,
        "error": None,
    }
    if not isinstance(decl.proof, SBy):
        report["error"] = "theorem has no top-level by-block"
        return report
    step_stats = KernelStats()
    incremental = mode == "incremental"
    tcfg = TacticConfig(incremental_check=incremental, stats=step_stats)
    try:
        state = new_session(env, decl)
    except TacticError as e:
        report["error"] = e.message
        return report
    root = state.goals[0]
    steps_ok = True
    for tac in decl.proof.script:
        try:
            outcome = apply_tactic(env, state, tac, tcfg)
        except TacticError as e:
            if e.kind == "kernel-check":
                report["steps"].append({"ok": False, "error": e.message})
                steps_ok = False
                break
            report["error"] = f"{e.kind}: {e.message}"
            return report
        state = outcome.new_state
        if mode == "whole-per-step":
            failure = check_root_whole(env, state.mctx, root, step_stats)
            report["steps"].append({"ok": failure is None,
                                    "error": None if failure is None else failure.message})
            if failure is not None:
                steps_ok = False
        elif incremental:
            report["steps"].append({"ok": True, "error": None})
    report["proven"] = state.finished
    report["checks"] = step_stats.checks
    report["checked_nodes"] = step_stats.checked_nodes
    report["assignments"] = len(state.mctx.log)
    final_stats = KernelStats()
    if state.finished:
        d = state.mctx.decl(root)
        failure = check_closed_proof(env, Mvar(root), d.target, d.ctx_types(), state.mctx, final_stats)
        report["final_ok"] = failure is None
    if mode == "final-only":
        report["accepted"] = bool(state.finished and report["final_ok"])
    else:
        report["accepted"] = bool(steps_ok and state.finished)
    return report


def cmd_check(args, file_cfg) -> int:
    cfg = RunConfig.resolve(args, file_cfg, {"kernel_mode": (str, "incremental"),
                                             "format": (str, "text")})
    loaded = load_file(args.file)
    mode = cfg["kernel_mode"]
    all_ok = True
    for th in loaded.theorems:
        if th.error is not None:
            all_ok = False
            print(f"error  {th.decl.name}: {th.error}")
            continue
        report = run_check(th.env, th.decl, mode)
        all_ok &= report["accepted"]
        if cfg["format"] == "records":
            print(json.dumps(report, ensure_ascii=False))
        else:
            mark = "ok    " if report["accepted"] else "FAILED"
            failing = sum(1 for s in report["steps"] if not s["ok"])
            note = ""
            if failing and report["proven"] and report["final_ok"]:
                note = "  (false negative: per-step checks failed on a valid proof)"
            print(
                f"{mark} {report['theorem']} [{mode}] steps={len(report['steps'])}"
                f" failing={failing} checks={report['checks']}"
                f" checked_nodes={report['checked_nodes']} final_ok={report['final_ok']}{note}"
            )
    return 0 if all_ok else 1


def cmd_stats(args, file_cfg) -> int:
    records = dataset.load_jsonl(args.dataset)
    print(dataset.corpus_stats(records).table())
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    file_cfg = _read_config_file(args.config)
    try:
        if args.command == "prove":
            return cmd_prove(args, file_cfg)
        if args.command == "extract":
            return cmd_extract(args, file_cfg)
        if args.command == "verify":
            return cmd_verify(args, file_cfg)
        if args.command == "check":
            return cmd_check(args, file_cfg)
        if args.command == "stats":
            return cmd_stats(args, file_cfg)
    except (dataset.LoadError, dataset.SchemaViolation) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
