"""Command-line entry point: verify | bench | inspect | mine.

Configuration precedence is flags > environment > config file > defaults;
the environment contributes only the API key.  Every run writes a config
snapshot into its manifest, so mock-backed runs replay byte-identically.
Exit codes are a stable contract: 0 = accepted / completed, 1 = errors
found in the input proof, 2 = operational failure.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from dataclasses import dataclass, fields
from datetime import date
from pathlib import Path

from . import bench as bench_mod
from . import miner as miner_mod
from .core import goodness_report, verification_order
from .errors import PfError
from .gateway import ChatGateway, HttpBackend, MockBackend, UsageLedger
from .metrics import sweep_csv
from .pipeline import (
    DEFAULT_STRICTNESS,
    PaperInput,
    PipelineConfig,
    StepInput,
    VerificationPipeline,
)
from .textio import DocumentMode, parse_pf_document, to_proof

EXIT_OK = 0
EXIT_ERRORS_FOUND = 1
EXIT_FAILURE = 2

API_KEY_ENV = "PFBV_API_KEY"


@dataclass
class RunConfig:
    backend: str = "mock"  # "mock" or "live"
    mock_script: str | None = None
    endpoint: str | None = None
    api_key: str | None = None
    model_name: str = "default"
    k: int = 1
    ks: str = ""  # comma-separated sweep list for bench; empty = [1..k] powers
    mode: str = "step"
    method: str = "pf"
    strictness: str = DEFAULT_STRICTNESS
    repair_rounds: int = 2
    max_regeneration: int = 3
    prune_invocations: bool = False
    concurrency: int = 1
    seed: int = 0
    out_dir: str = "runs"
    match_policy: str = "normalized"

    def snapshot(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["api_key"] = "***" if self.api_key else None
        return out

    def pipeline_config(self) -> PipelineConfig:
        return PipelineConfig(
            mode=self.mode,
            model_name=self.model_name,
            repair_rounds=self.repair_rounds,
            max_regeneration=self.max_regeneration,
            strictness=self.strictness,
            prune_invocations=self.prune_invocations,
            concurrency=self.concurrency,
            seed=self.seed,
        )

    def sweep_ks(self) -> list[int]:
        if self.ks:
            return [int(x) for x in self.ks.split(",") if x.strip()]
        ks = []
        k = 1
        while k <= self.k:
            ks.append(k)
            k *= 2
        return ks or [self.k]


def _load_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if args.config:
        text = Path(args.config).read_text(encoding="utf-8")
        file_values = json.loads(text)
        if not isinstance(file_values, dict):
            raise PfError("config file must hold a JSON object")
        known = {f.name for f in fields(RunConfig)}
        unknown = set(file_values) - known
        if unknown:
            raise PfError(f"unknown config keys: {sorted(unknown)}")
        values.update(file_values)
    env_key = os.environ.get(API_KEY_ENV)
    if env_key:
        values["api_key"] = env_key
    for f in fields(RunConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = flag
    return RunConfig(**values)


def _build_gateway(config: RunConfig) -> ChatGateway:
    if config.backend == "mock":
        if not config.mock_script:
            raise PfError("mock backend requires --mock-script")
        path = Path(config.mock_script)
        if not path.exists():
            raise PfError(f"mock script not found: {path}")
        backend = MockBackend.from_script(path)
        sleep_fn = lambda _: None  # scripted runs never wait
    elif config.backend == "live":
        if not config.endpoint:
            raise PfError("live backend requires --endpoint")
        backend = HttpBackend(config.endpoint, api_key=config.api_key)
        import time

        sleep_fn = time.sleep
    else:
        raise PfError(f"unknown backend {config.backend!r}")
    return ChatGateway(
        backend,
        UsageLedger(),
        sleep_fn=sleep_fn,
        rng=random.Random(config.seed),
    )


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# --------------------------------------------------------------------------
# verify


def _load_verify_input(config: RunConfig, input_path: str, pdf_path: str | None):
    if config.mode == "step":
        record = json.loads(Path(input_path).read_text(encoding="utf-8"))
        if not isinstance(record, dict) or "problem" not in record or "steps" not in record:
            raise PfError("step-mode input must be a JSON object with 'problem' and 'steps'")
        return StepInput(record["problem"], tuple(record["steps"]))
    latex = Path(input_path).read_text(encoding="utf-8")
    pdf = Path(pdf_path).read_bytes() if pdf_path else None
    return PaperInput(latex, pdf)


def _verify_report(verdict) -> str:
    lines = []
    if verdict.accepted:
        lines.append("ACCEPTED: no errors found.")
    else:
        lines.append("ERRORS FOUND.")
    if verdict.mode == "step":
        if verdict.flagged_steps:
            lines.append(
                "Flagged steps: " + ", ".join(str(i) for i in sorted(verdict.flagged_steps))
            )
    else:
        for entry in verdict.errors or ():
            lines.append(f"- {entry.location}: {entry.description}")
    for r in verdict.rollouts:
        incorrect = [rep for rep in r.reports if not rep.verdict.correct]
        if incorrect:
            lines.append(f"Rollout {r.index} incorrect blocks:")
            for rep in incorrect:
                lines.append(f"  - {rep.id.label()}: {rep.verdict.error_description}")
    for i, msg in verdict.failures:
        lines.append(f"Rollout {i} failed: {msg}")
    return "\n".join(lines) + "\n"


def cmd_verify(args) -> int:
    config = _load_config(args)
    source = _load_verify_input(config, args.input, getattr(args, "pdf", None))
    gateway = _build_gateway(config)
    pipeline = VerificationPipeline(gateway, config.pipeline_config())
    verdict = pipeline.run_rollouts(source, config.k)

    out = _out_dir(config)
    manifest = {
        "command": "verify",
        "input": args.input,
        "config": config.snapshot(),
        "verdict": verdict.to_json_dict(),
        "usage": gateway.ledger.to_json_dict(),
    }
    _write_json(out / "manifest.json", manifest)
    report = _verify_report(verdict)
    (out / "report.txt").write_text(report, encoding="utf-8")
    print(report, end="")
    return EXIT_OK if verdict.accepted else EXIT_ERRORS_FOUND


# --------------------------------------------------------------------------
# bench


def cmd_bench(args) -> int:
    config = _load_config(args)
    gateway = _build_gateway(config)
    pipeline_config = config.pipeline_config()
    ks = config.sweep_ks()
    if max(ks) > config.k:
        raise PfError(f"sweep ks {ks} exceed k={config.k}")

    if config.mode == "step":
        items = bench_mod.load_step_dataset(args.dataset)
        result = bench_mod.run_step_benchmark(
            items, config.method, config.k, gateway, pipeline_config
        )
    else:
        items = bench_mod.load_paper_dataset(args.dataset)
        result = bench_mod.run_paper_benchmark(
            items, config.method, config.k, gateway, pipeline_config,
            match_policy=config.match_policy,
        )

    min_effective = min((o.effective_k for o in result.items), default=config.k)
    usable_ks = [k for k in ks if k <= min_effective]
    sweep = result.sweep(usable_ks)

    out = _out_dir(config)
    manifest = dict(result.manifest)
    manifest["command"] = "bench"
    manifest["dataset"] = args.dataset
    manifest["config_snapshot"] = config.snapshot()
    manifest["sweep_ks"] = usable_ks
    manifest["sweep"] = {str(k): s.to_json_dict() for k, s in sweep}
    _write_json(out / "manifest.json", manifest)
    _write_json(out / "metrics.json", result.summary.to_json_dict())
    (out / "sweep.csv").write_text(sweep_csv(sweep), encoding="utf-8")

    print(json.dumps(result.summary.to_json_dict(), indent=2, sort_keys=True))
    if result.failed_items:
        print(f"{len(result.failed_items)} item(s) failed every rollout", file=sys.stderr)
    return EXIT_OK


# --------------------------------------------------------------------------
# inspect


def cmd_inspect(args) -> int:
    config = _load_config(args)
    text = Path(args.document).read_text(encoding="utf-8")
    mode = DocumentMode.MULTI_THEOREM if args.multi else DocumentMode.SINGLE_THEOREM
    proof = to_proof(parse_pf_document(text), mode, config.prune_invocations)

    children: dict = {}
    roots = []
    for m in proof.modules:
        parent = proof.scope_parent.get(m.id)
        if parent is None:
            roots.append(m.id)
        else:
            children.setdefault(parent, []).append(m.id)

    lines = ["MODULE TREE"]

    def walk(mid, depth):
        lines.append("  " * depth + f"- {mid.label()}")
        for child in children.get(mid, []):
            walk(child, depth + 1)

    for root in roots:
        walk(root, 1)
    lines.append("INVOCATIONS")
    for mid in verification_order(proof):
        deps = proof.dependencies(mid)
        if deps:
            lines.append(f"  {mid.label()} -> " + ", ".join(d.label() for d in deps))
    lines.append("VERIFICATION ORDER")
    lines.append("  " + ", ".join(m.label() for m in verification_order(proof)))
    report = goodness_report(
        proof,
        depth_limit=args.depth_limit,
        block_len_limit=args.block_len_limit,
        out_degree_limit=args.out_degree_limit,
    )
    lines.append("SIZE REPORT")
    lines.append(json.dumps(report.to_json_dict(), indent=2, sort_keys=True))
    print("\n".join(lines))
    return EXIT_OK


# --------------------------------------------------------------------------
# mine


def _load_stub_records(path) -> list[miner_mod.ArxivRecord]:
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        records.append(
            miner_mod.ArxivRecord(
                arxiv_id=rec["arxiv_id"],
                version=rec.get("version", 1),
                primary_category=rec.get("primary_category", ""),
                published=date.fromisoformat(rec["published"]),
                abstract=rec.get("abstract", ""),
                revision_comment=rec.get("revision_comment"),
            )
        )
    return records


def cmd_mine(args) -> int:
    config = _load_config(args)
    gateway = _build_gateway(config)
    window = (date.fromisoformat(args.start), date.fromisoformat(args.end))
    if args.stub:
        client = miner_mod.StubArxivClient(_load_stub_records(args.stub))
    else:
        client = miner_mod.ArxivApiClient()
    result = miner_mod.harvest(window[0], window[1], client, gateway, config.model_name)

    out = _out_dir(config)
    (out / "worklist.jsonl").write_text(result.worklist_jsonl(), encoding="utf-8")
    _write_json(
        out / "mine_manifest.json",
        {
            "command": "mine",
            "window": [args.start, args.end],
            "config": config.snapshot(),
            "funnel": result.funnel,
            "log": list(result.log),
            "usage": gateway.ledger.to_json_dict(),
        },
    )
    print(json.dumps(result.funnel, sort_keys=True))
    return EXIT_OK


# --------------------------------------------------------------------------
# argument wiring


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--backend", choices=["mock", "live"], default=None)
    p.add_argument("--mock-script", dest="mock_script", default=None)
    p.add_argument("--endpoint", default=None)
    p.add_argument("--api-key", dest="api_key", default=None)
    p.add_argument("--model", dest="model_name", default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--ks", default=None, help="comma-separated k-sweep list")
    p.add_argument("--mode", choices=["step", "paper"], default=None)
    p.add_argument("--method", choices=["baseline", "pf"], default=None)
    p.add_argument("--strictness", default=None)
    p.add_argument("--repair-rounds", dest="repair_rounds", type=int, default=None)
    p.add_argument("--max-regeneration", dest="max_regeneration", type=int, default=None)
    p.add_argument(
        "--prune-invocations", dest="prune_invocations", action="store_const",
        const=True, default=None,
    )
    p.add_argument("--concurrency", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-dir", dest="out_dir", default=None)
    p.add_argument("--match-policy", dest="match_policy", choices=["normalized", "judge"], default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pfbv",
        description="Structured proof decomposition and block-wise verification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="verify one proof or paper end to end")
    p.add_argument("input", help="step mode: JSON {problem, steps}; paper mode: .tex file")
    p.add_argument("--pdf", help="rendered PDF (paper mode)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="run a labeled benchmark with a k-sweep")
    p.add_argument("dataset", help="JSONL dataset file")
    _add_config_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("inspect", help="print the structure of a tagged document")
    p.add_argument("document")
    p.add_argument("--multi", action="store_true", help="multi-theorem document")
    p.add_argument("--depth-limit", dest="depth_limit", type=int, default=None)
    p.add_argument("--block-len-limit", dest="block_len_limit", type=int, default=None)
    p.add_argument("--out-degree-limit", dest="out_degree_limit", type=int, default=None)
    _add_config_flags(p)
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("mine", help="harvest correction-flagged papers over a date window")
    p.add_argument("--start", required=True, help="window start (YYYY-MM-DD)")
    p.add_argument("--end", required=True, help="window end (YYYY-MM-DD)")
    p.add_argument("--stub", help="JSONL of recorded metadata instead of the live API")
    _add_config_flags(p)
    p.set_defaults(func=cmd_mine)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PfError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
