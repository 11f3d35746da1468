"""Benchmark datasets, error-location matching, and end-to-end runners.

Two dataset shapes: step-labeled items (problem, indexed steps, per-step
correctness labels) and location-labeled items (paper LaTeX plus the
author-disclosed error locations).  Runners drive either the direct
judge baseline or the full pipeline, aggregate predictions by union over k
rollouts, and emit a reproducible manifest: same dataset, same mock scripts,
same seed give byte-identical output.
"""

from __future__ import annotations

import base64
import json
import re
from dataclasses import dataclass
from pathlib import Path

from . import prompts
from .errors import (
    JudgeUnavailable,
    GatewayError,
    ParseError,
    PfError,
    SchemaViolation,
)
from .gateway import ChatGateway, ChatRequest, TokenUsage
from .metrics import LabeledPrediction, MetricSummary, k_sweep, summarize
from .pipeline import (
    PaperInput,
    PipelineConfig,
    StepInput,
    VerificationPipeline,
    format_steps,
)
from .textio import parse_error_list, parse_step_verdict_line

STAGE_BASELINE = "baseline"
STAGE_JUDGE = "judge"


# --------------------------------------------------------------------------
# datasets


@dataclass(frozen=True)
class StepBenchItem:
    item_id: str
    problem: str
    steps: tuple[str, ...]
    labels: tuple[bool, ...]  # True = step correct

    def truth(self) -> frozenset[int]:
        """Ground-truth incorrect step indices."""
        return frozenset(i for i, ok in enumerate(self.labels) if not ok)

    def as_input(self) -> StepInput:
        return StepInput(self.problem, self.steps)


@dataclass(frozen=True)
class PaperBenchItem:
    item_id: str
    latex_source: str
    error_locations: tuple[str, ...]
    revision_comment: str = ""
    pdf: bytes | None = None

    def as_input(self) -> PaperInput:
        return PaperInput(self.latex_source, self.pdf)


def _jsonl_records(path):
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaViolation(f"invalid JSON: {exc}", lineno) from None
        if not isinstance(record, dict):
            raise SchemaViolation("record is not a JSON object", lineno)
        yield lineno, record


def load_step_dataset(path) -> list[StepBenchItem]:
    """Load JSONL records ``{id, problem, steps: [...], labels: [...]}``."""
    items = []
    for lineno, record in _jsonl_records(path):
        for key in ("id", "problem", "steps", "labels"):
            if key not in record:
                raise SchemaViolation(f"missing field {key!r}", lineno)
        steps = record["steps"]
        labels = record["labels"]
        if not isinstance(steps, list) or not all(isinstance(s, str) for s in steps):
            raise SchemaViolation("steps must be a list of strings", lineno)
        if not isinstance(labels, list) or not all(isinstance(b, bool) for b in labels):
            raise SchemaViolation("labels must be a list of booleans", lineno)
        if len(labels) != len(steps):
            raise SchemaViolation(
                f"labels length {len(labels)} != steps length {len(steps)}", lineno
            )
        items.append(
            StepBenchItem(
                item_id=str(record["id"]),
                problem=record["problem"],
                steps=tuple(steps),
                labels=tuple(labels),
            )
        )
    return items


def split_locations(value) -> tuple[str, ...]:
    """Split an author comment's location field on commas and ``and``."""
    if isinstance(value, (list, tuple)):
        parts = [str(v) for v in value]
    else:
        parts = re.split(r",|\band\b", str(value))
    return tuple(p.strip() for p in parts if p.strip())


def load_paper_dataset(path) -> list[PaperBenchItem]:
    """Load JSONL records ``{id, latex_source, error_locations,
    revision_comment?, pdf_base64?}``; every item needs at least one error
    location."""
    items = []
    for lineno, record in _jsonl_records(path):
        for key in ("id", "latex_source", "error_locations"):
            if key not in record:
                raise SchemaViolation(f"missing field {key!r}", lineno)
        locations = split_locations(record["error_locations"])
        if not locations:
            raise SchemaViolation("error_locations must name at least one location", lineno)
        pdf = None
        if record.get("pdf_base64"):
            try:
                pdf = base64.b64decode(record["pdf_base64"])
            except Exception:
                raise SchemaViolation("pdf_base64 is not valid base64", lineno) from None
        items.append(
            PaperBenchItem(
                item_id=str(record["id"]),
                latex_source=record["latex_source"],
                error_locations=locations,
                revision_comment=record.get("revision_comment", ""),
                pdf=pdf,
            )
        )
    return items


# --------------------------------------------------------------------------
# location matching


def normalize_location(text: str) -> str:
    """Canonical form of a location string: case-folded, whitespace
    collapsed, trailing punctuation stripped.  ``"lemma  2.1."`` and
    ``"Lemma 2.1"`` normalize identically; abbreviations do not (that is the
    judge's job)."""
    out = " ".join(text.split()).casefold()
    return out.rstrip(".,;:!?")


@dataclass(frozen=True)
class MatchDecision:
    predicted_location: str
    matched_truth: str | None
    method: str  # "normalized" or "judge"


def _ask_judge(gateway: ChatGateway, predicted: str, truth: str, model_name: str) -> bool:
    prompt = prompts.render_named(prompts.LOCATION_JUDGE, predicted=predicted, truth=truth)
    try:
        resp = gateway.complete(
            ChatRequest(user_prompt=prompt, model_name=model_name, effort_hint="low"),
            STAGE_JUDGE,
        )
    except GatewayError as exc:
        raise JudgeUnavailable(str(exc)) from exc
    word = resp.text.strip().split()[-1].strip(".,!").lower() if resp.text.strip() else ""
    return word == "yes"


def match_location(
    predicted: str,
    truths,
    policy: str = "normalized",
    gateway: ChatGateway | None = None,
    model_name: str = "default",
    warnings: list | None = None,
) -> MatchDecision:
    """Match one predicted location against the ground-truth list.

    The normalized policy is pure string canonicalization; the judge policy
    asks a yes/no question per (predicted, truth) pair, first yes wins, and
    falls back to normalized matching when the judge is unavailable.
    """
    norm_pred = normalize_location(predicted)
    for truth in truths:
        if normalize_location(truth) == norm_pred:
            return MatchDecision(predicted, truth, "normalized")
    if policy == "judge" and gateway is not None:
        try:
            for truth in truths:
                if _ask_judge(gateway, predicted, truth, model_name):
                    return MatchDecision(predicted, truth, "judge")
            return MatchDecision(predicted, None, "judge")
        except JudgeUnavailable as exc:
            if warnings is not None:
                warnings.append(f"judge unavailable for {predicted!r}, fell back to normalized: {exc}")
    return MatchDecision(predicted, None, "normalized")


# --------------------------------------------------------------------------
# runners


@dataclass(frozen=True)
class ItemOutcome:
    item_id: str
    truth: frozenset
    rollout_predictions: tuple[frozenset, ...]
    predicted: frozenset
    effective_k: int
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class BenchmarkResult:
    items: tuple[ItemOutcome, ...]
    failed_items: tuple[tuple[str, str], ...]
    summary: MetricSummary
    manifest: dict

    def predictions(self) -> list[LabeledPrediction]:
        return [LabeledPrediction.of(i.item_id, i.truth, i.predicted) for i in self.items]

    def sweep(self, ks) -> list[tuple[int, MetricSummary]]:
        truths = {i.item_id: i.truth for i in self.items}
        per_rollout = {i.item_id: list(i.rollout_predictions) for i in self.items}
        return k_sweep(truths, per_rollout, ks)


def _baseline_step_rollout(gateway, item: StepBenchItem, model_name: str):
    system = prompts.load(prompts.STEP_BASELINE_SYSTEM)
    user = prompts.render_named(
        prompts.STEP_BASELINE_USER,
        problem=item.problem,
        steps=format_steps(item.steps),
    )
    req = ChatRequest(user_prompt=user, system_prompt=system, model_name=model_name)
    last_exc = None
    for _ in range(2):  # one retry on a malformed verdict line
        text = gateway.complete(req, STAGE_BASELINE).text
        try:
            verdicts = parse_step_verdict_line(text, len(item.steps))
            return frozenset(i for i, ok in enumerate(verdicts) if not ok)
        except ParseError as exc:
            last_exc = exc
    raise last_exc


def _baseline_paper_rollout(gateway, item: PaperBenchItem, model_name: str):
    user = prompts.render_named(prompts.PAPER_BASELINE, paper_tex=item.latex_source)
    req = ChatRequest(user_prompt=user, model_name=model_name)
    last_exc = None
    for _ in range(2):
        text = gateway.complete(req, STAGE_BASELINE).text
        try:
            return parse_error_list(text)
        except ParseError as exc:
            last_exc = exc
    raise last_exc


def run_baseline_judge(item, k: int, gateway: ChatGateway, model_name: str = "default"):
    """k direct-judge rollouts for one item; returns per-rollout predictions
    (step-index sets or error lists) plus per-rollout failure notes."""
    rollouts = []
    failures = []
    for i in range(k):
        try:
            if isinstance(item, StepBenchItem):
                rollouts.append(_baseline_step_rollout(gateway, item, model_name))
            else:
                rollouts.append(_baseline_paper_rollout(gateway, item, model_name))
        except (ParseError, GatewayError) as exc:
            failures.append((i, f"{type(exc).__name__}: {exc}"))
    return rollouts, failures


def run_step_benchmark(
    items: list[StepBenchItem],
    method: str,
    k: int,
    gateway: ChatGateway,
    config: PipelineConfig | None = None,
) -> BenchmarkResult:
    """Evaluate step-labeled items with the baseline judge or the pipeline.

    Per item, the predicted incorrect-step set is the union over its k
    rollouts; items whose every rollout failed are reported separately and
    excluded from the metrics.
    """
    if method not in ("baseline", "pf"):
        raise ValueError(f"method must be 'baseline' or 'pf', got {method!r}")
    config = config or PipelineConfig(mode="step")
    if config.mode != "step":
        raise ValueError("run_step_benchmark needs a step-mode config")

    outcomes: list[ItemOutcome] = []
    failed: list[tuple[str, str]] = []
    for item in items:
        warnings: list[str] = []
        if method == "baseline":
            rollouts, failures = run_baseline_judge(item, k, gateway, config.model_name)
            warnings += [f"rollout {i} dropped: {msg}" for i, msg in failures]
        else:
            pipeline = VerificationPipeline(gateway, config)
            try:
                verdict = pipeline.run_rollouts(item.as_input(), k)
            except PfError as exc:
                failed.append((item.item_id, f"{type(exc).__name__}: {exc}"))
                continue
            rollouts = [r.flagged_steps() for r in verdict.rollouts]
            warnings += [f"rollout {i} dropped: {msg}" for i, msg in verdict.failures]
        if not rollouts:
            failed.append((item.item_id, "all rollouts failed"))
            continue
        predicted = frozenset().union(*rollouts)
        outcomes.append(
            ItemOutcome(
                item_id=item.item_id,
                truth=item.truth(),
                rollout_predictions=tuple(rollouts),
                predicted=predicted,
                effective_k=len(rollouts),
                warnings=tuple(warnings),
            )
        )

    summary = summarize(
        [LabeledPrediction.of(o.item_id, o.truth, o.predicted) for o in outcomes]
    )
    manifest = _manifest("step", method, k, config, outcomes, failed, summary, gateway)
    return BenchmarkResult(tuple(outcomes), tuple(failed), summary, manifest)


def run_paper_benchmark(
    items: list[PaperBenchItem],
    method: str,
    k: int,
    gateway: ChatGateway,
    config: PipelineConfig | None = None,
    match_policy: str = "normalized",
) -> BenchmarkResult:
    """Evaluate location-labeled items.

    Predicted locations are deduplicated by normalized form across rollouts;
    each surviving prediction is matched against the ground-truth locations
    (normalized or judge policy) and contributes either the matched truth's
    key or its own normalized key to the predicted set.
    """
    if method not in ("baseline", "pf"):
        raise ValueError(f"method must be 'baseline' or 'pf', got {method!r}")
    config = config or PipelineConfig(mode="paper")
    if config.mode != "paper":
        raise ValueError("run_paper_benchmark needs a paper-mode config")

    outcomes: list[ItemOutcome] = []
    failed: list[tuple[str, str]] = []
    for item in items:
        warnings: list[str] = []
        if method == "baseline":
            rollouts, failures = run_baseline_judge(item, k, gateway, config.model_name)
            warnings += [f"rollout {i} dropped: {msg}" for i, msg in failures]
            rollout_locs = [[e.location for e in r] for r in rollouts]
        else:
            pipeline = VerificationPipeline(gateway, config)
            try:
                verdict = pipeline.run_rollouts(item.as_input(), k)
            except PfError as exc:
                failed.append((item.item_id, f"{type(exc).__name__}: {exc}"))
                continue
            rollout_locs = [
                [e.location for e in r.calibrated] for r in verdict.rollouts
            ]
            warnings += [f"rollout {i} dropped: {msg}" for i, msg in verdict.failures]
        if not rollout_locs:
            failed.append((item.item_id, "all rollouts failed"))
            continue

        # one match decision per distinct predicted location
        key_of: dict[str, str] = {}
        for location in {loc for locs in rollout_locs for loc in locs}:
            decision = match_location(
                location,
                item.error_locations,
                policy=match_policy,
                gateway=gateway,
                model_name=config.model_name,
                warnings=warnings,
            )
            if decision.matched_truth is not None:
                key_of[location] = normalize_location(decision.matched_truth)
            else:
                key_of[location] = normalize_location(location)

        rollout_sets = [frozenset(key_of[loc] for loc in locs) for locs in rollout_locs]
        predicted = frozenset().union(*rollout_sets) if rollout_sets else frozenset()
        outcomes.append(
            ItemOutcome(
                item_id=item.item_id,
                truth=frozenset(normalize_location(t) for t in item.error_locations),
                rollout_predictions=tuple(rollout_sets),
                predicted=predicted,
                effective_k=len(rollout_sets),
                warnings=tuple(warnings),
            )
        )

    summary = summarize(
        [LabeledPrediction.of(o.item_id, o.truth, o.predicted) for o in outcomes]
    )
    manifest = _manifest("paper", method, k, config, outcomes, failed, summary, gateway)
    return BenchmarkResult(tuple(outcomes), tuple(failed), summary, manifest)


def _manifest(mode, method, k, config, outcomes, failed, summary, gateway) -> dict:
    return {
        "mode": mode,
        "method": method,
        "k": k,
        "config": config.to_json_dict(),
        "items": [
            {
                "item_id": o.item_id,
                "truth": sorted(o.truth),
                "rollout_predictions": [sorted(s) for s in o.rollout_predictions],
                "predicted": sorted(o.predicted),
                "effective_k": o.effective_k,
                "warnings": list(o.warnings),
            }
            for o in outcomes
        ],
        "failed_items": [{"item_id": i, "error": msg} for i, msg in failed],
        "metrics": summary.to_json_dict(),
        "usage": gateway.ledger.to_json_dict(),
    }
