"""Four-stage verification pipeline.

A rollout translates the input into the structured proof format (with
self-repair or faithfulness-checked regeneration), checks every block
independently, and calibrates the block reports back into the caller's
output shape (per-step verdicts or an error-location list).  Rollouts are
independent; their verdicts aggregate pessimistically: a flag in any rollout
survives, so a proof is accepted only when every rollout accepted it.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import prompts
from .core import (
    ModuleId,
    ModuleKind,
    ProofModule,
    PseudoFormalProof,
    verification_order,
)
from .errors import (
    CalibrationParseFailure,
    ParseError,
    PfError,
    ProofError,
    RolloutsExhausted,
    UnparseableRewrite,
)
from .gateway import Attachment, ChatGateway, ChatRequest, TokenUsage
from .textio import (
    BlockVerdict,
    CalibrationResult,
    DocumentMode,
    ErrorList,
    parse_block_verdict,
    parse_calibration,
    parse_error_list,
    parse_faithfulness_verdict,
    parse_pf_document,
    serialize_proof,
    to_proof,
)

DEFAULT_STRICTNESS = "flag only errors of mathematical substance; ignore typos and style."

STAGE_REWRITE = "rewrite"
STAGE_SELF_REPAIR = "self_repair"
STAGE_FAITHFULNESS = "faithfulness"
STAGE_BLOCKS = "block_verification"
STAGE_CALIBRATION = "calibration"

_SELF_REPAIR_OK = "NO DISCREPANCIES"


@dataclass(frozen=True)
class StepInput:
    """A problem plus its candidate solution split into indexed steps."""

    problem: str
    steps: tuple[str, ...]

    @property
    def solution_text(self) -> str:
        return "\n\n".join(self.steps)


@dataclass(frozen=True)
class PaperInput:
    """A paper's LaTeX source, optionally with its rendered PDF."""

    latex: str
    pdf: bytes | None = None


@dataclass(frozen=True)
class PipelineConfig:
    mode: str = "step"  # "step" or "paper"
    model_name: str = "default"
    repair_rounds: int = 2
    max_regeneration: int = 3
    run_faithfulness: bool | None = None  # default: paper mode only
    short_circuit_all_correct: bool = True
    strictness: str = DEFAULT_STRICTNESS
    retry_block_parse: bool = True
    prune_invocations: bool = False
    concurrency: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("step", "paper"):
            raise ValueError(f"mode must be 'step' or 'paper', got {self.mode!r}")

    @property
    def document_mode(self) -> DocumentMode:
        return DocumentMode.SINGLE_THEOREM if self.mode == "step" else DocumentMode.MULTI_THEOREM

    @property
    def faithfulness_enabled(self) -> bool:
        if self.run_faithfulness is None:
            return self.mode == "paper"
        return self.run_faithfulness

    def to_json_dict(self) -> dict:
        return {
            "mode": self.mode,
            "model_name": self.model_name,
            "repair_rounds": self.repair_rounds,
            "max_regeneration": self.max_regeneration,
            "run_faithfulness": self.faithfulness_enabled,
            "short_circuit_all_correct": self.short_circuit_all_correct,
            "strictness": self.strictness,
            "retry_block_parse": self.retry_block_parse,
            "prune_invocations": self.prune_invocations,
            "concurrency": self.concurrency,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class TranslationOutcome:
    proof: PseudoFormalProof
    repair_rounds_used: int = 0
    regeneration_attempts: int = 0
    faithfulness_flags: tuple[tuple[ModuleId, str], ...] = ()
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class BlockReport:
    id: ModuleId
    verdict: BlockVerdict
    raw_response: str = ""


@dataclass(frozen=True)
class StepVerdicts:
    values: tuple[bool, ...]
    detail: CalibrationResult | None = None

    def flagged(self) -> frozenset[int]:
        return frozenset(i for i, v in enumerate(self.values) if not v)


@dataclass(frozen=True)
class RolloutResult:
    index: int
    translation: TranslationOutcome
    reports: tuple[BlockReport, ...]
    calibrated: StepVerdicts | ErrorList
    usage: dict[str, TokenUsage] = field(default_factory=dict)
    warnings: tuple[str, ...] = ()

    def flagged_steps(self) -> frozenset[int]:
        assert isinstance(self.calibrated, StepVerdicts)
        return self.calibrated.flagged()


@dataclass(frozen=True)
class AggregatedVerdict:
    """Pessimistic union over k rollouts: step flags (or errors) found by
    any rollout survive; a proof is accepted only if every rollout was
    clean."""

    k: int
    effective_k: int
    mode: str
    flagged_steps: frozenset[int] | None
    errors: ErrorList | None
    rollouts: tuple[RolloutResult, ...]
    failures: tuple[tuple[int, str], ...] = ()

    @property
    def accepted(self) -> bool:
        if self.mode == "step":
            return not self.flagged_steps
        return len(self.errors or ErrorList()) == 0

    def to_json_dict(self) -> dict:
        out: dict = {
            "k": self.k,
            "effective_k": self.effective_k,
            "mode": self.mode,
            "accepted": self.accepted,
            "failures": [{"rollout": i, "error": msg} for i, msg in self.failures],
            "rollouts": [],
        }
        if self.mode == "step":
            out["flagged_steps"] = sorted(self.flagged_steps or ())
        else:
            out["errors"] = [
                {"location": e.location, "description": e.description}
                for e in (self.errors or ErrorList())
            ]
        for r in self.rollouts:
            entry = {
                "index": r.index,
                "repair_rounds_used": r.translation.repair_rounds_used,
                "regeneration_attempts": r.translation.regeneration_attempts,
                "faithfulness_flags": [
                    {"module": str(m), "description": d}
                    for m, d in r.translation.faithfulness_flags
                ],
                "reports": [
                    {
                        "module": str(rep.id),
                        "correct": rep.verdict.correct,
                        "error_description": rep.verdict.error_description,
                    }
                    for rep in r.reports
                ],
                "usage": {s: u.to_json_dict() for s, u in sorted(r.usage.items())},
                "warnings": list(r.warnings),
            }
            if isinstance(r.calibrated, StepVerdicts):
                entry["step_verdicts"] = ["yes" if v else "no" for v in r.calibrated.values]
                entry["flagged_steps"] = sorted(r.calibrated.flagged())
            else:
                entry["errors"] = [
                    {"location": e.location, "description": e.description}
                    for e in r.calibrated
                ]
            out["rollouts"].append(entry)
        return out


# --------------------------------------------------------------------------
# prompt-section assembly


def format_steps(steps) -> str:
    return "\n".join(f"<step>[{i}] {text}</step>" for i, text in enumerate(steps))


def format_statement(module: ProofModule) -> str:
    lines = [f"[{module.id.label()}]"]
    lines.append("Assumptions / Conditions / Definitions.")
    lines.append(module.premises if module.premises else "(none)")
    lines.append("Statement :")
    lines.append(module.conclusion)
    return "\n".join(lines)


def established_results(proof: PseudoFormalProof, mid: ModuleId) -> list[ModuleId]:
    """Results a block check may take as already verified.

    A lemma sees the earlier lemmas of its proposition and the statements of
    earlier propositions; a proposition additionally sees its own lemmas; a
    theorem sees every proposition (and, in multi-theorem documents, earlier
    theorems).  Returned in document order.
    """
    props = [m.id for m in proof.modules if m.id.kind is ModuleKind.PROPOSITION]
    lemmas = [m.id for m in proof.modules if m.id.kind is ModuleKind.LEMMA]
    theorems = [m.id for m in proof.modules if m.id.kind is ModuleKind.THEOREM]

    out: list[ModuleId]
    if mid.kind is ModuleKind.LEMMA:
        major, minor = mid.index.split(".")
        out = [p for p in props if int(p.index) < int(major)]
        out += [
            l for l in lemmas
            if l.lemma_prefix == major and int(l.index.split(".")[1]) < int(minor)
        ]
    elif mid.kind is ModuleKind.PROPOSITION:
        out = [p for p in props if int(p.index) < int(mid.index)]
        out += [l for l in lemmas if l.lemma_prefix == mid.index]
    else:
        pos = proof.doc_position(mid)
        out = [t for t in theorems if proof.doc_position(t) < pos]
        out += props
    out.sort(key=proof.doc_position)
    return out


def contexts_text(proof: PseudoFormalProof, mid: ModuleId) -> str:
    ancestors = proof.ancestors(mid)
    if not ancestors:
        return "(none)"
    return "\n\n".join(format_statement(proof.module(a)) for a in ancestors)


def established_text(proof: PseudoFormalProof, mid: ModuleId) -> str:
    results = established_results(proof, mid)
    if not results:
        return "(none)"
    return "\n\n".join(format_statement(proof.module(r)) for r in results)


def format_block_errors(reports) -> str:
    incorrect = [r for r in reports if not r.verdict.correct]
    if not incorrect:
        return "(none)"
    return "\n\n".join(
        f"[{r.id.label()}] {r.verdict.error_description}" for r in incorrect
    )


# --------------------------------------------------------------------------
# the pipeline


class VerificationPipeline:
    def __init__(self, gateway: ChatGateway, config: PipelineConfig):
        self.gateway = gateway
        self.config = config

    # -- plumbing ---------------------------------------------------------

    def _call(self, stage, user_prompt, *, system=None, attachments=(), usage=None) -> str:
        req = ChatRequest(
            user_prompt=user_prompt,
            system_prompt=system,
            attachments=tuple(attachments),
            model_name=self.config.model_name,
        )
        resp = self.gateway.complete(req, stage)
        if usage is not None:
            usage[stage] = usage.get(stage, TokenUsage()) + resp.usage
        return resp.text

    def _source_text(self, source) -> str:
        if isinstance(source, StepInput):
            return f"{source.problem}\n\n{source.solution_text}"
        return source.latex

    def _attachments(self, source):
        if isinstance(source, PaperInput) and source.pdf is not None:
            return (Attachment("application/pdf", source.pdf),)
        return ()

    def _with_strictness(self, prompt: str) -> str:
        return f"{prompt}\n\nSTRICTNESS THRESHOLD:\n{self.config.strictness}\n"

    def _rewrite_instructions(self) -> str:
        template = prompts.load(
            prompts.REWRITER_SINGLE if self.config.mode == "step" else prompts.REWRITER_MULTI
        )
        marker = "Now rewrite the following"
        return template.split(marker)[0].rstrip()

    def _parse_rewrite(self, text: str) -> PseudoFormalProof:
        return to_proof(
            parse_pf_document(text),
            self.config.document_mode,
            prune_invocations=self.config.prune_invocations,
        )

    # -- stage 1: translation ---------------------------------------------

    def translate(self, source, usage=None) -> TranslationOutcome:
        """Rewrite the input into the structured format.

        Unparseable rewrites and unfaithful components trigger regeneration,
        up to ``max_regeneration`` attempts in total; the step-mode
        self-repair loop then polishes a parseable rewrite in place.
        """
        cfg = self.config
        attachments = self._attachments(source)
        original = self._source_text(source)
        warnings: list[str] = []

        if cfg.mode == "step":
            first_prompt = prompts.render_named(prompts.REWRITER_SINGLE, problem=original)
        else:
            first_prompt = prompts.render_named(prompts.REWRITER_MULTI, paper_tex=original)
        text = self._call(STAGE_REWRITE, first_prompt, attachments=attachments, usage=usage)

        attempts = 0
        flags: tuple[tuple[ModuleId, str], ...] = ()
        while True:
            try:
                proof = self._parse_rewrite(text)
            except (ParseError, ProofError) as exc:
                if attempts >= cfg.max_regeneration:
                    raise UnparseableRewrite(
                        f"rewrite unparseable after {attempts} regeneration attempts: {exc}"
                    ) from exc
                attempts += 1
                text = self._regenerate(
                    original, text, f"The rewrite could not be parsed: {exc}", attachments, usage
                )
                continue

            if not cfg.faithfulness_enabled:
                break
            flags = self._faithfulness_flags(proof, original, warnings, usage)
            if not flags:
                break
            if attempts >= cfg.max_regeneration:
                warnings.append(
                    f"{len(flags)} faithfulness flags remain after {attempts} regeneration attempts"
                )
                break
            attempts += 1
            listing = "\n".join(f"[{m.label()}] {d}" for m, d in flags)
            text = self._regenerate(original, text, listing, attachments, usage)

        repair_rounds_used = 0
        if cfg.mode == "step" and cfg.repair_rounds > 0:
            proof, text, repair_rounds_used = self._self_repair(
                proof, text, original, warnings, usage
            )

        return TranslationOutcome(
            proof=proof,
            repair_rounds_used=repair_rounds_used,
            regeneration_attempts=attempts,
            faithfulness_flags=flags,
            warnings=tuple(warnings),
        )

    def _regenerate(self, original, previous, errors, attachments, usage) -> str:
        prompt = prompts.render_named(
            prompts.REGENERATION,
            rewrite_instructions=self._rewrite_instructions(),
            original_paper=original,
            previous_rewrite=previous,
            errors=errors,
        )
        return self._call(STAGE_REWRITE, prompt, attachments=attachments, usage=usage)

    def _self_repair(self, proof, text, original, warnings, usage):
        used = 0
        for _ in range(self.config.repair_rounds):
            prompt = prompts.render_named(
                prompts.SELF_REPAIR, problem=original, rewritten_proof=text
            )
            resp = self._call(STAGE_SELF_REPAIR, prompt, usage=usage)
            if _SELF_REPAIR_OK in resp:
                break
            try:
                proof = self._parse_rewrite(resp)
                text = resp
                used += 1
            except (ParseError, ProofError) as exc:
                warnings.append(f"self-repair produced an unparseable rewrite, kept previous: {exc}")
                break
        return proof, text, used

    def _faithfulness_flags(self, proof, original, warnings, usage):
        flags: list[tuple[ModuleId, str]] = []
        for mid in verification_order(proof):
            module = proof.module(mid)
            prompt = prompts.render_named(
                prompts.FAITHFULNESS,
                original_paper=original,
                contexts=contexts_text(proof, mid),
                established_results=established_text(proof, mid),
                assertion=format_statement(module),
                proof=module.proof,
            )
            resp = self._call(STAGE_FAITHFULNESS, prompt, usage=usage)
            try:
                verdict = parse_faithfulness_verdict(resp)
            except ParseError as exc:
                warnings.append(f"faithfulness check of {mid} unparseable, skipped: {exc}")
                continue
            if not verdict.faithful:
                flags.append((mid, verdict.error_description or ""))
        return tuple(flags)

    # -- stage 2: block verification ---------------------------------------

    def verify_blocks(self, proof: PseudoFormalProof, usage=None) -> list[BlockReport]:
        """One verifier call per module, in verification order.

        Each call sees only the module's context (ancestor statements,
        established results, its own statement and proof); a response that
        cannot be parsed is retried once and then recorded as an incorrect
        verdict describing the parse failure.
        """
        order = verification_order(proof)

        def check(mid: ModuleId) -> BlockReport:
            module = proof.module(mid)
            prompt = prompts.render_named(
                prompts.BLOCK_VERIFIER,
                contexts=contexts_text(proof, mid),
                established_results=established_text(proof, mid),
                assertion=format_statement(module),
                proof=module.proof,
            )
            attempts = 2 if self.config.retry_block_parse else 1
            last_exc: ParseError | None = None
            text = ""
            for _ in range(attempts):
                text = self._call(STAGE_BLOCKS, prompt, usage=usage)
                try:
                    return BlockReport(mid, parse_block_verdict(text), text)
                except ParseError as exc:
                    last_exc = exc
            return BlockReport(
                mid,
                BlockVerdict(False, f"verifier response could not be parsed: {last_exc}"),
                text,
            )

        if self.config.concurrency > 1:
            with ThreadPoolExecutor(max_workers=self.config.concurrency) as pool:
                return list(pool.map(check, order))
        return [check(mid) for mid in order]

    # -- stage 3: calibration ----------------------------------------------

    def calibrate(self, source, proof, reports, usage=None):
        """Map block reports back to the caller's output shape.

        Step mode returns per-step verdicts (short-circuiting to all-correct
        without a call when no block was flagged); paper mode returns the
        final error-location list.
        """
        cfg = self.config
        incorrect = [r for r in reports if not r.verdict.correct]

        if cfg.mode == "step":
            assert isinstance(source, StepInput)
            n = len(source.steps)
            if not incorrect and cfg.short_circuit_all_correct:
                return StepVerdicts((True,) * n)
            prompt = prompts.render_named(
                prompts.STEP_CALIBRATOR,
                num_steps=str(n),
                problem=source.problem,
                steps=format_steps(source.steps),
                rewritten_proof=serialize_proof(proof),
                errors=format_block_errors(reports),
            )
            prompt = self._with_strictness(prompt)
            last_exc = None
            for _ in range(2):
                text = self._call(STAGE_CALIBRATION, prompt, usage=usage)
                try:
                    result = parse_calibration(text, n)
                    return StepVerdicts(result.step_verdicts, result)
                except ParseError as exc:
                    last_exc = exc
            raise CalibrationParseFailure(f"calibration unparseable after retry: {last_exc}")

        assert isinstance(source, PaperInput)
        prompt = prompts.render_named(
            prompts.PAPER_CALIBRATOR,
            original_paper=source.latex,
            rewritten_paper=serialize_proof(proof),
            errors=format_block_errors(reports),
        )
        prompt = self._with_strictness(prompt)
        last_exc = None
        for _ in range(2):
            text = self._call(
                STAGE_CALIBRATION, prompt, attachments=self._attachments(source), usage=usage
            )
            try:
                return parse_error_list(text)
            except ParseError as exc:
                last_exc = exc
        raise CalibrationParseFailure(f"calibration unparseable after retry: {last_exc}")

    # -- stage 4: parallel scaling ------------------------------------------

    def run_rollout(self, source, index: int = 0) -> RolloutResult:
        usage: dict[str, TokenUsage] = {}
        translation = self.translate(source, usage=usage)
        reports = tuple(self.verify_blocks(translation.proof, usage=usage))
        calibrated = self.calibrate(source, translation.proof, reports, usage=usage)
        return RolloutResult(
            index=index,
            translation=translation,
            reports=reports,
            calibrated=calibrated,
            usage=usage,
            warnings=translation.warnings,
        )

    def run_rollouts(self, source, k: int) -> AggregatedVerdict:
        """Run k independent rollouts and aggregate pessimistically.

        Failed rollouts shrink the effective k and are recorded; the run
        fails only when every rollout failed.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        results: list[RolloutResult] = []
        failures: list[tuple[int, str]] = []
        for i in range(k):
            try:
                results.append(self.run_rollout(source, i))
            except PfError as exc:
                failures.append((i, f"{type(exc).__name__}: {exc}"))
        if not results:
            raise RolloutsExhausted(f"all {k} rollouts failed: {failures}")

        if self.config.mode == "step":
            flagged: frozenset[int] = frozenset()
            for r in results:
                flagged |= r.flagged_steps()
            return AggregatedVerdict(
                k=k, effective_k=len(results), mode="step",
                flagged_steps=flagged, errors=None,
                rollouts=tuple(results), failures=tuple(failures),
            )

        from .bench import normalize_location

        seen: dict[str, int] = {}
        merged = []
        for r in results:
            assert isinstance(r.calibrated, ErrorList)
            for entry in r.calibrated:
                key = normalize_location(entry.location)
                if key not in seen:
                    seen[key] = len(merged)
                    merged.append(entry)
        return AggregatedVerdict(
            k=k, effective_k=len(results), mode="paper",
            flagged_steps=None, errors=ErrorList(tuple(merged)),
            rollouts=tuple(results), failures=tuple(failures),
        )
