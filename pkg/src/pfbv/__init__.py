"""Structured proof decomposition and block-wise verification.

A proof is rewritten into self-contained modules (premises, conclusion,
proof) organized by an invocation DAG and a scope forest; each module is
then checked independently through a pluggable chat-model gateway, the
per-module reports are calibrated into a final verdict, and parallel
rollouts aggregate pessimistically.
"""

from .core import (
    GoodnessReport,
    ModuleContext,
    ModuleId,
    ModuleKind,
    ProofModule,
    PseudoFormalProof,
    build_proof,
    goodness_report,
    module_context,
    realize_premises,
    serialize_context,
    verification_order,
)
from .gateway import (
    Attachment,
    ChatGateway,
    ChatRequest,
    ChatResponse,
    HttpBackend,
    MockBackend,
    Pricing,
    TokenUsage,
    UsageLedger,
    cost,
    cost_exact,
)
from .metrics import LabeledPrediction, MetricSummary, k_sweep, summarize
from .pipeline import (
    AggregatedVerdict,
    BlockReport,
    PaperInput,
    PipelineConfig,
    RolloutResult,
    StepInput,
    StepVerdicts,
    TranslationOutcome,
    VerificationPipeline,
)
from .textio import (
    BlockVerdict,
    CalibrationResult,
    DocumentMode,
    ErrorEntry,
    ErrorList,
    FaithfulnessVerdict,
    PfBlock,
    PfDocument,
    parse_block_verdict,
    parse_calibration,
    parse_error_list,
    parse_faithfulness_verdict,
    parse_pf_document,
    parse_step_verdict_line,
    serialize_proof,
    to_proof,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
