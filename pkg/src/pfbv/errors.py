"""Typed exceptions shared across the package.

Every parser and builder raises a subclass of :class:`PfError`, so callers
can always catch one base type.  Parsers are total: any input yields either
a typed value or one of these errors, never a bare crash.
"""

from __future__ import annotations


class PfError(Exception):
    """Base class for all package errors."""


# --- proof construction ----------------------------------------------------

class ProofError(PfError):
    """Base class for structural errors in a pseudo-formal proof."""


class DuplicateId(ProofError):
    pass


class DanglingEdge(ProofError):
    pass


class CycleInDependencyGraph(ProofError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("invocation cycle: " + " -> ".join(str(m) for m in self.cycle))


class ScopeNotForest(ProofError):
    pass


class InvalidModuleId(ProofError):
    pass


class BadLemmaPrefix(ProofError):
    pass


class ForwardReference(ProofError):
    pass


class UnknownId(ProofError):
    pass


# --- text formats ----------------------------------------------------------

class ParseError(PfError):
    """Base class for text-format errors.  ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MalformedTag(ParseError):
    pass


class NestedTag(ParseError):
    pass


class MissingId(ParseError):
    pass


class TextOutsideTags(ParseError):
    pass


class OrphanProof(ParseError):
    pass


class MissingProof(ParseError):
    pass


class ModeMismatch(ParseError):
    pass


class EmptyConclusion(ParseError):
    pass


class UnserializableText(PfError):
    pass


class NoJsonBlock(ParseError):
    pass


class UnknownVerdictString(ParseError):
    pass


class MissingDescription(ParseError):
    pass


class NoVerdictLine(ParseError):
    pass


class LengthMismatch(ParseError):
    pass


class UnknownToken(ParseError):
    pass


class NoCalibrationBlock(ParseError):
    pass


class NoErrorsBlock(ParseError):
    pass


class MalformedErrorEntry(ParseError):
    pass


# --- gateway ---------------------------------------------------------------

class GatewayError(PfError):
    pass


class TransientTransportError(GatewayError):
    """Retryable failure of a single attempt (timeouts, 5xx, throttling)."""


class TransportExhausted(GatewayError):
    pass


class BackendRefused(GatewayError):
    pass


class AttachmentUnsupported(GatewayError):
    pass


# --- pipeline --------------------------------------------------------------

class PipelineError(PfError):
    pass


class UnparseableRewrite(PipelineError):
    pass


class CalibrationParseFailure(PipelineError):
    pass


class RolloutsExhausted(PipelineError):
    pass


# --- benchmarks and mining -------------------------------------------------

class SchemaViolation(PfError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InsufficientRollouts(PfError):
    pass


class JudgeUnavailable(PfError):
    pass


class UnparseableLabel(PfError):
    pass


class ApiUnavailable(PfError):
    pass
