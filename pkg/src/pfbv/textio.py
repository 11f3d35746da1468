"""Parsing and serialization of every text format the pipeline exchanges.

Five grammars live here: the XML-tagged proof document, the verifier verdict
JSON, the faithfulness verdict JSON, the calibration XML, and the error-list
XML (plus the one-line step-verdict format).  Parsers are total: any input
yields a typed value or a typed error from :mod:`pfbv.errors`, never a bare
crash.  Location strings and module bodies are preserved verbatim; all text
is UTF-8 end to end.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum

from . import core
from .core import ModuleId, ModuleKind, ProofModule, PseudoFormalProof
from .errors import (
    BadLemmaPrefix,
    DuplicateId,
    EmptyConclusion,
    ForwardReference,
    LengthMismatch,
    MalformedErrorEntry,
    MalformedTag,
    MissingDescription,
    MissingId,
    MissingProof,
    ModeMismatch,
    NestedTag,
    NoCalibrationBlock,
    NoErrorsBlock,
    NoJsonBlock,
    NoVerdictLine,
    OrphanProof,
    TextOutsideTags,
    UnknownToken,
    UnknownVerdictString,
    UnserializableText,
)

# --------------------------------------------------------------------------
# tagged proof documents


class BlockTag(Enum):
    THEOREM_STATEMENT = "THEOREM_STATEMENT"
    PROPOSITION_STATEMENT = "PROPOSITION_STATEMENT"
    LEMMA_STATEMENT = "LEMMA_STATEMENT"
    LEMMA_PROOF = "LEMMA_PROOF"
    PROPOSITION_PROOF = "PROPOSITION_PROOF"
    THEOREM_PROOF = "THEOREM_PROOF"


_TAG_NAMES = [t.value for t in BlockTag]
_OPEN_RE = re.compile(
    r'^\s*<(' + "|".join(_TAG_NAMES) + r')(?:\s+id="([^"]*)")?\s*>\s*$'
)
_CLOSE_RE = re.compile(r"^\s*</(" + "|".join(_TAG_NAMES) + r")\s*>\s*$")
_TAGLIKE_RE = re.compile(r"^\s*<[^>]*>\s*$")

#: Tags whose id attribute is mandatory at parse time.  Theorem tags may be
#: unnumbered (single-theorem documents); the document mode check happens in
#: :func:`to_proof`.
_ID_REQUIRED = {
    BlockTag.PROPOSITION_STATEMENT,
    BlockTag.LEMMA_STATEMENT,
    BlockTag.LEMMA_PROOF,
    BlockTag.PROPOSITION_PROOF,
}

_STATEMENT_TAGS = {
    BlockTag.THEOREM_STATEMENT: ModuleKind.THEOREM,
    BlockTag.PROPOSITION_STATEMENT: ModuleKind.PROPOSITION,
    BlockTag.LEMMA_STATEMENT: ModuleKind.LEMMA,
}
_PROOF_TAGS = {
    BlockTag.THEOREM_PROOF: ModuleKind.THEOREM,
    BlockTag.PROPOSITION_PROOF: ModuleKind.PROPOSITION,
    BlockTag.LEMMA_PROOF: ModuleKind.LEMMA,
}
_STATEMENT_TAG_OF = {v: k for k, v in _STATEMENT_TAGS.items()}
_PROOF_TAG_OF = {v: k for k, v in _PROOF_TAGS.items()}


@dataclass(frozen=True)
class PfBlock:
    tag: BlockTag
    id: str | None
    body: str
    line: int = 0


@dataclass(frozen=True)
class PfDocument:
    blocks: tuple[PfBlock, ...]


class DocumentMode(Enum):
    SINGLE_THEOREM = "single"
    MULTI_THEOREM = "multi"


def parse_pf_document(text: str) -> PfDocument:
    """Split a tagged document into its top-level blocks.

    Only line-anchored known tags act as delimiters, so tag-like text inside
    a body (LaTeX, inline mentions) passes through untouched.  Whitespace
    between blocks is tolerated; any other text outside a tag is an error.
    """
    blocks: list[PfBlock] = []
    current: tuple[BlockTag, str | None, int] | None = None
    body_lines: list[str] = []

    for lineno, line in enumerate(text.splitlines(), start=1):
        open_m = _OPEN_RE.match(line)
        close_m = _CLOSE_RE.match(line)
        if current is None:
            if open_m:
                tag = BlockTag(open_m.group(1))
                tag_id = open_m.group(2)
                if tag in _ID_REQUIRED and not tag_id:
                    raise MissingId(f"<{tag.value}> requires an id attribute", lineno)
                if tag_id == "":
                    raise MissingId(f"<{tag.value}> has an empty id attribute", lineno)
                current = (tag, tag_id, lineno)
                body_lines = []
            elif close_m:
                raise MalformedTag(f"closing </{close_m.group(1)}> with no open tag", lineno)
            elif _TAGLIKE_RE.match(line):
                raise MalformedTag(f"unknown or malformed tag: {line.strip()}", lineno)
            elif line.strip():
                raise TextOutsideTags(f"text outside tags: {line.strip()[:60]}", lineno)
        else:
            tag, tag_id, open_line = current
            if close_m:
                if close_m.group(1) != tag.value:
                    raise MalformedTag(
                        f"</{close_m.group(1)}> closes <{tag.value}>", lineno
                    )
                blocks.append(PfBlock(tag, tag_id, "\n".join(body_lines).strip(), open_line))
                current = None
            elif open_m:
                raise NestedTag(
                    f"<{open_m.group(1)}> opened inside <{tag.value}>", lineno
                )
            else:
                body_lines.append(line)

    if current is not None:
        raise MalformedTag(f"<{current[0].value}> never closed", current[2])
    return PfDocument(tuple(blocks))


_STATEMENT_MARKER = re.compile(r"^\s*Statement\s*:\s*(.*)$")
_PREMISES_HEADER = re.compile(r"^\s*Assumptions\s*/\s*Conditions\s*/\s*Definitions\.?\s*$")


def split_statement_body(body: str) -> tuple[str, str]:
    """Split a statement block into (premises, conclusion).

    The conclusion starts at the first line-anchored ``Statement :`` marker;
    everything before it, minus the assumptions header line, is the premises
    block.  Without a marker the whole body is the conclusion.
    """
    lines = body.splitlines()
    for i, line in enumerate(lines):
        m = _STATEMENT_MARKER.match(line)
        if m:
            before = lines[:i]
            if before and _PREMISES_HEADER.match(before[0]):
                before = before[1:]
            tail = [m.group(1)] if m.group(1).strip() else []
            conclusion = "\n".join(tail + lines[i + 1:]).strip()
            return "\n".join(before).strip(), conclusion
    return "", body.strip()


def to_proof(
    doc: PfDocument,
    mode: DocumentMode = DocumentMode.SINGLE_THEOREM,
    prune_invocations: bool = False,
) -> PseudoFormalProof:
    """Pair statements with proofs and build the validated proof.

    Scope and invocation edges are derived structurally (propositions invoke
    their own lemmas and earlier propositions; theorem proofs invoke the
    propositions); ``prune_invocations`` restricts edges to modules actually
    mentioned in the invoking proof text.
    """
    statements: list[tuple[ModuleId, PfBlock]] = []
    stmt_keys: set[ModuleId] = set()
    proofs: dict[ModuleId, PfBlock] = {}

    for block in doc.blocks:
        if block.tag in _STATEMENT_TAGS:
            kind = _STATEMENT_TAGS[block.tag]
            mid = _module_id(kind, block, mode)
            if mid in stmt_keys:
                raise DuplicateId(f"duplicate {mid.label()} statement (line {block.line})")
            stmt_keys.add(mid)
            statements.append((mid, block))
        else:
            kind = _PROOF_TAGS[block.tag]
            mid = _module_id(kind, block, mode)
            if mid in proofs:
                raise OrphanProof(f"second proof for {mid.label()}", block.line)
            proofs[mid] = block

    n_theorems = sum(1 for mid, _ in statements if mid.kind is ModuleKind.THEOREM)
    if mode is DocumentMode.SINGLE_THEOREM and n_theorems != 1:
        raise ModeMismatch(f"single-theorem document must have exactly one theorem, got {n_theorems}")

    for mid in proofs:
        if mid not in stmt_keys:
            raise OrphanProof(f"proof of {mid.label()} has no matching statement")
    for mid, block in statements:
        if mid not in proofs:
            raise MissingProof(f"{mid.label()} has no proof block", block.line)

    _check_statement_order(statements)

    modules = []
    for mid, block in statements:
        premises, conclusion = split_statement_body(block.body)
        if not conclusion:
            raise EmptyConclusion(f"{mid.label()} has an empty statement", block.line)
        modules.append(ProofModule(mid, premises, conclusion, proofs[mid].body))

    scope_edges, invoke_edges = structural_edges(modules, prune=prune_invocations)
    return core.build_proof(modules, scope_edges, invoke_edges)


def _module_id(kind: ModuleKind, block: PfBlock, mode: DocumentMode) -> ModuleId:
    if kind is ModuleKind.THEOREM:
        if mode is DocumentMode.SINGLE_THEOREM:
            if block.id is not None:
                raise ModeMismatch(
                    f"single-theorem document has a numbered <{block.tag.value}>", block.line
                )
            return ModuleId(kind, "")
        if block.id is None:
            raise MissingId(f"<{block.tag.value}> requires an id in multi-theorem mode", block.line)
    return ModuleId(kind, block.id or "")


def _check_statement_order(statements: list[tuple[ModuleId, PfBlock]]) -> None:
    """Reject forward references: numbering must increase in document order
    and every lemma must follow its proposition's statement."""
    all_props = {mid.index for mid, _ in statements if mid.kind is ModuleKind.PROPOSITION}
    last_theorem = last_prop = -1
    last_lemma_minor: dict[str, int] = {}
    props_seen: set[str] = set()
    for mid, block in statements:
        if mid.kind is ModuleKind.THEOREM:
            n = int(mid.index) if mid.index else 0
            if n <= last_theorem:
                raise ForwardReference(f"{mid.label()} appears out of order (line {block.line})")
            last_theorem = n
        elif mid.kind is ModuleKind.PROPOSITION:
            n = int(mid.index)
            if n <= last_prop:
                raise ForwardReference(f"{mid.label()} appears out of order (line {block.line})")
            last_prop = n
            props_seen.add(mid.index)
        else:
            major, minor = mid.index.split(".")
            if major not in all_props:
                raise BadLemmaPrefix(f"{mid.label()}: no Proposition {major} in the document")
            if major not in props_seen:
                raise ForwardReference(
                    f"{mid.label()} appears before Proposition {major} (line {block.line})"
                )
            if int(minor) <= last_lemma_minor.get(major, -1):
                raise ForwardReference(f"{mid.label()} appears out of order (line {block.line})")
            last_lemma_minor[major] = int(minor)


# mention scanning: only explicit result references count, never bare letters
_MENTION_RES = {
    ModuleKind.THEOREM: re.compile(r"\b(?:Theorem|Thm\.?)\s+(\d+)\b"),
    ModuleKind.PROPOSITION: re.compile(r"\b(?:Proposition|Prop\.?)\s+(\d+)\b"),
    ModuleKind.LEMMA: re.compile(r"\b(?:Lemma|Lem\.?)\s+(\d+\.\d+)\b"),
}


def mentioned_ids(text: str) -> set[ModuleId]:
    found: set[ModuleId] = set()
    for kind, rx in _MENTION_RES.items():
        for m in rx.finditer(text):
            found.add(ModuleId(kind, m.group(1)))
    return found


def structural_edges(modules, prune: bool = False):
    """Derive scope and invocation edges from module identities.

    Invocation: a proposition invokes its own lemmas and every earlier
    proposition; a theorem invokes every proposition and, in multi-theorem
    documents, every earlier theorem.  With ``prune`` on, an edge survives
    only when the invoked module is mentioned by name in the invoking proof
    text.  Scope: lemmas under their prefix proposition; propositions under
    the first theorem (document order) whose proof invokes them.
    """
    theorems = [m for m in modules if m.id.kind is ModuleKind.THEOREM]
    props = [m for m in modules if m.id.kind is ModuleKind.PROPOSITION]
    lemmas = [m for m in modules if m.id.kind is ModuleKind.LEMMA]

    def prop_num(m):
        return int(m.id.index)

    invoke: list[tuple[ModuleId, ModuleId]] = []
    for p in props:
        targets = [l.id for l in lemmas if l.id.lemma_prefix == p.id.index]
        targets += [q.id for q in props if prop_num(q) < prop_num(p)]
        invoke += [(p.id, t) for t in targets]
    for i, t in enumerate(theorems):
        targets = [p.id for p in props]
        targets += [s.id for s in theorems[:i]]
        invoke += [(t.id, x) for x in targets]

    if prune:
        mentions = {m.id: mentioned_ids(m.proof) for m in modules}
        invoke = [(src, dst) for src, dst in invoke if dst in mentions[src]]

    scope: list[tuple[ModuleId, ModuleId]] = []
    theorem_order = {t.id: i for i, t in enumerate(theorems)}
    invokers_of: dict[ModuleId, list[ModuleId]] = {}
    for src, dst in invoke:
        invokers_of.setdefault(dst, []).append(src)
    for p in props:
        parents = sorted(
            (s for s in invokers_of.get(p.id, []) if s.kind is ModuleKind.THEOREM),
            key=lambda s: theorem_order[s],
        )
        if parents:
            scope.append((p.id, parents[0]))
    for l in lemmas:
        scope.append((l.id, ModuleId(ModuleKind.PROPOSITION, l.id.lemma_prefix)))

    return scope, invoke


_SERIALIZE_FORBIDDEN = [f"<{n}" for n in _TAG_NAMES] + [f"</{n}" for n in _TAG_NAMES]


def _check_serializable(mid: ModuleId, field_name: str, text: str) -> None:
    for line in text.splitlines():
        stripped = line.lstrip()
        for opener in _SERIALIZE_FORBIDDEN:
            if stripped.startswith(opener):
                raise UnserializableText(
                    f"{mid.label()} {field_name} contains a line-anchored tag: {line.strip()!r}"
                )
        if field_name == "premises" and _STATEMENT_MARKER.match(line):
            raise UnserializableText(
                f"{mid.label()} premises contain a 'Statement :' marker line"
            )


def serialize_proof(proof: PseudoFormalProof) -> str:
    """Emit the canonical tagged document: theorem statements first, then
    each proposition with its lemmas and proofs, theorem proofs last.
    Module text is emitted verbatim; text that would be re-parsed as a tag
    is rejected rather than escaped (the grammar has no escape facility)."""
    theorems = [m for m in proof.modules if m.id.kind is ModuleKind.THEOREM]
    props = [m for m in proof.modules if m.id.kind is ModuleKind.PROPOSITION]
    lemmas = [m for m in proof.modules if m.id.kind is ModuleKind.LEMMA]

    for m in proof.modules:
        _check_serializable(m.id, "premises", m.premises)
        _check_serializable(m.id, "conclusion", m.conclusion)
        _check_serializable(m.id, "proof", m.proof)

    def open_tag(tag: BlockTag, mid: ModuleId) -> str:
        if mid.index:
            return f'<{tag.value} id="{mid.index}">'
        return f"<{tag.value}>"

    def statement_block(m: ProofModule) -> str:
        tag = _STATEMENT_TAG_OF[m.id.kind]
        lines = [open_tag(tag, m.id)]
        if m.premises:
            lines.append("Assumptions / Conditions / Definitions.")
            lines.append(m.premises)
        lines.append("Statement :")
        lines.append(m.conclusion)
        lines.append(f"</{tag.value}>")
        return "\n".join(lines)

    def proof_block(m: ProofModule) -> str:
        tag = _PROOF_TAG_OF[m.id.kind]
        return "\n".join([open_tag(tag, m.id), m.proof, f"</{tag.value}>"])

    out: list[str] = [statement_block(t) for t in theorems]
    for p in props:
        out.append(statement_block(p))
        for l in lemmas:
            if l.id.lemma_prefix == p.id.index:
                out.append(statement_block(l))
                out.append(proof_block(l))
        out.append(proof_block(p))
    out += [proof_block(t) for t in theorems]
    return "\n\n".join(out) + "\n"


# --------------------------------------------------------------------------
# verdict JSON


@dataclass(frozen=True)
class BlockVerdict:
    correct: bool
    error_description: str | None = None

    def __post_init__(self):
        if self.correct and self.error_description is not None:
            object.__setattr__(self, "error_description", None)


@dataclass(frozen=True)
class FaithfulnessVerdict:
    faithful: bool
    error_description: str | None = None


_FENCE_RE = re.compile(r"```[a-zA-Z]*\s*\n?(.*?)\n?\s*```", re.DOTALL)


def _loads_lenient(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        # model output often carries raw LaTeX backslashes; escape the
        # invalid ones and retry
        repaired = re.sub(r'\\(?![\\/"bfnrtu])', r"\\\\", text)
        return json.loads(repaired)


def _trailing_json_object(response: str) -> dict:
    fences = _FENCE_RE.findall(response)
    if fences:
        candidate = fences[-1].strip()
        try:
            obj = _loads_lenient(candidate)
        except json.JSONDecodeError:
            raise NoJsonBlock("last fenced block is not a JSON object") from None
    else:
        end = response.rfind("}")
        if end == -1:
            raise NoJsonBlock("no JSON object in response")
        depth = 0
        start = -1
        for i in range(end, -1, -1):
            ch = response[i]
            if ch == "}":
                depth += 1
            elif ch == "{":
                depth -= 1
                if depth == 0:
                    start = i
                    break
        if start == -1:
            raise NoJsonBlock("unbalanced braces in trailing JSON")
        try:
            obj = _loads_lenient(response[start:end + 1])
        except json.JSONDecodeError:
            raise NoJsonBlock("trailing text is not a JSON object") from None
    if not isinstance(obj, dict):
        raise NoJsonBlock("trailing JSON is not an object")
    return obj


def _parse_verdict_json(response: str, positive: str, negative: str):
    obj = _trailing_json_object(response)
    verdict = obj.get("verdict")
    if verdict == positive:
        return True, None
    if verdict == negative:
        description = obj.get("error_description")
        if not description:
            raise MissingDescription(f"{negative} verdict without an error_description")
        return False, str(description)
    raise UnknownVerdictString(f"unknown verdict value: {verdict!r}")


def parse_block_verdict(response: str) -> BlockVerdict:
    """Extract the trailing JSON verdict of a block check.

    The last fenced block wins (earlier ones may appear in the analysis); an
    unfenced trailing object is accepted too.  Verdict strings are matched
    case-sensitively.
    """
    correct, description = _parse_verdict_json(response, "CORRECT", "INCORRECT")
    return BlockVerdict(correct, description)


def parse_faithfulness_verdict(response: str) -> FaithfulnessVerdict:
    faithful, description = _parse_verdict_json(response, "FAITHFUL", "UNFAITHFUL")
    return FaithfulnessVerdict(faithful, description)


# --------------------------------------------------------------------------
# step-verdict line


def parse_step_verdict_line(response: str, num_steps: int) -> list[bool]:
    """Parse the final ``Verdict: yes, no, ...`` line into booleans
    (True = step correct).  The token count must equal ``num_steps``."""
    if num_steps < 1:
        raise ValueError("num_steps must be >= 1")
    tail = None
    for line in reversed(response.splitlines()):
        stripped = line.strip()
        if stripped.startswith("Verdict:"):
            tail = stripped[len("Verdict:"):]
            break
    if tail is None:
        raise NoVerdictLine("no line beginning 'Verdict:'")
    tokens = [t.strip().lower() for t in tail.split(",")]
    if len(tokens) != num_steps:
        raise LengthMismatch(f"expected {num_steps} verdict tokens, got {len(tokens)}")
    out: list[bool] = []
    for tok in tokens:
        if tok == "yes":
            out.append(True)
        elif tok == "no":
            out.append(False)
        else:
            raise UnknownToken(f"verdict token must be yes or no, got {tok!r}")
    return out


# --------------------------------------------------------------------------
# calibration XML


@dataclass(frozen=True)
class FlagAudit:
    source: str
    status: str  # "genuine" or "false_alarm"
    original_step: int
    explanation: str


@dataclass(frozen=True)
class CalibrationResult:
    flag_audits: tuple[FlagAudit, ...]
    additional_errors: tuple[tuple[int, str], ...]
    step_verdicts: tuple[bool, ...]
    first_incorrect_step: int
    warnings: tuple[str, ...] = ()


def _tag_body(text: str, tag: str) -> str | None:
    matches = re.findall(rf"<{tag}>(.*?)</{tag}>", text, re.DOTALL)
    return matches[-1] if matches else None


def parse_calibration(response: str, num_steps: int) -> CalibrationResult:
    """Parse a ``<calibration>`` response.

    ``first_incorrect_step`` must equal the index of the first ``no``
    verdict (or -1); when the model disagrees with its own verdict list, the
    verdict list wins and the repair is recorded as a warning.
    """
    if num_steps < 1:
        raise ValueError("num_steps must be >= 1")
    scope = _tag_body(response, "calibration")
    if scope is None:
        scope = response
    verdict_body = _tag_body(scope, "step_verdicts")
    if verdict_body is None:
        raise NoCalibrationBlock("no <step_verdicts> block in response")
    tokens = [t.strip().lower() for t in verdict_body.strip().split(",")]
    if len(tokens) != num_steps:
        raise LengthMismatch(f"expected {num_steps} step verdicts, got {len(tokens)}")
    verdicts: list[bool] = []
    for tok in tokens:
        if tok == "yes":
            verdicts.append(True)
        elif tok == "no":
            verdicts.append(False)
        else:
            raise UnknownToken(f"step verdict must be yes or no, got {tok!r}")

    warnings: list[str] = []
    audits: list[FlagAudit] = []
    audit_body = _tag_body(scope, "flag_audit") or ""
    for entry in re.findall(r"<flag>(.*?)</flag>", audit_body, re.DOTALL):
        status = (_tag_body(entry, "status") or "").strip().lower()
        if status not in ("genuine", "false_alarm"):
            raise UnknownToken(f"flag status must be genuine or false_alarm, got {status!r}")
        step_text = (_tag_body(entry, "original_step") or "-1").strip()
        try:
            step = int(step_text)
        except ValueError:
            raise UnknownToken(f"original_step is not an integer: {step_text!r}") from None
        audits.append(
            FlagAudit(
                source=(_tag_body(entry, "source") or "").strip(),
                status=status,
                original_step=step,
                explanation=(_tag_body(entry, "explanation") or "").strip(),
            )
        )

    additional: list[tuple[int, str]] = []
    add_body = _tag_body(scope, "additional_errors") or ""
    for entry in re.findall(r"<error>(.*?)</error>", add_body, re.DOTALL):
        step_text = (_tag_body(entry, "original_step") or "-1").strip()
        try:
            step = int(step_text)
        except ValueError:
            raise UnknownToken(f"original_step is not an integer: {step_text!r}") from None
        additional.append((step, (_tag_body(entry, "description") or "").strip()))

    derived = next((i for i, v in enumerate(verdicts) if not v), -1)
    declared_body = _tag_body(scope, "first_incorrect_step")
    if declared_body is None:
        warnings.append(f"first_incorrect_step missing; derived {derived} from step verdicts")
    else:
        try:
            declared = int(declared_body.strip())
        except ValueError:
            declared = None
        if declared != derived:
            warnings.append(
                f"first_incorrect_step {declared_body.strip()!r} inconsistent with "
                f"step verdicts; repaired to {derived}"
            )

    return CalibrationResult(
        flag_audits=tuple(audits),
        additional_errors=tuple(additional),
        step_verdicts=tuple(verdicts),
        first_incorrect_step=derived,
        warnings=tuple(warnings),
    )


# --------------------------------------------------------------------------
# error-list XML


@dataclass(frozen=True)
class ErrorEntry:
    location: str
    description: str


@dataclass(frozen=True)
class ErrorList:
    errors: tuple[ErrorEntry, ...] = ()

    def locations(self) -> list[str]:
        return [e.location for e in self.errors]

    def __len__(self) -> int:
        return len(self.errors)

    def __iter__(self):
        return iter(self.errors)


def parse_error_list(response: str) -> ErrorList:
    """Parse the final ``<errors>`` block into location/description pairs.
    Locations are preserved verbatim; an empty block is an empty list."""
    blocks = re.findall(r"<errors>(.*?)</errors>", response, re.DOTALL)
    if not blocks:
        raise NoErrorsBlock("no <errors> block in response")
    body = blocks[-1]
    entries: list[ErrorEntry] = []
    for chunk in re.findall(r"<error>(.*?)</error>", body, re.DOTALL):
        loc = _tag_body(chunk, "location")
        if loc is None or not loc.strip():
            raise MalformedErrorEntry("error entry without a <location>")
        entries.append(ErrorEntry(loc.strip(), (_tag_body(chunk, "description") or "").strip()))
    return ErrorList(tuple(entries))
