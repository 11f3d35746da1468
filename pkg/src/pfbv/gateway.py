"""Uniform chat-completion client with retries, usage metering and cost.

Two backends share one interface: an HTTP backend speaking an OpenAI-style
chat wire format, and a deterministic scripted backend for tests and replay.
Every completed call is recorded in a :class:`UsageLedger` under a
caller-declared stage label; dollar cost is computed exactly (fractions
internally) and rounded only for display.
"""

from __future__ import annotations

import base64
import hashlib
import json
import random
import threading
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import (
    AttachmentUnsupported,
    BackendRefused,
    TransientTransportError,
    TransportExhausted,
)

# --------------------------------------------------------------------------
# usage and cost


@dataclass(frozen=True)
class TokenUsage:
    input_tokens: int = 0
    cached_input_tokens: int = 0
    output_tokens: int = 0

    def __post_init__(self):
        if min(self.input_tokens, self.cached_input_tokens, self.output_tokens) < 0:
            raise ValueError("token counts must be >= 0")

    def __add__(self, other: "TokenUsage") -> "TokenUsage":
        return TokenUsage(
            self.input_tokens + other.input_tokens,
            self.cached_input_tokens + other.cached_input_tokens,
            self.output_tokens + other.output_tokens,
        )

    def to_json_dict(self) -> dict:
        return {
            "input_tokens": self.input_tokens,
            "cached_input_tokens": self.cached_input_tokens,
            "output_tokens": self.output_tokens,
        }


@dataclass(frozen=True)
class Pricing:
    """Dollars per million tokens."""

    input_per_m: float = 0.75
    cached_per_m: float = 0.075
    output_per_m: float = 4.50


DEFAULT_PRICING = Pricing()


def cost_exact(usage: TokenUsage, pricing: Pricing = DEFAULT_PRICING) -> Fraction:
    """Exact dollar cost of a usage triple."""
    million = Fraction(1_000_000)
    return (
        Fraction(usage.input_tokens) / million * Fraction(str(pricing.input_per_m))
        + Fraction(usage.cached_input_tokens) / million * Fraction(str(pricing.cached_per_m))
        + Fraction(usage.output_tokens) / million * Fraction(str(pricing.output_per_m))
    )


def cost(usage: TokenUsage, pricing: Pricing = DEFAULT_PRICING) -> float:
    return float(cost_exact(usage, pricing))


def format_dollars(amount) -> str:
    """Render a cost rounded to cents, e.g. ``$33.11``."""
    cents = round(Fraction(amount) * 100)
    return f"${cents / 100:.2f}"


class UsageLedger:
    """Thread-safe per-stage accumulator of call counts and token triples.

    The total cost is defined as the sum of per-stage costs, all computed
    exactly, so additivity holds to full precision by construction.
    """

    def __init__(self, pricing: Pricing = DEFAULT_PRICING):
        self.pricing = pricing
        self._lock = threading.Lock()
        self._calls: dict[str, int] = {}
        self._usage: dict[str, TokenUsage] = {}

    def record(self, stage: str, usage: TokenUsage) -> None:
        with self._lock:
            self._calls[stage] = self._calls.get(stage, 0) + 1
            self._usage[stage] = self._usage.get(stage, TokenUsage()) + usage

    def stages(self) -> list[str]:
        with self._lock:
            return sorted(self._usage)

    def stage_usage(self, stage: str) -> TokenUsage:
        with self._lock:
            return self._usage.get(stage, TokenUsage())

    def stage_calls(self, stage: str) -> int:
        with self._lock:
            return self._calls.get(stage, 0)

    def total_usage(self) -> TokenUsage:
        with self._lock:
            total = TokenUsage()
            for u in self._usage.values():
                total = total + u
            return total

    def stage_cost(self, stage: str) -> Fraction:
        return cost_exact(self.stage_usage(stage), self.pricing)

    def total_cost(self) -> Fraction:
        return sum((self.stage_cost(s) for s in self.stages()), Fraction(0))

    def to_json_dict(self) -> dict:
        out: dict = {"stages": {}, "total": {}}
        for stage in self.stages():
            usage = self.stage_usage(stage)
            out["stages"][stage] = {
                "calls": self.stage_calls(stage),
                **usage.to_json_dict(),
                "cost": float(self.stage_cost(stage)),
            }
        total = self.total_usage()
        out["total"] = {
            "calls": sum(self.stage_calls(s) for s in self.stages()),
            **total.to_json_dict(),
            "cost": float(self.total_cost()),
        }
        return out


# --------------------------------------------------------------------------
# requests and responses


@dataclass(frozen=True)
class Attachment:
    media_type: str
    data: bytes


@dataclass(frozen=True)
class ChatRequest:
    user_prompt: str
    system_prompt: str | None = None
    attachments: tuple[Attachment, ...] = ()
    model_name: str = "default"
    effort_hint: str | None = None
    max_retries: int = 3

    def __post_init__(self):
        if not self.user_prompt:
            raise ValueError("user_prompt must be non-empty")


@dataclass(frozen=True)
class ChatResponse:
    text: str
    usage: TokenUsage


def canonical_prompt(req: ChatRequest) -> str:
    """Normalized prompt text used for mock fingerprints: CRLF folded,
    trailing whitespace stripped, system and user parts joined."""
    parts = []
    if req.system_prompt:
        parts.append(req.system_prompt)
    parts.append(req.user_prompt)
    text = "\n\x00\n".join(parts)
    return "\n".join(line.rstrip() for line in text.replace("\r\n", "\n").splitlines()).strip()


def request_fingerprint(stage: str, req: ChatRequest) -> str:
    digest = hashlib.sha256()
    digest.update(stage.encode("utf-8"))
    digest.update(b"\x00")
    digest.update(canonical_prompt(req).encode("utf-8"))
    return digest.hexdigest()


# --------------------------------------------------------------------------
# backends


class MockBackend:
    """Deterministic scripted backend.

    A script is a list of entries ``{key_hint, stage?, responses: [...]}``.
    A request matches an entry when the entry's stage (if any) equals the
    call's stage label and its ``key_hint`` equals the request fingerprint or
    occurs verbatim in the canonicalized prompt.  Each entry keeps a cursor,
    so successive matching calls walk its response list (repair loops see a
    different reply on the second call); the last response then repeats.
    A response is ``{text, usage?}`` or ``{transient_failure: true}``.
    """

    supports_attachments = True

    def __init__(self, entries: list[dict]):
        self._entries = []
        for entry in entries:
            responses = entry.get("responses", [])
            if not responses:
                raise ValueError(f"script entry {entry.get('key_hint')!r} has no responses")
            self._entries.append(
                {
                    "key_hint": entry["key_hint"],
                    "stage": entry.get("stage"),
                    "responses": responses,
                    "cursor": 0,
                }
            )
        self._lock = threading.Lock()

    @classmethod
    def from_script(cls, path) -> "MockBackend":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(data)

    def send(self, req: ChatRequest, stage: str) -> ChatResponse:
        canonical = canonical_prompt(req)
        fingerprint = request_fingerprint(stage, req)
        with self._lock:
            for entry in self._entries:
                if entry["stage"] is not None and entry["stage"] != stage:
                    continue
                hint = entry["key_hint"]
                if hint != fingerprint and hint not in canonical:
                    continue
                idx = min(entry["cursor"], len(entry["responses"]) - 1)
                entry["cursor"] += 1
                response = entry["responses"][idx]
                break
            else:
                raise BackendRefused(
                    f"no scripted response for stage {stage!r} "
                    f"(fingerprint {fingerprint[:12]}...)"
                )
        if response.get("transient_failure"):
            raise TransientTransportError(f"scripted transient failure for stage {stage!r}")
        text = response["text"]
        usage = response.get("usage")
        if usage is None:
            token_usage = TokenUsage(len(canonical) // 4, 0, len(text) // 4)
        else:
            token_usage = TokenUsage(
                usage.get("input_tokens", 0),
                usage.get("cached_input_tokens", 0),
                usage.get("output_tokens", 0),
            )
        return ChatResponse(text=text, usage=token_usage)


class HttpBackend:
    """OpenAI-style chat-completion HTTP backend.

    Attachments are refused unless ``attachment_mode="inline_base64"``, in
    which case they ride along as base64 content parts; the exact encoding a
    provider expects is configuration, not something we guess.
    """

    def __init__(
        self,
        endpoint: str,
        api_key: str | None = None,
        timeout: float = 120.0,
        attachment_mode: str = "none",
        session=None,
    ):
        self.endpoint = endpoint
        self.api_key = api_key
        self.timeout = timeout
        self.attachment_mode = attachment_mode
        if session is None:
            import requests

            session = requests.Session()
        self._session = session

    @property
    def supports_attachments(self) -> bool:
        return self.attachment_mode == "inline_base64"

    def send(self, req: ChatRequest, stage: str) -> ChatResponse:
        import requests

        messages = []
        if req.system_prompt:
            messages.append({"role": "system", "content": req.system_prompt})
        if req.attachments:
            if not self.supports_attachments:
                raise AttachmentUnsupported(
                    "backend is not configured for attachments (set attachment_mode)"
                )
            content: list[dict] = [{"type": "text", "text": req.user_prompt}]
            for att in req.attachments:
                content.append(
                    {
                        "type": "file",
                        "media_type": att.media_type,
                        "data": base64.b64encode(att.data).decode("ascii"),
                    }
                )
            messages.append({"role": "user", "content": content})
        else:
            messages.append({"role": "user", "content": req.user_prompt})

        payload: dict = {"model": req.model_name, "messages": messages}
        if req.effort_hint:
            payload["reasoning_effort"] = req.effort_hint
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"

        try:
            resp = self._session.post(
                self.endpoint, json=payload, headers=headers, timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise TransientTransportError(str(exc)) from exc
        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransientTransportError(f"status {resp.status_code}")
        if resp.status_code >= 400:
            raise BackendRefused(f"status {resp.status_code}: {resp.text[:200]}")

        body = resp.json()
        text = body["choices"][0]["message"]["content"] or ""
        usage = body.get("usage", {})
        details = usage.get("prompt_tokens_details", {}) or {}
        return ChatResponse(
            text=text,
            usage=TokenUsage(
                usage.get("prompt_tokens", 0),
                details.get("cached_tokens", 0),
                usage.get("completion_tokens", 0),
            ),
        )


# --------------------------------------------------------------------------
# the gateway


class ChatGateway:
    """Retrying front door to a backend, with per-stage usage metering.

    Transient failures back off exponentially (base 1s, cap 60s, full
    jitter); non-retryable refusals propagate immediately.  ``sleep_fn`` and
    ``rng`` are injectable so tests run instantly and deterministically.
    """

    def __init__(
        self,
        backend,
        ledger: UsageLedger | None = None,
        backoff_base: float = 1.0,
        backoff_cap: float = 60.0,
        max_in_flight: int = 8,
        sleep_fn=time.sleep,
        rng: random.Random | None = None,
    ):
        self.backend = backend
        self.ledger = ledger if ledger is not None else UsageLedger()
        self.backoff_base = backoff_base
        self.backoff_cap = backoff_cap
        self._in_flight = threading.BoundedSemaphore(max_in_flight)
        self._sleep = sleep_fn
        self._rng = rng if rng is not None else random.Random()
        self._attempt_log: list[tuple[str, int]] = []

    @property
    def attempt_log(self) -> list[tuple[str, int]]:
        """(stage, attempts) per completed or exhausted call, for tests."""
        return list(self._attempt_log)

    def complete(self, req: ChatRequest, stage: str) -> ChatResponse:
        if req.attachments and not getattr(self.backend, "supports_attachments", False):
            raise AttachmentUnsupported("backend does not accept attachments")
        attempts = 0
        last_error: Exception | None = None
        while attempts <= req.max_retries:
            attempts += 1
            try:
                with self._in_flight:  # throttles concurrent fan-out
                    response = self.backend.send(req, stage)
            except TransientTransportError as exc:
                last_error = exc
                if attempts > req.max_retries:
                    break
                delay = min(self.backoff_cap, self.backoff_base * (2 ** (attempts - 1)))
                self._sleep(self._rng.uniform(0, delay))
                continue
            self._attempt_log.append((stage, attempts))
            self.ledger.record(stage, response.usage)
            return response
        self._attempt_log.append((stage, attempts))
        raise TransportExhausted(
            f"stage {stage!r} failed after {attempts} attempts: {last_error}"
        )
