"""Benchmark-construction mining: arXiv metadata retrieval, regex filtering
of revision comments, and model triage of what each revision fixed.

The funnel has three stages: retrieve metadata for a date window, keep
records whose revision comment mentions both a correction and a formal
result (two conjunctive case-insensitive regexes), then triage the comment
into major / minor / none and retain major and minor.  Source download and
license screening stay manual: the harvest emits a worklist with download
URLs and a checklist instead of fetching sources itself.
"""

from __future__ import annotations

import json
import re
import time
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from datetime import date

from . import prompts
from .errors import ApiUnavailable, GatewayError, UnparseableLabel
from .gateway import Attachment, ChatGateway, ChatRequest

STAGE_TRIAGE = "triage"
STAGE_PDF_TO_LATEX = "pdf_to_latex"

CORRECTION_RE = re.compile(
    r"correct|errat|error|fix|mistake|bug|flaw|wrong|revised|amendment", re.IGNORECASE
)
RESULT_RE = re.compile(r"lemma|theorem|proposition", re.IGNORECASE)

TRIAGE_LABELS = ("major", "minor", "none")


@dataclass(frozen=True)
class ArxivRecord:
    arxiv_id: str
    version: int
    primary_category: str
    published: date
    abstract: str
    revision_comment: str | None = None

    def __post_init__(self):
        if self.version < 1:
            raise ValueError("version must be >= 1")


def regex_filter(record: ArxivRecord) -> bool:
    """True iff the revision comment exists and matches both the correction
    and the formal-result regex.  Records without a comment (v1 or no
    comment) never pass."""
    comment = record.revision_comment
    if not comment or not comment.strip():
        return False
    return bool(CORRECTION_RE.search(comment)) and bool(RESULT_RE.search(comment))


def parse_triage_label(text: str) -> str:
    tokens = text.strip().split()
    if len(tokens) != 1:  # the prompt demands exactly one word
        raise UnparseableLabel(f"expected a single word, got {text.strip()!r}")
    word = tokens[0].strip(".,!\"'`").lower()
    if word not in TRIAGE_LABELS:
        raise UnparseableLabel(f"expected major/minor/none, got {text.strip()!r}")
    return word


def triage(record: ArxivRecord, gateway: ChatGateway, model_name: str = "default") -> str:
    """Classify the revision comment as major, minor, or none.

    One retry on an unparseable reply; a second failure downgrades to
    ``none`` (the conservative label: the record is dropped).
    """
    prompt = prompts.render_named(prompts.TRIAGE, comments=record.revision_comment or "")
    req = ChatRequest(user_prompt=prompt, model_name=model_name)
    for attempt in range(2):
        text = gateway.complete(req, STAGE_TRIAGE).text
        try:
            return parse_triage_label(text)
        except UnparseableLabel:
            if attempt == 1:
                return "none"
    return "none"


def convert_pdf_to_latex(pdf: bytes, gateway: ChatGateway, model_name: str = "default") -> str:
    """Recover candidate LaTeX source from a rendered PDF.

    Used for papers whose source files are unavailable; the output stands in
    for the original .tex and its fidelity is not validated here.
    """
    req = ChatRequest(
        user_prompt=prompts.load(prompts.PDF_TO_LATEX),
        model_name=model_name,
        attachments=(Attachment("application/pdf", pdf),),
    )
    return gateway.complete(req, STAGE_PDF_TO_LATEX).text


# --------------------------------------------------------------------------
# arXiv API client


_ATOM_NS = {
    "atom": "http://www.w3.org/2005/Atom",
    "arxiv": "http://arxiv.org/schemas/atom",
}

_ID_RE = re.compile(r"/abs/(.+?)(?:v(\d+))?$")


def parse_atom_feed(xml_text: str) -> list[ArxivRecord]:
    """Extract records from an arXiv API Atom response."""
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        raise ApiUnavailable(f"malformed Atom response: {exc}") from None
    records = []
    for entry in root.findall("atom:entry", _ATOM_NS):
        raw_id = (entry.findtext("atom:id", "", _ATOM_NS) or "").strip()
        m = _ID_RE.search(raw_id)
        if not m:
            continue
        arxiv_id = m.group(1)
        version = int(m.group(2)) if m.group(2) else 1
        category = entry.find("arxiv:primary_category", _ATOM_NS)
        published_text = (entry.findtext("atom:published", "", _ATOM_NS) or "")[:10]
        try:
            published = date.fromisoformat(published_text)
        except ValueError:
            published = date(1970, 1, 1)
        comment = entry.findtext("arxiv:comment", None, _ATOM_NS)
        records.append(
            ArxivRecord(
                arxiv_id=arxiv_id,
                version=version,
                primary_category=category.get("term", "") if category is not None else "",
                published=published,
                abstract=(entry.findtext("atom:summary", "", _ATOM_NS) or "").strip(),
                revision_comment=comment.strip() if comment else None,
            )
        )
    return records


class ArxivApiClient:
    """Paged metadata retrieval from the public arXiv API.

    Pages are fetched sequentially with a polite delay; 5xx/429 responses
    back off and retry a few times before giving up.
    """

    def __init__(
        self,
        base_url: str = "https://export.arxiv.org/api/query",
        page_size: int = 100,
        delay_s: float = 3.0,
        max_retries: int = 3,
        sleep_fn=time.sleep,
        session=None,
    ):
        self.base_url = base_url
        self.page_size = page_size
        self.delay_s = delay_s
        self.max_retries = max_retries
        self._sleep = sleep_fn
        if session is None:
            import requests

            session = requests.Session()
        self._session = session

    def fetch(self, start_date: date, end_date: date):
        """Yield records for math.* submissions in the window."""
        import requests

        window = (
            f"submittedDate:[{start_date.strftime('%Y%m%d')}0000+TO+"
            f"{end_date.strftime('%Y%m%d')}2359]"
        )
        query = f"search_query=cat:math.*+AND+{window}"
        start = 0
        while True:
            url = (
                f"{self.base_url}?{query}&start={start}"
                f"&max_results={self.page_size}&sortBy=submittedDate&sortOrder=ascending"
            )
            for attempt in range(self.max_retries + 1):
                try:
                    resp = self._session.get(url, timeout=60)
                except requests.RequestException as exc:
                    if attempt == self.max_retries:
                        raise ApiUnavailable(str(exc)) from exc
                    self._sleep(self.delay_s * (2 ** attempt))
                    continue
                if resp.status_code in (429, 503) or resp.status_code >= 500:
                    if attempt == self.max_retries:
                        raise ApiUnavailable(f"status {resp.status_code}")
                    self._sleep(self.delay_s * (2 ** attempt))
                    continue
                if resp.status_code != 200:
                    raise ApiUnavailable(f"status {resp.status_code}")
                break
            page = parse_atom_feed(resp.text)
            if not page:
                return
            yield from page
            start += self.page_size
            self._sleep(self.delay_s)


class StubArxivClient:
    """Recorded-response stand-in for the API client."""

    def __init__(self, records: list[ArxivRecord]):
        self._records = list(records)

    def fetch(self, start_date: date, end_date: date):
        for r in self._records:
            if start_date <= r.published <= end_date:
                yield r


# --------------------------------------------------------------------------
# harvest


MANUAL_CHECKLIST = (
    "download the pre-correction source (version - 1) from the listed URL",
    "consolidate multi-file sources into a single LaTeX file",
    "drop papers with a non-permissive license",
    "drop false positives (comment does not describe a mathematical fix)",
    "extract error_locations from the revision comment",
)


@dataclass(frozen=True)
class HarvestResult:
    retained: tuple[tuple[ArxivRecord, str], ...]  # (record, triage label)
    funnel: dict
    log: tuple[str, ...]

    def worklist(self) -> list[dict]:
        """Worklist rows in the paper-dataset ingestion shape (minus
        error_locations, which stay a manual step)."""
        rows = []
        for record, label in self.retained:
            prev = max(record.version - 1, 1)
            rows.append(
                {
                    "id": record.arxiv_id,
                    "latex_source": "",
                    "revision_comment": record.revision_comment or "",
                    "triage_label": label,
                    "version": record.version,
                    "primary_category": record.primary_category,
                    "published": record.published.isoformat(),
                    "download_url": f"https://arxiv.org/e-print/{record.arxiv_id}v{prev}",
                    "manual_checklist": list(MANUAL_CHECKLIST),
                }
            )
        return rows

    def worklist_jsonl(self) -> str:
        return "".join(json.dumps(row, sort_keys=True) + "\n" for row in self.worklist())


def harvest(
    start_date: date,
    end_date: date,
    client,
    gateway: ChatGateway,
    model_name: str = "default",
) -> HarvestResult:
    """Run the retrieval -> regex -> triage funnel over a date window."""
    log: list[str] = []
    retrieved = 0
    passed_regex: list[ArxivRecord] = []
    for record in client.fetch(start_date, end_date):
        retrieved += 1
        if regex_filter(record):
            passed_regex.append(record)
        else:
            log.append(f"regex drop {record.arxiv_id}")

    retained: list[tuple[ArxivRecord, str]] = []
    for record in passed_regex:
        try:
            label = triage(record, gateway, model_name)
        except GatewayError as exc:
            log.append(f"triage failed {record.arxiv_id}: {exc}")
            continue
        if label in ("major", "minor"):
            retained.append((record, label))
            log.append(f"retain {record.arxiv_id} ({label})")
        else:
            log.append(f"triage drop {record.arxiv_id} (none)")

    funnel = {
        "retrieved": retrieved,
        "regex_pass": len(passed_regex),
        "retained": len(retained),
    }
    return HarvestResult(tuple(retained), funnel, tuple(log))
