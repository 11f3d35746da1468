"""Prompt templates, stored verbatim as text assets.

Templates contain literal braces (JSON samples, LaTeX), so substitution is
plain string replacement of known ``{name}`` placeholders rather than
``str.format``.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

_PACKAGE = __name__

STEP_BASELINE_SYSTEM = "step_baseline_system"
STEP_BASELINE_USER = "step_baseline_user"
REWRITER_SINGLE = "rewriter_single"
REWRITER_MULTI = "rewriter_multi"
BLOCK_VERIFIER = "block_verifier"
STEP_CALIBRATOR = "step_calibrator"
PAPER_CALIBRATOR = "paper_calibrator"
PAPER_BASELINE = "paper_baseline"
FAITHFULNESS = "faithfulness"
REGENERATION = "regeneration"
SELF_REPAIR = "self_repair"
PDF_TO_LATEX = "pdf_to_latex"
TRIAGE = "triage"
LOCATION_JUDGE = "location_judge"


@lru_cache(maxsize=None)
def load(name: str) -> str:
    return resources.files(_PACKAGE).joinpath(f"{name}.txt").read_text(encoding="utf-8")


def render(template: str, **fields: str) -> str:
    """Replace each ``{name}`` placeholder with its value.

    Every provided field must occur in the template; placeholders the caller
    does not provide are left alone (they are part of the template's literal
    text, e.g. JSON braces).
    """
    out = template
    for name, value in fields.items():
        placeholder = "{" + name + "}"
        if placeholder not in out:
            raise KeyError(f"template has no {placeholder} placeholder")
        out = out.replace(placeholder, str(value))
    return out


def render_named(name: str, **fields: str) -> str:
    return render(load(name), **fields)
