"""Evaluation statistics: set-level and item-level precision/recall,
coverage, false errors per item, and k-sweep curves.

Counts are exact integers; ratios are computed at output time.  Degenerate
denominators yield ``None`` (rendered ``n/a``), never a silent 0 or 1.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InsufficientRollouts


@dataclass(frozen=True)
class LabeledPrediction:
    """One benchmark item: ground-truth set and predicted set, both over
    step indices or canonical location keys.  An empty truth set means the
    item is correct."""

    item_id: str
    truth: frozenset
    predicted: frozenset

    @classmethod
    def of(cls, item_id, truth, predicted) -> "LabeledPrediction":
        return cls(str(item_id), frozenset(truth), frozenset(predicted))


@dataclass(frozen=True)
class MetricSummary:
    tp: int
    fp: int
    fn: int
    proof_tp: int
    proof_fp: int
    proof_fn: int
    n_items: int
    n_positive_items: int
    covered_items: int
    false_error_total: int

    @staticmethod
    def _ratio(num: int, den: int) -> float | None:
        return None if den == 0 else num / den

    @property
    def precision(self) -> float | None:
        return self._ratio(self.tp, self.tp + self.fp)

    @property
    def recall(self) -> float | None:
        return self._ratio(self.tp, self.tp + self.fn)

    @property
    def proof_precision(self) -> float | None:
        return self._ratio(self.proof_tp, self.proof_tp + self.proof_fp)

    @property
    def proof_recall(self) -> float | None:
        return self._ratio(self.proof_tp, self.proof_tp + self.proof_fn)

    @property
    def coverage(self) -> float | None:
        return self._ratio(self.covered_items, self.n_positive_items)

    @property
    def mean_false_errors(self) -> float | None:
        return self._ratio(self.false_error_total, self.n_items)

    def to_json_dict(self) -> dict:
        def render(x):
            return "n/a" if x is None else x

        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": render(self.precision),
            "recall": render(self.recall),
            "proof_tp": self.proof_tp,
            "proof_fp": self.proof_fp,
            "proof_fn": self.proof_fn,
            "proof_precision": render(self.proof_precision),
            "proof_recall": render(self.proof_recall),
            "coverage": render(self.coverage),
            "mean_false_errors": render(self.mean_false_errors),
            "n_items": self.n_items,
            "n_positive_items": self.n_positive_items,
        }


CSV_FIELDS = [
    "k", "tp", "fp", "fn", "precision", "recall",
    "proof_precision", "proof_recall", "coverage", "mean_false_errors",
]


def summarize(preds: list[LabeledPrediction]) -> MetricSummary:
    """Aggregate element-level and item-level counts over a prediction set.

    Element level: TP = sum |predicted & truth|, FP = sum |predicted - truth|,
    FN = sum |truth - predicted|.  Item level: an item is positive when its
    truth set is non-empty, predicted positive when its predicted set is.
    Coverage is the fraction of positive items whose truth is fully covered;
    mean false errors averages |predicted - truth| over all items.
    """
    ids = [p.item_id for p in preds]
    if len(set(ids)) != len(ids):
        raise ValueError("item_ids must be unique")

    tp = fp = fn = 0
    proof_tp = proof_fp = proof_fn = 0
    covered = 0
    false_total = 0
    n_positive = 0
    for p in preds:
        tp += len(p.predicted & p.truth)
        fp += len(p.predicted - p.truth)
        fn += len(p.truth - p.predicted)
        false_total += len(p.predicted - p.truth)
        truth_pos = bool(p.truth)
        pred_pos = bool(p.predicted)
        if truth_pos:
            n_positive += 1
            if p.truth <= p.predicted:
                covered += 1
            if pred_pos:
                proof_tp += 1
            else:
                proof_fn += 1
        elif pred_pos:
            proof_fp += 1

    return MetricSummary(
        tp=tp, fp=fp, fn=fn,
        proof_tp=proof_tp, proof_fp=proof_fp, proof_fn=proof_fn,
        n_items=len(preds), n_positive_items=n_positive,
        covered_items=covered, false_error_total=false_total,
    )


def k_sweep(
    truths: dict,
    per_rollout_preds: dict,
    ks: list[int],
) -> list[tuple[int, MetricSummary]]:
    """Summaries at increasing rollout counts.

    ``per_rollout_preds`` maps item id to its per-rollout predicted sets in
    rollout order; for each k the item's prediction is the union of the
    first k sets.  Every item must have at least ``max(ks)`` rollouts.
    """
    if not ks:
        return []
    need = max(ks)
    for item_id, rollouts in per_rollout_preds.items():
        if len(rollouts) < need:
            raise InsufficientRollouts(
                f"item {item_id} has {len(rollouts)} rollouts, need {need}"
            )
    out = []
    for k in ks:
        preds = [
            LabeledPrediction.of(
                item_id,
                truths[item_id],
                frozenset().union(*rollouts[:k]) if k else frozenset(),
            )
            for item_id, rollouts in per_rollout_preds.items()
        ]
        out.append((k, summarize(preds)))
    return out


def sweep_csv(rows: list[tuple[int, MetricSummary]]) -> str:
    """One CSV row per k, ``n/a`` for undefined ratios."""
    def cell(x):
        return "n/a" if x is None else (f"{x:.6f}" if isinstance(x, float) else str(x))

    lines = [",".join(CSV_FIELDS)]
    for k, s in rows:
        lines.append(
            ",".join(
                cell(v)
                for v in [
                    k, s.tp, s.fp, s.fn, s.precision, s.recall,
                    s.proof_precision, s.proof_recall, s.coverage, s.mean_false_errors,
                ]
            )
        )
    return "\n".join(lines) + "\n"
