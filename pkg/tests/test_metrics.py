import random

import pytest

from pfbv.errors import InsufficientRollouts
from pfbv.metrics import LabeledPrediction, k_sweep, summarize, sweep_csv


def item(item_id, truth, predicted):
    return LabeledPrediction.of(item_id, truth, predicted)


# --- independent oracle: element-wise loops, no set algebra -----------------

def oracle(items):
    tp = fp = fn = 0
    proof_tp = proof_fp = proof_fn = 0
    covered = 0
    false_total = 0
    positives = 0
    for truth, predicted in items:
        for e in predicted:
            if e in truth:
                tp += 1
            else:
                fp += 1
                false_total += 1
        for e in truth:
            if e not in predicted:
                fn += 1
        has_truth = len(truth) > 0
        has_pred = len(predicted) > 0
        if has_truth:
            positives += 1
            all_found = True
            for e in truth:
                if e not in predicted:
                    all_found = False
            if all_found:
                covered += 1
            if has_pred:
                proof_tp += 1
            else:
                proof_fn += 1
        else:
            if has_pred:
                proof_fp += 1
    n = len(items)
    return {
        "tp": tp, "fp": fp, "fn": fn,
        "proof_tp": proof_tp, "proof_fp": proof_fp, "proof_fn": proof_fn,
        "precision": tp / (tp + fp) if tp + fp else None,
        "recall": tp / (tp + fn) if tp + fn else None,
        "proof_precision": proof_tp / (proof_tp + proof_fp) if proof_tp + proof_fp else None,
        "proof_recall": proof_tp / (proof_tp + proof_fn) if proof_tp + proof_fn else None,
        "coverage": covered / positives if positives else None,
        "mean_false_errors": false_total / n if n else None,
    }


def assert_matches_oracle(preds):
    summary = summarize(preds)
    expected = oracle([(p.truth, p.predicted) for p in preds])
    assert summary.tp == expected["tp"]
    assert summary.fp == expected["fp"]
    assert summary.fn == expected["fn"]
    assert summary.proof_tp == expected["proof_tp"]
    assert summary.proof_fp == expected["proof_fp"]
    assert summary.proof_fn == expected["proof_fn"]
    assert summary.precision == expected["precision"]
    assert summary.recall == expected["recall"]
    assert summary.proof_precision == expected["proof_precision"]
    assert summary.proof_recall == expected["proof_recall"]
    assert summary.coverage == expected["coverage"]
    assert summary.mean_false_errors == expected["mean_false_errors"]


# --- examples -----------------------------------------------------------------

def test_perfect_single_item():
    s = summarize([item("a", {1}, {1})])
    assert (s.precision, s.recall, s.coverage, s.mean_false_errors) == (1.0, 1.0, 1.0, 0.0)


def test_half_right_item():
    s = summarize([item("a", {1, 3}, {3, 4})])
    assert (s.tp, s.fp, s.fn) == (1, 1, 1)
    assert s.precision == 0.5 and s.recall == 0.5
    assert s.coverage == 0.0 and s.mean_false_errors == 1.0
    assert_matches_oracle([item("a", {1, 3}, {3, 4})])


def test_count_identities():
    rng = random.Random(5)
    preds = [
        item(f"i{i}", {rng.randrange(10) for _ in range(rng.randrange(4))},
             {rng.randrange(10) for _ in range(rng.randrange(4))})
        for i in range(60)
    ]
    s = summarize(preds)
    assert s.tp + s.fn == sum(len(p.truth) for p in preds)
    assert s.tp + s.fp == sum(len(p.predicted) for p in preds)


def test_random_datasets_match_oracle():
    rng = random.Random(42)
    for _ in range(50):
        n = rng.randrange(1, 30)
        preds = [
            item(
                f"i{i}",
                {rng.randrange(8) for _ in range(rng.randrange(4))},
                {rng.randrange(8) for _ in range(rng.randrange(4))},
            )
            for i in range(n)
        ]
        assert_matches_oracle(preds)


def test_permutation_invariance():
    rng = random.Random(9)
    preds = [
        item(f"i{i}", {rng.randrange(6) for _ in range(2)}, {rng.randrange(6) for _ in range(2)})
        for i in range(20)
    ]
    shuffled = list(preds)
    rng.shuffle(shuffled)
    assert summarize(preds) == summarize(shuffled)


def test_undefined_ratios_render_na():
    s = summarize([item("a", set(), set())])
    assert s.precision is None and s.recall is None and s.coverage is None
    rendered = s.to_json_dict()
    assert rendered["precision"] == "n/a"
    assert rendered["coverage"] == "n/a"
    assert rendered["mean_false_errors"] == 0.0


def test_proof_level_positive_iff_nonempty_prediction():
    s = summarize([item("a", {0}, {5}), item("b", {0}, set())])
    assert s.proof_tp == 1 and s.proof_fn == 1


def test_duplicate_item_ids_rejected():
    with pytest.raises(ValueError):
        summarize([item("a", {1}, {1}), item("a", {2}, {2})])


# --- k_sweep -------------------------------------------------------------------

def test_k_sweep_identical_rollouts():
    truths = {"a": {1}}
    per_rollout = {"a": [frozenset({1}), frozenset({1}), frozenset({1}), frozenset({1})]}
    rows = k_sweep(truths, per_rollout, [1, 2, 4])
    assert len(rows) == 3
    assert len({tuple(sorted((s.tp, s.fp, s.fn))) for _, s in rows}) == 1


def test_k_sweep_growing_predictions_monotone():
    truths = {"a": {0, 1, 2, 3}}
    per_rollout = {"a": [frozenset({0}), frozenset({1}), frozenset({2}), frozenset({3})]}
    rows = k_sweep(truths, per_rollout, [1, 2, 3, 4])
    recalls = [s.recall for _, s in rows]
    fns = [s.fn for _, s in rows]
    assert recalls == sorted(recalls)
    assert fns == sorted(fns, reverse=True)


def test_k_sweep_standard_ks():
    rng = random.Random(3)
    truths = {}
    per_rollout = {}
    for i in range(5):
        truths[f"i{i}"] = {rng.randrange(6) for _ in range(2)}
        per_rollout[f"i{i}"] = [
            frozenset({rng.randrange(6)}) for _ in range(8)
        ]
    rows = k_sweep(truths, per_rollout, [1, 2, 4, 8])
    assert [k for k, _ in rows] == [1, 2, 4, 8]


def test_k_sweep_insufficient_rollouts():
    with pytest.raises(InsufficientRollouts):
        k_sweep({"a": {1}}, {"a": [frozenset({1})]}, [1, 2])


def test_sweep_csv_has_na_cells():
    rows = k_sweep({"a": set()}, {"a": [frozenset(), frozenset()]}, [1, 2])
    text = sweep_csv(rows)
    lines = text.strip().splitlines()
    assert lines[0].startswith("k,tp,fp,fn")
    assert len(lines) == 3
    assert "n/a" in lines[1]
