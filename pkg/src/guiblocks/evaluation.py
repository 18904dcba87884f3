"""Block-level evaluation: token edit distance, optimal block matching, and
precision / recall / F1 reporting."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .hierarchy import Hierarchy, block_sequences


def edit_distance(a: Sequence[str], b: Sequence[str]) -> int:
    """Levenshtein distance between two token sequences (unit costs)."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ta in enumerate(a, start=1):
        cur = [i] + [0] * len(b)
        for j, tb in enumerate(b, start=1):
            cur[j] = min(
                prev[j] + 1,
                cur[j - 1] + 1,
                prev[j - 1] + (ta != tb),
            )
        prev = cur
    return prev[len(b)]


def precision_recall_f1(tp: int, fp: int, fn: int) -> Tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


@dataclass(frozen=True)
class MatchReport:
    """Outcome of matching predicted blocks against ground-truth blocks."""

    threshold: int
    matches: Tuple[Tuple[int, int, int], ...]  # (predicted idx, truth idx, distance)
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, threshold: int, matches, tp: int, fp: int, fn: int) -> "MatchReport":
        p, r, f = precision_recall_f1(tp, fp, fn)
        return cls(threshold, tuple(matches), tp, fp, fn, p, r, f)


def match_blocks(
    predicted: Sequence[Sequence[str]],
    truth: Sequence[Sequence[str]],
    threshold: int = 1,
) -> MatchReport:
    """One-to-one matching of predicted to ground-truth block sequences.

    A pair is matchable when its edit distance is at most ``threshold``. Among
    matchings with the maximum number of pairs, the one with the smallest total
    distance wins. A predicted block left unmatched counts as a false positive,
    an unmatched truth block as a false negative.
    """
    n, m = len(predicted), len(truth)
    if n == 0 or m == 0:
        return MatchReport.from_counts(threshold, [], 0, n, m)
    # Any cost above this makes one extra real match always preferable.
    large = min(n, m) * threshold + 1
    size = max(n, m)
    cost = np.full((size, size), large, dtype=np.int64)
    dist = {}
    for i, p in enumerate(predicted):
        for j, t in enumerate(truth):
            d = edit_distance(p, t)
            dist[i, j] = d
            if d <= threshold:
                cost[i, j] = d
    rows, cols = linear_sum_assignment(cost)
    matches = [
        (int(i), int(j), dist[int(i), int(j)])
        for i, j in zip(rows, cols)
        if i < n and j < m and cost[i, j] <= threshold
    ]
    matches.sort()
    tp = len(matches)
    return MatchReport.from_counts(threshold, matches, tp, n - tp, m - tp)


def evaluate_hierarchy(pred: Hierarchy, truth: Hierarchy, threshold: int = 1) -> MatchReport:
    """Match the top-level blocks of two hierarchies."""
    return match_blocks(block_sequences(pred), block_sequences(truth), threshold)


def aggregate(reports: Sequence[MatchReport]) -> MatchReport:
    """Micro-average: pool true/false positives and negatives across GUIs."""
    tp = sum(r.tp for r in reports)
    fp = sum(r.fp for r in reports)
    fn = sum(r.fn for r in reports)
    threshold = reports[0].threshold if reports else 0
    return MatchReport.from_counts(threshold, [], tp, fp, fn)


def _report_dict(r: MatchReport) -> dict:
    return {
        "tp": r.tp,
        "fp": r.fp,
        "fn": r.fn,
        "precision": round(r.precision, 6),
        "recall": round(r.recall, 6),
        "f1": round(r.f1, 6),
    }


def report_json(per_gui: Dict[str, MatchReport]) -> str:
    overall = aggregate(list(per_gui.values()))
    doc = {
        "threshold": overall.threshold,
        "guis": {name: _report_dict(r) for name, r in sorted(per_gui.items())},
        "overall": _report_dict(overall),
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def report_csv(per_gui: Dict[str, MatchReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["gui", "tp", "fp", "fn", "precision", "recall", "f1"])
    for name, r in sorted(per_gui.items()):
        writer.writerow([name, r.tp, r.fp, r.fn, f"{r.precision:.6f}", f"{r.recall:.6f}", f"{r.f1:.6f}"])
    overall = aggregate(list(per_gui.values()))
    writer.writerow(
        ["overall", overall.tp, overall.fp, overall.fn,
         f"{overall.precision:.6f}", f"{overall.recall:.6f}", f"{overall.f1:.6f}"]
    )
    return buf.getvalue()
