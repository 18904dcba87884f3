"""Edit distance, optimal block matching, and metric reporting."""
import csv
import io
import json
import random

import pytest

from guiblocks.evaluation import (
    MatchReport,
    aggregate,
    edit_distance,
    evaluate_hierarchy,
    match_blocks,
    precision_recall_f1,
    report_csv,
    report_json,
)
from guiblocks.geometry import BBox, Widget, WidgetClass
from guiblocks.hierarchy import BlockNode, GroupNode, Hierarchy, WidgetNode

from oracles import best_matching_reference, levenshtein_reference

TOKENS = ["(", ")", "[", "]", "t", "n"]


def rand_seq(rng, max_len=60):
    return [rng.choice(TOKENS) for _ in range(rng.randrange(0, max_len + 1))]


# ---------------------------------------------------------------------------
# edit distance


def test_edit_distance_identity():
    assert edit_distance([], []) == 0
    assert edit_distance(list("([t])"), list("([t])")) == 0


def test_edit_distance_single_edits():
    assert edit_distance(["(", "t", ")"], ["(", "t", "t", ")"]) == 1  # insert
    assert edit_distance(["(", "t", ")"], ["(", ")"]) == 1            # delete
    assert edit_distance(["(", "t", ")"], ["(", "n", ")"]) == 1       # substitute


def test_edit_distance_against_empty():
    assert edit_distance([], ["t", "n", "t"]) == 3
    assert edit_distance(["[", "]"], []) == 2


def test_edit_distance_matches_dp_oracle():
    rng = random.Random(99)
    for _ in range(500):
        a, b = rand_seq(rng), rand_seq(rng)
        assert edit_distance(a, b) == levenshtein_reference(a, b)


def test_edit_distance_is_a_metric():
    rng = random.Random(5)
    for _ in range(200):
        a, b, c = rand_seq(rng, 25), rand_seq(rng, 25), rand_seq(rng, 25)
        dab = edit_distance(a, b)
        assert dab == edit_distance(b, a)
        assert (dab == 0) == (a == b)
        assert dab <= edit_distance(a, c) + edit_distance(c, b)


# ---------------------------------------------------------------------------
# precision / recall / f1


def test_metrics_perfect():
    assert precision_recall_f1(1, 0, 0) == (1.0, 1.0, 1.0)


def test_metrics_zero_tp():
    assert precision_recall_f1(0, 5, 3) == (0.0, 0.0, 0.0)
    assert precision_recall_f1(0, 0, 0) == (0.0, 0.0, 0.0)


def test_metrics_f1_formula():
    # Counts chosen so P and R come out at exactly 0.546 and 0.650.
    p, r, f1 = precision_recall_f1(546, 454, 294)
    assert p == pytest.approx(0.546)
    assert r == pytest.approx(0.650)
    assert f1 == pytest.approx(0.593, abs=1e-3)


# ---------------------------------------------------------------------------
# block matching


def test_match_identical_sets_threshold_zero():
    blocks = [list("([t][t])"), list("([nt][nt])")]
    rep = match_blocks(blocks, [list(b) for b in blocks], threshold=0)
    assert (rep.tp, rep.fp, rep.fn) == (2, 0, 0)
    assert (rep.precision, rep.recall, rep.f1) == (1.0, 1.0, 1.0)
    assert all(d == 0 for _, _, d in rep.matches)


def test_match_fully_dissimilar():
    pred = [["n"] * 10, ["n"] * 12]
    truth = [["t"], ["t", "t"], ["t", "t", "t"]]
    rep = match_blocks(pred, truth, threshold=2)
    assert (rep.tp, rep.fp, rep.fn) == (0, 2, 3)
    assert rep.matches == ()


def test_match_empty_sides():
    rep = match_blocks([], [["t"]], threshold=1)
    assert (rep.tp, rep.fp, rep.fn) == (0, 0, 1)
    rep = match_blocks([["t"]], [], threshold=1)
    assert (rep.tp, rep.fp, rep.fn) == (0, 1, 0)
    rep = match_blocks([], [], threshold=1)
    assert (rep.tp, rep.fp, rep.fn) == (0, 0, 0)
    assert rep.f1 == 0.0


def test_match_threshold_is_inclusive():
    rep = match_blocks([["n", "t"]], [["n", "n"]], threshold=1)
    assert rep.tp == 1
    assert rep.matches == ((0, 0, 1),)


def test_match_beats_greedy_assignment():
    # Greedy nearest-first grabs the zero-distance pair and strands the other
    # prediction; the optimal assignment keeps both under the threshold.
    t0 = ["n", "n"]
    t1 = ["n", "n", "n"]
    p0 = ["n", "n"]       # distance 0 to t0, 1 to t1
    p1 = ["n"]            # distance 1 to t0, 2 to t1
    rep = match_blocks([p0, p1], [t0, t1], threshold=1)
    assert rep.tp == 2
    assert rep.matches == ((0, 1, 1), (1, 0, 1))


def test_match_agrees_with_exhaustive_search():
    rng = random.Random(31)
    for _ in range(60):
        pred = [rand_seq(rng, 6) for _ in range(rng.randrange(0, 5))]
        truth = [rand_seq(rng, 6) for _ in range(rng.randrange(0, 5))]
        threshold = rng.randrange(0, 4)
        rep = match_blocks(pred, truth, threshold)
        costs = {
            (i, j): edit_distance(p, t)
            for i, p in enumerate(pred)
            for j, t in enumerate(truth)
            if edit_distance(p, t) <= threshold
        }
        size, total = best_matching_reference(costs, len(pred), len(truth))
        assert rep.tp == size
        assert sum(d for _, _, d in rep.matches) == total


def test_match_tp_monotone_in_threshold():
    rng = random.Random(77)
    for _ in range(40):
        pred = [rand_seq(rng, 10) for _ in range(rng.randrange(1, 6))]
        truth = [rand_seq(rng, 10) for _ in range(rng.randrange(1, 6))]
        tps = [match_blocks(pred, truth, thr).tp for thr in range(0, 5)]
        assert tps == sorted(tps)


def test_match_is_one_to_one():
    pred = [["t"], ["t"], ["t"]]
    truth = [["t"], ["t"]]
    rep = match_blocks(pred, truth, threshold=0)
    assert (rep.tp, rep.fp, rep.fn) == (2, 1, 0)
    assert len({i for i, _, _ in rep.matches}) == 2
    assert len({j for _, j, _ in rep.matches}) == 2


# ---------------------------------------------------------------------------
# hierarchy-level wrapper


def _h(block_tokens):
    children = []
    top = 0
    for bi, leaves in enumerate(block_tokens):
        group = GroupNode([
            WidgetNode(
                Widget(
                    f"w{bi}_{i}",
                    BBox(20 * i, top, 20 * i + 10, top + 10),
                    WidgetClass.TEXT if tok == "t" else WidgetClass.NONTEXT,
                    text_content="x" if tok == "t" else None,
                )
            )
            for i, tok in enumerate(leaves)
        ])
        children.append(BlockNode(f"b{bi}", "paired", None, [group]))
        top += 20
    return Hierarchy(children)


def test_evaluate_hierarchy_matches_blocks():
    pred = _h([["n", "t"], ["t"]])
    truth = _h([["n", "t"], ["n"]])
    rep = evaluate_hierarchy(pred, truth, threshold=1)
    assert (rep.tp, rep.fp, rep.fn) == (2, 0, 0)


def test_evaluate_hierarchy_ignores_loose_widgets():
    pred = _h([["n", "t"]])
    pred.children.append(WidgetNode(Widget("loose", BBox(0, 500, 10, 510), WidgetClass.NONTEXT)))
    truth = _h([["n", "t"]])
    rep = evaluate_hierarchy(pred, truth, threshold=0)
    assert (rep.tp, rep.fp, rep.fn) == (1, 0, 0)


# ---------------------------------------------------------------------------
# aggregation and reports


def test_aggregate_pools_counts():
    a = MatchReport.from_counts(1, [], 1, 0, 0)
    b = MatchReport.from_counts(1, [], 0, 1, 1)
    overall = aggregate([a, b])
    assert (overall.tp, overall.fp, overall.fn) == (1, 1, 1)
    assert overall.precision == overall.recall == overall.f1 == 0.5


def test_aggregate_empty():
    overall = aggregate([])
    assert (overall.tp, overall.fp, overall.fn) == (0, 0, 0)


def test_report_json_shape():
    per_gui = {
        "gui_b": MatchReport.from_counts(1, [], 2, 1, 0),
        "gui_a": MatchReport.from_counts(1, [], 1, 0, 1),
    }
    doc = json.loads(report_json(per_gui))
    assert doc["threshold"] == 1
    assert list(doc["guis"]) == ["gui_a", "gui_b"]
    assert doc["overall"]["tp"] == 3
    assert doc["overall"]["precision"] == pytest.approx(3 / 4)
    assert doc["guis"]["gui_a"]["recall"] == pytest.approx(0.5)


def test_report_csv_shape():
    per_gui = {
        "gui_b": MatchReport.from_counts(1, [], 2, 1, 0),
        "gui_a": MatchReport.from_counts(1, [], 1, 0, 1),
    }
    rows = list(csv.reader(io.StringIO(report_csv(per_gui))))
    assert rows[0] == ["gui", "tp", "fp", "fn", "precision", "recall", "f1"]
    assert [r[0] for r in rows[1:]] == ["gui_a", "gui_b", "overall"]
    assert rows[3][1:4] == ["3", "1", "1"]
    assert float(rows[3][4]) == pytest.approx(0.75)
