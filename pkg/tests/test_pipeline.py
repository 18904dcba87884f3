"""End-to-end pipeline and the pixel-free metadata grouping path."""
from dataclasses import replace

import numpy as np
import pytest

from guiblocks.geometry import BBox, Widget, WidgetClass
from guiblocks.hierarchy import serialize
from guiblocks.ocr import TextBox
from guiblocks.pipeline import group_ground_truth, group_widgets, run_pipeline
from guiblocks.synth import SynthSpec, generate

CASES = [
    ("list", 1001, 7),
    ("grid", 1002, 8),
    ("cards", 1003, 6),
    ("tabs", 1004, 5),
    ("mixed", 1005, 6),
]


@pytest.mark.parametrize("kind,seed,items", CASES)
def test_pipeline_reconstructs_ground_truth(kind, seed, items):
    gui = generate(SynthSpec(seed=seed, kind=kind, items=items))
    res = run_pipeline(gui.image, gui.ocr_boxes)
    assert serialize(res.hierarchy) == serialize(gui.hierarchy)


@pytest.mark.parametrize("kind,seed,items", CASES)
def test_metadata_grouping_reconstructs_ground_truth(kind, seed, items):
    gui = generate(SynthSpec(seed=seed, kind=kind, items=items))
    h = group_ground_truth(gui.widgets, gui.spec.width, gui.spec.height)
    assert serialize(h) == serialize(gui.hierarchy)


def test_pipeline_is_deterministic():
    gui = generate(SynthSpec(seed=42, kind="list", items=6))
    a = run_pipeline(gui.image, gui.ocr_boxes)
    b = run_pipeline(gui.image, gui.ocr_boxes)
    assert serialize(a.hierarchy) == serialize(b.hierarchy)
    assert [(w.id, w.bbox, w.wclass) for w in a.widgets] == [
        (w.id, w.bbox, w.wclass) for w in b.widgets
    ]


def test_pipeline_handles_occluded_list():
    gui = generate(SynthSpec(seed=77, kind="list", items=8, occlude_last_icon=True))
    res = run_pipeline(gui.image, gui.ocr_boxes)
    assert serialize(res.hierarchy) == serialize(gui.hierarchy)
    blocks = res.hierarchy.blocks()
    assert len(blocks) == 1
    sizes = [len(g.children) for g in blocks[0].children]
    assert sorted(sizes) == [1] + [2] * 7


def test_pipeline_corrections_fix_planted_cards():
    gui = generate(
        SynthSpec(seed=21, kind="cards", items=8, plant_missing=True, plant_misclassified=True)
    )
    res = run_pipeline(gui.image, gui.ocr_boxes)
    tiny = next(w for w in gui.widgets if w.wclass is WidgetClass.NONTEXT and w.bbox.width == 8)
    assert len(res.recovered) == 1
    assert res.recovered[0].bbox == tiny.bbox
    assert len(res.reclassified) == 1
    assert res.reclassified[0].wclass is WidgetClass.NONTEXT
    assert serialize(res.hierarchy) == serialize(gui.hierarchy)


def test_pipeline_corrections_can_be_disabled():
    gui = generate(
        SynthSpec(seed=21, kind="cards", items=8, plant_missing=True, plant_misclassified=True)
    )
    res = run_pipeline(gui.image, gui.ocr_boxes, corrections=False)
    assert res.recovered == []
    assert res.reclassified == []
    assert serialize(res.hierarchy) != serialize(gui.hierarchy)


def test_pipeline_blank_image():
    image = np.full((800, 1440, 3), 255, dtype=np.uint8)
    res = run_pipeline(image)
    assert res.widgets == []
    assert serialize(res.hierarchy) == []


def test_pipeline_text_only():
    image = np.full((800, 1440, 3), 255, dtype=np.uint8)
    boxes = [
        TextBox(BBox(100, 100 + 60 * i, 220, 140 + 60 * i), "events", 0.95) for i in range(4)
    ]
    res = run_pipeline(image, boxes)
    assert serialize(res.hierarchy) == ["("] + ["[", "t", "]"] * 4 + [")"]


def test_pipeline_timings_and_partitions():
    gui = generate(SynthSpec(seed=8, kind="grid", items=6))
    res = run_pipeline(gui.image, gui.ocr_boxes)
    assert set(res.timings) == {"detect", "merge", "group"}
    assert all(v >= 0 for v in res.timings.values())
    ids = {w.id for w in res.widgets}
    assert {w.id for w in res.text_widgets} | {w.id for w in res.nontext_widgets} == ids
    assert not ({w.id for w in res.text_widgets} & {w.id for w in res.nontext_widgets})


def test_group_widgets_container_claims_contents():
    frame = Widget("f", BBox(100, 100, 300, 300), WidgetClass.NONTEXT, is_container=True)
    icon = Widget("i", BBox(120, 130, 160, 170), WidgetClass.NONTEXT)
    label = Widget("t", BBox(120, 200, 260, 230), WidgetClass.TEXT, text_content="x")
    outside = Widget("o", BBox(400, 400, 440, 440), WidgetClass.NONTEXT)
    res = group_widgets([frame, icon, label, outside], 800, 600)
    assert res.widgets_by_id["f"].children == ("i", "t")
    assert serialize(res.hierarchy) == ["(", "[", "n", "t", "]", ")", "n"]


def test_group_widgets_nested_containers():
    outer = Widget("fo", BBox(100, 100, 500, 500), WidgetClass.NONTEXT, is_container=True)
    inner = Widget("fi", BBox(150, 150, 300, 300), WidgetClass.NONTEXT, is_container=True)
    icon = Widget("i", BBox(170, 170, 210, 210), WidgetClass.NONTEXT)
    res = group_widgets([outer, inner, icon], 800, 600)
    assert res.widgets_by_id["fo"].children == ("fi",)
    assert res.widgets_by_id["fi"].children == ("i",)
    assert serialize(res.hierarchy) == ["(", "[", "(", "[", "n", "]", ")", "]", ")"]


def test_group_widgets_childless_container_is_a_leaf():
    frame = Widget("f", BBox(100, 100, 300, 300), WidgetClass.NONTEXT, is_container=True)
    res = group_widgets([frame], 800, 600)
    assert serialize(res.hierarchy) == ["n"]
    assert res.hierarchy.leaf_widget_ids() == ["f"]


def test_group_widgets_leaf_multiset_preserved():
    gui = generate(SynthSpec(seed=30, kind="mixed"))
    res = group_widgets(gui.widgets, gui.spec.width, gui.spec.height)
    assert sorted(res.hierarchy.leaf_widget_ids()) == sorted(w.id for w in gui.widgets)


def test_grouping_is_translation_equivariant():
    gui = generate(SynthSpec(seed=55, kind="grid", items=8))
    shifted = [replace(w, bbox=w.bbox.translate(16, 24)) for w in gui.widgets]
    base = group_ground_truth(gui.widgets, gui.spec.width, gui.spec.height)
    moved = group_ground_truth(shifted, gui.spec.width, gui.spec.height)
    assert serialize(moved) == serialize(base)
