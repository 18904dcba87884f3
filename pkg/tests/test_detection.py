import json

import numpy as np
import pytest

from guiblocks.detection import (
    DetectorConfig,
    detect_nontext,
    detect_regions,
    evaluate_detection,
    ingest_text,
    load_ground_truth_widgets,
    merge_widgets,
    recognize_containers,
)
from guiblocks.geometry import BBox, Widget, WidgetClass
from guiblocks.ocr import TextBox


def canvas(h=200, w=200):
    return np.full((h, w, 3), 255, dtype=np.uint8)


def nt(i, box, container=False, children=()):
    return Widget(f"n{i}", box, WidgetClass.NONTEXT, is_container=container, children=children)


def tx(i, box, content="x"):
    return Widget(f"t{i}", box, WidgetClass.TEXT, text_content=content)


def test_detect_two_squares_exact_boxes():
    img = canvas()
    img[40:50, 30:40] = 0
    img[40:50, 90:100] = 0
    widgets = detect_nontext(img)
    assert [w.bbox.as_tuple() for w in widgets] == [(30, 40, 40, 50), (90, 40, 100, 50)]
    assert all(w.wclass is WidgetClass.NONTEXT for w in widgets)
    assert [w.id for w in widgets] == ["n0", "n1"]


def test_detect_blank_image():
    assert detect_nontext(canvas()) == []


def test_detect_area_filters():
    img = canvas()
    img[10:13, 10:13] = 0  # 3x3: below the 100 px^2 floor at this width
    img[50:80, 50:80] = 0
    cfg = DetectorConfig(reference_width=200)
    widgets = detect_nontext(img, cfg)
    assert [w.bbox.as_tuple() for w in widgets] == [(50, 50, 80, 80)]
    # a giant region covering nearly the whole screen is background, not a widget
    img2 = canvas()
    img2[2:198, 2:198] = 0
    assert detect_nontext(img2, cfg) == []


def test_detect_min_area_scales_with_width():
    # same 6x6 dot: kept at reference width, dropped when the image is
    # upscaled 2x and the floor scales by r^2
    img = canvas()
    img[20:26, 20:26] = 0
    cfg = DetectorConfig(min_widget_area=30.0, reference_width=200)
    assert len(detect_nontext(img, cfg)) == 1
    big = canvas(400, 400)
    big[40:52, 40:52] = 0  # same widget at 2x: 144 px^2 vs floor 120
    assert len(detect_nontext(big, cfg)) == 1
    small_on_big = canvas(400, 400)
    small_on_big[40:46, 40:46] = 0  # unscaled 6x6 dot: 36 < 120
    assert detect_nontext(small_on_big, cfg) == []


def test_recognize_containers_frame_with_two_icons():
    img = canvas(300, 300)
    img[50:250, 50:250] = 70    # frame
    img[53:247, 53:247] = 255   # hollow it out, stroke 3
    img[100:140, 100:140] = 0   # icon A
    img[100:140, 180:220] = 0   # icon B
    cfg = DetectorConfig(reference_width=300)
    det = detect_regions(img, cfg)
    widgets = recognize_containers(det, cfg)
    containers = [w for w in widgets if w.is_container]
    assert len(containers) == 1
    kids = {w.id: w for w in widgets}
    assert [kids[c].bbox.as_tuple() for c in containers[0].children] == [
        (100, 100, 140, 140),
        (180, 100, 220, 140),
    ]


def test_solid_rect_enclosing_nothing_is_not_a_container():
    img = canvas(300, 300)
    img[50:250, 50:250] = 70
    cfg = DetectorConfig(reference_width=300)
    det = detect_regions(img, cfg)
    widgets = recognize_containers(det, cfg)
    assert all(not w.is_container for w in widgets)


def test_panel_with_content_on_it_is_a_container():
    # a uniform slab only marks at its edges, so a panel hosting an icon is
    # a ring enclosing a separate region: a container of that icon
    img = canvas(300, 300)
    img[50:250, 50:250] = 70
    img[100:140, 100:140] = 0
    cfg = DetectorConfig(reference_width=300)
    det = detect_regions(img, cfg)
    widgets = recognize_containers(det, cfg)
    containers = [w for w in widgets if w.is_container]
    assert len(containers) == 1
    assert len(containers[0].children) == 1


def test_empty_frame_is_not_a_container():
    img = canvas(300, 300)
    img[50:250, 50:250] = 70
    img[53:247, 53:247] = 255
    cfg = DetectorConfig(reference_width=300)
    det = detect_regions(img, cfg)
    widgets = recognize_containers(det, cfg)
    assert all(not w.is_container for w in widgets)


def test_nested_containers_immediate_children_only():
    img = canvas(400, 400)
    img[20:380, 20:380] = 70
    img[23:377, 23:377] = 255
    img[60:340, 60:340] = 70
    img[63:337, 63:337] = 255
    img[100:160, 100:160] = 0
    cfg = DetectorConfig(reference_width=400)
    det = detect_regions(img, cfg)
    widgets = recognize_containers(det, cfg)
    containers = sorted((w for w in widgets if w.is_container), key=lambda w: -w.bbox.area)
    assert len(containers) == 2
    outer, inner = containers
    assert list(outer.children) == [inner.id]
    by_id = {w.id: w for w in widgets}
    assert [by_id[c].bbox.as_tuple() for c in inner.children] == [(100, 100, 160, 160)]


def test_ingest_text_merges_words_into_lines():
    boxes = [
        TextBox(BBox(10, 10, 60, 30), "hello"),   # 10 px/char
        TextBox(BBox(70, 10, 120, 30), "again"),  # gap 10 <= 1.5 * 10
        TextBox(BBox(200, 10, 250, 30), "far"),   # gap 80: separate line
        TextBox(BBox(10, 50, 60, 70), "below"),   # no vertical overlap
    ]
    widgets = ingest_text(boxes)
    assert [(w.text_content, w.bbox.as_tuple()) for w in widgets] == [
        ("hello again", (10, 10, 120, 30)),
        ("far", (200, 10, 250, 30)),
        ("below", (10, 50, 60, 70)),
    ]
    assert [w.id for w in widgets] == ["t0", "t1", "t2"]


def test_ingest_text_vertical_overlap_rule():
    # overlap 9 px < half of the shorter height (20): stays split even though
    # the horizontal gap is small
    boxes = [
        TextBox(BBox(10, 10, 50, 30), "left"),
        TextBox(BBox(55, 21, 95, 41), "down"),
    ]
    assert len(ingest_text(boxes)) == 2
    # overlap 10 px == half: merges
    boxes[1] = TextBox(BBox(55, 20, 95, 40), "down")
    assert len(ingest_text(boxes)) == 1


def test_ingest_text_empty():
    assert ingest_text([]) == []


def test_merge_removes_text_shaped_regions():
    texts = [tx(0, BBox(10, 10, 110, 30), "hello world")]
    nontexts = [
        nt(0, BBox(10, 10, 60, 30)),    # word bar inside the line
        nt(1, BBox(10, 100, 60, 140)),  # clean icon elsewhere
    ]
    merged = merge_widgets(texts, nontexts)
    ids = [w.id for w in merged]
    assert ids == ["n1", "t0"]


def test_merge_keeps_containers_and_children():
    texts = [tx(0, BBox(10, 10, 300, 200), "big ocr line")]
    frame = nt(0, BBox(5, 5, 320, 220), container=True, children=("n1",))
    child = nt(1, BBox(20, 20, 80, 60))
    merged = merge_widgets(texts, [frame, child])
    assert {w.id for w in merged} == {"n0", "n1", "t0"}


def test_merge_near_exact_text_overlap_beats_exemption():
    # both routes saw the same box: the pixel region goes, even as a child
    texts = [tx(0, BBox(20, 20, 80, 60), "word")]
    frame = nt(0, BBox(5, 5, 320, 220), container=True, children=("n1",))
    child = nt(1, BBox(20, 20, 80, 60))
    merged = merge_widgets(texts, [frame, child])
    assert {w.id for w in merged} == {"n0", "t0"}
    kept_frame = [w for w in merged if w.id == "n0"][0]
    assert kept_frame.children == ()  # pruned


def test_evaluate_detection_counts():
    truth = [nt(0, BBox(0, 0, 100, 100)), nt(1, BBox(200, 0, 300, 100))]
    pred = [nt(10, BBox(0, 0, 100, 100))]
    rep = evaluate_detection(pred, truth)
    assert (rep.tp, rep.fp, rep.fn) == (1, 0, 1)
    assert rep.precision == 1.0
    assert rep.recall == 0.5
    assert rep.f1 == pytest.approx(2 / 3)


def test_evaluate_detection_requires_same_class_and_high_iou():
    truth = [nt(0, BBox(0, 0, 100, 100))]
    pred_wrong_class = [tx(0, BBox(0, 0, 100, 100))]
    assert evaluate_detection(pred_wrong_class, truth).tp == 0
    pred_loose = [nt(1, BBox(0, 0, 100, 112))]  # IoU ~0.89
    assert evaluate_detection(pred_loose, truth).tp == 0
    pred_tight = [nt(2, BBox(0, 0, 100, 105))]  # IoU ~0.95
    assert evaluate_detection(pred_tight, truth).tp == 1


def test_evaluate_detection_greedy_one_to_one():
    t0 = nt(0, BBox(0, 0, 100, 100))
    p_good = nt(1, BBox(0, 0, 100, 100))
    p_dup = nt(2, BBox(0, 0, 100, 101))
    rep = evaluate_detection([p_dup, p_good], [t0])
    assert (rep.tp, rep.fp, rep.fn) == (1, 1, 0)


def test_load_ground_truth_widgets(tmp_path):
    p = tmp_path / "w.json"
    p.write_text(
        json.dumps(
            [
                {"bbox": [0, 0, 10, 10], "class": "nontext"},
                {"bbox": [0, 20, 50, 30], "class": "text", "content": "hi"},
                {"bbox": [0, 40, 50, 50], "class": "text"},
            ]
        )
    )
    widgets = load_ground_truth_widgets(str(p))
    assert [w.id for w in widgets] == ["w0", "w1", "w2"]
    assert widgets[0].wclass is WidgetClass.NONTEXT
    assert widgets[1].text_content == "hi"
    assert widgets[2].text_content == ""
