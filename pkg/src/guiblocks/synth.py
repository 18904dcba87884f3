"""Deterministic synthetic GUI screens with pixel-exact ground truth.

Every layout draws hard-edged solid shapes on a white canvas, so the detector
can recover each widget's bbox exactly, and writes the matching OCR word boxes,
ground-truth widget list, and ground-truth hierarchy. All randomness comes from
the seed; the same spec always produces byte-identical artifacts.

Text is styled as solid bars: one bar per line, with the OCR fixture carrying
the word-level sub-boxes. Word geometry is fixed at 20 px per character with
4 px gaps, which keeps line merging decisive: intra-line gaps sit far below the
merge limit, gaps between neighboring widgets sit above it.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from PIL import Image

from .geometry import BBox, Widget, WidgetClass
from .hierarchy import BlockNode, GroupNode, Hierarchy, WidgetNode, atomic_write, to_json
from .ocr import TextBox

CHAR_W = 20
WORD_GAP = 4

BAR_COLOR = (55, 71, 79)
FRAME_COLOR = (84, 110, 122)
PANEL_COLOR = (207, 216, 220)
ICON_COLORS = [
    (46, 125, 50),
    (21, 101, 192),
    (198, 40, 40),
    (106, 27, 154),
    (0, 105, 92),
    (230, 81, 0),
    (69, 90, 100),
    (173, 20, 87),
]

LEXICON = {
    4: ["home", "menu", "info", "play", "chat", "news", "more", "done", "help", "file"],
    5: ["photo", "media", "audio", "video", "music", "notes", "inbox", "cloud"],
    6: ["search", "camera", "events", "photos", "albums", "system", "device", "backup"],
    7: ["battery", "display", "network", "storage", "privacy", "profile", "gallery", "account"],
    8: ["settings", "messages", "contacts", "location", "calendar", "download", "security", "playlist"],
}

KINDS = ("list", "grid", "cards", "tabs", "mixed")


@dataclass(frozen=True)
class SynthSpec:
    seed: int = 0
    kind: str = "list"
    items: int = 6
    width: int = 1440
    height: int = 2560
    occlude_last_icon: bool = False   # list: drop one icon so subgroup counts differ
    plant_missing: bool = False       # cards: shrink one icon below the area floor
    plant_misclassified: bool = False  # cards: fake OCR word sitting on one icon


@dataclass
class SynthGui:
    spec: SynthSpec
    image: np.ndarray
    ocr_boxes: List[TextBox]
    widgets: List[Widget]
    hierarchy: Hierarchy


class _Builder:
    def __init__(self, spec: SynthSpec, rng: random.Random):
        self.spec = spec
        self.rng = rng
        self.image = np.full((spec.height, spec.width, 3), 255, dtype=np.uint8)
        self.widgets: List[Widget] = []
        self.ocr: List[TextBox] = []
        self.nodes: List = []
        self._blocks = 0

    def rect(self, bbox: BBox, color: Tuple[int, int, int]) -> None:
        self.image[bbox.top : bbox.bottom, bbox.left : bbox.right] = color

    def frame(self, bbox: BBox, stroke: int = 3) -> None:
        l, t, r, b = bbox.as_tuple()
        self.image[t : t + stroke, l:r] = FRAME_COLOR
        self.image[b - stroke : b, l:r] = FRAME_COLOR
        self.image[t:b, l : l + stroke] = FRAME_COLOR
        self.image[t:b, r - stroke : r] = FRAME_COLOR

    def icon(self, bbox: BBox) -> Widget:
        self.rect(bbox, self.rng.choice(ICON_COLORS))
        w = Widget(f"w{len(self.widgets)}", bbox, WidgetClass.NONTEXT)
        self.widgets.append(w)
        return w

    def text(self, left: int, top: int, height: int, lengths: Sequence[int]) -> Widget:
        """Solid text bar plus its OCR word boxes; returns the line widget."""
        words = [self.rng.choice(LEXICON[n]) for n in lengths]
        x = left
        for word in words:
            wpx = CHAR_W * len(word)
            box = BBox(x, top, x + wpx, top + height)
            self.ocr.append(TextBox(box, word, round(self.rng.uniform(0.9, 0.99), 4)))
            x += wpx + WORD_GAP
        bbox = BBox(left, top, x - WORD_GAP, top + height)
        self.rect(bbox, BAR_COLOR)
        w = Widget(f"w{len(self.widgets)}", bbox, WidgetClass.TEXT, text_content=" ".join(words))
        self.widgets.append(w)
        return w

    def block(self, orientation: Optional[str], groups: List[GroupNode]) -> None:
        self.nodes.append(BlockNode(f"b{self._blocks}", "paired", orientation, groups))
        self._blocks += 1


def _layout_list(b: _Builder, items: int, x: int = 120, y0: int = 200, occlude: bool = False) -> None:
    items = max(2, min(items, (b.spec.height - y0 - 120) // 140))
    groups = []
    for i in range(items):
        top = y0 + i * 140
        leaves = []
        if not (occlude and i == items - 1):
            leaves.append(b.icon(BBox(x, top, x + 96, top + 96)))
        lengths = [b.rng.choice((6, 7, 8)) for _ in range(3)]
        leaves.append(b.text(x + 140, top + 28, 40, lengths))
        groups.append(GroupNode([WidgetNode(w) for w in leaves]))
    b.block("vertical", groups)


def _layout_grid(b: _Builder, items: int, x0: int = 120, y0: int = 240) -> None:
    # Label widths 304/324 px hold the column gap between 96 and 116 px: above
    # the text-text merge limit, below the block-block one. Column clustering
    # only beats row clustering when spacing evidence exists, so the grid is
    # always full columns of at least 3 (even item count, >= 6).
    items = max(6, items + (items & 1))
    items = min(items, 2 * ((b.spec.height - y0 - 120) // 260))
    groups = []
    for i in range(items):
        r, c = divmod(i, 2)
        cx = x0 + c * 420
        cy = y0 + r * 260
        icon = b.icon(BBox(cx, cy, cx + 140, cy + 140))
        label = b.text(cx, cy + 148, 36, b.rng.choice(((7, 8), (8, 8))))
        groups.append(GroupNode([WidgetNode(icon), WidgetNode(label)]))
    b.block("vertical", groups)


def _layout_cards(
    b: _Builder,
    items: int,
    x0: int = 120,
    x1: int = 1320,
    y0: int = 200,
    plant_missing: bool = False,
    plant_misclassified: bool = False,
) -> None:
    items = max(2, min(items, (b.spec.height - y0 - 120) // 240))
    miss_at = mis_at = -1
    if plant_missing or plant_misclassified:
        picks = b.rng.sample(range(items), 2)
        if plant_missing:
            miss_at = picks[0]
        if plant_misclassified:
            mis_at = picks[1]
    groups = []
    for i in range(items):
        top = y0 + i * 240
        b.frame(BBox(x0, top, x1, top + 200))
        # Title above the icon keeps slot order inside a card independent of
        # icon size, so a shrunken (planted) icon lands in the same slot.
        title = b.text(x0 + 40, top + 30, 36, (6, 6))
        full = BBox(x0 + 40, top + 86, x0 + 120, top + 166)
        if i == miss_at:
            # Below the detector's area floor; recoverable from siblings.
            cx, cy = full.center
            icon = b.icon(BBox(int(cx) - 4, int(cy) - 4, int(cx) + 4, int(cy) + 4))
        else:
            icon = b.icon(full)
        if i == mis_at:
            word = b.rng.choice(LEXICON[4])
            b.ocr.append(TextBox(icon.bbox, word, round(b.rng.uniform(0.9, 0.99), 4)))
        groups.append(GroupNode([WidgetNode(title), WidgetNode(icon)]))
    b.block(None, groups)


def _layout_tabs(b: _Builder, items: int, x0: int = 120, y: int = 120, panel: bool = True) -> None:
    x = x0
    groups = []
    for _ in range(max(2, items)):
        if x + 140 > b.spec.width - 120:
            break
        tab = b.text(x, y, 44, [b.rng.choice((4, 5, 6, 7))])
        groups.append(GroupNode([WidgetNode(tab)]))
        x = tab.bbox.right + 56
    b.block("horizontal", groups)
    if panel:
        body = BBox(120, 240, b.spec.width - 120, b.spec.height - 160)
        b.rect(body, PANEL_COLOR)
        w = Widget(f"w{len(b.widgets)}", body, WidgetClass.NONTEXT)
        b.widgets.append(w)
        b.nodes.append(WidgetNode(w))


def _layout_mixed(b: _Builder) -> None:
    # Band x-offsets keep alignment attributes more than one DBSCAN eps apart
    # across bands, so no cross-band clusters form.
    _layout_tabs(b, 4, panel=False)
    _layout_list(b, 3, x=160, y0=500)
    _layout_grid(b, 6, x0=320, y0=1100)
    _layout_cards(b, 2, x0=480, x1=1280, y0=2060)


def generate(spec: SynthSpec) -> SynthGui:
    if spec.kind not in KINDS:
        raise ValueError(f"unknown layout kind: {spec.kind!r}")
    rng = random.Random(spec.seed)
    b = _Builder(spec, rng)
    if spec.kind == "list":
        _layout_list(b, spec.items, occlude=spec.occlude_last_icon)
    elif spec.kind == "grid":
        _layout_grid(b, spec.items)
    elif spec.kind == "cards":
        _layout_cards(
            b,
            spec.items,
            plant_missing=spec.plant_missing,
            plant_misclassified=spec.plant_misclassified,
        )
    elif spec.kind == "tabs":
        _layout_tabs(b, spec.items)
    else:
        _layout_mixed(b)
    b.nodes.sort(key=lambda nd: (nd.bbox.top, nd.bbox.left, nd.bbox.bottom, nd.bbox.right))
    hierarchy = Hierarchy(b.nodes, spec.width, spec.height)
    return SynthGui(spec, b.image, b.ocr, b.widgets, hierarchy)


def write_fixture(gui: SynthGui, stem: str) -> List[str]:
    """Write <stem>.png / .ocr.json / .widgets.json / .hierarchy.json."""
    png = f"{stem}.png"
    Image.fromarray(gui.image).save(png)
    ocr_path = f"{stem}.ocr.json"
    atomic_write(
        ocr_path,
        json.dumps(
            [
                {"bbox": list(t.bbox.as_tuple()), "content": t.content, "confidence": t.confidence}
                for t in gui.ocr_boxes
            ],
            indent=2,
        ),
    )
    widgets_path = f"{stem}.widgets.json"
    records = []
    for w in gui.widgets:
        rec = {"bbox": list(w.bbox.as_tuple()), "class": w.wclass.value}
        if w.wclass is WidgetClass.TEXT:
            rec["content"] = w.text_content
        records.append(rec)
    atomic_write(widgets_path, json.dumps(records, indent=2))
    hier_path = f"{stem}.hierarchy.json"
    atomic_write(hier_path, to_json(gui.hierarchy))
    return [png, ocr_path, widgets_path, hier_path]
