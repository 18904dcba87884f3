"""Debug overlay: draw a grouping result on top of its screenshot.

Colors are fixed so two renders of the same result are byte-identical: text
widgets crimson, non-text forest green, block hulls pink, and each subgroup of
a block outlined in a palette color cycled by subgroup index.
"""
from __future__ import annotations

from typing import Tuple

import numpy as np
from PIL import Image

from .geometry import BBox
from .hierarchy import BlockNode, GroupNode, Hierarchy, WidgetNode

TEXT_COLOR = (220, 20, 60)
NONTEXT_COLOR = (34, 139, 34)
BLOCK_COLOR = (255, 105, 180)
GROUP_PALETTE = [
    (255, 152, 0),
    (3, 169, 244),
    (156, 39, 176),
    (121, 85, 72),
    (0, 150, 136),
    (63, 81, 181),
]


def draw_box(img: np.ndarray, bbox: BBox, color: Tuple[int, int, int], width: int = 2) -> None:
    """Rectangle outline, clipped to the canvas."""
    h, w = img.shape[:2]
    l = max(0, bbox.left)
    t = max(0, bbox.top)
    r = min(w, bbox.right)
    b = min(h, bbox.bottom)
    if l >= r or t >= b:
        return
    img[t : min(b, t + width), l:r] = color
    img[max(t, b - width) : b, l:r] = color
    img[t:b, l : min(r, l + width)] = color
    img[t:b, max(l, r - width) : r] = color


def _inflate(bbox: BBox, pad: int) -> BBox:
    return BBox(max(0, bbox.left - pad), max(0, bbox.top - pad), bbox.right + pad, bbox.bottom + pad)


def _draw_node(img: np.ndarray, node) -> None:
    if isinstance(node, WidgetNode):
        color = TEXT_COLOR if node.widget.wclass.value == "text" else NONTEXT_COLOR
        draw_box(img, node.bbox, color, 2)
    elif isinstance(node, GroupNode):
        for child in node.children:
            _draw_node(img, child)
    elif isinstance(node, BlockNode):
        draw_box(img, _inflate(node.bbox, 6), BLOCK_COLOR, 3)
        for gi, group in enumerate(node.children):
            draw_box(img, _inflate(group.bbox, 3), GROUP_PALETTE[gi % len(GROUP_PALETTE)], 2)
            _draw_node(img, group)


def render_overlay(image: np.ndarray, hierarchy: Hierarchy) -> np.ndarray:
    """New image with the hierarchy's boxes drawn over a copy of the input."""
    out = np.array(image, dtype=np.uint8, copy=True)
    if out.ndim == 2:
        out = np.stack([out] * 3, axis=-1)
    for node in hierarchy.children:
        _draw_node(out, node)
    return out


def save_png(image: np.ndarray, path: str) -> None:
    Image.fromarray(image).save(path)
