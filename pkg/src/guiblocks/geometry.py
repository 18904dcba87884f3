"""Pixel-space primitives: boxes, widgets, and the box predicates used everywhere else."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple


class Axis(str, Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"


class WidgetClass(str, Enum):
    TEXT = "text"
    NONTEXT = "nontext"


@dataclass(frozen=True, order=True)
class BBox:
    """Axis-aligned box in pixel coordinates. right/bottom are exclusive."""

    left: int
    top: int
    right: int
    bottom: int

    def __post_init__(self):
        if self.left < 0 or self.top < 0:
            raise ValueError(f"negative origin: {self}")
        if self.left >= self.right or self.top >= self.bottom:
            raise ValueError(f"empty or inverted box: {self}")

    @property
    def width(self) -> int:
        return self.right - self.left

    @property
    def height(self) -> int:
        return self.bottom - self.top

    @property
    def area(self) -> int:
        return self.width * self.height

    # Midpoints stay fractional on purpose; rounding them breaks alignment clustering.
    @property
    def center_x(self) -> float:
        return (self.left + self.right) / 2.0

    @property
    def center_y(self) -> float:
        return (self.top + self.bottom) / 2.0

    @property
    def center(self) -> Tuple[float, float]:
        return (self.center_x, self.center_y)

    def intersection(self, other: "BBox") -> Optional["BBox"]:
        l = max(self.left, other.left)
        t = max(self.top, other.top)
        r = min(self.right, other.right)
        b = min(self.bottom, other.bottom)
        if l >= r or t >= b:
            return None
        return BBox(l, t, r, b)

    def hull(self, other: "BBox") -> "BBox":
        return BBox(
            min(self.left, other.left),
            min(self.top, other.top),
            max(self.right, other.right),
            max(self.bottom, other.bottom),
        )

    def translate(self, dx: int, dy: int) -> "BBox":
        return BBox(self.left + dx, self.top + dy, self.right + dx, self.bottom + dy)

    def as_tuple(self) -> Tuple[int, int, int, int]:
        return (self.left, self.top, self.right, self.bottom)


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two boxes, in pixel areas."""
    inter = a.intersection(b)
    if inter is None:
        return 0.0
    ia = inter.area
    return ia / float(a.area + b.area - ia)


def contains(outer: BBox, inner: BBox, tolerance: int = 0) -> bool:
    """True if ``inner`` sits inside ``outer``, allowing ``tolerance`` px of slack per edge."""
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    return (
        inner.left >= outer.left - tolerance
        and inner.top >= outer.top - tolerance
        and inner.right <= outer.right + tolerance
        and inner.bottom <= outer.bottom + tolerance
    )


def axis_gap(a: BBox, b: BBox, axis: Axis) -> int:
    """Edge-to-edge distance between two boxes along ``axis``.

    Zero when their projections on that axis overlap or touch.
    """
    if axis is Axis.HORIZONTAL:
        lo, hi = (a, b) if a.left <= b.left else (b, a)
        return max(0, hi.left - lo.right)
    lo, hi = (a, b) if a.top <= b.top else (b, a)
    return max(0, hi.top - lo.bottom)


@dataclass(frozen=True)
class Widget:
    """A detected or ground-truth GUI widget.

    ``text_content`` is present exactly when the class is TEXT. Containers keep
    the ids of their immediate children.
    """

    id: str
    bbox: BBox
    wclass: WidgetClass
    text_content: Optional[str] = None
    is_container: bool = False
    children: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.wclass is WidgetClass.TEXT and self.text_content is None:
            raise ValueError(f"text widget {self.id} missing text_content")
        if self.wclass is WidgetClass.NONTEXT and self.text_content is not None:
            raise ValueError(f"non-text widget {self.id} carries text_content")

    @property
    def center_x(self) -> float:
        return self.bbox.center_x

    @property
    def center_y(self) -> float:
        return self.bbox.center_y

    @property
    def area(self) -> int:
        return self.bbox.area

    @property
    def top(self) -> int:
        return self.bbox.top

    @property
    def left(self) -> int:
        return self.bbox.left


def widget_sort_key(w: Widget) -> Tuple[int, int, int, int, str]:
    """Reading order: top-to-bottom, then left-to-right."""
    return (w.bbox.top, w.bbox.left, w.bbox.bottom, w.bbox.right, w.id)


def hull_of(boxes) -> BBox:
    """Bounding hull of a non-empty iterable of boxes."""
    it = iter(boxes)
    try:
        acc = next(it)
    except StopIteration:
        raise ValueError("hull_of needs at least one box") from None
    for b in it:
        acc = acc.hull(b)
    return acc
