"""Image pipeline: grayscale, gradient binarization, labeling, and shape probes.

Rasters are plain numpy arrays: color images are (H, W, 3) uint8, grayscale is
(H, W) uint8, binary maps are (H, W) bool. Pixel coordinates are (x, y) with x
as column and y as row, matching BBox.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from PIL import Image
from scipy import ndimage

from .geometry import BBox

# ITU-R 601 luma weights.
_LUMA = np.array([0.299, 0.587, 0.114])

_EIGHT = np.ones((3, 3), dtype=bool)
_FOUR = ndimage.generate_binary_structure(2, 1)

# Moore neighborhood in clockwise order, as (dy, dx).
_MOORE = [(-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1)]

# After moving in direction d, the neighbor scanned just before (background)
# becomes the new backtrack; its direction from the new pixel, per move.
_BACKTRACK = {0: 6, 1: 6, 2: 0, 3: 0, 4: 2, 5: 2, 6: 4, 7: 4}


class CropError(ValueError):
    """Raised when a crop box leaves the image bounds."""


def load_image(path: str) -> np.ndarray:
    """Read a PNG/JPEG file into an (H, W, 3) uint8 array.

    Alpha, if present, is composited over white before the conversion.
    """
    with Image.open(path) as im:
        if im.mode in ("RGBA", "LA", "PA"):
            base = Image.new("RGBA", im.size, (255, 255, 255, 255))
            base.alpha_composite(im.convert("RGBA"))
            im = base.convert("RGB")
        elif im.mode != "RGB":
            im = im.convert("RGB")
        return np.asarray(im, dtype=np.uint8)


def to_grayscale(image: np.ndarray) -> np.ndarray:
    """Luma conversion, rounded to nearest integer."""
    if image.ndim == 2:
        return image.astype(np.uint8)
    if image.ndim == 3 and image.shape[2] == 4:
        # Composite over white; alpha in [0, 1].
        alpha = image[:, :, 3:4].astype(np.float64) / 255.0
        rgb = image[:, :, :3].astype(np.float64) * alpha + 255.0 * (1.0 - alpha)
    else:
        rgb = image[:, :, :3].astype(np.float64)
    gray = rgb @ _LUMA
    return np.floor(gray + 0.5).clip(0, 255).astype(np.uint8)


def gradient_binarize(gray: np.ndarray, threshold: int = 4) -> np.ndarray:
    """Mark pixels whose forward difference exceeds ``threshold``, then close holes.

    A pixel is foreground iff the larger of |I(x,y)-I(x+1,y)| and
    |I(x,y)-I(x,y+1)| exceeds the threshold; the last column/row only has the
    one available neighbor. Background pockets enclosed by a single component
    are promoted to foreground so solid widgets come out as solid regions.
    """
    g = gray.astype(np.int16)
    mag = np.zeros(g.shape, dtype=np.int16)
    if g.shape[1] > 1:
        mag[:, :-1] = np.abs(np.diff(g, axis=1))
    if g.shape[0] > 1:
        mag[:-1, :] = np.maximum(mag[:-1, :], np.abs(np.diff(g, axis=0)))
    fg = mag > threshold
    return _close_single_owner_pockets(fg)


def _close_single_owner_pockets(fg: np.ndarray) -> np.ndarray:
    """Fill enclosed background pockets bordered by exactly one component.

    A uniform solid widget binarizes to an outline ring; filling its pocket
    restores the solid shape. A hollow frame with widgets inside must NOT be
    filled, or the frame would weld onto its contents and the whole card would
    collapse into one region. The pocket's owner count tells the two apart.
    Pockets are 4-connected, the dual of the 8-connected foreground.
    """
    filled = ndimage.binary_fill_holes(fg)
    pockets = filled & ~fg
    if not pockets.any():
        return fg
    fg_lbl, _ = ndimage.label(fg, structure=_EIGHT)
    pk_lbl, n_pk = ndimage.label(pockets, structure=_FOUR)
    h, w = fg.shape
    lo = np.full(n_pk + 1, np.iinfo(np.int64).max, dtype=np.int64)
    hi = np.zeros(n_pk + 1, dtype=np.int64)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            p = pk_lbl[max(0, -dy) : h - max(0, dy), max(0, -dx) : w - max(0, dx)]
            f = fg_lbl[max(0, dy) : h - max(0, -dy), max(0, dx) : w - max(0, -dx)]
            m = (p > 0) & (f > 0)
            if m.any():
                np.minimum.at(lo, p[m], f[m])
                np.maximum.at(hi, p[m], f[m])
    single = np.flatnonzero((hi > 0) & (lo == hi))
    if single.size:
        return fg | np.isin(pk_lbl, single)
    return fg


@dataclass
class Region:
    """One connected foreground component.

    Pixel membership is kept by reference into the shared label grid instead of
    per-region coordinate lists.
    """

    label: int
    bbox: BBox
    pixel_count: int
    _labels: np.ndarray

    def mask(self) -> np.ndarray:
        """Boolean window of this region over its own bbox."""
        b = self.bbox
        return self._labels[b.top : b.bottom, b.left : b.right] == self.label


def connected_components(bmap: np.ndarray) -> List[Region]:
    """8-connected components of a binary map, top-to-bottom then left-to-right."""
    labels, count = ndimage.label(bmap, structure=_EIGHT)
    regions: List[Region] = []
    slices = ndimage.find_objects(labels)
    counts = np.bincount(labels.ravel(), minlength=count + 1)
    for idx, sl in enumerate(slices, start=1):
        if sl is None:
            continue
        ys, xs = sl
        bbox = BBox(xs.start, ys.start, xs.stop, ys.stop)
        regions.append(Region(idx, bbox, int(counts[idx]), labels))
    regions.sort(key=lambda r: (r.bbox.top, r.bbox.left))
    return regions


def trace_boundary(region: Region) -> List[Tuple[int, int]]:
    """Closed outer boundary of a region as ordered (x, y) pixels.

    Moore neighbor tracing, clockwise, starting at the topmost-leftmost pixel.
    Consecutive entries are 8-adjacent and the last entry is 8-adjacent to the
    first; the closing step is implied rather than repeated.
    """
    m = np.zeros((region.bbox.height + 2, region.bbox.width + 2), dtype=bool)
    m[1:-1, 1:-1] = region.mask()
    ys, xs = np.nonzero(m)
    if len(ys) == 0:
        return []
    top = ys.min()
    start = (top, xs[ys == top].min())
    ox = region.bbox.left - 1
    oy = region.bbox.top - 1
    if len(ys) == 1:
        return [(int(start[1]) + ox, int(start[0]) + oy)]

    trace = [start]
    # Backtrack begins west of the start pixel, which is background by choice
    # of start. Jacob's criterion: stop on re-entering the start pixel from the
    # same backtrack direction as the initial entry.
    cur = start
    back_dir = 6  # index of (0, -1) in _MOORE
    first_move = None
    limit = 4 * len(ys) + 8
    for _ in range(limit):
        found = None
        for k in range(1, 9):
            d = (back_dir + k) % 8
            ny, nx = cur[0] + _MOORE[d][0], cur[1] + _MOORE[d][1]
            if m[ny, nx]:
                found = (d, (ny, nx))
                break
        if found is None:
            break  # isolated pixel, already handled above
        d, nxt = found
        if nxt == start and first_move is not None and d == first_move:
            break
        if first_move is None:
            first_move = d
        trace.append(nxt)
        cur = nxt
        back_dir = _BACKTRACK[d]
        if cur == start and len(trace) > 2:
            # Completed the loop; drop the duplicated start.
            trace.pop()
            break
    return [(int(x) + ox, int(y) + oy) for (y, x) in trace]


def _rdp(points: np.ndarray, first: int, last: int, eps: float, keep: set) -> None:
    """Ramer-Douglas-Peucker on points[first..last], marking kept indices."""
    if last <= first + 1:
        return
    p0 = points[first]
    p1 = points[last]
    seg = p1 - p0
    norm = np.hypot(seg[0], seg[1])
    pts = points[first + 1 : last]
    if norm == 0:
        dists = np.hypot(pts[:, 0] - p0[0], pts[:, 1] - p0[1])
    else:
        # Perpendicular distance via the 2-D cross product magnitude.
        dists = np.abs(seg[0] * (pts[:, 1] - p0[1]) - seg[1] * (pts[:, 0] - p0[0])) / norm
    imax = int(np.argmax(dists))
    if dists[imax] > eps:
        split = first + 1 + imax
        keep.add(split)
        _rdp(points, first, split, eps, keep)
        _rdp(points, split, last, eps, keep)


def _simplify_closed(points: np.ndarray, eps: float) -> List[int]:
    """Simplify a closed pixel trace; returns kept indices in trace order."""
    n = len(points)
    d0 = np.hypot(points[:, 0] - points[0, 0], points[:, 1] - points[0, 1])
    far = int(np.argmax(d0))
    if far == 0:
        return [0]
    keep = {0, far}
    _rdp(points, 0, far, eps, keep)
    # Second half wraps around; append the start to close the polyline.
    wrapped = np.vstack([points[far:], points[:1]])
    keep2: set = set()
    _rdp(wrapped, 0, len(wrapped) - 1, eps, keep2)
    keep.update((k + far) % n for k in keep2)
    return sorted(keep)


def is_rectangle(
    boundary: List[Tuple[int, int]],
    straightness_tol: float = 3.0,
    coverage_tol: float = 0.8,
) -> bool:
    """Whether a closed boundary trace outlines an axis-aligned rectangle.

    The trace is simplified with tolerance ``straightness_tol``; the result
    must have exactly four dominant edges, alternating horizontal/vertical,
    each spanning at least ``coverage_tol`` of the matching bbox dimension, and
    together covering at least ``coverage_tol`` of the trace. Rounded or noisy
    corners eat into the slack instead of failing outright.
    """
    n = len(boundary)
    if n < 4:
        return False
    pts = np.asarray(boundary, dtype=float)
    xs, ys_ = pts[:, 0], pts[:, 1]
    width = xs.max() - xs.min() + 1
    height = ys_.max() - ys_.min() + 1

    # Start the cycle at the point farthest from the centroid (a corner, for
    # anything rectangle-like). Simplification anchors at index 0; anchoring
    # on a mid-edge jitter bump would split that edge into two runs.
    centroid = pts.mean(axis=0)
    start = int(np.argmax(np.hypot(pts[:, 0] - centroid[0], pts[:, 1] - centroid[1])))
    pts = np.roll(pts, -start, axis=0)

    kept = _simplify_closed(pts, straightness_tol)
    if len(kept) < 4:
        return False

    dominant = []  # (start index in trace, orientation, trace span)
    total_span = 0
    for i, ki in enumerate(kept):
        kj = kept[(i + 1) % len(kept)]
        span = (kj - ki) % n
        if span == 0:
            continue
        dx = pts[kj, 0] - pts[ki, 0]
        dy = pts[kj, 1] - pts[ki, 1]
        if abs(dy) <= 2 * straightness_tol and abs(dx) >= abs(dy):
            if abs(dx) + 1 >= coverage_tol * width:
                dominant.append((ki, "h", span))
                total_span += span
        elif abs(dx) <= 2 * straightness_tol and abs(dy) > abs(dx):
            if abs(dy) + 1 >= coverage_tol * height:
                dominant.append((ki, "v", span))
                total_span += span
    if len(dominant) != 4:
        return False
    orients = [o for (_, o, _) in dominant]
    if orients not in (["h", "v", "h", "v"], ["v", "h", "v", "h"]):
        return False
    return total_span / n >= coverage_tol


def is_wireframe(region: Region, bmap: np.ndarray, hollow_tol: float = 0.15) -> bool:
    """Whether a region is a hollow frame: almost none of its own pixels sit
    strictly inside its bbox once a border band of the measured stroke width is
    excluded.
    """
    m = region.mask()
    h, w = m.shape
    if h < 3 or w < 3:
        return False
    depths: List[int] = []

    def runs(lines: np.ndarray) -> None:
        # lines: (k, n) boolean, run measured from index 0 of each row.
        for row in lines:
            d = int(np.argmin(row)) if not row.all() else len(row)
            if row[0]:
                depths.append(d)

    qs = [w // 2] if w < 8 else list(range(w // 4, w - w // 4, max(1, w // 8)))
    rs = [h // 2] if h < 8 else list(range(h // 4, h - h // 4, max(1, h // 8)))
    runs(m[:, qs].T)          # from top
    runs(m[::-1, qs].T)       # from bottom
    runs(m[rs, :])            # from left
    runs(m[rs, ::-1])         # from right
    if not depths:
        return False
    stroke = int(np.median(depths))
    stroke = max(1, min(stroke, min(h, w) // 4))
    inner = m[stroke : h - stroke, stroke : w - stroke]
    own = int(m.sum())
    if own == 0:
        return False
    return inner.sum() / own <= hollow_tol


def crop(image: np.ndarray, bbox: BBox) -> np.ndarray:
    """Crop a raster to ``bbox``; out-of-bounds boxes are an error, not a clamp."""
    h, w = image.shape[:2]
    if bbox.right > w or bbox.bottom > h:
        raise CropError(f"crop {bbox.as_tuple()} outside image {w}x{h}")
    return image[bbox.top : bbox.bottom, bbox.left : bbox.right]
