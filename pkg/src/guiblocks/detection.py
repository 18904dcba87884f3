"""Widget detection: non-text regions from pixels, text lines from OCR, merging.

The non-text path is classic unsupervised detection: gradient binarization,
connected components, size filtering, then container recognition on hollow
rectangular regions. Text widgets come from OCR word boxes merged into lines.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from statistics import median
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import imaging
from .geometry import BBox, Widget, WidgetClass, contains, iou, widget_sort_key
from .imaging import Region
from .ocr import TextBox


@dataclass(frozen=True)
class DetectorConfig:
    """Detection thresholds, defined at ``reference_width`` and scaled to the image."""

    min_widget_area: float = 100.0        # px^2 at reference width
    max_widget_area_ratio: float = 0.9    # fraction of the image area
    gradient_threshold: int = 4           # intensity units, never scaled
    straightness_tol: float = 3.0         # px
    coverage_tol: float = 0.8
    hollow_tol: float = 0.15
    containment_tol: int = 2              # px
    iou_duplicate: float = 0.9
    text_overlap_iou: float = 0.2
    reference_width: int = 1440

    def scaled(self, image_width: int) -> "DetectorConfig":
        """Rescale pixel thresholds for an image of ``image_width``."""
        r = image_width / self.reference_width
        if r == 1.0:
            return self
        return replace(
            self,
            min_widget_area=self.min_widget_area * r * r,
            straightness_tol=max(1.0, self.straightness_tol * r),
            containment_tol=max(1, round(self.containment_tol * r)),
            reference_width=image_width,
        )


@dataclass
class NonTextDetection:
    """detect_nontext output plus the region handles container analysis needs."""

    widgets: List[Widget]
    regions: Dict[str, Region]
    binary_map: np.ndarray
    gray: np.ndarray


def _refine_bbox(region: Region, gray: np.ndarray, threshold: int) -> BBox:
    """Tighten a region bbox to pixels that contrast with the local surround.

    Gradient marking tags the background pixel on the near side of every edge,
    which inflates boxes by one pixel toward the top-left; measuring against
    the median intensity just outside the bbox strips that rim.
    """
    b = region.bbox
    h, w = gray.shape
    ring = []
    if b.top > 0:
        ring.append(gray[b.top - 1, max(0, b.left - 1) : min(w, b.right + 1)])
    if b.bottom < h:
        ring.append(gray[b.bottom, max(0, b.left - 1) : min(w, b.right + 1)])
    if b.left > 0:
        ring.append(gray[b.top : b.bottom, b.left - 1])
    if b.right < w:
        ring.append(gray[b.top : b.bottom, b.right])
    if not ring:
        return b
    bg = int(np.median(np.concatenate([r.ravel() for r in ring])))
    window = gray[b.top : b.bottom, b.left : b.right].astype(np.int16)
    m = region.mask() & (np.abs(window - bg) > threshold)
    if not m.any():
        return b
    ys, xs = np.nonzero(m)
    return BBox(
        b.left + int(xs.min()),
        b.top + int(ys.min()),
        b.left + int(xs.max()) + 1,
        b.top + int(ys.max()) + 1,
    )


def detect_regions(image: np.ndarray, cfg: DetectorConfig, rescale: bool = True) -> NonTextDetection:
    """Full non-text detection with region handles kept for container analysis.

    Pass ``rescale=False`` when ``cfg`` is already at the right scale, e.g.
    when detecting inside a crop of a larger image.
    """
    if rescale:
        cfg = cfg.scaled(image.shape[1])
    gray = imaging.to_grayscale(image)
    bmap = imaging.gradient_binarize(gray, cfg.gradient_threshold)
    max_area = cfg.max_widget_area_ratio * gray.shape[0] * gray.shape[1]

    widgets: List[Widget] = []
    regions: Dict[str, Region] = {}
    kept: List[Tuple[BBox, Region]] = []
    for region in imaging.connected_components(bmap):
        bbox = _refine_bbox(region, gray, cfg.gradient_threshold)
        if bbox.area < cfg.min_widget_area or bbox.area > max_area:
            continue
        kept.append((bbox, region))
    # Suppress near-identical boxes; keep the larger region of the pair.
    kept.sort(key=lambda br: (-br[1].pixel_count, br[0].top, br[0].left))
    dedup: List[Tuple[BBox, Region]] = []
    for bbox, region in kept:
        if any(iou(bbox, other) > cfg.iou_duplicate for other, _ in dedup):
            continue
        dedup.append((bbox, region))
    dedup.sort(key=lambda br: (br[0].top, br[0].left, br[0].bottom, br[0].right))
    for i, (bbox, region) in enumerate(dedup):
        wid = f"n{i}"
        widgets.append(Widget(wid, bbox, WidgetClass.NONTEXT))
        regions[wid] = region
    return NonTextDetection(widgets, regions, bmap, gray)


def detect_nontext(image: np.ndarray, cfg: Optional[DetectorConfig] = None) -> List[Widget]:
    """Detect non-text widgets in a color image."""
    return detect_regions(image, cfg or DetectorConfig()).widgets


def recognize_containers(det: NonTextDetection, cfg: DetectorConfig) -> List[Widget]:
    """Flag hollow rectangular regions that enclose other widgets as containers.

    A widget becomes a container iff its region traces to a rectangle, the
    region is a wireframe, and at least one other widget lies inside it (with
    tolerance). Children are immediate: the smallest enclosing container wins.
    """
    cfg = cfg.scaled(det.gray.shape[1])
    widgets = det.widgets
    container_ids: List[str] = []
    by_id = {w.id: w for w in widgets}
    for w in widgets:
        inner = [v for v in widgets if v.id != w.id and contains(w.bbox, v.bbox, cfg.containment_tol)]
        if not inner:
            continue
        region = det.regions[w.id]
        trace = imaging.trace_boundary(region)
        if not imaging.is_rectangle(trace, cfg.straightness_tol, cfg.coverage_tol):
            continue
        if not imaging.is_wireframe(region, det.binary_map, cfg.hollow_tol):
            continue
        container_ids.append(w.id)

    children: Dict[str, List[str]] = {cid: [] for cid in container_ids}
    containers = [by_id[cid] for cid in container_ids]
    for w in widgets:
        hosts = [
            c for c in containers
            if c.id != w.id and contains(c.bbox, w.bbox, cfg.containment_tol)
        ]
        if not hosts:
            continue
        parent = min(hosts, key=lambda c: (c.bbox.area, c.id))
        children[parent.id].append(w.id)

    out: List[Widget] = []
    for w in widgets:
        if w.id in children:
            kids = tuple(sorted(children[w.id], key=lambda i: widget_sort_key(by_id[i])))
            out.append(replace(w, is_container=True, children=kids))
        else:
            out.append(w)
    return out


def ingest_text(boxes: Iterable[TextBox]) -> List[Widget]:
    """Merge OCR word boxes into line widgets.

    Two boxes join the same line when their vertical overlap covers at least
    half of the shorter box and the horizontal gap stays within 1.5x the
    median character width across all boxes.
    """
    items = sorted(boxes, key=lambda tb: (tb.bbox.top, tb.bbox.left, tb.bbox.right))
    if not items:
        return []
    char_widths = [tb.bbox.width / max(1, len(tb.content)) for tb in items]
    gap_limit = 1.5 * median(char_widths)

    lines: List[List[TextBox]] = []
    for tb in items:
        target = None
        for line in lines:
            last = line[-1]
            overlap = min(last.bbox.bottom, tb.bbox.bottom) - max(last.bbox.top, tb.bbox.top)
            if overlap < 0.5 * min(last.bbox.height, tb.bbox.height):
                continue
            if tb.bbox.left - last.bbox.right > gap_limit:
                continue
            target = line
            break
        if target is None:
            lines.append([tb])
        else:
            target.append(tb)

    widgets: List[Widget] = []
    for i, line in enumerate(sorted(lines, key=lambda ln: (ln[0].bbox.top, ln[0].bbox.left))):
        bbox = line[0].bbox
        for tb in line[1:]:
            bbox = bbox.hull(tb.bbox)
        content = " ".join(tb.content for tb in line)
        widgets.append(Widget(f"t{i}", bbox, WidgetClass.TEXT, text_content=content))
    return widgets


def merge_widgets(
    texts: Sequence[Widget],
    nontexts: Sequence[Widget],
    cfg: Optional[DetectorConfig] = None,
) -> List[Widget]:
    """Cross-check the two detection routes into one widget list.

    Non-text widgets overlapping a text line (IoU above the overlap threshold,
    or contained in its box) are OCR-confirmed text and dropped, except
    containers and container children, which are real widgets by the
    connectedness rule. A near-exact text overlap is the same object seen by
    both routes, so it is dropped even for children.
    """
    cfg = cfg or DetectorConfig()
    child_ids = {cid for w in nontexts if w.is_container for cid in w.children}
    survivors: List[Widget] = []
    removed: set = set()
    for nt in nontexts:
        duplicate = any(iou(nt.bbox, t.bbox) > cfg.iou_duplicate for t in texts)
        if duplicate:
            removed.add(nt.id)
            continue
        exempt = nt.is_container or nt.id in child_ids
        hit = any(
            iou(nt.bbox, t.bbox) > cfg.text_overlap_iou
            or contains(t.bbox, nt.bbox, cfg.containment_tol)
            for t in texts
        )
        if hit and not exempt:
            removed.add(nt.id)
            continue
        survivors.append(nt)
    pruned = [
        replace(w, children=tuple(c for c in w.children if c not in removed))
        if w.is_container
        else w
        for w in survivors
    ]
    return pruned + list(texts)


@dataclass(frozen=True)
class DetectionReport:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float


def evaluate_detection(
    predicted: Sequence[Widget],
    truth: Sequence[Widget],
    iou_threshold: float = 0.9,
) -> DetectionReport:
    """Greedy one-to-one matching by descending IoU within the same class."""
    pairs = []
    for pi, p in enumerate(predicted):
        for ti, t in enumerate(truth):
            if p.wclass is not t.wclass:
                continue
            v = iou(p.bbox, t.bbox)
            if v > iou_threshold:
                pairs.append((v, pi, ti))
    pairs.sort(key=lambda x: (-x[0], x[1], x[2]))
    used_p: set = set()
    used_t: set = set()
    tp = 0
    for v, pi, ti in pairs:
        if pi in used_p or ti in used_t:
            continue
        used_p.add(pi)
        used_t.add(ti)
        tp += 1
    fp = len(predicted) - tp
    fn = len(truth) - tp
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return DetectionReport(tp, fp, fn, precision, recall, f1)


def load_ground_truth_widgets(path: str) -> List[Widget]:
    """Read ground-truth widgets: [{"bbox": [l,t,r,b], "class": "text"|"nontext"}, ...]."""
    with open(path, "r", encoding="utf-8") as fh:
        records = json.load(fh)
    widgets: List[Widget] = []
    for i, rec in enumerate(records):
        l, t, r, b = (int(v) for v in rec["bbox"])
        wclass = WidgetClass(rec["class"])
        content = rec.get("content", "") if wclass is WidgetClass.TEXT else None
        widgets.append(Widget(f"w{i}", BBox(l, t, r, b), wclass, text_content=content))
    return widgets
