"""End-to-end pipeline: pixels + OCR text in, widget hierarchy out.

Also hosts the grouping orchestration shared by the image pipeline and the
metadata path (grouping ground-truth widget lists without any image).
"""
from __future__ import annotations

import time
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence

import numpy as np

from .detection import DetectorConfig, detect_regions, ingest_text, merge_widgets, recognize_containers
from .geometry import Widget, WidgetClass, contains, widget_sort_key
from .grouping import (
    Block,
    GroupingConfig,
    build_hierarchy,
    cluster_nontext,
    cluster_text,
    container_block,
    correct_misclassified,
    correct_missed,
    pair_groups,
    resolve_conflicts,
)
from .hierarchy import Hierarchy
from .ocr import TextBox


@dataclass
class GroupingResult:
    hierarchy: Hierarchy
    blocks: List[Block]
    widgets_by_id: Dict[str, Widget]
    recovered: List[Widget] = field(default_factory=list)
    reclassified: List[Widget] = field(default_factory=list)


def group_widgets(
    widgets: Sequence[Widget],
    width: int,
    height: int,
    cfg: Optional[GroupingConfig] = None,
    image: Optional[np.ndarray] = None,
    det_cfg: Optional[DetectorConfig] = None,
    containment_tol: int = 2,
) -> GroupingResult:
    """Group a widget list into a hierarchy.

    When ``image`` is given, the continuity corrections run (missed-widget
    recovery needs pixels to re-detect in). Without it, grouping is purely
    geometric, which is how ground-truth widget lists are handled.
    """
    cfg = (cfg or GroupingConfig()).scaled(width)
    by_id: Dict[str, Widget] = {w.id: w for w in widgets}

    # Containers claim their contents first; claimed widgets skip clustering.
    containers = [w for w in widgets if w.is_container]
    claims: Dict[str, str] = {}
    for w in widgets:
        hosts = [
            c
            for c in containers
            if c.id != w.id
            and (not w.is_container or c.bbox.area > w.bbox.area)
            and contains(c.bbox, w.bbox, containment_tol)
        ]
        if hosts:
            parent = min(hosts, key=lambda c: (c.bbox.area, widget_sort_key(c)))
            claims[w.id] = parent.id
    kids: Dict[str, List[str]] = defaultdict(list)
    for wid, pid in claims.items():
        kids[pid].append(wid)
    for c in containers:
        by_id[c.id] = replace(
            c, children=tuple(sorted(kids.get(c.id, []), key=lambda i: widget_sort_key(by_id[i])))
        )
    containers = [by_id[c.id] for c in containers]
    top = sorted(
        (c for c in containers if c.id not in claims),
        key=widget_sort_key,
    )

    free = [w for w in widgets if not w.is_container and w.id not in claims]
    nontext = [w for w in free if w.wclass is WidgetClass.NONTEXT]
    text = [w for w in free if w.wclass is WidgetClass.TEXT]

    nt = cluster_nontext(nontext, cfg)
    tx = cluster_text(text, cfg)
    positional = nt["center_x"] + nt["center_y"] + tx["top"] + tx["left"]
    groups = resolve_conflicts(positional, by_id)

    cblocks = [container_block(c, by_id, f"c{i}") for i, c in enumerate(top) if c.children]
    blocks = pair_groups(list(groups) + cblocks, by_id, cfg)

    recovered: List[Widget] = []
    reclassified: List[Widget] = []
    if image is not None:
        recovered = correct_missed(blocks, by_id, image, det_cfg or DetectorConfig(), cfg)
        reclassified = correct_misclassified(blocks, by_id)

    in_blocks = {wid for b in blocks for wid in b.widget_ids()}
    loose = [by_id[w.id] for w in free if w.id not in in_blocks]
    loose += [c for c in top if not c.children]  # childless frame, keep it as a leaf
    hierarchy = build_hierarchy(blocks, loose, by_id, width, height)
    return GroupingResult(hierarchy, blocks, by_id, recovered, reclassified)


@dataclass
class PipelineResult:
    hierarchy: Hierarchy
    widgets: List[Widget]
    blocks: List[Block]
    recovered: List[Widget]
    reclassified: List[Widget]
    timings: Dict[str, float]

    @property
    def text_widgets(self) -> List[Widget]:
        return [w for w in self.widgets if w.wclass is WidgetClass.TEXT]

    @property
    def nontext_widgets(self) -> List[Widget]:
        return [w for w in self.widgets if w.wclass is WidgetClass.NONTEXT]


def run_pipeline(
    image: np.ndarray,
    text_boxes: Sequence[TextBox] = (),
    det_cfg: Optional[DetectorConfig] = None,
    grp_cfg: Optional[GroupingConfig] = None,
    corrections: bool = True,
) -> PipelineResult:
    """Detect widgets, merge in OCR text, group, and correct."""
    det_cfg = det_cfg or DetectorConfig()
    grp_cfg = grp_cfg or GroupingConfig()
    height, width = image.shape[:2]
    timings: Dict[str, float] = {}

    t = time.perf_counter()
    det = detect_regions(image, det_cfg)
    nontext = recognize_containers(det, det_cfg)
    timings["detect"] = time.perf_counter() - t

    t = time.perf_counter()
    texts = ingest_text(text_boxes)
    merged = merge_widgets(texts, nontext, det_cfg)
    timings["merge"] = time.perf_counter() - t

    t = time.perf_counter()
    scaled = det_cfg.scaled(width)
    result = group_widgets(
        merged,
        width,
        height,
        grp_cfg,
        image=image if corrections else None,
        det_cfg=det_cfg,
        containment_tol=scaled.containment_tol,
    )
    timings["group"] = time.perf_counter() - t

    final = [result.widgets_by_id[i] for i in result.hierarchy.leaf_widget_ids()]
    return PipelineResult(
        result.hierarchy,
        final,
        result.blocks,
        result.recovered,
        result.reclassified,
        timings,
    )


def group_ground_truth(
    widgets: Sequence[Widget],
    width: int,
    height: int,
    cfg: Optional[GroupingConfig] = None,
) -> Hierarchy:
    """Hierarchy from a trusted widget list alone (no pixels, no corrections)."""
    return group_widgets(widgets, width, height, cfg).hierarchy
