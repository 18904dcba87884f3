"""Perceptual grouping: alignment clustering, conflict resolution, proximity
pairing, and the two continuity corrections.

The stages mirror how people read a screen. Connected containers bind their
contents first; remaining widgets cluster on shared alignment attributes;
widgets claimed by both a row and a column keep the group they resemble more;
neighboring similar groups pair into blocks of item subgroups; finally,
incomplete or oddly-classed items are repaired against their siblings.
"""
from __future__ import annotations

import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass, replace
from statistics import median
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import detection as _detection
from . import imaging
from .detection import DetectorConfig
from .geometry import Axis, BBox, Widget, WidgetClass, axis_gap, contains, hull_of, widget_sort_key

log = logging.getLogger(__name__)

VERTICAL = "vertical"
HORIZONTAL = "horizontal"

# Attribute -> orientation of the resulting group. A shared center_x or left
# edge stacks widgets into a column; shared center_y or top makes a row.
_ATTR_ORIENTATION = {
    "center_x": VERTICAL,
    "left": VERTICAL,
    "center_y": HORIZONTAL,
    "top": HORIZONTAL,
    "area": None,
}
POSITIONAL_ATTRS = ("center_x", "center_y", "top", "left")


@dataclass(frozen=True)
class GroupingConfig:
    """Grouping thresholds at ``reference_width``; pixel fields scale linearly."""

    eps_position: float = 12.0
    eps_area_sqrt: float = 15.0     # applied to sqrt(area)
    min_pts: int = 2
    max_count_diff: int = 4         # groups merge only when item counts differ by less
    proximity_gap_max: Optional[float] = None  # None: 1.5 x median widget height
    proximity_gap_factor: float = 1.5
    relax_factor: float = 0.5       # min-area multiplier when re-detecting missed widgets
    crop_inflation: float = 1.25
    reference_width: int = 1440

    def scaled(self, image_width: int) -> "GroupingConfig":
        r = image_width / self.reference_width
        if r == 1.0:
            return self
        return replace(
            self,
            eps_position=self.eps_position * r,
            eps_area_sqrt=self.eps_area_sqrt * r,
            proximity_gap_max=None if self.proximity_gap_max is None else self.proximity_gap_max * r,
            reference_width=image_width,
        )


def dbscan_1d(
    points: Sequence[Tuple[str, float]],
    eps: float,
    min_pts: int = 2,
) -> Tuple[List[List[str]], List[str]]:
    """Classic DBSCAN on a 1-D attribute.

    Args:
        points: (id, value) pairs. Input order fixes tie-breaking.
        eps: neighborhood radius, inclusive.
        min_pts: minimum neighborhood size (self included) for a core point.

    Returns:
        (clusters, outliers). Each cluster lists ids sorted by value then
        input order; clusters appear in discovery order. With min_pts=2 the
        clusters are exactly the maximal runs of values with gaps <= eps.
    """
    n = len(points)
    if n == 0:
        return [], []
    ids = [p[0] for p in points]
    vals = np.asarray([p[1] for p in points], dtype=float)
    order = np.argsort(vals, kind="stable")
    sorted_vals = vals[order]
    lo = np.searchsorted(sorted_vals, vals - eps, side="left")
    hi = np.searchsorted(sorted_vals, vals + eps, side="right")
    core = (hi - lo) >= min_pts

    UNVISITED, NOISE = -2, -1
    labels = np.full(n, UNVISITED, dtype=int)
    cid = 0
    for i in range(n):
        if labels[i] != UNVISITED or not core[i]:
            continue
        labels[i] = cid
        queue = list(order[lo[i] : hi[i]])
        k = 0
        while k < len(queue):
            j = queue[k]
            k += 1
            if labels[j] == NOISE:
                labels[j] = cid  # border point adopted by the first cluster to reach it
            if labels[j] != UNVISITED:
                continue
            labels[j] = cid
            if core[j]:
                queue.extend(order[lo[j] : hi[j]])
        cid += 1
    labels[labels == UNVISITED] = NOISE

    clusters: List[List[str]] = []
    for c in range(cid):
        members = [i for i in range(n) if labels[i] == c]
        members.sort(key=lambda i: (vals[i], i))
        clusters.append([ids[i] for i in members])
    outliers = [ids[i] for i in range(n) if labels[i] == NOISE]
    return clusters, outliers


@dataclass(frozen=True)
class Cluster:
    """Widgets sharing one alignment attribute (a row, column, or size family)."""

    attribute: str
    wclass: WidgetClass
    member_ids: Tuple[str, ...]

    @property
    def orientation(self) -> Optional[str]:
        return _ATTR_ORIENTATION[self.attribute]


def _cluster_by(
    widgets: Sequence[Widget],
    attribute: str,
    key,
    eps: float,
    min_pts: int,
) -> List[Cluster]:
    pts = [(w.id, key(w)) for w in sorted(widgets, key=widget_sort_key)]
    clusters, _ = dbscan_1d(pts, eps, min_pts)
    wclass = widgets[0].wclass
    return [Cluster(attribute, wclass, tuple(c)) for c in clusters if len(c) >= 2]


def cluster_nontext(widgets: Sequence[Widget], cfg: GroupingConfig) -> Dict[str, List[Cluster]]:
    """Cluster non-text widgets by center alignment and by size.

    Size clusters never become groups on their own; they only exist because
    size similarity feeds the conflict scoring.
    """
    if not widgets:
        return {"center_x": [], "center_y": [], "area": []}
    return {
        "center_x": _cluster_by(widgets, "center_x", lambda w: w.center_x, cfg.eps_position, cfg.min_pts),
        "center_y": _cluster_by(widgets, "center_y", lambda w: w.center_y, cfg.eps_position, cfg.min_pts),
        "area": _cluster_by(widgets, "area", lambda w: math.sqrt(w.area), cfg.eps_area_sqrt, cfg.min_pts),
    }


def cluster_text(widgets: Sequence[Widget], cfg: GroupingConfig) -> Dict[str, List[Cluster]]:
    """Cluster text lines by shared top edge (rows) and shared left edge (columns)."""
    if not widgets:
        return {"top": [], "left": []}
    return {
        "top": _cluster_by(widgets, "top", lambda w: float(w.top), cfg.eps_position, cfg.min_pts),
        "left": _cluster_by(widgets, "left", lambda w: float(w.left), cfg.eps_position, cfg.min_pts),
    }


def _group_axis(orientation: str) -> Axis:
    # A column extends vertically, so neighbor gaps are measured vertically.
    return Axis.VERTICAL if orientation == VERTICAL else Axis.HORIZONTAL


def _neighbor_gaps(members: List[Widget], orientation: str) -> List[int]:
    axis = _group_axis(orientation)
    if orientation == VERTICAL:
        members = sorted(members, key=lambda w: (w.center_y, w.id))
    else:
        members = sorted(members, key=lambda w: (w.center_x, w.id))
    return [axis_gap(a.bbox, b.bbox, axis) for a, b in zip(members, members[1:])]


def _conflict_scores(w: Widget, others: List[Widget], orientation: str) -> Tuple[float, float]:
    mean_area = sum(o.area for o in others) / len(others)
    area_score = abs(w.area - mean_area) / mean_area
    gaps = _neighbor_gaps(others, orientation)
    mean_gap = sum(gaps) / len(gaps) if gaps else 0.0
    axis = _group_axis(orientation)
    w_gap = min(axis_gap(w.bbox, o.bbox, axis) for o in others)
    spacing_score = abs(w_gap - mean_gap) / (mean_gap + 1.0)
    return area_score, spacing_score


def resolve_conflicts(
    clusters: Sequence[Cluster],
    widgets_by_id: Dict[str, Widget],
) -> List[Cluster]:
    """Make positional clusters disjoint.

    A widget sitting in both a row and a column keeps the group whose members
    it resembles more: smallest sum of area deviation and spacing deviation,
    ties by spacing, then the vertical group. Groups left with fewer than two
    members dissolve.
    """
    positional = [c for c in clusters if c.attribute in POSITIONAL_ATTRS]
    membership: Dict[str, List[int]] = {}
    for gi, c in enumerate(positional):
        for wid in c.member_ids:
            membership.setdefault(wid, []).append(gi)

    drops: Dict[int, set] = {}
    for wid, gis in sorted(membership.items()):
        if len(gis) < 2:
            continue
        w = widgets_by_id[wid]
        scored = []
        for gi in gis:
            c = positional[gi]
            others = [widgets_by_id[m] for m in c.member_ids if m != wid]
            area_s, spacing_s = _conflict_scores(w, others, c.orientation)
            vertical_rank = 0 if c.orientation == VERTICAL else 1
            scored.append((area_s + spacing_s, spacing_s, vertical_rank, c.attribute, gi))
        scored.sort()
        for _, _, _, _, gi in scored[1:]:
            drops.setdefault(gi, set()).add(wid)

    out: List[Cluster] = []
    for gi, c in enumerate(positional):
        dropped = drops.get(gi, set())
        members = tuple(m for m in c.member_ids if m not in dropped)
        if len(members) >= 2:
            out.append(Cluster(c.attribute, c.wclass, members))
    return out


@dataclass
class Block:
    """A perceptual block: ordered subgroups of widget ids.

    ``container_ids`` parallels ``subgroups`` when the block came from
    containers; entry i is the frame widget owning subgroup i.
    """

    id: str
    orientation: Optional[str]
    source: str  # "paired" | "container"
    subgroups: List[List[str]]
    container_ids: Optional[List[Optional[str]]] = None

    def widget_ids(self) -> List[str]:
        return [wid for sg in self.subgroups for wid in sg]


def container_block(container: Widget, widgets_by_id: Dict[str, Widget], block_id: str) -> Block:
    """Wrap one container and its children as a single-subgroup block."""
    kids = sorted(container.children, key=lambda i: widget_sort_key(widgets_by_id[i]))
    return Block(block_id, None, "container", [kids], [container.id])


def _box_gap(a: BBox, b: BBox) -> float:
    """Euclidean edge-to-edge distance; 0 when the boxes touch or overlap."""
    dx = max(0, a.left - b.right, b.left - a.right)
    dy = max(0, a.top - b.bottom, b.top - a.bottom)
    return math.hypot(dx, dy)


def pair_subgroups(
    group_a: Sequence[str],
    group_b: Sequence[str],
    widgets_by_id: Dict[str, Widget],
) -> List[List[str]]:
    """Pair each widget of the smaller group with its nearest unpaired widget
    in the other group; leftovers become singleton subgroups.

    Nearest by edge-to-edge distance, not center distance: a wide label's
    center drifts away from its own row's icon, its edge does not.
    """
    a = sorted(group_a, key=lambda i: widget_sort_key(widgets_by_id[i]))
    b = sorted(group_b, key=lambda i: widget_sort_key(widgets_by_id[i]))
    if len(a) > len(b):
        a, b = b, a
    unpaired = list(b)
    subgroups: List[List[str]] = []
    for wid in a:
        w = widgets_by_id[wid]
        best = min(
            unpaired,
            key=lambda o: (
                _box_gap(w.bbox, widgets_by_id[o].bbox),
                widget_sort_key(widgets_by_id[o]),
            ),
        )
        unpaired.remove(best)
        subgroups.append(sorted([wid, best], key=lambda i: widget_sort_key(widgets_by_id[i])))
    subgroups.extend([wid] for wid in unpaired)
    return _sort_subgroups(subgroups, widgets_by_id)


def _sort_subgroups(subgroups, widgets_by_id, container_ids=None):
    def sg_key(i):
        h = hull_of(widgets_by_id[w].bbox for w in subgroups[i])
        return (h.top, h.left, h.bottom, h.right)

    idx = sorted(range(len(subgroups)), key=sg_key)
    if container_ids is None:
        return [subgroups[i] for i in idx]
    return [subgroups[i] for i in idx], [container_ids[i] for i in idx]


@dataclass
class _Unit:
    kind: str  # "text" | "nontext" | "container" | "block"
    orientation: Optional[str]
    subgroups: Optional[List[List[str]]]  # None for plain cluster groups
    members: List[str]
    hull: BBox
    container_ids: Optional[List[Optional[str]]] = None

    @property
    def item_count(self) -> int:
        return len(self.subgroups) if self.subgroups is not None else len(self.members)


def _unit_from_cluster(c: Cluster, widgets_by_id: Dict[str, Widget]) -> _Unit:
    members = sorted(c.member_ids, key=lambda i: widget_sort_key(widgets_by_id[i]))
    hull = hull_of(widgets_by_id[m].bbox for m in members)
    return _Unit(c.wclass.value, c.orientation, None, members, hull)


def _unit_from_block(b: Block, widgets_by_id: Dict[str, Widget]) -> _Unit:
    kind = "container" if b.source == "container" else "block"
    boxes = [widgets_by_id[m].bbox for m in b.widget_ids()]
    if b.container_ids:
        boxes.extend(widgets_by_id[c].bbox for c in b.container_ids if c)
    return _Unit(kind, b.orientation, [list(sg) for sg in b.subgroups], b.widget_ids(), hull_of(boxes), list(b.container_ids or []) or None)


def _projection_overlap(a: BBox, b: BBox, axis: Axis) -> int:
    if axis is Axis.HORIZONTAL:
        return min(a.right, b.right) - max(a.left, b.left)
    return min(a.bottom, b.bottom) - max(a.top, b.top)


def _adjacency(a: _Unit, b: _Unit) -> Optional[Tuple[Axis, int]]:
    """Axis along which the two hulls sit next to each other, and the gap."""
    if a.orientation == VERTICAL:
        axes = [Axis.HORIZONTAL]
    elif a.orientation == HORIZONTAL:
        axes = [Axis.VERTICAL]
    else:
        axes = [Axis.VERTICAL, Axis.HORIZONTAL]
    for axis in axes:
        other = Axis.VERTICAL if axis is Axis.HORIZONTAL else Axis.HORIZONTAL
        if _projection_overlap(a.hull, b.hull, other) > 0:
            return axis, axis_gap(a.hull, b.hull, axis)
    return None


def _corridor(a: BBox, b: BBox, axis: Axis) -> Optional[BBox]:
    """The empty strip separating two hulls along ``axis``, or None if they touch."""
    if axis is Axis.HORIZONTAL:
        lo, hi = (a, b) if a.left <= b.left else (b, a)
        if hi.left <= lo.right:
            return None
        top = max(a.top, b.top)
        bottom = min(a.bottom, b.bottom)
        if top >= bottom:
            return None
        return BBox(lo.right, top, hi.left, bottom)
    lo, hi = (a, b) if a.top <= b.top else (b, a)
    if hi.top <= lo.bottom:
        return None
    left = max(a.left, b.left)
    right = min(a.right, b.right)
    if left >= right:
        return None
    return BBox(left, lo.bottom, right, hi.top)


def _compatible(
    a: _Unit,
    b: _Unit,
    units: Sequence[_Unit],
    widgets_by_id: Dict[str, Widget],
    cfg: GroupingConfig,
) -> Optional[int]:
    """Gap in pixels when the two units may merge, else None."""
    if (a.kind == "container") != (b.kind == "container"):
        return None
    if a.orientation != b.orientation:
        return None
    if abs(a.item_count - b.item_count) >= cfg.max_count_diff:
        return None
    adj = _adjacency(a, b)
    if adj is None:
        return None
    axis, gap = adj
    if cfg.proximity_gap_max is not None:
        gap_max = cfg.proximity_gap_max
    else:
        heights = [widgets_by_id[m].bbox.height for m in a.members + b.members]
        gap_max = cfg.proximity_gap_factor * median(heights)
    if gap > gap_max:
        return None
    corridor = _corridor(a.hull, b.hull, axis)
    if corridor is not None:
        for u in units:
            if u is a or u is b:
                continue
            if corridor.intersection(u.hull) is not None:
                return None
    return gap


def _merge_units(a: _Unit, b: _Unit, widgets_by_id: Dict[str, Widget]) -> _Unit:
    hull = a.hull.hull(b.hull)
    members = a.members + b.members
    if a.subgroups is None and b.subgroups is None:
        subgroups = pair_subgroups(a.members, b.members, widgets_by_id)
        return _Unit("block", a.orientation, subgroups, members, hull)
    if a.subgroups is not None and b.subgroups is not None:
        # Two blocks side by side keep their items; the item lists concatenate.
        merged = [list(sg) for sg in a.subgroups] + [list(sg) for sg in b.subgroups]
        cids = None
        if a.container_ids or b.container_ids:
            cids = (a.container_ids or [None] * len(a.subgroups)) + (
                b.container_ids or [None] * len(b.subgroups)
            )
            merged, cids = _sort_subgroups(merged, widgets_by_id, cids)
        else:
            merged = _sort_subgroups(merged, widgets_by_id)
        kind = "container" if a.kind == b.kind == "container" else "block"
        return _Unit(kind, a.orientation, merged, members, hull, cids)
    block, plain = (a, b) if a.subgroups is not None else (b, a)
    # Each widget of the plain group joins the subgroup holding its nearest
    # widget; one newcomer per subgroup per merge, extras become new items.
    subgroups = [list(sg) for sg in block.subgroups]
    taken: set = set()
    extras: List[List[str]] = []
    for wid in sorted(plain.members, key=lambda i: widget_sort_key(widgets_by_id[i])):
        w = widgets_by_id[wid]
        candidates = [
            (
                _box_gap(w.bbox, widgets_by_id[m].bbox),
                widget_sort_key(widgets_by_id[m]),
                si,
            )
            for si, sg in enumerate(subgroups)
            if si not in taken
            for m in sg
        ]
        if not candidates:
            extras.append([wid])
            continue
        _, _, si = min(candidates)
        taken.add(si)
        subgroups[si] = sorted(subgroups[si] + [wid], key=lambda i: widget_sort_key(widgets_by_id[i]))
    subgroups.extend(extras)
    cids = None
    if block.container_ids:
        cids = list(block.container_ids) + [None] * (len(subgroups) - len(block.container_ids))
        subgroups, cids = _sort_subgroups(subgroups, widgets_by_id, cids)
    else:
        subgroups = _sort_subgroups(subgroups, widgets_by_id)
    return _Unit(block.kind, block.orientation, subgroups, members, hull, cids)


def pair_groups(
    groups: Sequence[Union[Cluster, Block]],
    widgets_by_id: Dict[str, Widget],
    cfg: GroupingConfig,
) -> List[Block]:
    """Iteratively merge proximate similar groups into blocks.

    Same-class pairs merge before mixed pairs; within a tier the pair with the
    fewest combined items and the smallest hull gap goes first, which lets long
    runs of similar units merge bottom-up without tripping the count rule.
    Every surviving group becomes a block; a group that never paired keeps one
    widget per subgroup.
    """
    units: List[_Unit] = []
    for g in groups:
        if isinstance(g, Cluster):
            units.append(_unit_from_cluster(g, widgets_by_id))
        else:
            units.append(_unit_from_block(g, widgets_by_id))

    while True:
        best = None
        for i in range(len(units)):
            for j in range(i + 1, len(units)):
                a, b = units[i], units[j]
                gap = _compatible(a, b, units, widgets_by_id, cfg)
                if gap is None:
                    continue
                same = a.kind == b.kind and a.kind in ("text", "nontext", "container")
                tier = 0 if same else 1
                key = (
                    tier,
                    a.item_count + b.item_count,
                    gap,
                    a.hull.as_tuple(),
                    b.hull.as_tuple(),
                )
                if best is None or key < best[0]:
                    best = (key, i, j)
        if best is None:
            break
        _, i, j = best
        merged = _merge_units(units[i], units[j], widgets_by_id)
        units = [u for k, u in enumerate(units) if k not in (i, j)]
        units.append(merged)

    blocks: List[Block] = []
    units.sort(key=lambda u: u.hull.as_tuple())
    for idx, u in enumerate(units):
        subgroups = u.subgroups if u.subgroups is not None else [[m] for m in u.members]
        source = "container" if u.kind == "container" else "paired"
        blocks.append(Block(f"b{idx}", u.orientation, source, subgroups, u.container_ids))
    return blocks


# ---------------------------------------------------------------------------
# Continuity corrections


def _slot_stats(complete: List[List[Widget]]):
    """Per-slot mean size, mean offset from the first slot, and modal class."""
    modal = len(complete[0])
    rel = [[] for _ in range(modal)]
    sizes = [[] for _ in range(modal)]
    classes = [[] for _ in range(modal)]
    for sg in complete:
        anchor = sg[0].bbox.center
        for j, w in enumerate(sg):
            rel[j].append((w.bbox.center_x - anchor[0], w.bbox.center_y - anchor[1]))
            sizes[j].append((w.bbox.width, w.bbox.height))
            classes[j].append(w.wclass)
    mean_rel = [(sum(v[0] for v in r) / len(r), sum(v[1] for v in r) / len(r)) for r in rel]
    mean_size = [(sum(v[0] for v in s) / len(s), sum(v[1] for v in s) / len(s)) for s in sizes]
    return mean_rel, mean_size, classes


def _match_existing_to_slots(existing: List[Widget], mean_rel, mean_size) -> Tuple[int, ...]:
    """Best order-preserving assignment of present widgets to item slots."""
    modal = len(mean_rel)
    best: Optional[Tuple[float, Tuple[int, ...]]] = None
    for combo in itertools.combinations(range(modal), len(existing)):
        cost = 0.0
        for wi, sj in zip(existing, combo):
            mw, mh = mean_size[sj]
            cost += abs(wi.bbox.width - mw) + abs(wi.bbox.height - mh)
        for (i1, s1), (i2, s2) in itertools.combinations(enumerate(combo), 2):
            dx = existing[i2].bbox.center_x - existing[i1].bbox.center_x
            dy = existing[i2].bbox.center_y - existing[i1].bbox.center_y
            ex = mean_rel[s2][0] - mean_rel[s1][0]
            ey = mean_rel[s2][1] - mean_rel[s1][1]
            cost += math.hypot(dx - ex, dy - ey)
        if best is None or cost < best[0]:
            best = (cost, combo)
    return best[1]


def correct_missed(
    blocks: Sequence[Block],
    widgets_by_id: Dict[str, Widget],
    image: np.ndarray,
    det_cfg: DetectorConfig,
    cfg: GroupingConfig,
) -> List[Widget]:
    """Re-detect widgets that sibling subgroups say should exist.

    For each subgroup smaller than the block's modal size, the expected box of
    every missing slot is projected from the complete subgroups, the region is
    cropped, and detection reruns with the area floor relaxed. A found region
    of the expected class whose center falls in the expected box joins the
    subgroup. Blocks are only extended, never shrunk.
    """
    h, w = image.shape[:2]
    det_scaled = det_cfg.scaled(w)
    relaxed = replace(det_scaled, min_widget_area=det_scaled.min_widget_area * cfg.relax_factor)
    recovered: List[Widget] = []
    serial = 0
    for block in blocks:
        sizes = [len(sg) for sg in block.subgroups]
        if len(sizes) < 2:
            continue
        counts = Counter(sizes)
        modal = max(counts, key=lambda s: (counts[s], s))
        if modal < 2 or modal > 6 or counts[modal] * 2 <= len(sizes):
            continue
        complete = [
            [widgets_by_id[i] for i in sg] for sg in block.subgroups if len(sg) == modal
        ]
        mean_rel, mean_size, classes = _slot_stats(complete)
        for sg in block.subgroups:
            if len(sg) >= modal or not sg:
                continue
            existing = [widgets_by_id[i] for i in sg]
            combo = _match_existing_to_slots(existing, mean_rel, mean_size)
            missing = [j for j in range(modal) if j not in combo]
            for slot in missing:
                slot_classes = Counter(classes[slot])
                expected_class = slot_classes.most_common(1)[0][0]
                if expected_class is not WidgetClass.NONTEXT:
                    continue  # text comes from OCR, not from the pixel detector
                cxs, cys = [], []
                for wi, sj in zip(existing, combo):
                    cxs.append(wi.bbox.center_x + mean_rel[slot][0] - mean_rel[sj][0])
                    cys.append(wi.bbox.center_y + mean_rel[slot][1] - mean_rel[sj][1])
                ecx = sum(cxs) / len(cxs)
                ecy = sum(cys) / len(cys)
                ew, eh = mean_size[slot]
                # Check bounds on the raw coordinates; BBox rejects negative origins.
                el = int(round(ecx - ew / 2))
                et = int(round(ecy - eh / 2))
                er = int(round(ecx + ew / 2))
                eb = int(round(ecy + eh / 2))
                if el < 0 or et < 0 or er > w or eb > h or el >= er or et >= eb:
                    log.info("missed-widget region (%d, %d, %d, %d) outside image, skipped", el, et, er, eb)
                    continue
                expected = BBox(el, et, er, eb)
                iw, ih = expected.width * cfg.crop_inflation, expected.height * cfg.crop_inflation
                window = BBox(
                    max(0, int(ecx - iw / 2)),
                    max(0, int(ecy - ih / 2)),
                    min(w, int(math.ceil(ecx + iw / 2))),
                    min(h, int(math.ceil(ecy + ih / 2))),
                )
                try:
                    patch = imaging.crop(image, window)
                except imaging.CropError as exc:
                    log.info("missed-widget crop failed: %s", exc)
                    continue
                found = _detection.detect_regions(patch, relaxed, rescale=False).widgets
                hits = []
                for cand in found:
                    gb = cand.bbox.translate(window.left, window.top)
                    gcx, gcy = gb.center
                    if expected.left <= gcx < expected.right and expected.top <= gcy < expected.bottom:
                        hits.append((math.hypot(gcx - ecx, gcy - ecy), gb))
                if not hits:
                    continue
                _, gb = min(hits, key=lambda t: (t[0], t[1].as_tuple()))
                new = Widget(f"r{serial}", gb, WidgetClass.NONTEXT)
                serial += 1
                widgets_by_id[new.id] = new
                sg.append(new.id)
                sg.sort(key=lambda i: widget_sort_key(widgets_by_id[i]))
                existing = [widgets_by_id[i] for i in sg]
                combo = tuple(sorted(set(combo) | {slot}))
                recovered.append(new)
    return recovered


def correct_misclassified(
    blocks: Sequence[Block],
    widgets_by_id: Dict[str, Widget],
) -> List[Widget]:
    """Majority vote per item slot: a minority-class widget in an otherwise
    uniform slot is reassigned to the majority class."""
    changed: List[Widget] = []
    for block in blocks:
        sizes = [len(sg) for sg in block.subgroups]
        if not sizes:
            continue
        counts = Counter(sizes)
        modal = max(counts, key=lambda s: (counts[s], s))
        rows = [sg for sg in block.subgroups if len(sg) == modal]
        if len(rows) < 2:
            continue
        for slot in range(modal):
            slot_widgets = [widgets_by_id[sg[slot]] for sg in rows]
            tally = Counter(w.wclass for w in slot_widgets)
            major, votes = tally.most_common(1)[0]
            if votes * 2 <= len(slot_widgets):
                continue  # majority means strictly more than half
            for wdg in slot_widgets:
                if wdg.wclass is major:
                    continue
                if major is WidgetClass.TEXT:
                    fixed = replace(wdg, wclass=major, text_content=wdg.text_content or "")
                else:
                    fixed = replace(wdg, wclass=major, text_content=None)
                widgets_by_id[fixed.id] = fixed
                changed.append(fixed)
    return changed


def build_hierarchy(
    blocks: Sequence[Block],
    loose: Sequence[Widget],
    widgets_by_id: Dict[str, Widget],
    width: Optional[int] = None,
    height: Optional[int] = None,
):
    """Assemble blocks and loose widgets into a hierarchy tree.

    A widget claimed by both a container block and a paired block stays with
    the container; every widget ends up in the tree exactly once.
    """
    from .hierarchy import BlockNode, GroupNode, Hierarchy, WidgetNode

    container_claimed: set = set()
    for b in blocks:
        if b.source == "container":
            container_claimed.update(b.widget_ids())

    def leaf(wid: str):
        wdg = widgets_by_id[wid]
        # A childless container degenerates to a plain leaf; an empty group
        # would have no bbox to sort by.
        if wdg.is_container and wdg.children:
            kids = sorted(wdg.children, key=lambda i: widget_sort_key(widgets_by_id[i]))
            group = GroupNode([leaf(k) for k in kids], container_id=wid)
            return BlockNode(f"c:{wid}", "container", None, [group])
        return WidgetNode(wdg)

    nodes = []
    for b in blocks:
        groups = []
        for si, sg in enumerate(b.subgroups):
            ids = list(sg)
            if b.source != "container":
                ids = [i for i in ids if i not in container_claimed]
            if not ids:
                continue
            cid = b.container_ids[si] if b.container_ids else None
            groups.append(GroupNode([leaf(i) for i in ids], container_id=cid))
        if groups:
            nodes.append(BlockNode(b.id, b.source, b.orientation, groups))
    for wdg in loose:
        if wdg.id in container_claimed:
            continue
        nodes.append(leaf(wdg.id))
    nodes.sort(key=lambda nd: (nd.bbox.top, nd.bbox.left, nd.bbox.bottom, nd.bbox.right))
    return Hierarchy(nodes, width, height)
