"""Hierarchy tree: blocks of subgroups, containers, loose widgets.

The tree serializes to a six-symbol token sequence: "(" ")" wrap a block,
"[" "]" wrap a subgroup, "t" and "n" are text / non-text leaves. Containers
serialize as blocks. Widget order inside every level is reading order
(top-to-bottom, then left-to-right), fixed at construction time.
"""
from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

from .geometry import BBox, Widget, WidgetClass, hull_of

TOKENS = ("(", ")", "[", "]", "t", "n")


@dataclass
class WidgetNode:
    widget: Widget

    @property
    def bbox(self) -> BBox:
        return self.widget.bbox


@dataclass
class GroupNode:
    """One subgroup of a block; children are leaves or nested blocks.

    ``container_id`` names the frame widget when the subgroup is the content
    of a container.
    """

    children: List["Node"] = field(default_factory=list)
    container_id: Optional[str] = None

    @property
    def bbox(self) -> BBox:
        return hull_of(c.bbox for c in self.children)


@dataclass
class BlockNode:
    """A perceptual block: an ordered list of subgroups."""

    id: str
    source: str  # "paired" or "container"
    orientation: Optional[str]
    children: List[GroupNode] = field(default_factory=list)

    @property
    def bbox(self) -> BBox:
        return hull_of(c.bbox for c in self.children)


Node = Union[WidgetNode, GroupNode, BlockNode]


@dataclass
class Hierarchy:
    """Root of one GUI's grouping result."""

    children: List[Node] = field(default_factory=list)
    width: Optional[int] = None
    height: Optional[int] = None

    def blocks(self) -> List[BlockNode]:
        return [c for c in self.children if isinstance(c, BlockNode)]

    def leaf_widget_ids(self) -> List[str]:
        out: List[str] = []

        def walk(node: Node) -> None:
            if isinstance(node, WidgetNode):
                out.append(node.widget.id)
            elif isinstance(node, GroupNode):
                if node.container_id is not None:
                    out.append(node.container_id)
                for c in node.children:
                    walk(c)
            else:
                for g in node.children:
                    walk(g)

        for c in self.children:
            walk(c)
        return out


def serialize_node(node: Node) -> List[str]:
    if isinstance(node, WidgetNode):
        return ["t" if node.widget.wclass is WidgetClass.TEXT else "n"]
    if isinstance(node, GroupNode):
        tokens = ["["]
        for c in node.children:
            tokens.extend(serialize_node(c))
        tokens.append("]")
        return tokens
    tokens = ["("]
    for g in node.children:
        tokens.extend(serialize_node(g))
    tokens.append(")")
    return tokens


def serialize(h: Hierarchy) -> List[str]:
    """Depth-first token sequence for a whole hierarchy."""
    tokens: List[str] = []
    for c in h.children:
        tokens.extend(serialize_node(c))
    return tokens


def block_sequences(h: Hierarchy) -> List[List[str]]:
    """Token sequence of each top-level block, in tree order."""
    return [serialize_node(b) for b in h.blocks()]


def _node_to_json(node: Node) -> dict:
    if isinstance(node, WidgetNode):
        w = node.widget
        d = {
            "type": "text" if w.wclass is WidgetClass.TEXT else "nontext",
            "id": w.id,
            "bbox": list(w.bbox.as_tuple()),
        }
        if w.wclass is WidgetClass.TEXT:
            d["content"] = w.text_content
        return d
    if isinstance(node, GroupNode):
        d = {
            "type": "group",
            "bbox": list(node.bbox.as_tuple()),
            "children": [_node_to_json(c) for c in node.children],
        }
        if node.container_id:
            d["container"] = node.container_id
        return d
    d = {
        "type": "block",
        "id": node.id,
        "source": node.source,
        "bbox": list(node.bbox.as_tuple()),
        "children": [_node_to_json(g) for g in node.children],
    }
    if node.orientation:
        d["orientation"] = node.orientation
    return d


def to_json(h: Hierarchy) -> str:
    doc = {
        "width": h.width,
        "height": h.height,
        "root": {"type": "root", "children": [_node_to_json(c) for c in h.children]},
    }
    return json.dumps(doc, indent=2, sort_keys=True)


class HierarchyFormatError(ValueError):
    pass


def _node_from_json(d: dict, counter: List[int]) -> Node:
    kind = d.get("type")
    if kind in ("text", "nontext"):
        wid = d.get("id")
        if wid is None:
            wid = f"g{counter[0]}"
            counter[0] += 1
        bbox_v = d.get("bbox")
        # Ground-truth files may omit leaf boxes; a placeholder keeps the tree usable
        # for token-level evaluation.
        bbox = BBox(*bbox_v) if bbox_v else BBox(0, 0, 1, 1)
        if kind == "text":
            return WidgetNode(Widget(wid, bbox, WidgetClass.TEXT, text_content=d.get("content", "")))
        return WidgetNode(Widget(wid, bbox, WidgetClass.NONTEXT))
    if kind == "group":
        return GroupNode(
            [_node_from_json(c, counter) for c in d.get("children", [])],
            container_id=d.get("container"),
        )
    if kind == "block":
        bid = d.get("id") or f"b{counter[0]}"
        counter[0] += 1
        groups = []
        for c in d.get("children", []):
            child = _node_from_json(c, counter)
            if isinstance(child, GroupNode):
                groups.append(child)
            else:
                groups.append(GroupNode([child]))
        return BlockNode(
            bid,
            d.get("source", "paired"),
            d.get("orientation"),
            groups,
        )
    raise HierarchyFormatError(f"unknown node type: {kind!r}")


def from_json(text: str) -> Hierarchy:
    doc = json.loads(text)
    root = doc.get("root", doc)
    counter = [0]
    children = [_node_from_json(c, counter) for c in root.get("children", [])]
    return Hierarchy(children, doc.get("width"), doc.get("height"))


def atomic_write(path: str, data: str) -> None:
    """Write via a sibling temp file and rename, so readers never see a torn file."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save(h: Hierarchy, path: str) -> None:
    atomic_write(path, to_json(h))


def load(path: str) -> Hierarchy:
    with open(path, "r", encoding="utf-8") as fh:
        return from_json(fh.read())
