"""Command line entry points: run, eval, synth, render."""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional

from .config import ConfigError, RunConfig, load_config
from .detection import DetectorConfig, load_ground_truth_widgets
from .evaluation import MatchReport, aggregate, match_blocks
from .grouping import GroupingConfig
from .hierarchy import (
    Hierarchy,
    WidgetNode,
    atomic_write,
    block_sequences,
    load as load_hierarchy,
    to_json,
)
from .imaging import load_image
from .ocr import OcrError, fetch_ocr_http, load_ocr_file
from .overlay import render_overlay, save_png
from .pipeline import group_ground_truth, run_pipeline
from .synth import KINDS, SynthSpec, generate, write_fixture

HIERARCHY_SUFFIX = ".hierarchy.json"


def _add_tuning_flags(parser: argparse.ArgumentParser) -> None:
    """Expose every detector/grouping field as a dotted --section.name flag."""
    group = parser.add_argument_group("tuning")
    for section, dc in (("detector", DetectorConfig), ("grouping", GroupingConfig)):
        for f in dataclasses.fields(dc):
            flag = f"--{section}.{f.name.replace('_', '-')}"
            group.add_argument(
                flag,
                dest=f"{section}.{f.name}",
                metavar="V",
                default=None,
                help=f"{section} override (default {f.default})",
            )


def _overrides_from_args(args: argparse.Namespace) -> Dict[str, object]:
    overrides: Dict[str, object] = {}
    for key, value in vars(args).items():
        if "." in key:
            overrides[key] = value
    for key in ("ocr_url", "ocr_timeout", "ocr_retries", "ocr_token"):
        if key in vars(args):
            overrides[key] = getattr(args, key)
    if getattr(args, "no_corrections", False):
        overrides["corrections"] = False
    return overrides


def _resolve_text_boxes(image_path: str, args: argparse.Namespace, cfg: RunConfig):
    if args.ocr:
        return load_ocr_file(args.ocr)
    if cfg.ocr_url:
        with open(image_path, "rb") as fh:
            payload = fh.read()
        return fetch_ocr_http(cfg.ocr_url, payload, cfg.ocr_timeout, cfg.ocr_retries, cfg.ocr_token)
    sidecar = os.path.splitext(image_path)[0] + ".ocr.json"
    if os.path.exists(sidecar):
        return load_ocr_file(sidecar)
    return []


def _output_stem(image_path: str, out_dir: Optional[str]) -> str:
    stem = os.path.splitext(os.path.basename(image_path))[0]
    dest = out_dir if out_dir else (os.path.dirname(os.path.abspath(image_path)))
    return os.path.join(dest, stem)


def _run_one(image_path: str, args: argparse.Namespace, cfg: RunConfig) -> str:
    image = load_image(image_path)
    height, width = image.shape[:2]
    if args.metadata_widgets:
        widgets = load_ground_truth_widgets(args.metadata_widgets)
        hierarchy = group_ground_truth(widgets, width, height, cfg.grouping)
        n_widgets = len(widgets)
    else:
        boxes = _resolve_text_boxes(image_path, args, cfg)
        result = run_pipeline(image, boxes, cfg.detector, cfg.grouping, corrections=cfg.corrections)
        hierarchy = result.hierarchy
        n_widgets = len(result.widgets)
    stem = _output_stem(image_path, args.out)
    out_path = stem + HIERARCHY_SUFFIX
    atomic_write(out_path, to_json(hierarchy))
    if args.overlay:
        save_png(render_overlay(image, hierarchy), stem + ".overlay.png")
    return f"{image_path}: {len(hierarchy.blocks())} blocks, {n_widgets} widgets -> {out_path}"


def cmd_run(args: argparse.Namespace) -> int:
    if args.ocr and len(args.images) > 1:
        raise ConfigError("--ocr names a single file; it cannot serve multiple images")
    if args.metadata_widgets and len(args.images) > 1:
        raise ConfigError("--metadata-widgets names a single file; it cannot serve multiple images")
    cfg = load_config(args.config, overrides=_overrides_from_args(args))
    if args.out:
        os.makedirs(args.out, exist_ok=True)

    failures = 0
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            futures = [(path, pool.submit(_run_one, path, args, cfg)) for path in args.images]
            outcomes = [(path, fut) for path, fut in futures]
    else:
        outcomes = [(path, None) for path in args.images]

    for path, fut in outcomes:
        try:
            line = fut.result() if fut is not None else _run_one(path, args, cfg)
        except (OSError, OcrError, ValueError) as exc:
            print(f"{path}: error: {exc}", file=sys.stderr)
            failures += 1
            continue
        print(line)
    return 1 if failures else 0


def _eval_rows(per_gui: Dict[str, MatchReport], threshold: int) -> List[dict]:
    rows = []
    for name in sorted(per_gui):
        r = per_gui[name]
        rows.append(
            {
                "threshold": threshold,
                "gui": name,
                "tp": r.tp,
                "fp": r.fp,
                "fn": r.fn,
                "precision": round(r.precision, 6),
                "recall": round(r.recall, 6),
                "f1": round(r.f1, 6),
            }
        )
    overall = aggregate(list(per_gui.values()))
    rows.append(
        {
            "threshold": threshold,
            "gui": "overall",
            "tp": overall.tp,
            "fp": overall.fp,
            "fn": overall.fn,
            "precision": round(overall.precision, 6),
            "recall": round(overall.recall, 6),
            "f1": round(overall.f1, 6),
        }
    )
    return rows


def cmd_eval(args: argparse.Namespace) -> int:
    thresholds = sorted(set(args.thresholds))
    pred_files = sorted(f for f in os.listdir(args.pred) if f.endswith(HIERARCHY_SUFFIX))
    pairs = []
    skipped = []
    for name in pred_files:
        truth_path = os.path.join(args.truth, name)
        if not os.path.exists(truth_path):
            skipped.append(name)
            continue
        stem = name[: -len(HIERARCHY_SUFFIX)]
        pred = block_sequences(load_hierarchy(os.path.join(args.pred, name)))
        truth = block_sequences(load_hierarchy(truth_path))
        pairs.append((stem, pred, truth))
    for name in skipped:
        print(f"skipping {name}: no ground-truth counterpart", file=sys.stderr)
    if not pairs:
        print("nothing to evaluate: no prediction/ground-truth stem matched", file=sys.stderr)
        return 1

    all_rows: List[dict] = []
    for threshold in thresholds:
        per_gui = {stem: match_blocks(pred, truth, threshold) for stem, pred, truth in pairs}
        rows = _eval_rows(per_gui, threshold)
        all_rows.extend(rows)
        overall = rows[-1]
        print(
            f"threshold {threshold}: {len(per_gui)} GUIs, "
            f"precision {overall['precision']:.3f} recall {overall['recall']:.3f} f1 {overall['f1']:.3f}"
        )

    os.makedirs(args.out, exist_ok=True)
    json_path = os.path.join(args.out, "eval_report.json")
    atomic_write(json_path, json.dumps({"thresholds": thresholds, "rows": all_rows}, indent=2) + "\n")
    header = ["threshold", "gui", "tp", "fp", "fn", "precision", "recall", "f1"]
    csv_lines = [",".join(header)]
    for row in all_rows:
        csv_lines.append(",".join(str(row[h]) for h in header))
    csv_path = os.path.join(args.out, "eval_report.csv")
    atomic_write(csv_path, "\n".join(csv_lines) + "\n")
    print(f"wrote {json_path} and {csv_path}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    kinds = [k.strip() for k in args.kinds.split(",") if k.strip()]
    unknown = [k for k in kinds if k not in KINDS]
    if unknown:
        raise ConfigError(f"unknown layout kind(s): {', '.join(unknown)}")
    os.makedirs(args.out, exist_ok=True)
    for i in range(args.count):
        kind = kinds[i % len(kinds)]
        spec = SynthSpec(
            seed=args.seed + i,
            kind=kind,
            items=args.items,
            occlude_last_icon=args.occlude and kind == "list",
            plant_missing=args.plant and kind == "cards",
            plant_misclassified=args.plant and kind == "cards",
        )
        gui = generate(spec)
        stem = os.path.join(args.out, f"gui_{args.seed + i:04d}_{kind}")
        write_fixture(gui, stem)
    print(f"wrote {args.count} synthetic GUIs under {args.out}")
    return 0


def _check_bounds(hierarchy: Hierarchy, width: int, height: int) -> None:
    for node in hierarchy.children:
        for wid, bbox in _leaf_boxes(node):
            if bbox.right > width or bbox.bottom > height:
                raise ValueError(f"widget {wid} at {bbox.as_tuple()} exceeds the {width}x{height} image")


def _leaf_boxes(node):
    if isinstance(node, WidgetNode):
        yield node.widget.id, node.bbox
        return
    for child in getattr(node, "children", ()):
        yield from _leaf_boxes(child)


def cmd_render(args: argparse.Namespace) -> int:
    image = load_image(args.image)
    hierarchy = load_hierarchy(args.hierarchy)
    height, width = image.shape[:2]
    _check_bounds(hierarchy, width, height)
    out = args.out or (os.path.splitext(args.image)[0] + ".overlay.png")
    save_png(render_overlay(image, hierarchy), out)
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="guiblocks",
        description="Detect GUI widgets in screenshots and group them into perceptual blocks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="detect, group, and write hierarchy JSON per image")
    p_run.add_argument("images", nargs="+", metavar="IMAGE", help="screenshot path(s)")
    source = p_run.add_mutually_exclusive_group()
    source.add_argument("--ocr", metavar="FILE", help="OCR word boxes for the single input image")
    source.add_argument("--ocr-url", dest="ocr_url", default=None, metavar="URL", help="OCR HTTP endpoint")
    source.add_argument(
        "--metadata-widgets",
        metavar="FILE",
        help="group these ground-truth widgets instead of running detection",
    )
    p_run.add_argument("--out", metavar="DIR", default=None, help="output directory (default: beside each image)")
    p_run.add_argument("--overlay", action="store_true", help="also write an annotated PNG per image")
    p_run.add_argument("--config", metavar="FILE", default=None, help="JSON config file")
    p_run.add_argument("--no-corrections", action="store_true", help="skip recovery and reclassification passes")
    p_run.add_argument("--jobs", type=int, default=1, metavar="N", help="process images with N threads")
    p_run.add_argument("--ocr-timeout", dest="ocr_timeout", type=float, default=None, metavar="SEC")
    p_run.add_argument("--ocr-retries", dest="ocr_retries", type=int, default=None, metavar="N")
    p_run.add_argument("--ocr-token", dest="ocr_token", default=None, metavar="TOKEN")
    _add_tuning_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_eval = sub.add_parser("eval", help="score predicted hierarchies against ground truth")
    p_eval.add_argument("--pred", required=True, metavar="DIR", help="directory of predicted *.hierarchy.json")
    p_eval.add_argument("--truth", required=True, metavar="DIR", help="directory of ground-truth *.hierarchy.json")
    p_eval.add_argument(
        "--thresholds",
        type=int,
        nargs="+",
        default=[1],
        metavar="T",
        help="edit-distance thresholds to sweep (default: 1)",
    )
    p_eval.add_argument("--out", metavar="DIR", default=".", help="directory for eval_report.{json,csv}")
    p_eval.set_defaults(func=cmd_eval)

    p_synth = sub.add_parser("synth", help="generate a deterministic synthetic GUI corpus")
    p_synth.add_argument("--out", required=True, metavar="DIR")
    p_synth.add_argument("--count", type=int, default=10, metavar="N")
    p_synth.add_argument("--seed", type=int, default=0, metavar="N")
    p_synth.add_argument("--kinds", default=",".join(KINDS), metavar="K1,K2", help="layout kinds, cycled per image")
    p_synth.add_argument("--items", type=int, default=6, metavar="N", help="items per layout")
    p_synth.add_argument("--occlude", action="store_true", help="drop the last list icon from the pixels")
    p_synth.add_argument("--plant", action="store_true", help="plant a missing and a mislabeled widget in card layouts")
    p_synth.set_defaults(func=cmd_synth)

    p_render = sub.add_parser("render", help="draw a hierarchy over its screenshot")
    p_render.add_argument("image", metavar="IMAGE")
    p_render.add_argument("hierarchy", metavar="HIERARCHY_JSON")
    p_render.add_argument("--out", metavar="PNG", default=None)
    p_render.set_defaults(func=cmd_render)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, OcrError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
