"""Widget detection and perceptual grouping for GUI screenshots.

The package turns a screenshot (plus optional OCR word boxes) into a
hierarchy of blocks, perceptual groups, and widgets: pixel-level region
detection, container recognition, attribute clustering, group pairing,
and recovery passes for widgets the detector missed or mislabeled.
"""

from .config import ConfigError, RunConfig, load_config
from .detection import (
    DetectorConfig,
    detect_nontext,
    evaluate_detection,
    ingest_text,
    load_ground_truth_widgets,
    merge_widgets,
    recognize_containers,
)
from .evaluation import (
    MatchReport,
    aggregate,
    edit_distance,
    evaluate_hierarchy,
    match_blocks,
    precision_recall_f1,
)
from .geometry import Axis, BBox, Widget, WidgetClass, contains, iou
from .grouping import (
    GroupingConfig,
    cluster_nontext,
    cluster_text,
    dbscan_1d,
    pair_groups,
    resolve_conflicts,
)
from .hierarchy import Hierarchy, block_sequences, from_json, serialize, to_json
from .imaging import load_image, to_grayscale
from .ocr import OcrError, TextBox, fetch_ocr_http, load_ocr_file
from .pipeline import PipelineResult, group_ground_truth, group_widgets, run_pipeline
from .synth import SynthSpec, generate, write_fixture

__version__ = "0.1.0"

__all__ = [
    "Axis",
    "BBox",
    "ConfigError",
    "DetectorConfig",
    "GroupingConfig",
    "Hierarchy",
    "MatchReport",
    "OcrError",
    "PipelineResult",
    "RunConfig",
    "SynthSpec",
    "TextBox",
    "Widget",
    "WidgetClass",
    "aggregate",
    "block_sequences",
    "cluster_nontext",
    "cluster_text",
    "contains",
    "dbscan_1d",
    "detect_nontext",
    "edit_distance",
    "evaluate_detection",
    "evaluate_hierarchy",
    "fetch_ocr_http",
    "from_json",
    "generate",
    "group_ground_truth",
    "group_widgets",
    "ingest_text",
    "iou",
    "load_config",
    "load_ground_truth_widgets",
    "load_image",
    "load_ocr_file",
    "match_blocks",
    "merge_widgets",
    "pair_groups",
    "precision_recall_f1",
    "recognize_containers",
    "resolve_conflicts",
    "run_pipeline",
    "serialize",
    "to_grayscale",
    "to_json",
    "write_fixture",
]
