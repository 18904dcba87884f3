"""OCR ingestion: a word-box fixture file on disk, or a remote HTTP endpoint.

Both providers emit the same record shape:
    [{"bbox": [left, top, right, bottom], "content": "...", "confidence": 0.97}, ...]
with confidence optional.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass
from typing import List, Optional

import requests

from .geometry import BBox


class OcrError(RuntimeError):
    """Malformed OCR payload or an unreachable provider."""


@dataclass(frozen=True)
class TextBox:
    """A raw OCR word or line box before widget conversion."""

    bbox: BBox
    content: str
    confidence: Optional[float] = None

    def __post_init__(self):
        if not self.content:
            raise ValueError("TextBox requires non-empty content")


def _parse_records(records, source: str) -> List[TextBox]:
    if not isinstance(records, list):
        raise OcrError(f"{source}: expected a JSON list of records")
    boxes: List[TextBox] = []
    for i, rec in enumerate(records):
        try:
            l, t, r, b = (int(v) for v in rec["bbox"])
            content = rec["content"]
            conf = rec.get("confidence")
            boxes.append(TextBox(BBox(l, t, r, b), content, None if conf is None else float(conf)))
        except (KeyError, TypeError, ValueError) as exc:
            raise OcrError(f"{source}: bad record {i}: {exc}") from exc
    return boxes


def load_ocr_file(path: str) -> List[TextBox]:
    """Read a fixture file of OCR word boxes."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            records = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise OcrError(f"{path}: {exc}") from exc
    return _parse_records(records, path)


def fetch_ocr_http(
    url: str,
    image_bytes: bytes,
    timeout: float = 10.0,
    retries: int = 2,
    token: Optional[str] = None,
) -> List[TextBox]:
    """POST image bytes to an OCR endpoint and parse the response records.

    Retries transient failures ``retries`` times with a short linear backoff;
    the final failure is surfaced as OcrError with the endpoint diagnostics.
    """
    headers = {"Content-Type": "application/octet-stream"}
    if token:
        headers["Authorization"] = f"Bearer {token}"
    last: Optional[Exception] = None
    for attempt in range(retries + 1):
        try:
            resp = requests.post(url, data=image_bytes, headers=headers, timeout=timeout)
            resp.raise_for_status()
            return _parse_records(resp.json(), url)
        except OcrError:
            raise  # malformed payload, retrying will not help
        except (requests.RequestException, ValueError) as exc:
            last = exc
            if attempt < retries:
                time.sleep(0.1 * (attempt + 1))
    raise OcrError(f"OCR endpoint {url} failed after {retries + 1} attempts: {last}")
