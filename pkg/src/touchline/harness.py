"""Scene ingestion and the accuracy evaluation protocol.

Scenes are exchanged as JSONL, one object per line:

    {"id": str, "image_width": num, "image_height": num,
     "skeleton": {"eye": [x, y], "shoulder": [x, y], "elbow": [x, y],
                  "wrist": [x, y], "mcp": [x, y], "fingertip": [x, y]},
     "gt_box": [x_min, y_min, x_max, y_max],
     "candidates": [{"box": [x0, y0, x1, y1], "conf": num}, ...],  # optional
     "pred_box": [x0, y0, x1, y1],                                 # optional
     "text": str}

Evaluation reproduces the threshold protocol: a prediction is correct
at threshold tau when its overlap metric with the ground truth strictly
exceeds tau. The predicted box is the top-1 re-ranked candidate under
the requested line mode, or the record's own ``pred_box`` when no
candidates are given. Records that fail validation are skipped,
reported, and excluded from every denominator.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from . import kernels
from .errors import MalformedRecord, NoPredictionSource, TouchLineError
from .lines import build_touch_line
from .rerank import rerank
from .types import (
    FRAME_TOLERANCE,
    JOINT_ORDER,
    BoundingBox,
    Candidate,
    Config,
    Keypoint2D,
    Scene,
    Skeleton,
    TouchLineMode,
    scene_violations,
)

SIZE_BUCKETS = ("S", "M", "L")


@dataclass(frozen=True)
class SkippedRecord:
    """A rejected input record: where it came from and why."""

    ref: str  # scene id when parseable, else "line N"
    error: str


def _require_number(value, line_no: int, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MalformedRecord(line_no, path, f"expected a number, got {value!r}")
    return float(value)


def _parse_point(value, line_no: int, path: str) -> Keypoint2D:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise MalformedRecord(line_no, path, "expected [x, y]")
    return Keypoint2D(
        _require_number(value[0], line_no, f"{path}[0]"),
        _require_number(value[1], line_no, f"{path}[1]"),
    )


def _parse_box(value, line_no: int, path: str, width: float, height: float) -> BoundingBox:
    if not isinstance(value, (list, tuple)) or len(value) != 4:
        raise MalformedRecord(line_no, path, "expected [x_min, y_min, x_max, y_max]")
    coords = [_require_number(v, line_no, f"{path}[{i}]") for i, v in enumerate(value)]
    # Excursions within the frame tolerance are clamped, larger ones are
    # left for validation to flag as OutOfFrame.
    lo = (0.0, 0.0, 0.0, 0.0)
    hi = (width, height, width, height)
    clamped = [
        min(max(c, l), h) if math.isfinite(c) and l - FRAME_TOLERANCE <= c <= h + FRAME_TOLERANCE else c
        for c, l, h in zip(coords, lo, hi)
    ]
    return BoundingBox(*clamped)


def record_to_scene(obj, line_no: int = 0) -> Scene:
    """Parse one JSON object into a Scene; raises MalformedRecord."""
    if not isinstance(obj, dict):
        raise MalformedRecord(line_no, "<record>", "expected a JSON object")
    if "id" not in obj or not isinstance(obj["id"], str):
        raise MalformedRecord(line_no, "id", "missing or non-string id")
    for key in ("image_width", "image_height", "skeleton", "gt_box", "text"):
        if key not in obj:
            raise MalformedRecord(line_no, key, "missing required field")
    width = _require_number(obj["image_width"], line_no, "image_width")
    height = _require_number(obj["image_height"], line_no, "image_height")
    if not isinstance(obj["text"], str):
        raise MalformedRecord(line_no, "text", "expected a string")

    skel_obj = obj["skeleton"]
    if not isinstance(skel_obj, dict):
        raise MalformedRecord(line_no, "skeleton", "expected an object")
    joints = {}
    for name in JOINT_ORDER:
        if name not in skel_obj:
            raise MalformedRecord(line_no, f"skeleton.{name}", "missing keypoint")
        joints[name] = _parse_point(skel_obj[name], line_no, f"skeleton.{name}")

    gt_box = _parse_box(obj["gt_box"], line_no, "gt_box", width, height)

    candidates = []
    raw_candidates = obj.get("candidates", [])
    if not isinstance(raw_candidates, list):
        raise MalformedRecord(line_no, "candidates", "expected a list")
    for i, raw in enumerate(raw_candidates):
        if not isinstance(raw, dict) or "box" not in raw or "conf" not in raw:
            raise MalformedRecord(line_no, f"candidates[{i}]", "expected {'box': ..., 'conf': ...}")
        box = _parse_box(raw["box"], line_no, f"candidates[{i}].box", width, height)
        conf = _require_number(raw["conf"], line_no, f"candidates[{i}].conf")
        if not 0.0 <= conf <= 1.0:
            raise MalformedRecord(line_no, f"candidates[{i}].conf", f"confidence {conf} outside [0, 1]")
        candidates.append(Candidate(box, conf))

    pred_box = None
    if obj.get("pred_box") is not None:
        pred_box = _parse_box(obj["pred_box"], line_no, "pred_box", width, height)

    return Scene(
        id=obj["id"],
        image_width=width,
        image_height=height,
        skeleton=Skeleton(**joints),
        gt_box=gt_box,
        candidates=tuple(candidates),
        text=obj["text"],
        pred_box=pred_box,
    )


def scene_to_record(scene: Scene) -> dict:
    """Inverse of record_to_scene, with a stable key order."""
    record = {
        "id": scene.id,
        "image_width": scene.image_width,
        "image_height": scene.image_height,
        "skeleton": {name: [getattr(scene.skeleton, name).x, getattr(scene.skeleton, name).y] for name in JOINT_ORDER},
        "gt_box": list(scene.gt_box.as_array()),
    }
    if scene.candidates:
        record["candidates"] = [
            {"box": list(c.box.as_array()), "conf": c.confidence} for c in scene.candidates
        ]
    if scene.pred_box is not None:
        record["pred_box"] = list(scene.pred_box.as_array())
    record["text"] = scene.text
    return record


def parse_scene_lines(lines: Iterable[str]) -> tuple[list[Scene], list[SkippedRecord]]:
    """Parse JSONL text into validated scenes plus a skip report."""
    scenes: list[Scene] = []
    skipped: list[SkippedRecord] = []
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            obj = json.loads(stripped)
        except json.JSONDecodeError as exc:
            skipped.append(SkippedRecord(f"line {line_no}", f"MalformedRecord: invalid JSON ({exc.msg})"))
            continue
        try:
            scene = record_to_scene(obj, line_no)
        except MalformedRecord as exc:
            ref = obj["id"] if isinstance(obj, dict) and isinstance(obj.get("id"), str) else f"line {line_no}"
            skipped.append(SkippedRecord(ref, f"MalformedRecord: {exc}"))
            continue
        violations = scene_violations(scene)
        if violations:
            detail = "; ".join(f"{v.kind} at {v.path}" for v in violations)
            skipped.append(SkippedRecord(scene.id, detail))
            continue
        scenes.append(scene)
    return scenes, skipped


def load_scenes(path: str | Path) -> tuple[list[Scene], list[SkippedRecord]]:
    """Read a scene JSONL file.

    Returns (scenes, skipped); raises FileNotFoundError for a missing
    path. Every returned scene has passed validation.
    """
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scene_lines(fh)


def write_scenes(scenes: Iterable[Scene], fh: IO[str]) -> None:
    for scene in scenes:
        fh.write(json.dumps(scene_to_record(scene)) + "\n")


def size_bucket(box: BoundingBox, image_size: tuple[float, float], config: Config | None = None) -> str:
    """Bucket a box as S/M/L by its area fraction of the image."""
    cfg = config if config is not None else Config()
    small, medium = cfg.size_bucket_cutoffs
    ratio = box.area() / (image_size[0] * image_size[1])
    if ratio < small:
        return "S"
    if ratio < medium:
        return "M"
    return "L"


def threshold_accuracy(
    predictions: Sequence[tuple[Scene, BoundingBox]],
    thresholds: Sequence[float],
    metric: str = "iou",
) -> dict[float, float]:
    """Fraction of predictions whose metric strictly exceeds each threshold."""
    if not predictions:
        raise ValueError("threshold_accuracy requires at least one prediction")
    if metric not in ("iou", "giou"):
        raise ValueError(f"metric must be 'iou' or 'giou', got {metric!r}")
    pred_arr = np.stack([p.as_array() for _, p in predictions])
    gt_arr = np.stack([s.gt_box.as_array() for s, _ in predictions])
    values = kernels.iou_batch(pred_arr, gt_arr) if metric == "iou" else kernels.giou_batch(pred_arr, gt_arr)
    n = len(predictions)
    return {float(t): float(np.count_nonzero(values > t)) / n for t in thresholds}


@dataclass(frozen=True)
class EvalReport:
    """Accuracy summary over one scene corpus."""

    n_scenes: int
    n_evaluated: int
    mode: TouchLineMode
    per_threshold: dict[float, float]
    per_threshold_giou: dict[float, float]
    per_size_bucket: dict[str, dict[float, float]]
    bucket_counts: dict[str, int]
    config: Config
    skipped: tuple[SkippedRecord, ...]

    def to_json_dict(self) -> dict:
        cfg = self.config
        return {
            "n_scenes": self.n_scenes,
            "n_evaluated": self.n_evaluated,
            "mode": self.mode.value,
            "per_threshold": {repr(t): v for t, v in self.per_threshold.items()},
            "per_threshold_giou": {repr(t): v for t, v in self.per_threshold_giou.items()},
            "per_size_bucket": {
                bucket: {repr(t): v for t, v in rows.items()}
                for bucket, rows in self.per_size_bucket.items()
            },
            "bucket_counts": dict(self.bucket_counts),
            "config": {
                "collinearity_threshold": cfg.collinearity_threshold,
                "rerank_weight": cfg.rerank_weight,
                "focal_gamma": cfg.focal_gamma,
                "focal_alpha": cfg.focal_alpha,
                "size_bucket_cutoffs": list(cfg.size_bucket_cutoffs),
                "iou_thresholds": list(cfg.iou_thresholds),
                "rng_seed": cfg.rng_seed,
            },
            "skipped": [{"ref": s.ref, "error": s.error} for s in self.skipped],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    def to_csv(self, metric: str = "both") -> str:
        """Per-threshold rows; size buckets are reported under IoU."""
        lines = ["metric,threshold,bucket,accuracy,count"]
        if metric in ("iou", "both"):
            for t, v in self.per_threshold.items():
                lines.append(f"iou,{t!r},ALL,{v!r},{self.n_evaluated}")
            for bucket in SIZE_BUCKETS:
                if bucket not in self.per_size_bucket:
                    continue
                for t, v in self.per_size_bucket[bucket].items():
                    lines.append(f"iou,{t!r},{bucket},{v!r},{self.bucket_counts[bucket]}")
        if metric in ("giou", "both"):
            for t, v in self.per_threshold_giou.items():
                lines.append(f"giou,{t!r},ALL,{v!r},{self.n_evaluated}")
        return "\n".join(lines) + "\n"


def evaluate(
    source: str | Path | Sequence[Scene],
    mode: TouchLineMode,
    config: Config | None = None,
    skipped: Sequence[SkippedRecord] = (),
) -> EvalReport:
    """Run the full protocol over a scene file or scene list.

    The prediction for a scene with candidates is the top-1 re-ranked
    box under ``mode``; otherwise the record's pred_box. A scene with
    neither raises NoPredictionSource. Deterministic for fixed inputs.
    """
    cfg = config if config is not None else Config()
    skipped_records = list(skipped)
    if isinstance(source, (str, Path)):
        scenes, load_skipped = load_scenes(source)
        skipped_records.extend(load_skipped)
    else:
        scenes = list(source)
    n_total = len(scenes) + len(skipped_records)

    evaluated: list[Scene] = []
    preds: list[BoundingBox] = []
    for scene in scenes:
        if scene.candidates:
            try:
                line = build_touch_line(scene.skeleton, mode, cfg)
            except TouchLineError as exc:
                skipped_records.append(SkippedRecord(scene.id, f"{type(exc).__name__}: {exc}"))
                continue
            preds.append(rerank(scene.candidates, line, cfg)[0].box)
        elif scene.pred_box is not None:
            preds.append(scene.pred_box)
        else:
            raise NoPredictionSource(f"scene {scene.id} has neither candidates nor pred_box")
        evaluated.append(scene)

    thresholds = [float(t) for t in cfg.iou_thresholds]
    n_eval = len(evaluated)
    if n_eval == 0:
        per_threshold = {t: 0.0 for t in thresholds}
        per_threshold_giou = {t: 0.0 for t in thresholds}
        per_bucket: dict[str, dict[float, float]] = {}
        bucket_counts = {b: 0 for b in SIZE_BUCKETS}
    else:
        pred_arr = np.stack([p.as_array() for p in preds])
        gt_arr = np.stack([s.gt_box.as_array() for s in evaluated])
        ious = kernels.iou_batch(pred_arr, gt_arr)
        gious = kernels.giou_batch(pred_arr, gt_arr)
        per_threshold = {t: float(np.count_nonzero(ious > t)) / n_eval for t in thresholds}
        per_threshold_giou = {t: float(np.count_nonzero(gious > t)) / n_eval for t in thresholds}
        buckets = np.array(
            [size_bucket(s.gt_box, (s.image_width, s.image_height), cfg) for s in evaluated]
        )
        bucket_counts = {b: int(np.count_nonzero(buckets == b)) for b in SIZE_BUCKETS}
        per_bucket = {}
        for b in SIZE_BUCKETS:
            mask = buckets == b
            count = bucket_counts[b]
            if count == 0:
                continue
            per_bucket[b] = {t: float(np.count_nonzero(ious[mask] > t)) / count for t in thresholds}

    return EvalReport(
        n_scenes=n_total,
        n_evaluated=n_eval,
        mode=mode,
        per_threshold=per_threshold,
        per_threshold_giou=per_threshold_giou,
        per_size_bucket=per_bucket,
        bucket_counts=bucket_counts,
        config=cfg,
        skipped=tuple(skipped_records),
    )
