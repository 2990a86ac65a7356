"""Shared domain types, scene validation, and configuration.

All types are immutable after construction and safe to share between
threads. Coordinates are image pixels with y increasing downward.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, SceneValidationError, Violation

# Segment endpoints closer than this are treated as coincident.
COINCIDENT_EPS = 1e-9
# Boxes may exceed the frame by this much and still count as in-frame.
FRAME_TOLERANCE = 1e-6


@dataclass(frozen=True)
class Keypoint2D:
    """A named 2-D keypoint in pixel coordinates."""

    x: float
    y: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=np.float64)

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y)


#: Order in which skeleton joints are flattened into arrays.
JOINT_ORDER = ("eye", "shoulder", "elbow", "wrist", "mcp", "fingertip")


@dataclass(frozen=True)
class Skeleton:
    """Six 2-D keypoints of one pointing person (single eye point)."""

    eye: Keypoint2D
    shoulder: Keypoint2D
    elbow: Keypoint2D
    wrist: Keypoint2D
    mcp: Keypoint2D
    fingertip: Keypoint2D

    def joints(self) -> dict[str, Keypoint2D]:
        return {name: getattr(self, name) for name in JOINT_ORDER}

    def as_array(self) -> np.ndarray:
        """Flatten to shape (12,) in JOINT_ORDER, xy interleaved."""
        out = np.empty(12, dtype=np.float64)
        for i, name in enumerate(JOINT_ORDER):
            kp = getattr(self, name)
            out[2 * i] = kp.x
            out[2 * i + 1] = kp.y
        return out


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box in corner form, pixel units."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def center(self) -> Keypoint2D:
        return Keypoint2D((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)

    def width(self) -> float:
        return self.x_max - self.x_min

    def height(self) -> float:
        return self.y_max - self.y_min

    def area(self) -> float:
        return self.width() * self.height()

    def diagonal(self) -> float:
        return math.hypot(self.width(), self.height())

    def as_array(self) -> np.ndarray:
        return np.array([self.x_min, self.y_min, self.x_max, self.y_max], dtype=np.float64)

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in (self.x_min, self.y_min, self.x_max, self.y_max))


class TouchLineMode(enum.Enum):
    """Requested line interpretation.

    ADTL is a request that resolves to VTL or FL per the collinearity
    rule; a resolved touch line never carries the ADTL tag.
    """

    VTL = "VTL"
    FL = "FL"
    ADTL = "ADTL"


@dataclass(frozen=True)
class Candidate:
    """A detector proposal: box plus confidence in [0, 1]."""

    box: BoundingBox
    confidence: float


@dataclass(frozen=True)
class Scene:
    """One annotated image record: geometry only, no pixels."""

    id: str
    image_width: float
    image_height: float
    skeleton: Skeleton
    gt_box: BoundingBox
    candidates: tuple[Candidate, ...] = ()
    text: str = ""
    pred_box: BoundingBox | None = None


@dataclass(frozen=True)
class Config:
    """Tunable parameters shared by selection, losses, and evaluation."""

    collinearity_threshold: float = 0.95
    rerank_weight: float = 0.5
    focal_gamma: float = 2.0
    focal_alpha: float = 0.25
    size_bucket_cutoffs: tuple[float, float] = (0.01, 0.05)
    iou_thresholds: tuple[float, ...] = (0.25, 0.5, 0.75)
    rng_seed: int = 0
    # Reserved per-term weights for the total loss; currently all-ones.
    loss_weights: tuple[float, float, float, float, float] = (1.0, 1.0, 1.0, 1.0, 1.0)

    def __post_init__(self):
        t = self.collinearity_threshold
        if not (math.isfinite(t) and -1.0 < t < 1.0):
            raise ConfigError(f"collinearity_threshold must be in (-1, 1), got {t}")
        w = self.rerank_weight
        if not (math.isfinite(w) and 0.0 <= w <= 1.0):
            raise ConfigError(f"rerank_weight must be in [0, 1], got {w}")
        if not (math.isfinite(self.focal_gamma) and self.focal_gamma >= 0.0):
            raise ConfigError(f"focal_gamma must be >= 0, got {self.focal_gamma}")
        if not (math.isfinite(self.focal_alpha) and 0.0 <= self.focal_alpha <= 1.0):
            raise ConfigError(f"focal_alpha must be in [0, 1], got {self.focal_alpha}")
        small, medium = self.size_bucket_cutoffs
        if not (0.0 < small < medium < 1.0):
            raise ConfigError(
                f"size_bucket_cutoffs must satisfy 0 < small < medium < 1, got {self.size_bucket_cutoffs}"
            )
        ths = self.iou_thresholds
        if len(ths) == 0 or any(not (0.0 < x <= 1.0) for x in ths):
            raise ConfigError(f"iou_thresholds must lie in (0, 1], got {ths}")
        if any(b <= a for a, b in zip(ths, ths[1:])):
            raise ConfigError(f"iou_thresholds must be strictly increasing, got {ths}")
        if not (isinstance(self.rng_seed, int) and self.rng_seed >= 0):
            raise ConfigError(f"rng_seed must be a nonnegative integer, got {self.rng_seed}")
        if len(self.loss_weights) != 5 or any(
            not (math.isfinite(x) and x >= 0.0) for x in self.loss_weights
        ):
            raise ConfigError(f"loss_weights must be five nonnegative reals, got {self.loss_weights}")

    def with_overrides(self, **kwargs) -> "Config":
        return replace(self, **kwargs)


def _check_keypoint(kp: Keypoint2D, path: str, out: list[Violation]) -> None:
    if not kp.is_finite():
        out.append(Violation("NonFiniteValue", path, f"({kp.x}, {kp.y}) is not finite"))


def _check_box(
    box: BoundingBox, path: str, width: float, height: float, out: list[Violation]
) -> None:
    if not box.is_finite():
        out.append(Violation("NonFiniteValue", path, "box has non-finite coordinates"))
        return
    if not (box.x_min < box.x_max and box.y_min < box.y_max):
        out.append(Violation("EmptyBox", path, "box must have strictly positive area"))
        return
    tol = FRAME_TOLERANCE
    if (
        box.x_min < -tol
        or box.y_min < -tol
        or box.x_max > width + tol
        or box.y_max > height + tol
    ):
        out.append(
            Violation(
                "OutOfFrame",
                path,
                f"box {box.as_array().tolist()} exceeds frame {width}x{height}",
            )
        )


def scene_violations(scene: Scene) -> list[Violation]:
    """Collect every violated type invariant; empty list means valid."""
    out: list[Violation] = []
    w, h = scene.image_width, scene.image_height
    if not (math.isfinite(w) and math.isfinite(h)):
        out.append(Violation("NonFiniteValue", "image_width/image_height", "non-finite frame"))
        return out
    if w <= 0 or h <= 0:
        out.append(Violation("OutOfFrame", "image_width/image_height", "frame must be positive"))
        return out

    skel = scene.skeleton
    for name in JOINT_ORDER:
        _check_keypoint(getattr(skel, name), f"skeleton.{name}", out)
    if not out:  # segment checks only make sense on finite joints
        for a, b in (("fingertip", "mcp"), ("wrist", "elbow"), ("elbow", "shoulder")):
            pa, pb = getattr(skel, a), getattr(skel, b)
            if math.hypot(pa.x - pb.x, pa.y - pb.y) < COINCIDENT_EPS:
                out.append(
                    Violation(
                        "DegenerateSkeleton",
                        f"skeleton.{a}/skeleton.{b}",
                        "coincident segment endpoints",
                    )
                )

    _check_box(scene.gt_box, "gt_box", w, h, out)
    for i, cand in enumerate(scene.candidates):
        _check_box(cand.box, f"candidates[{i}].box", w, h, out)
        if not math.isfinite(cand.confidence):
            out.append(
                Violation("NonFiniteValue", f"candidates[{i}].confidence", "non-finite confidence")
            )
    if scene.pred_box is not None:
        _check_box(scene.pred_box, "pred_box", w, h, out)
    return out


def validate_scene(scene: Scene) -> Scene:
    """Return the scene unchanged iff all invariants hold.

    Raises SceneValidationError carrying one Violation per broken
    invariant, each naming a concrete field path. Idempotent.
    """
    violations = scene_violations(scene)
    if violations:
        raise SceneValidationError(violations)
    return scene
