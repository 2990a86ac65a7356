"""Distance-aware touch-line geometry for pointing-gesture grounding.

The toolkit models a pointing gesture as a ray from an attention source
(the eye for extended-arm, far-object pointing; the index MCP joint for
bent-arm, near-object pointing) through the fingertip. It provides the
collinearity rule that selects between the two regimes, alignment
scoring and training-loss components with a verified analytic gradient,
box overlap metrics, candidate re-ranking, a synthetic-scene simulator,
and an accuracy evaluation harness, all exposed through the
``touchline`` CLI.
"""

from .errors import (
    ConfigError,
    DegenerateGeometry,
    DegenerateSkeleton,
    EmptyBox,
    EmptyCandidateList,
    InfeasiblePlacement,
    MalformedRecord,
    NegativeLossTerm,
    NoPredictionSource,
    NonFiniteValue,
    OutOfFrame,
    SceneValidationError,
    ShapeMismatch,
    TouchLineError,
    Violation,
    ZeroSum,
    ZeroVector,
)
from .geometry import Ray2D, giou, iou, point_to_ray_distance, ray_box_intersects, ray_from_line, ray_from_points
from .harness import (
    EvalReport,
    SkippedRecord,
    evaluate,
    load_scenes,
    size_bucket,
    threshold_accuracy,
    write_scenes,
)
from .kernels import active_backend
from .lines import (
    AttentionKind,
    AttentionSource,
    SegmentVectors,
    TouchLine,
    build_touch_line,
    cosine_similarity,
    segment_vectors,
    select_attention_source,
)
from .losses import (
    LossBreakdown,
    ae_gradient,
    ae_loss,
    alignment_score,
    attention_source_loss,
    focal_alignment_loss,
    giou_loss,
    l1_box_loss,
    total_loss,
    verify_ae_gradient,
)
from .rerank import RankedCandidate, rerank
from .simulate import LabeledScene, PoseTruth, SimSpec, classification_accuracy, generate
from .types import (
    BoundingBox,
    Candidate,
    Config,
    Keypoint2D,
    Scene,
    Skeleton,
    TouchLineMode,
    scene_violations,
    validate_scene,
)

__version__ = "0.1.0"

__all__ = [
    "AttentionKind",
    "AttentionSource",
    "BoundingBox",
    "Candidate",
    "Config",
    "ConfigError",
    "DegenerateGeometry",
    "DegenerateSkeleton",
    "EmptyBox",
    "EmptyCandidateList",
    "EvalReport",
    "InfeasiblePlacement",
    "Keypoint2D",
    "LabeledScene",
    "LossBreakdown",
    "MalformedRecord",
    "NegativeLossTerm",
    "NoPredictionSource",
    "NonFiniteValue",
    "OutOfFrame",
    "PoseTruth",
    "RankedCandidate",
    "Ray2D",
    "Scene",
    "SceneValidationError",
    "SegmentVectors",
    "ShapeMismatch",
    "SimSpec",
    "Skeleton",
    "SkippedRecord",
    "TouchLine",
    "TouchLineError",
    "TouchLineMode",
    "Violation",
    "ZeroSum",
    "ZeroVector",
    "active_backend",
    "ae_gradient",
    "ae_loss",
    "alignment_score",
    "attention_source_loss",
    "build_touch_line",
    "classification_accuracy",
    "cosine_similarity",
    "evaluate",
    "focal_alignment_loss",
    "generate",
    "giou",
    "giou_loss",
    "iou",
    "l1_box_loss",
    "load_scenes",
    "point_to_ray_distance",
    "ray_box_intersects",
    "ray_from_line",
    "ray_from_points",
    "rerank",
    "scene_violations",
    "segment_vectors",
    "select_attention_source",
    "size_bucket",
    "threshold_accuracy",
    "total_loss",
    "validate_scene",
    "verify_ae_gradient",
    "write_scenes",
]
