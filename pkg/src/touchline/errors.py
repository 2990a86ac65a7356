"""Exception hierarchy and validation-report records."""

from __future__ import annotations

from dataclasses import dataclass


class TouchLineError(Exception):
    """Base class for all touchline errors."""


class DegenerateSkeleton(TouchLineError):
    """Two keypoints that must be distinct coincide (zero-length segment)."""


class NonFiniteValue(TouchLineError):
    """A coordinate or score is NaN or infinite."""


class EmptyBox(TouchLineError):
    """A bounding box has non-positive width or height."""


class OutOfFrame(TouchLineError):
    """A box (or image dimension) lies outside the image frame."""


class ZeroVector(TouchLineError):
    """Cosine similarity requested for a zero-length vector."""


class ZeroSum(TouchLineError):
    """The two most-similar segment vectors cancel (anti-parallel pair)."""


class DegenerateGeometry(TouchLineError):
    """An alignment computation hit a zero-length difference vector."""


class ShapeMismatch(TouchLineError):
    """Logit and target matrices differ in shape."""


class NegativeLossTerm(TouchLineError):
    """A loss component that must be nonnegative is negative."""


class EmptyCandidateList(TouchLineError):
    """Re-ranking requires at least one candidate."""


class InfeasiblePlacement(TouchLineError):
    """Scene synthesis exhausted its retry budget (image too small)."""


class MalformedRecord(TouchLineError):
    """A JSONL record violates the scene schema.

    Carries the 1-based line number and the offending field path.
    """

    def __init__(self, line_no: int, field: str, message: str):
        super().__init__(f"line {line_no}: {field}: {message}")
        self.line_no = line_no
        self.field = field


class NoPredictionSource(TouchLineError):
    """A scene offers neither candidate boxes nor a pre-supplied prediction."""


class ConfigError(TouchLineError):
    """A configuration value violates its documented range."""


@dataclass(frozen=True)
class Violation:
    """One violated invariant found by scene validation.

    ``kind`` is the name of the matching error class (e.g. "EmptyBox"),
    ``path`` the dotted field path (e.g. "candidates[2].box").
    """

    kind: str
    path: str
    message: str


class SceneValidationError(TouchLineError):
    """Raised by validate_scene; lists every violated invariant."""

    def __init__(self, violations: list[Violation]):
        lines = "; ".join(f"{v.kind} at {v.path}: {v.message}" for v in violations)
        super().__init__(f"{len(violations)} invariant violation(s): {lines}")
        self.violations = violations
