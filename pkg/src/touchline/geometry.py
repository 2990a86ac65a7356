"""Box overlap metrics and ray geometry.

Touch lines are evaluated as rays: origin at the attention source,
direction through the fingertip, extending to infinity. Points between
source and fingertip count as on-ray. Box boundaries are closed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ZeroVector
from .lines import TouchLine
from .types import COINCIDENT_EPS, BoundingBox, Keypoint2D

# |direction| must be within this of 1.
_UNIT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Ray2D:
    """Half-line with unit direction."""

    origin: Keypoint2D
    direction: np.ndarray

    def __post_init__(self):
        norm = math.hypot(self.direction[0], self.direction[1])
        if abs(norm - 1.0) > _UNIT_TOL:
            raise ZeroVector(f"ray direction must be unit length, |d| = {norm}")


def ray_from_points(origin: Keypoint2D, through: Keypoint2D) -> Ray2D:
    """Ray starting at ``origin`` passing through ``through``."""
    dx = through.x - origin.x
    dy = through.y - origin.y
    norm = math.hypot(dx, dy)
    if norm < COINCIDENT_EPS:
        raise ZeroVector("ray endpoints coincide")
    return Ray2D(origin, np.array([dx / norm, dy / norm]))


def ray_from_line(line: TouchLine) -> Ray2D:
    return ray_from_points(line.source, line.tip)


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection area over union area; 0 for disjoint boxes."""
    iw = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    ih = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    inter = max(0.0, iw) * max(0.0, ih)
    union = a.area() + b.area() - inter
    return inter / union


def giou(a: BoundingBox, b: BoundingBox) -> float:
    """Generalized IoU: IoU minus the enclosing-box slack fraction.

    Equals IoU when the enclosing hull is exactly the union; can be
    negative (down to, but never reaching, -1) for distant boxes.
    """
    iw = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    ih = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    inter = max(0.0, iw) * max(0.0, ih)
    union = a.area() + b.area() - inter
    cw = max(a.x_max, b.x_max) - min(a.x_min, b.x_min)
    ch = max(a.y_max, b.y_max) - min(a.y_min, b.y_min)
    enclosing = cw * ch
    return inter / union - (enclosing - union) / enclosing


def ray_box_intersects(ray: Ray2D, box: BoundingBox) -> tuple[bool, float | None]:
    """Slab test of ray against closed box.

    Returns (hit, t) where t >= 0 is the smallest ray parameter inside
    the box (0 when the origin is already inside), or (False, None).
    """
    ox, oy = ray.origin.x, ray.origin.y
    dx, dy = float(ray.direction[0]), float(ray.direction[1])
    t_enter = -math.inf
    t_exit = math.inf
    for o, d, lo, hi in ((ox, dx, box.x_min, box.x_max), (oy, dy, box.y_min, box.y_max)):
        if d == 0.0:
            if o < lo or o > hi:
                return False, None
            continue
        t0 = (lo - o) / d
        t1 = (hi - o) / d
        if t0 > t1:
            t0, t1 = t1, t0
        t_enter = max(t_enter, t0)
        t_exit = min(t_exit, t1)
    if t_enter > t_exit or t_exit < 0.0:
        return False, None
    return True, max(t_enter, 0.0)


def point_to_ray_distance(p: Keypoint2D, ray: Ray2D) -> float:
    """Euclidean distance from p to the nearest ray point (t >= 0)."""
    rx = p.x - ray.origin.x
    ry = p.y - ray.origin.y
    t = max(0.0, rx * float(ray.direction[0]) + ry * float(ray.direction[1]))
    cx = rx - t * float(ray.direction[0])
    cy = ry - t * float(ray.direction[1])
    return math.hypot(cx, cy)
