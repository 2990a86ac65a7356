"""Alignment scoring and the training-loss components.

The alignment score (AE) is the cosine similarity between the two
vectors pointing from the attention source and from the fingertip to a
box center; 1 means the center sits on the outward pointing ray, -1
means it lies between source and tip. The alignment loss is
ReLU(AE_gt - AE_pred), with the attention source always taken from
ground truth. An analytic gradient with respect to the predicted box
center is provided and verified against finite differences in the test
suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometry, NegativeLossTerm, NonFiniteValue, ShapeMismatch
from .types import BoundingBox, Config, Keypoint2D

# Difference vectors shorter than this are degenerate for AE purposes.
_AE_EPS = 1e-9


@dataclass(frozen=True)
class LossBreakdown:
    """The five loss components and their exact unweighted sum."""

    l_box: float
    l_giou: float
    l_alignment: float
    l_as: float
    l_ae: float
    total: float


def _center_vectors(
    attention: Keypoint2D, fingertip: Keypoint2D, box: BoundingBox
) -> tuple[float, float, float, float, float, float]:
    c = box.center()
    ux, uy = c.x - attention.x, c.y - attention.y
    vx, vy = c.x - fingertip.x, c.y - fingertip.y
    nu = math.hypot(ux, uy)
    nv = math.hypot(vx, vy)
    if nu < _AE_EPS:
        raise DegenerateGeometry("box center coincides with the attention source")
    if nv < _AE_EPS:
        raise DegenerateGeometry("box center coincides with the fingertip")
    return ux, uy, vx, vy, nu, nv


def alignment_score(attention: Keypoint2D, fingertip: Keypoint2D, box: BoundingBox) -> float:
    """AE: cosine between (center - attention) and (center - fingertip)."""
    ux, uy, vx, vy, nu, nv = _center_vectors(attention, fingertip, box)
    return min(1.0, max(-1.0, (ux * vx + uy * vy) / (nu * nv)))


def ae_loss(
    gt_box: BoundingBox,
    pred_box: BoundingBox,
    gt_attention: Keypoint2D,
    fingertip: Keypoint2D,
) -> float:
    """ReLU(AE_gt - AE_pred); both scores use the ground-truth source."""
    ae_gt = alignment_score(gt_attention, fingertip, gt_box)
    ae_pred = alignment_score(gt_attention, fingertip, pred_box)
    return max(0.0, ae_gt - ae_pred)


def ae_gradient(
    gt_box: BoundingBox,
    pred_box: BoundingBox,
    gt_attention: Keypoint2D,
    fingertip: Keypoint2D,
) -> np.ndarray:
    """Gradient of the alignment loss w.r.t. the predicted box center.

    Where the ReLU is inactive (AE_pred >= AE_gt) the zero subgradient
    is returned. Otherwise the gradient is -dAE_pred/dcenter, using
    d(cos(u,v))/dc = (v_hat - cos u_hat)/|u| + (u_hat - cos v_hat)/|v|
    since both difference vectors shift one-for-one with the center.
    """
    ae_gt = alignment_score(gt_attention, fingertip, gt_box)
    ux, uy, vx, vy, nu, nv = _center_vectors(gt_attention, fingertip, pred_box)
    cos_uv = min(1.0, max(-1.0, (ux * vx + uy * vy) / (nu * nv)))
    if cos_uv >= ae_gt:
        return np.zeros(2)
    uhx, uhy = ux / nu, uy / nu
    vhx, vhy = vx / nv, vy / nv
    gx = (vhx - cos_uv * uhx) / nu + (uhx - cos_uv * vhx) / nv
    gy = (vhy - cos_uv * uhy) / nu + (uhy - cos_uv * vhy) / nv
    return np.array([-gx, -gy])


def _image_diagonal(image_size: tuple[float, float] | None) -> float:
    if image_size is None:
        return 1.0
    return math.hypot(image_size[0], image_size[1])


def l1_box_loss(
    gt_box: BoundingBox,
    pred_box: BoundingBox,
    image_size: tuple[float, float] | None = None,
) -> float:
    """Sum of absolute corner differences; optionally diagonal-normalized."""
    s = (
        abs(gt_box.x_min - pred_box.x_min)
        + abs(gt_box.y_min - pred_box.y_min)
        + abs(gt_box.x_max - pred_box.x_max)
        + abs(gt_box.y_max - pred_box.y_max)
    )
    return s / _image_diagonal(image_size)


def giou_loss(gt_box: BoundingBox, pred_box: BoundingBox) -> float:
    """1 - GIoU, in [0, 2); 0 iff the boxes are identical."""
    from .geometry import giou

    return 1.0 - giou(gt_box, pred_box)


def attention_source_loss(
    gt_source: Keypoint2D,
    pred_source: Keypoint2D,
    image_size: tuple[float, float] | None = None,
) -> float:
    """L1 distance between ground-truth and predicted source points."""
    s = abs(gt_source.x - pred_source.x) + abs(gt_source.y - pred_source.y)
    return s / _image_diagonal(image_size)


def focal_alignment_loss(logits, targets, config: Config | None = None) -> float:
    """Alpha-balanced sigmoid focal loss, averaged over all cells.

    ``logits`` holds region/token similarity scores, ``targets`` the
    matching binary matrix. Computed with the numerically stable
    binary-cross-entropy-with-logits form.
    """
    cfg = config if config is not None else Config()
    x = np.asarray(logits, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if x.shape != t.shape:
        raise ShapeMismatch(f"logits shape {x.shape} != targets shape {t.shape}")
    if x.size == 0:
        raise ShapeMismatch("focal loss over an empty matrix is undefined")
    if not np.isin(t, (0.0, 1.0)).all():
        raise ValueError("targets must be binary (0 or 1)")
    ce = np.maximum(x, 0.0) - x * t + np.log1p(np.exp(-np.abs(x)))
    p = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))), np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
    p_t = p * t + (1.0 - p) * (1.0 - t)
    alpha_t = cfg.focal_alpha * t + (1.0 - cfg.focal_alpha) * (1.0 - t)
    return float(np.mean(alpha_t * (1.0 - p_t) ** cfg.focal_gamma * ce))


def sample_gradient_config(
    rng: np.random.Generator, kink_margin: float = 1e-3
) -> tuple[BoundingBox, BoundingBox, Keypoint2D, Keypoint2D]:
    """Draw one well-conditioned (gt_box, pred_box, attention, fingertip).

    Rejects geometry close to the ReLU kink (|AE_gt - AE_pred| below
    ``kink_margin``) or with near-degenerate difference vectors, so the
    alignment loss is differentiable at the sample.
    """
    while True:
        ax, ay = rng.uniform(0.0, 200.0, size=2)
        angle = rng.uniform(0.0, 2.0 * math.pi)
        reach = rng.uniform(40.0, 200.0)
        fx = ax + reach * math.cos(angle)
        fy = ay + reach * math.sin(angle)
        centers = []
        ok = True
        for _ in range(2):
            cx, cy = rng.uniform(-150.0, 350.0, size=2)
            if math.hypot(cx - ax, cy - ay) < 20.0 or math.hypot(cx - fx, cy - fy) < 20.0:
                ok = False
                break
            centers.append((cx, cy))
        if not ok:
            continue
        boxes = []
        for cx, cy in centers:
            w = rng.uniform(10.0, 60.0)
            h = rng.uniform(10.0, 60.0)
            boxes.append(BoundingBox(cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2))
        attention = Keypoint2D(ax, ay)
        fingertip = Keypoint2D(fx, fy)
        ae_gt = alignment_score(attention, fingertip, boxes[0])
        ae_pred = alignment_score(attention, fingertip, boxes[1])
        if abs(ae_gt - ae_pred) < kink_margin:
            continue
        return boxes[0], boxes[1], attention, fingertip


def verify_ae_gradient(n: int = 1000, seed: int = 1, h: float = 1e-5) -> float:
    """Max relative error of ae_gradient vs central finite differences.

    Differentiates the loss with respect to the predicted box center by
    translating the whole predicted box by +/-h along each axis. The
    relative error of a configuration is the norm of the gradient
    difference over the larger gradient norm (0 when both vanish).
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        gt_box, pred_box, attention, fingertip = sample_gradient_config(rng)
        analytic = ae_gradient(gt_box, pred_box, attention, fingertip)
        fd = np.empty(2)
        for axis, (dx, dy) in enumerate(((h, 0.0), (0.0, h))):
            plus = BoundingBox(
                pred_box.x_min + dx, pred_box.y_min + dy, pred_box.x_max + dx, pred_box.y_max + dy
            )
            minus = BoundingBox(
                pred_box.x_min - dx, pred_box.y_min - dy, pred_box.x_max - dx, pred_box.y_max - dy
            )
            fd[axis] = (
                ae_loss(gt_box, plus, attention, fingertip)
                - ae_loss(gt_box, minus, attention, fingertip)
            ) / (2.0 * h)
        scale = max(float(np.linalg.norm(analytic)), float(np.linalg.norm(fd)))
        if scale > 0.0:
            worst = max(worst, float(np.linalg.norm(analytic - fd)) / scale)
    return worst


def total_loss(
    l_box: float, l_giou: float, l_alignment: float, l_as: float, l_ae: float
) -> LossBreakdown:
    """Combine the five components into their unweighted sum."""
    parts = (l_box, l_giou, l_alignment, l_as, l_ae)
    names = ("l_box", "l_giou", "l_alignment", "l_as", "l_ae")
    for name, value in zip(names, parts):
        if not math.isfinite(value):
            raise NonFiniteValue(f"{name} is not finite: {value}")
        if value < 0.0:
            raise NegativeLossTerm(f"{name} must be nonnegative, got {value}")
    total = l_box + l_giou + l_alignment + l_as + l_ae
    return LossBreakdown(l_box, l_giou, l_alignment, l_as, l_ae, total)
