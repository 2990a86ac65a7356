"""Independent oracles used to cross-check library results.

Everything here is deliberately written from scratch against the
mathematical definitions (plain tuples, math, sampling, numerical
minimization) and never calls into the touchline package, so agreement
between an oracle and the library is evidence, not tautology.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import optimize

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# Scalar geometry recomputations.
# ---------------------------------------------------------------------------


def cosine_scalar(u, v) -> float:
    dot = u[0] * v[0] + u[1] * v[1]
    nu = math.sqrt(u[0] ** 2 + u[1] ** 2)
    nv = math.sqrt(v[0] ** 2 + v[1] ** 2)
    return min(1.0, max(-1.0, dot / (nu * nv)))


def segment_vectors_scalar(joints: dict) -> dict:
    """Per-component subtraction from a joint-name -> (x, y) mapping."""
    return {
        "if": (joints["fingertip"][0] - joints["mcp"][0], joints["fingertip"][1] - joints["mcp"][1]),
        "fa": (joints["wrist"][0] - joints["elbow"][0], joints["wrist"][1] - joints["elbow"][1]),
        "ua": (joints["elbow"][0] - joints["shoulder"][0], joints["elbow"][1] - joints["shoulder"][1]),
    }


def collinearity_brute(joints: dict) -> float:
    """Enumerate all three segment pairs explicitly and score the winner.

    Ties between pairwise similarities resolve in the fixed order
    if_fa, fa_ua, if_ua (first listed wins).
    """
    vecs = segment_vectors_scalar(joints)
    pairs = [
        ("if_fa", vecs["if"], vecs["fa"], vecs["ua"]),
        ("fa_ua", vecs["fa"], vecs["ua"], vecs["if"]),
        ("if_ua", vecs["if"], vecs["ua"], vecs["fa"]),
    ]
    scored = [(cosine_scalar(a, b), name, a, b, rem) for name, a, b, rem in pairs]
    best = max(scored, key=lambda item: item[0])  # max() keeps the first maximum
    _, _, a, b, rem = best
    s_sum = (a[0] + b[0], a[1] + b[1])
    return cosine_scalar(s_sum, rem)


def alignment_scalar(source, tip, center) -> float:
    u = (center[0] - source[0], center[1] - source[1])
    v = (center[0] - tip[0], center[1] - tip[1])
    return cosine_scalar(u, v)


def fused_score_scalar(confidence: float, alignment: float, weight: float) -> float:
    return (1.0 - weight) * confidence + weight * (alignment + 1.0) / 2.0


def rerank_order_scalar(confidences, alignments, weight) -> list[int]:
    """Indices sorted by fused score desc, input index asc on ties."""
    scored = [
        (fused_score_scalar(c, a, weight), i) for i, (c, a) in enumerate(zip(confidences, alignments))
    ]
    scored.sort(key=lambda item: (-item[0], item[1]))
    return [i for _, i in scored]


# ---------------------------------------------------------------------------
# Finite differences.
# ---------------------------------------------------------------------------


def central_difference(func, x0, h: float = 1e-5) -> np.ndarray:
    """Central finite-difference gradient of a scalar function."""
    x0 = np.asarray(x0, dtype=np.float64)
    grad = np.empty_like(x0)
    for i in range(x0.size):
        plus = x0.copy()
        minus = x0.copy()
        plus[i] += h
        minus[i] -= h
        grad[i] = (func(plus) - func(minus)) / (2.0 * h)
    return grad


# ---------------------------------------------------------------------------
# Focal loss, one cell at a time.
# ---------------------------------------------------------------------------


def focal_cell(logit: float, target: int, alpha: float, gamma: float) -> float:
    p = 1.0 / (1.0 + math.exp(-logit))
    p_t = p if target == 1 else 1.0 - p
    alpha_t = alpha if target == 1 else 1.0 - alpha
    return -alpha_t * (1.0 - p_t) ** gamma * math.log(p_t)


def focal_mean(logits, targets, alpha: float, gamma: float) -> float:
    logits = np.asarray(logits, dtype=np.float64)
    targets = np.asarray(targets)
    total = 0.0
    for x, t in zip(logits.ravel(), targets.ravel()):
        total += focal_cell(float(x), int(t), alpha, gamma)
    return total / logits.size


# ---------------------------------------------------------------------------
# Monte-Carlo box overlap.
# ---------------------------------------------------------------------------


def _mc_counts_loop(boxes_a, boxes_b, u, v):
    n_pairs = boxes_a.shape[0]
    n = u.shape[0]
    counts = np.zeros((n_pairs, 2), dtype=np.int64)
    for i in range(n_pairs):
        ax0, ay0, ax1, ay1 = boxes_a[i, 0], boxes_a[i, 1], boxes_a[i, 2], boxes_a[i, 3]
        bx0, by0, bx1, by1 = boxes_b[i, 0], boxes_b[i, 1], boxes_b[i, 2], boxes_b[i, 3]
        cx0 = min(ax0, bx0)
        cy0 = min(ay0, by0)
        w = max(ax1, bx1) - cx0
        h = max(ay1, by1) - cy0
        n_inter = 0
        n_union = 0
        for j in range(n):
            x = cx0 + u[j] * w
            y = cy0 + v[j] * h
            in_a = ax0 <= x <= ax1 and ay0 <= y <= ay1
            in_b = bx0 <= x <= bx1 and by0 <= y <= by1
            if in_a and in_b:
                n_inter += 1
            if in_a or in_b:
                n_union += 1
        counts[i, 0] = n_inter
        counts[i, 1] = n_union
    return counts


if _HAVE_NUMBA:
    _mc_counts = njit(cache=True)(_mc_counts_loop)
else:  # pragma: no cover
    _mc_counts = _mc_counts_loop


def mc_box_overlap(boxes_a, boxes_b, n_samples: int = 1_000_000, seed: int = 0):
    """Monte-Carlo IoU/GIoU estimates with delta-method standard errors.

    For each pair, n_samples points are drawn uniformly over the
    enclosing hull (one shared uniform stream across pairs, which keeps
    every per-pair estimate unbiased at the stated SE). With hit
    fractions p_i (intersection) and p_u (union):

        iou  = p_i / p_u
        giou = p_i / p_u + p_u - 1      (hull == enclosing box)

    Standard errors follow the delta method over the multinomial
    covariance of (p_i, p_u); proportions are continuity-corrected by
    half a count for the SE only, so boundary cases (0 hits) keep a
    positive, honest uncertainty.

    Returns (iou_est, iou_se, giou_est, giou_se) arrays.
    """
    boxes_a = np.ascontiguousarray(boxes_a, dtype=np.float64)
    boxes_b = np.ascontiguousarray(boxes_b, dtype=np.float64)
    rng = np.random.default_rng(seed)
    u = rng.random(n_samples)
    v = rng.random(n_samples)
    counts = _mc_counts(boxes_a, boxes_b, u, v)
    n = float(n_samples)
    p_i = counts[:, 0] / n
    p_u = counts[:, 1] / n

    iou_est = p_i / p_u
    giou_est = p_i / p_u + p_u - 1.0

    pi_t = (counts[:, 0] + 0.5) / (n + 1.0)
    pu_t = (counts[:, 1] + 0.5) / (n + 1.0)
    var_ii = pi_t * (1.0 - pi_t)
    var_uu = pu_t * (1.0 - pu_t)
    cov_iu = pi_t * (1.0 - pu_t)
    a = 1.0 / pu_t
    b_iou = -pi_t / pu_t**2
    b_giou = b_iou + 1.0
    var_iou = (a * a * var_ii + b_iou * b_iou * var_uu + 2.0 * a * b_iou * cov_iu) / n
    var_giou = (a * a * var_ii + b_giou * b_giou * var_uu + 2.0 * a * b_giou * cov_iu) / n
    iou_se = np.sqrt(np.maximum(var_iou, 0.0))
    giou_se = np.sqrt(np.maximum(var_giou, 0.0))
    return iou_est, iou_se, giou_est, giou_se


def iou_scalar(a, b) -> float:
    """Direct-area IoU recomputation on corner tuples."""
    iw = min(a[2], b[2]) - max(a[0], b[0])
    ih = min(a[3], b[3]) - max(a[1], b[1])
    inter = max(0.0, iw) * max(0.0, ih)
    union = (a[2] - a[0]) * (a[3] - a[1]) + (b[2] - b[0]) * (b[3] - b[1]) - inter
    return inter / union


def giou_scalar(a, b) -> float:
    iw = min(a[2], b[2]) - max(a[0], b[0])
    ih = min(a[3], b[3]) - max(a[1], b[1])
    inter = max(0.0, iw) * max(0.0, ih)
    union = (a[2] - a[0]) * (a[3] - a[1]) + (b[2] - b[0]) * (b[3] - b[1]) - inter
    enclosing = (max(a[2], b[2]) - min(a[0], b[0])) * (max(a[3], b[3]) - min(a[1], b[1]))
    return inter / union - (enclosing - union) / enclosing


# ---------------------------------------------------------------------------
# Ray sampling oracles.
# ---------------------------------------------------------------------------


def box_sdf(x: float, y: float, box) -> float:
    """Signed distance to the box boundary (negative inside)."""
    dx = max(box[0] - x, 0.0, x - box[2])
    dy = max(box[1] - y, 0.0, y - box[3])
    outside = math.hypot(dx, dy)
    if outside > 0.0:
        return outside
    return -min(x - box[0], box[2] - x, y - box[1], box[3] - y)


def ray_box_sampling(origin, direction, box, t_max: float, n_points: int = 10_000):
    """Dense-sampling hit test along the ray.

    Returns (hit, min_abs_sdf): whether any sampled point lies in the
    closed box, and how close the nearest sample came to the boundary.
    Verdicts with min_abs_sdf below roughly one sampling step are
    boundary-fuzzy and should not be compared against an exact test.
    """
    ts = np.linspace(0.0, t_max, n_points)
    xs = origin[0] + ts * direction[0]
    ys = origin[1] + ts * direction[1]
    dx = np.maximum.reduce([box[0] - xs, np.zeros_like(xs), xs - box[2]])
    dy = np.maximum.reduce([box[1] - ys, np.zeros_like(ys), ys - box[3]])
    outside = np.hypot(dx, dy)
    inside_depth = np.minimum.reduce([xs - box[0], box[2] - xs, ys - box[1], box[3] - ys])
    sdf = np.where(outside > 0.0, outside, -inside_depth)
    return bool((sdf <= 0.0).any()), float(np.abs(sdf).min())


def point_ray_distance_minimize(p, origin, direction, t_max: float = 1e5) -> float:
    """1-D numerical minimization of the point-to-ray distance."""

    def dist(t: float) -> float:
        return math.hypot(p[0] - origin[0] - t * direction[0], p[1] - origin[1] - t * direction[1])

    result = optimize.minimize_scalar(dist, bounds=(0.0, t_max), method="bounded",
                                      options={"xatol": 1e-10})
    return min(dist(0.0), float(result.fun))
