"""Segment vectors, collinearity-based attention-source selection, and
touch-line construction.

The arm is summarized by three segment vectors: index finger (IF,
fingertip - MCP), forearm (FA, wrist - elbow) and upper arm (UA,
elbow - shoulder). The pair with the highest mutual cosine similarity
is summed; the cosine between that sum and the remaining vector
measures how collinear (extended) the arm is. Above the configured
threshold the attention source is the eye (VTL regime), otherwise the
MCP joint (FL regime).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSkeleton, ZeroSum, ZeroVector
from .types import COINCIDENT_EPS, Config, Keypoint2D, Skeleton, TouchLineMode


@dataclass(frozen=True, eq=False)
class SegmentVectors:
    """The three upper-limb segment vectors, each with nonzero norm."""

    if_vec: np.ndarray
    fa_vec: np.ndarray
    ua_vec: np.ndarray


class AttentionKind(enum.Enum):
    EYE = "Eye"
    MCP = "MCP"


@dataclass(frozen=True)
class AttentionSource:
    """Selected line origin plus the collinearity score that chose it."""

    point: Keypoint2D
    kind: AttentionKind
    collinearity: float


@dataclass(frozen=True)
class TouchLine:
    """A resolved pointing line from source through fingertip.

    ``mode`` is always VTL or FL; an ADTL request resolves before a
    TouchLine is built.
    """

    source: Keypoint2D
    tip: Keypoint2D
    mode: TouchLineMode


def segment_vectors(skeleton: Skeleton) -> SegmentVectors:
    """Compute IF, FA, UA as component-wise keypoint differences."""
    if_vec = np.array(
        [skeleton.fingertip.x - skeleton.mcp.x, skeleton.fingertip.y - skeleton.mcp.y]
    )
    fa_vec = np.array([skeleton.wrist.x - skeleton.elbow.x, skeleton.wrist.y - skeleton.elbow.y])
    ua_vec = np.array(
        [skeleton.elbow.x - skeleton.shoulder.x, skeleton.elbow.y - skeleton.shoulder.y]
    )
    for name, vec in (("IF", if_vec), ("FA", fa_vec), ("UA", ua_vec)):
        if math.hypot(vec[0], vec[1]) < COINCIDENT_EPS:
            raise DegenerateSkeleton(f"{name} segment vector has near-zero norm")
    return SegmentVectors(if_vec, fa_vec, ua_vec)


def cosine_similarity(u, v) -> float:
    """Cosine of the angle between two 2-vectors, clamped to [-1, 1]."""
    ux, uy = float(u[0]), float(u[1])
    vx, vy = float(v[0]), float(v[1])
    nu = math.hypot(ux, uy)
    nv = math.hypot(vx, vy)
    if nu < COINCIDENT_EPS or nv < COINCIDENT_EPS:
        raise ZeroVector("cosine similarity of a zero-length vector is undefined")
    return min(1.0, max(-1.0, (ux * vx + uy * vy) / (nu * nv)))


# Index pairs in tie-break priority order: IF_FA beats FA_UA beats IF_UA.
_PAIR_PRIORITY = ((0, 1), (1, 2), (0, 2))


def select_attention_source(skeleton: Skeleton, config: Config) -> AttentionSource:
    """Pick the eye or the MCP as line origin via the collinearity rule.

    The two segment vectors with maximum pairwise cosine similarity are
    summed; the cosine between that sum and the remaining vector is the
    collinearity score. Strictly above ``config.collinearity_threshold``
    selects the eye, otherwise the MCP. Equal pairwise similarities are
    broken by the fixed priority IF_FA > FA_UA > IF_UA.
    """
    segs = segment_vectors(skeleton)
    vecs = (segs.if_vec, segs.fa_vec, segs.ua_vec)
    best_pair = _PAIR_PRIORITY[0]
    best_sim = cosine_similarity(vecs[0], vecs[1])
    for pair in _PAIR_PRIORITY[1:]:
        sim = cosine_similarity(vecs[pair[0]], vecs[pair[1]])
        if sim > best_sim:
            best_sim = sim
            best_pair = pair
    s_sum = vecs[best_pair[0]] + vecs[best_pair[1]]
    (rem_index,) = set(range(3)) - set(best_pair)
    s_rem = vecs[rem_index]
    if math.hypot(s_sum[0], s_sum[1]) < COINCIDENT_EPS:
        raise ZeroSum("maximum-similarity segment vectors are anti-parallel")
    collinearity = cosine_similarity(s_sum, s_rem)
    if collinearity > config.collinearity_threshold:
        return AttentionSource(skeleton.eye, AttentionKind.EYE, collinearity)
    return AttentionSource(skeleton.mcp, AttentionKind.MCP, collinearity)


def build_touch_line(
    skeleton: Skeleton, mode: TouchLineMode, config: Config | None = None
) -> TouchLine:
    """Build the pointing line for the requested mode.

    VTL anchors at the eye, FL at the MCP; ADTL resolves to one of the
    two via select_attention_source. The tip is always the fingertip.
    """
    if mode is TouchLineMode.VTL:
        source, resolved = skeleton.eye, TouchLineMode.VTL
    elif mode is TouchLineMode.FL:
        source, resolved = skeleton.mcp, TouchLineMode.FL
    else:
        chosen = select_attention_source(skeleton, config if config is not None else Config())
        if chosen.kind is AttentionKind.EYE:
            source, resolved = skeleton.eye, TouchLineMode.VTL
        else:
            source, resolved = skeleton.mcp, TouchLineMode.FL
    tip = skeleton.fingertip
    if math.hypot(source.x - tip.x, source.y - tip.y) < COINCIDENT_EPS:
        raise DegenerateSkeleton(f"{resolved.value} source coincides with the fingertip")
    return TouchLine(source, tip, resolved)
