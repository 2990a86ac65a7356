"""Re-score detector candidates by touch-line alignment.

Fuses detector confidence with the alignment score of each candidate
center against the resolved touch line:

    fused = (1 - w) * confidence + w * (alignment + 1) / 2

with w = config.rerank_weight. Alignment is mapped affinely from
[-1, 1] to [0, 1] so the two signals share a scale and w acts as a
convex mixing weight. Candidates with degenerate geometry (center on
the source or tip) are demoted to alignment -1 instead of aborting the
batch.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import DegenerateGeometry, EmptyCandidateList
from .lines import TouchLine
from .losses import alignment_score
from .types import BoundingBox, Candidate, Config


@dataclass(frozen=True)
class RankedCandidate:
    box: BoundingBox
    base_confidence: float
    alignment: float
    fused_score: float
    rank: int


def rerank(
    candidates: Sequence[Candidate], line: TouchLine, config: Config | None = None
) -> list[RankedCandidate]:
    """Order candidates by fused confidence/alignment score.

    Output is a permutation of the input, sorted by fused score
    descending; equal scores keep ascending input order.
    """
    if len(candidates) == 0:
        raise EmptyCandidateList("rerank requires at least one candidate")
    cfg = config if config is not None else Config()
    w = cfg.rerank_weight

    scored = []
    for index, cand in enumerate(candidates):
        try:
            alignment = alignment_score(line.source, line.tip, cand.box)
        except DegenerateGeometry:
            alignment = -1.0
        fused = (1.0 - w) * cand.confidence + w * (alignment + 1.0) / 2.0
        scored.append((index, cand, alignment, fused))

    scored.sort(key=lambda item: (-item[3], item[0]))
    return [
        RankedCandidate(cand.box, cand.confidence, alignment, fused, rank)
        for rank, (index, cand, alignment, fused) in enumerate(scored, start=1)
    ]
