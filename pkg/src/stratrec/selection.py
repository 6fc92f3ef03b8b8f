"""Situation-to-heuristic matching: threshold-filtered, ranked recommendations.

Each heuristic's invariant parameter distribution (its normalized similarity
column) is compared against the actor's normalized situation vector; matches
at or above the threshold come back sorted by score, ties broken by
heuristic id so output order is deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import DegenerateColumnError
from .registry import FrameworkSpec
from .semantic import (
    ParameterDistribution,
    SimilarityMatrix,
    cosine_similarity,
    discover_distribution,
)

DEFAULT_THRESHOLD = 0.75


@dataclass(frozen=True)
class SituationVector:
    """Normalized weighting of the current situation over framework parameters.

    ``weights`` sum to one; ``source_values`` keep the raw scale entries for
    reporting.
    """

    weights: tuple[float, ...]
    source_values: tuple[float, ...]

    def __post_init__(self):
        if any(w < 0 for w in self.weights):
            raise ValueError("situation weights must be non-negative")
        total = math.fsum(self.weights)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"situation weights sum to {total}, not 1")


def build_situation_vector(
    actor_values: Sequence[float],
    framework: FrameworkSpec | None = None,
    bounds: Sequence[tuple[float, float]] | None = None,
) -> SituationVector:
    """Normalize raw per-parameter entries into a situation vector.

    Values are summation-normalized so the ranking is invariant to uniform
    rescaling of the raw entries.  Bounds come from the framework's
    parameter scales when given.
    """
    values = tuple(float(v) for v in actor_values)
    if framework is not None:
        if len(values) != framework.size:
            raise ValueError(f"expected {framework.size} values for framework '{framework.id}', got {len(values)}")
        bounds = tuple((p.scale_min, p.scale_max) for p in framework.parameters)
    if bounds is not None:
        if len(bounds) != len(values):
            raise ValueError("bounds length disagrees with values")
        for i, (v, (lo, hi)) in enumerate(zip(values, bounds)):
            if not lo <= v <= hi:
                raise ValueError(f"value {v} for parameter #{i} outside bounds [{lo}, {hi}]")
    elif any(v < 0 for v in values):
        raise ValueError("actor values must be non-negative")
    total = math.fsum(values)
    if total <= 0.0:
        raise ValueError("all-zero situation: at least one value must be positive")
    return SituationVector(weights=tuple(v / total for v in values), source_values=values)


@dataclass(frozen=True)
class RankedRecommendation:
    heuristic_id: object
    score: float
    distribution: ParameterDistribution
    rank: int


@dataclass(frozen=True)
class SkippedColumn:
    """A heuristic left out of the ranking, with the reason."""

    heuristic_id: object
    reason: str


@dataclass(frozen=True)
class SelectionResult:
    recommendations: tuple[RankedRecommendation, ...]
    skipped: tuple[SkippedColumn, ...] = ()

    @property
    def heuristic_ids(self) -> tuple:
        return tuple(r.heuristic_id for r in self.recommendations)


def _dot(a: Sequence[float], b: Sequence[float]) -> float:
    return math.fsum(x * y for x, y in zip(a, b))


def select_stratagems(
    situation: SituationVector,
    matrix: SimilarityMatrix,
    threshold: float = DEFAULT_THRESHOLD,
    score_mode: str = "cosine",
    clamp_negative: bool = True,
) -> SelectionResult:
    """Rank heuristics by similarity between the situation and each column
    distribution, keeping scores >= threshold.

    Degenerate (no positive mass) columns are skipped and reported rather
    than failing the whole run.  ``score_mode`` is "cosine" (default) or
    "dot" for sensitivity studies.
    """
    if len(situation.weights) != len(matrix.row_ids):
        raise ValueError(
            f"situation has {len(situation.weights)} weights but matrix has {len(matrix.row_ids)} rows"
        )
    if score_mode not in ("cosine", "dot"):
        raise ValueError(f"unknown score mode '{score_mode}'")
    scored: list[tuple[object, float, ParameterDistribution]] = []
    skipped: list[SkippedColumn] = []
    for hid in matrix.col_ids:
        try:
            dist = discover_distribution(matrix, hid, clamp_negative=clamp_negative)
        except DegenerateColumnError as exc:
            skipped.append(SkippedColumn(heuristic_id=hid, reason=str(exc)))
            continue
        if score_mode == "cosine":
            score = cosine_similarity(situation.weights, dist.weights)
        else:
            score = _dot(situation.weights, dist.weights)
        if score >= threshold:
            scored.append((hid, score, dist))
    scored.sort(key=lambda item: (-item[1], item[0]))
    recommendations = tuple(
        RankedRecommendation(heuristic_id=hid, score=score, distribution=dist, rank=rank)
        for rank, (hid, score, dist) in enumerate(scored, start=1)
    )
    return SelectionResult(recommendations=recommendations, skipped=tuple(skipped))


def recommendations_to_document(
    result: SelectionResult,
    scenario_id: str,
    actor_id: str,
    framework_id: str,
    theta: float,
) -> dict:
    """Recommendation export document."""
    return {
        "scenario_id": scenario_id,
        "actor_id": actor_id,
        "framework_id": framework_id,
        "theta": theta,
        "results": [
            {"heuristic_id": r.heuristic_id, "score": r.score, "rank": r.rank}
            for r in result.recommendations
        ],
        "skipped": [{"heuristic_id": s.heuristic_id, "reason": s.reason} for s in result.skipped],
    }
