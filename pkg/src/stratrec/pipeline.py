"""End-to-end analysis: embed, build the matrix, discover distributions,
rank per actor, and validate against any expert annotations.

The same function backs both the CLI and the service, so identical inputs
produce identical records (up to id and timestamps).
"""

from __future__ import annotations

import math
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Mapping, Sequence

from .embedding import (
    DEFAULT_CONTEXT_FACTOR,
    EmbeddingCache,
    EmbeddingProvider,
    TermWeighting,
    UNIFORM_WEIGHTING,
    compose_parameter_vector,
    embed_heuristic,
)
from .errors import AnalysisError, SpecFormatError
from .registry import FrameworkSpec, HeuristicSetSpec
from .scenario import ScenarioRecord
from .selection import DEFAULT_THRESHOLD, SelectionResult, build_situation_vector, select_stratagems
from .semantic import (
    AlignmentContext,
    DEFAULT_LOG_BASE,
    SimilarityMatrix,
    alignment_score,
    discover_all_distributions,
    matrix_to_document,
)
from .validation import (
    DEFAULT_ALPHA,
    DEFAULT_BETA,
    DEFAULT_GAMMA,
    ExpertAnnotation,
    compare_to_expert,
    confidence_score,
    expert_agreement_score,
    validation_report_document,
)


@dataclass(frozen=True)
class ActorAnalysis:
    """Everything computed for one actor."""

    actor_id: str
    objective: str
    situation_weights: tuple[float, ...]
    source_values: tuple[float, ...]
    recommendations: tuple[dict, ...]      # {heuristic_id, score, rank}
    alignment: tuple[dict, ...] = ()       # {heuristic_id, raw, normalized}, sorted by raw desc


@dataclass(frozen=True)
class AnalysisRecord:
    """Immutable result bundle for one pipeline run."""

    id: str
    scenario_id: str
    framework_id: str
    heuristic_set_id: str
    provider_id: str
    theta: float
    context_factor: float
    matrix_document: dict
    skipped: tuple[dict, ...]
    actors: tuple[ActorAnalysis, ...]
    validation: tuple[dict, ...]
    created_at: str

    def actor(self, actor_id: str) -> ActorAnalysis:
        for a in self.actors:
            if a.actor_id == actor_id:
                return a
        raise KeyError(actor_id)

    def to_document(self) -> dict:
        return {
            "id": self.id,
            "scenario_id": self.scenario_id,
            "framework_id": self.framework_id,
            "heuristic_set_id": self.heuristic_set_id,
            "provider_id": self.provider_id,
            "theta": self.theta,
            "context_factor": self.context_factor,
            "matrix": self.matrix_document,
            "skipped": list(self.skipped),
            "actors": [
                {
                    "actor_id": a.actor_id,
                    "objective": a.objective,
                    "situation_weights": list(a.situation_weights),
                    "source_values": list(a.source_values),
                    "recommendations": list(a.recommendations),
                    "alignment": list(a.alignment),
                }
                for a in self.actors
            ],
            "validation": list(self.validation),
            "created_at": self.created_at,
        }


def analysis_from_document(doc: Mapping) -> AnalysisRecord:
    actors = tuple(
        ActorAnalysis(
            actor_id=a["actor_id"],
            objective=a.get("objective", ""),
            situation_weights=tuple(a["situation_weights"]),
            source_values=tuple(a["source_values"]),
            recommendations=tuple(a["recommendations"]),
            alignment=tuple(a.get("alignment", ())),
        )
        for a in doc["actors"]
    )
    return AnalysisRecord(
        id=doc["id"],
        scenario_id=doc["scenario_id"],
        framework_id=doc["framework_id"],
        heuristic_set_id=doc["heuristic_set_id"],
        provider_id=doc["provider_id"],
        theta=float(doc["theta"]),
        context_factor=float(doc.get("context_factor", DEFAULT_CONTEXT_FACTOR)),
        matrix_document=dict(doc["matrix"]),
        skipped=tuple(doc.get("skipped", ())),
        actors=actors,
        validation=tuple(doc.get("validation", ())),
        created_at=doc.get("created_at", ""),
    )


def _validate_against_annotations(
    annotations: Sequence[ExpertAnnotation],
    distributions: Mapping,
    framework: FrameworkSpec,
    log_base: float,
) -> list[dict]:
    reports = []
    for annotation in sorted(annotations, key=lambda a: str(a.heuristic_id)):
        dist = distributions.get(annotation.heuristic_id)
        if dist is None:
            reports.append(
                validation_report_document(
                    annotation.heuristic_id, None, None, None, None, None, None,
                    flags=["no system distribution for heuristic"],
                )
            )
            continue
        weights = dist.weights
        flags: list[str] = []
        # dominant parameter is the validation target, mirroring how a
        # reviewer would sanity-check the mapping's strongest claim
        target_index = max(range(len(weights)), key=lambda i: weights[i])
        target_param = framework.parameters[target_index].id
        ratings = annotation.ratings_for(target_param)
        e = None
        if ratings:
            e = expert_agreement_score(weights[target_index], ratings)
        else:
            flags.append(f"no expert ratings for dominant parameter '{target_param}'")
        kl_se = kl_es = None
        expert_dists = annotation.distributions()
        if expert_dists:
            report = compare_to_expert(weights, expert_dists[0], log_base)
            kl_se, kl_es = report.kl_system_expert, report.kl_expert_system
        flags.append("cross-validation and stability need multi-provider runs")
        reports.append(
            validation_report_document(annotation.heuristic_id, None, None, e, None, kl_se, kl_es, flags)
        )
    return reports


def run_analysis(
    scenario: ScenarioRecord,
    framework: FrameworkSpec,
    heuristic_set: HeuristicSetSpec,
    provider: EmbeddingProvider,
    theta: float = DEFAULT_THRESHOLD,
    context_factor: float = DEFAULT_CONTEXT_FACTOR,
    weighting: TermWeighting = UNIFORM_WEIGHTING,
    annotations: Sequence[ExpertAnnotation] = (),
    log_base: float = DEFAULT_LOG_BASE,
    cache: EmbeddingCache | None = None,
    analysis_id: str | None = None,
) -> AnalysisRecord:
    """Run the full pipeline for every actor in the scenario."""
    if not scenario.actors:
        raise AnalysisError(f"scenario '{scenario.id}': no actors to analyze")
    try:
        param_vectors = [
            (p.id, compose_parameter_vector(p, context_factor, weighting, provider, cache))
            for p in framework.parameters
        ]
        heuristic_vectors = [
            (h.id, embed_heuristic(h, weighting, provider, cache))
            for h in heuristic_set.heuristics
        ]
    except SpecFormatError:
        raise
    except Exception as exc:
        raise AnalysisError(f"embedding stage failed: {exc}") from exc

    matrix = _build_matrix(param_vectors, heuristic_vectors)
    distributions, skipped_pairs = discover_all_distributions(matrix)

    actors = []
    for actor in scenario.actors:
        values = actor.values_for(framework)
        situation = build_situation_vector(values, framework)
        result = select_stratagems(situation, matrix, theta)
        alignment_rows = _alignment_rows(scenario, actor, framework)
        actors.append(
            ActorAnalysis(
                actor_id=actor.actor_id,
                objective=actor.objective,
                situation_weights=situation.weights,
                source_values=situation.source_values,
                recommendations=tuple(
                    {"heuristic_id": r.heuristic_id, "score": r.score, "rank": r.rank}
                    for r in result.recommendations
                ),
                alignment=tuple(alignment_rows),
            )
        )

    validation = _validate_against_annotations(annotations, distributions, framework, log_base)
    return AnalysisRecord(
        id=analysis_id or uuid.uuid4().hex,
        scenario_id=scenario.id,
        framework_id=framework.id,
        heuristic_set_id=heuristic_set.id,
        provider_id=getattr(provider, "id", ""),
        theta=theta,
        context_factor=context_factor,
        matrix_document=matrix_to_document(matrix, distributions, framework.id, heuristic_set.id, getattr(provider, "id", "")),
        skipped=tuple({"heuristic_id": hid, "reason": reason} for hid, reason in skipped_pairs),
        actors=tuple(actors),
        validation=tuple(validation),
        created_at=datetime.now(timezone.utc).isoformat(),
    )


def _build_matrix(param_vectors, heuristic_vectors) -> SimilarityMatrix:
    from .semantic import build_similarity_matrix

    try:
        return build_similarity_matrix(param_vectors, heuristic_vectors)
    except ValueError as exc:
        raise AnalysisError(f"similarity stage failed: {exc}") from exc


def _alignment_rows(scenario: ScenarioRecord, actor, framework: FrameworkSpec) -> list[dict]:
    """Alignment-path scores for heuristics with calibrated weights."""
    if not scenario.alignment_weights:
        return []
    values = actor.values_for(framework)
    context = AlignmentContext(factors=tuple(actor.factors_for(framework)))
    scale_max = max(p.scale_max for p in framework.parameters)
    rows = []
    for hid_key, weight_map in scenario.alignment_weights.items():
        weights = [float(weight_map.get(p.id, 0.0)) for p in framework.parameters]
        if math.fsum(weights) <= 0:
            continue
        score = alignment_score(weights, values, context, scale_max=scale_max)
        rows.append({"heuristic_id": _native_id(hid_key), "raw": score.raw, "normalized": score.normalized})
    rows.sort(key=lambda r: (-r["raw"], str(r["heuristic_id"])))
    return rows


def _native_id(key: str):
    """Alignment-weight keys arrive as JSON strings; restore integer ids."""
    try:
        return int(key)
    except (TypeError, ValueError):
        return key
