"""Three-pronged validation of discovered parameter-heuristic mappings.

Cross-provider consistency, perturbation stability, and expert agreement are
scored on [0, 1] and blended into a single confidence value.  The spread
scores use the relative-range complement 1 - (max - min)/mean; expert
agreement uses the relative-error complement against the mean rating.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .errors import SpecFormatError
from .semantic import DEFAULT_LOG_BASE, ParameterDistribution, kl_divergence, kl_terms

DEFAULT_ALPHA = 0.3
DEFAULT_BETA = 0.3
DEFAULT_GAMMA = 0.4
WEIGHT_SUM_TOLERANCE = 1e-9
DISTRIBUTION_SUM_TOLERANCE = 1e-6


def _weights_at(distributions: Sequence, param_index: int) -> list[float]:
    out = []
    for dist in distributions:
        weights = dist.weights if isinstance(dist, ParameterDistribution) else tuple(float(w) for w in dist)
        if param_index < 0 or param_index >= len(weights):
            raise ValueError(f"parameter index {param_index} out of range for distribution of size {len(weights)}")
        out.append(float(weights[param_index]))
    return out


def _spread_complement(values: Sequence[float]) -> float:
    mean = math.fsum(values) / len(values)
    if mean == 0.0:
        raise ValueError("mean weight is zero; spread score undefined")
    score = 1.0 - (max(values) - min(values)) / mean
    return max(0.0, min(1.0, score))


def cross_validation_score(distributions: Sequence, param_index: int) -> float:
    """Consistency of one parameter's weight across embedding providers."""
    if len(distributions) < 2:
        raise ValueError("cross-validation needs at least two providers")
    return _spread_complement(_weights_at(distributions, param_index))


@dataclass(frozen=True)
class StabilityScore:
    score: float
    std_dev: float  # population standard deviation of the variant weights


def stability_score(distributions: Sequence, param_index: int) -> StabilityScore:
    """Resilience of one parameter's weight under text perturbations."""
    if len(distributions) < 2:
        raise ValueError("stability analysis needs at least two variants")
    weights = _weights_at(distributions, param_index)
    mean = math.fsum(weights) / len(weights)
    variance = math.fsum((w - mean) ** 2 for w in weights) / len(weights)
    return StabilityScore(score=_spread_complement(weights), std_dev=math.sqrt(variance))


def expert_agreement_score(system_weight: float, expert_ratings: Sequence[float]) -> float:
    """Closeness of the system's weight to the mean expert rating."""
    ratings = [float(r) for r in expert_ratings]
    if not ratings:
        raise ValueError("need at least one expert rating")
    mean = math.fsum(ratings) / len(ratings)
    if mean == 0.0:
        raise ValueError("mean expert rating is zero; agreement undefined")
    score = 1.0 - abs(float(system_weight) - mean) / mean
    return max(0.0, min(1.0, score))


@dataclass(frozen=True)
class ConfidenceScore:
    """Convex blend of the three validation scores."""

    cross_validation: float
    stability: float
    expert_agreement: float
    combined: float
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    gamma: float = DEFAULT_GAMMA


def confidence_score(
    cross_validation: float,
    stability: float,
    expert_agreement: float,
    alpha: float = DEFAULT_ALPHA,
    beta: float = DEFAULT_BETA,
    gamma: float = DEFAULT_GAMMA,
) -> ConfidenceScore:
    """Blend v, s, e with weights alpha, beta, gamma (must sum to one)."""
    if alpha < 0 or beta < 0 or gamma < 0:
        raise ValueError("blend weights must be non-negative")
    if abs((alpha + beta + gamma) - 1.0) > WEIGHT_SUM_TOLERANCE:
        raise ValueError(f"blend weights sum to {alpha + beta + gamma}, not 1")
    combined = alpha * cross_validation + beta * stability + gamma * expert_agreement
    return ConfidenceScore(
        cross_validation=cross_validation,
        stability=stability,
        expert_agreement=expert_agreement,
        combined=combined,
        alpha=alpha,
        beta=beta,
        gamma=gamma,
    )


@dataclass(frozen=True)
class DivergenceReport:
    """Both divergence directions with per-parameter contributions."""

    kl_system_expert: float
    kl_expert_system: float
    terms_system_expert: tuple[float, ...]
    terms_expert_system: tuple[float, ...]
    log_base: float = DEFAULT_LOG_BASE


def compare_to_expert(
    system_dist: Sequence[float],
    expert_dist: Sequence[float],
    log_base: float = DEFAULT_LOG_BASE,
) -> DivergenceReport:
    """Divergence of the system's distribution from the expert's, both ways."""
    sys_w = system_dist.weights if isinstance(system_dist, ParameterDistribution) else tuple(float(w) for w in system_dist)
    exp_w = expert_dist.weights if isinstance(expert_dist, ParameterDistribution) else tuple(float(w) for w in expert_dist)
    return DivergenceReport(
        kl_system_expert=kl_divergence(sys_w, exp_w, log_base),
        kl_expert_system=kl_divergence(exp_w, sys_w, log_base),
        terms_system_expert=kl_terms(sys_w, exp_w, log_base),
        terms_expert_system=kl_terms(exp_w, sys_w, log_base),
        log_base=log_base,
    )


# ── expert annotations ───────────────────────────────────────────────

@dataclass(frozen=True)
class ExpertEntry:
    expert_id: str
    ratings: Mapping[str, float] | None = None        # param id -> rating in [0, 1]
    distribution: tuple[float, ...] | None = None     # full distribution over params

    def __post_init__(self):
        if (self.ratings is None) == (self.distribution is None):
            raise SpecFormatError(f"expert '{self.expert_id}': provide ratings or a distribution, not both")
        if self.ratings is not None:
            for pid, r in self.ratings.items():
                if not 0.0 <= float(r) <= 1.0:
                    raise SpecFormatError(f"expert '{self.expert_id}': rating for '{pid}' outside [0, 1]")
        if self.distribution is not None:
            total = math.fsum(self.distribution)
            if abs(total - 1.0) > DISTRIBUTION_SUM_TOLERANCE:
                raise SpecFormatError(f"expert '{self.expert_id}': distribution sums to {total}, not 1")


@dataclass(frozen=True)
class ExpertAnnotation:
    """All expert judgments for one heuristic under one framework."""

    heuristic_id: object
    framework_id: str
    experts: tuple[ExpertEntry, ...]

    def ratings_for(self, param_id: str) -> list[float]:
        return [float(e.ratings[param_id]) for e in self.experts if e.ratings is not None and param_id in e.ratings]

    def distributions(self) -> list[tuple[float, ...]]:
        return [e.distribution for e in self.experts if e.distribution is not None]


def load_expert_annotation(source: str | Path | Mapping) -> ExpertAnnotation:
    """Parse an annotation document: {heuristic_id, framework_id, experts: [
    {expert_id, ratings: {param_id: real}} | {expert_id, distribution: [real]}]}."""
    if isinstance(source, Mapping):
        doc = source
    else:
        path = Path(source)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise SpecFormatError(f"cannot load annotation {path}: {exc}") from exc
    try:
        heuristic_id = doc["heuristic_id"]
        framework_id = str(doc["framework_id"])
        raw_experts = doc["experts"]
    except KeyError as exc:
        raise SpecFormatError(f"annotation missing field {exc}") from exc
    experts = []
    for raw in raw_experts:
        experts.append(
            ExpertEntry(
                expert_id=str(raw.get("expert_id", f"expert-{len(experts) + 1}")),
                ratings={str(k): float(v) for k, v in raw["ratings"].items()} if "ratings" in raw else None,
                distribution=tuple(float(w) for w in raw["distribution"]) if "distribution" in raw else None,
            )
        )
    if not experts:
        raise SpecFormatError("annotation has no experts")
    return ExpertAnnotation(heuristic_id=heuristic_id, framework_id=framework_id, experts=tuple(experts))


def validation_report_document(
    heuristic_id,
    v: float | None,
    s: float | None,
    e: float | None,
    c: float | None,
    kl_system_expert: float | None,
    kl_expert_system: float | None,
    flags: Sequence[str] = (),
) -> dict:
    """Validation report export."""
    return {
        "heuristic_id": heuristic_id,
        "v": v,
        "s": s,
        "e": e,
        "c": c,
        "kl_system_expert": kl_system_expert,
        "kl_expert_system": kl_expert_system,
        "flags": list(flags),
    }
