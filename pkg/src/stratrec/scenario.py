"""Scenario documents: actors, parameter values, and optional alignment data."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

from .errors import SpecFormatError
from .registry import FrameworkSpec


@dataclass(frozen=True)
class ActorSpec:
    """One actor in a scenario with its per-parameter intensity values."""

    actor_id: str
    objective: str = ""
    parameters: Mapping[str, float] = field(default_factory=dict)
    context_factors: Mapping[str, float] = field(default_factory=dict)

    def values_for(self, framework: FrameworkSpec) -> list[float]:
        """Parameter values in the framework's canonical order.

        Raises SpecFormatError listing any parameter without a value.
        """
        missing = [p.id for p in framework.parameters if p.id not in self.parameters]
        if missing:
            raise SpecFormatError(
                f"actor '{self.actor_id}': missing values for parameters {missing}"
            )
        return [float(self.parameters[p.id]) for p in framework.parameters]

    def factors_for(self, framework: FrameworkSpec) -> list[float]:
        """Context factors in canonical order, defaulting to 1.0."""
        return [float(self.context_factors.get(p.id, 1.0)) for p in framework.parameters]


@dataclass(frozen=True)
class ScenarioRecord:
    """A strategic situation under analysis.

    ``workflow_position`` tracks the guided-entry state machine when the
    scenario lives in the service; file-loaded scenarios arrive complete.
    """

    id: str
    description: str = ""
    scenario_type: str = ""
    framework_id: str = ""
    heuristic_set_id: str = ""
    provider_id: str = ""
    theta: float | None = None
    actors: tuple[ActorSpec, ...] = ()
    alignment_weights: Mapping[str, Mapping[str, float]] = field(default_factory=dict)
    workflow_position: str = "initial"
    revision: int = 0
    created_at: str = ""
    updated_at: str = ""

    def actor(self, actor_id: str) -> ActorSpec:
        for a in self.actors:
            if a.actor_id == actor_id:
                return a
        raise KeyError(actor_id)

    def to_document(self) -> dict:
        return {
            "id": self.id,
            "description": self.description,
            "scenario_type": self.scenario_type,
            "framework_id": self.framework_id,
            "heuristic_set_id": self.heuristic_set_id,
            "provider_id": self.provider_id,
            "theta": self.theta,
            "actors": [
                {
                    "actor_id": a.actor_id,
                    "objective": a.objective,
                    "parameters": dict(a.parameters),
                    "context_factors": dict(a.context_factors),
                }
                for a in self.actors
            ],
            "alignment_weights": {str(k): dict(v) for k, v in self.alignment_weights.items()},
            "workflow_position": self.workflow_position,
            "revision": self.revision,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
        }


def scenario_from_document(doc: Mapping[str, Any]) -> ScenarioRecord:
    try:
        sid = str(doc["id"])
    except KeyError:
        raise SpecFormatError("scenario: missing field 'id'") from None
    actors = []
    for raw in doc.get("actors", []):
        if "actor_id" not in raw:
            raise SpecFormatError(f"scenario '{sid}': actor without actor_id")
        actors.append(
            ActorSpec(
                actor_id=str(raw["actor_id"]),
                objective=str(raw.get("objective", "")),
                parameters={str(k): float(v) for k, v in raw.get("parameters", {}).items()},
                context_factors={str(k): float(v) for k, v in raw.get("context_factors", {}).items()},
            )
        )
    return ScenarioRecord(
        id=sid,
        description=str(doc.get("description", "")),
        scenario_type=str(doc.get("scenario_type", "")),
        framework_id=str(doc.get("framework_id", "")),
        heuristic_set_id=str(doc.get("heuristic_set_id", "")),
        provider_id=str(doc.get("provider_id", "")),
        theta=float(doc["theta"]) if doc.get("theta") is not None else None,
        actors=tuple(actors),
        alignment_weights={
            str(k): {str(p): float(w) for p, w in v.items()}
            for k, v in doc.get("alignment_weights", {}).items()
        },
        workflow_position=str(doc.get("workflow_position", "initial")),
        revision=int(doc.get("revision", 0)),
        created_at=str(doc.get("created_at", "")),
        updated_at=str(doc.get("updated_at", "")),
    )


def load_scenario(source: str | Path | Mapping[str, Any]) -> ScenarioRecord:
    if isinstance(source, Mapping):
        return scenario_from_document(source)
    path = Path(source)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecFormatError(f"cannot load scenario {path}: {exc}") from exc
    return scenario_from_document(doc)
