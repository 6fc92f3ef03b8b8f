"""Long-running analysis service: scenarios, guided workflow, analyses,
annotations, and reports over a resource-oriented web API.

Environment:
    STRATREC_DATA_DIR       persistent document directory (default ./stratrec-data)
    STRATREC_BIND           host:port for `python -m stratrec.service` (default 127.0.0.1:8414)
    STRATREC_PROVIDER_URL   endpoint for a remote embedding provider (optional)
    STRATREC_REGISTRY_DIR   framework/heuristic definitions (default: packaged fixtures)
    STRATREC_WORKFLOW_FILE  workflow definition (default: packaged default flow)

Run: ``python -m stratrec.service`` or mount ``create_app()`` under any ASGI
server.
"""

from __future__ import annotations

import os
import uuid
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Mapping

from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel, Field

from . import fixtures
from .embedding import (
    EmbeddingCache,
    FixtureProvider,
    ReferenceProvider,
    RemoteProvider,
    compose_parameter_vector,
)
from .errors import (
    AnalysisError,
    SpecFormatError,
    StratrecError,
    WorkflowError,
    WorkflowValidationError,
)
from .pipeline import AnalysisRecord, analysis_from_document, run_analysis
from .registry import Registry
from .reporting import MockGenerator, load_template, render_recommendation_report
from .scenario import ActorSpec, ScenarioRecord, scenario_from_document
from .selection import DEFAULT_THRESHOLD, build_situation_vector
from .semantic import cosine_similarity, matrix_from_document
from .store import DocumentStore
from .validation import load_expert_annotation
from .workflow import INITIAL_STATE, WorkflowDefinition, advance, load_workflow

_NON_PARAMETER_KEYS = {"actor_id", "objective", "scenario_type", "actor_count", "choice", "description"}


@dataclass
class ServiceConfig:
    data_dir: Path
    registry_dir: Path
    workflow_file: Path
    provider_url: str | None = None

    @classmethod
    def from_env(cls) -> "ServiceConfig":
        return cls(
            data_dir=Path(os.environ.get("STRATREC_DATA_DIR", "stratrec-data")),
            registry_dir=Path(os.environ.get("STRATREC_REGISTRY_DIR", str(fixtures.registry_dir()))),
            workflow_file=Path(os.environ.get("STRATREC_WORKFLOW_FILE", str(fixtures.default_workflow_file()))),
            provider_url=os.environ.get("STRATREC_PROVIDER_URL") or None,
        )


class EventRequest(BaseModel):
    event: str
    payload: dict[str, Any] = Field(default_factory=dict)
    revision: int | None = None  # optimistic-concurrency guard


class ScenarioCreateRequest(BaseModel):
    description: str = ""
    scenario_type: str = ""
    heuristic_set_id: str = ""


class ScenarioUpdateRequest(BaseModel):
    description: str | None = None
    heuristic_set_id: str | None = None
    provider_id: str | None = None
    theta: float | None = None
    alignment_weights: dict[str, dict[str, float]] | None = None
    context_factors: dict[str, dict[str, float]] | None = None  # actor id -> factors


class AnalysisRequest(BaseModel):
    provider_id: str = "reference"
    theta: float = DEFAULT_THRESHOLD


class ProtocolContent(BaseModel):
    text: str = ""
    framework: str = "6C"
    parameters: dict[str, float] = Field(default_factory=dict)


class ProtocolRequest(BaseModel):
    type: str
    content: ProtocolContent


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class ServiceState:
    """Registry, providers, store, and workflow shared by all requests."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.store = DocumentStore(config.data_dir)
        self.registry = Registry()
        self.registry.load_directory(config.registry_dir)
        self.workflow: WorkflowDefinition = load_workflow(config.workflow_file)
        self.cache = EmbeddingCache()
        self.providers: dict[str, Any] = {"reference": ReferenceProvider()}
        providers_dir = Path(config.registry_dir) / "providers"
        if providers_dir.exists():
            for path in sorted(providers_dir.glob("*.json")):
                provider = FixtureProvider.from_file(path)
                self.providers[provider.id] = provider
        if config.provider_url:
            self.providers["remote"] = RemoteProvider("remote", config.provider_url)

    def provider(self, provider_id: str):
        if provider_id not in self.providers:
            raise AnalysisError(
                f"unknown provider '{provider_id}' (available: {sorted(self.providers)})"
            )
        return self.providers[provider_id]

    def scenario(self, scenario_id: str) -> ScenarioRecord:
        doc = self.store.get("scenarios", scenario_id)
        if doc is None:
            raise KeyError(scenario_id)
        return scenario_from_document(doc)

    def save_scenario(self, record: ScenarioRecord) -> None:
        self.store.put("scenarios", record.id, record.to_document())

    def annotations(self):
        return [load_expert_annotation(doc) for doc in self.store.all("annotations")]


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig.from_env()
    state = ServiceState(config)
    app = FastAPI(title="stratrec analysis service", version="0.1.0")
    app.state.engine = state

    def _get_scenario_or_404(scenario_id: str) -> ScenarioRecord:
        try:
            return state.scenario(scenario_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"scenario '{scenario_id}' not found")

    def _get_analysis_or_404(analysis_id: str) -> AnalysisRecord:
        doc = state.store.get("analyses", analysis_id)
        if doc is None:
            raise HTTPException(status_code=404, detail=f"analysis '{analysis_id}' not found")
        return analysis_from_document(doc)

    @app.get("/registry")
    def get_registry():
        return state.registry.list().to_document()

    @app.post("/scenarios", status_code=201)
    def create_scenario(body: ScenarioCreateRequest):
        record = ScenarioRecord(
            id=uuid.uuid4().hex[:12],
            description=body.description,
            scenario_type=body.scenario_type,
            heuristic_set_id=body.heuristic_set_id or _default_set_id(state),
            workflow_position=INITIAL_STATE,
            created_at=_now(),
            updated_at=_now(),
        )
        state.save_scenario(record)
        return record.to_document()

    @app.get("/scenarios")
    def list_scenarios():
        return {"scenarios": [doc["id"] for doc in state.store.all("scenarios")]}

    @app.get("/scenarios/{scenario_id}")
    def get_scenario(scenario_id: str):
        return _get_scenario_or_404(scenario_id).to_document()

    @app.patch("/scenarios/{scenario_id}")
    def update_scenario(scenario_id: str, body: ScenarioUpdateRequest):
        lock = state.store.lock_for("scenarios", scenario_id)
        with lock:
            record = _get_scenario_or_404(scenario_id)
            changes: dict[str, Any] = {}
            for fld in ("description", "heuristic_set_id", "provider_id", "theta", "alignment_weights"):
                value = getattr(body, fld)
                if value is not None:
                    changes[fld] = value
            if body.context_factors is not None:
                actors = []
                for actor in record.actors:
                    factors = body.context_factors.get(actor.actor_id)
                    actors.append(replace(actor, context_factors=factors) if factors else actor)
                changes["actors"] = tuple(actors)
            record = replace(record, **changes, revision=record.revision + 1, updated_at=_now())
            state.save_scenario(record)
        return record.to_document()

    @app.post("/scenarios/{scenario_id}/events")
    def post_event(scenario_id: str, body: EventRequest):
        lock = state.store.lock_for("scenarios", scenario_id)
        with lock:
            record = _get_scenario_or_404(scenario_id)
            if body.revision is not None and body.revision != record.revision:
                raise HTTPException(
                    status_code=409,
                    detail=f"revision {body.revision} is stale (current {record.revision})",
                )
            try:
                next_state = advance(state.workflow, record.workflow_position, body.event, body.payload)
            except WorkflowValidationError as exc:
                current = state.workflow.state(record.workflow_position)
                if _payload_targets_other_state(current, body.payload):
                    # a parameter submission landing on a choice state means a
                    # concurrent writer advanced the workflow first
                    raise HTTPException(
                        status_code=409,
                        detail=f"scenario advanced to '{record.workflow_position}' concurrently",
                    )
                raise HTTPException(status_code=422, detail={"failures": exc.failures})
            except WorkflowError as exc:
                # an undeclared event usually means another writer advanced first
                raise HTTPException(status_code=409, detail=str(exc))
            record = _apply_event_payload(record, body.payload)
            record = replace(
                record,
                workflow_position=next_state,
                revision=record.revision + 1,
                updated_at=_now(),
            )
            state.save_scenario(record)
        return record.to_document()

    @app.post("/scenarios/{scenario_id}/analyses", status_code=201)
    def trigger_analysis(scenario_id: str, body: AnalysisRequest):
        record = _get_scenario_or_404(scenario_id)
        if record.workflow_position != "analysis":
            raise HTTPException(
                status_code=409,
                detail=f"scenario is at '{record.workflow_position}', not ready for analysis",
            )
        try:
            framework = state.registry.framework(record.framework_id)
            heuristic_set = state.registry.heuristic_set(record.heuristic_set_id)
            provider = state.provider(body.provider_id or record.provider_id or "reference")
            analysis = run_analysis(
                scenario=record,
                framework=framework,
                heuristic_set=heuristic_set,
                provider=provider,
                theta=body.theta,
                annotations=[a for a in state.annotations() if a.framework_id == record.framework_id],
                cache=state.cache,
            )
        except KeyError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except (AnalysisError, SpecFormatError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        state.store.put("analyses", analysis.id, analysis.to_document())
        return analysis.to_document()

    @app.get("/analyses/{analysis_id}")
    def get_analysis(analysis_id: str):
        return _get_analysis_or_404(analysis_id).to_document()

    @app.get("/analyses/{analysis_id}/recommendations")
    def get_recommendations(analysis_id: str):
        record = _get_analysis_or_404(analysis_id)
        return {
            "analysis_id": record.id,
            "theta": record.theta,
            "actors": [
                {"actor_id": a.actor_id, "recommendations": list(a.recommendations), "alignment": list(a.alignment)}
                for a in record.actors
            ],
        }

    @app.get("/analyses/{analysis_id}/distributions")
    def get_distributions(analysis_id: str):
        record = _get_analysis_or_404(analysis_id)
        return {
            "analysis_id": record.id,
            "rows": record.matrix_document["rows"],
            "distributions": record.matrix_document["distributions"],
        }

    @app.get("/analyses/{analysis_id}/confidence")
    def get_confidence(analysis_id: str):
        record = _get_analysis_or_404(analysis_id)
        return {"analysis_id": record.id, "validation": list(record.validation)}

    @app.get("/analyses/{analysis_id}/report")
    def get_report(analysis_id: str, format: str = "json"):
        record = _get_analysis_or_404(analysis_id)
        framework = state.registry.framework(record.framework_id)
        heuristic_set = state.registry.heuristic_set(record.heuristic_set_id)
        template = load_template(fixtures.default_template_file())
        report = render_recommendation_report(record, heuristic_set, framework, template, MockGenerator())
        if format == "text":
            return PlainTextResponse(report.to_text())
        return report.to_document()

    @app.post("/annotations", status_code=201)
    def upload_annotation(body: dict):
        try:
            annotation = load_expert_annotation(body)
        except SpecFormatError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        key = f"{annotation.framework_id}-{annotation.heuristic_id}"
        state.store.put("annotations", key, dict(body))
        return {"stored": key}

    @app.post("/protocol")
    def protocol(body: ProtocolRequest):
        """Single-shot semantic analysis mirroring the component protocol."""
        if body.type != "semantic_analysis":
            raise HTTPException(status_code=422, detail=f"unsupported request type '{body.type}'")
        try:
            framework = state.registry.framework(body.content.framework)
        except KeyError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        heuristic_set = state.registry.heuristic_set(_default_set_id(state))
        provider = state.provider("reference")
        values = [float(body.content.parameters.get(p.id, 0.0)) for p in framework.parameters]
        try:
            situation = build_situation_vector(values, framework)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        scenario = ScenarioRecord(
            id="protocol",
            framework_id=framework.id,
            heuristic_set_id=heuristic_set.id,
            actors=(
                ActorSpec(
                    actor_id="request",
                    parameters={p.id: v for p, v in zip(framework.parameters, values)},
                ),
            ),
        )
        record = run_analysis(scenario, framework, heuristic_set, provider, theta=-1.0, cache=state.cache)
        top = record.actors[0].recommendations[:5]
        similarities = {f"stratagem_{r['heuristic_id']}": r["score"] for r in top}
        param_vectors = {
            p.id: list(compose_parameter_vector(p, provider=provider, cache=state.cache).values)
            for p in framework.parameters
        }
        return {
            "vectors": {"situation": list(record.actors[0].situation_weights), "params": param_vectors},
            "similarities": similarities,
        }

    @app.exception_handler(StratrecError)
    def stratrec_error_handler(request, exc: StratrecError):
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=422, content={"detail": str(exc)})

    return app


def _payload_targets_other_state(current_state, payload: Mapping[str, Any]) -> bool:
    """True when a value-entry payload arrives at a choice state."""
    if current_state.type != "single_choice" or "choice" in (payload or {}):
        return False
    return any(
        isinstance(v, (int, float)) and not isinstance(v, bool)
        for k, v in (payload or {}).items()
        if k not in _NON_PARAMETER_KEYS
    )


def _default_set_id(state: ServiceState) -> str:
    sets = state.registry.list().heuristic_sets
    if not sets:
        raise AnalysisError("no heuristic sets loaded")
    return sets[0].id


def _apply_event_payload(record: ScenarioRecord, payload: Mapping[str, Any]) -> ScenarioRecord:
    """Fold an event payload into the scenario record.

    Numeric keys are parameter values for the named (or sole) actor; a
    'choice' on framework selection fixes the framework id.
    """
    if not payload:
        return record
    changes: dict[str, Any] = {}
    if "scenario_type" in payload:
        changes["scenario_type"] = str(payload["scenario_type"])
    if "description" in payload:
        changes["description"] = str(payload["description"])
    if "choice" in payload:
        changes["framework_id"] = str(payload["choice"])
    params = {
        k: float(v)
        for k, v in payload.items()
        if isinstance(v, (int, float)) and not isinstance(v, bool) and k not in _NON_PARAMETER_KEYS
    }
    if params:
        actor_id = str(payload.get("actor_id", "primary"))
        objective = str(payload.get("objective", ""))
        actors = list(record.actors)
        for i, actor in enumerate(actors):
            if actor.actor_id == actor_id:
                merged = dict(actor.parameters)
                merged.update(params)
                actors[i] = replace(actor, parameters=merged, objective=objective or actor.objective)
                break
        else:
            actors.append(ActorSpec(actor_id=actor_id, objective=objective, parameters=params))
        changes["actors"] = tuple(actors)
    return replace(record, **changes) if changes else record


def main() -> None:
    import uvicorn

    bind = os.environ.get("STRATREC_BIND", "127.0.0.1:8414")
    host, _, port = bind.partition(":")
    uvicorn.run(create_app(), host=host or "127.0.0.1", port=int(port or 8414))


if __name__ == "__main__":
    main()
