"""Data-defined workflow state machine for guided scenario entry.

State definitions are JSON documents; the engine validates payloads against
each state's rules (required fields, numeric value bounds, or a named
validator) before advancing.  Every declared state must be reachable from
"initial", checked at load time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping

from .errors import SpecFormatError, WorkflowError, WorkflowValidationError

INITIAL_STATE = "initial"


@dataclass(frozen=True)
class ValueBounds:
    min: float
    max: float

    def __post_init__(self):
        if not self.min < self.max:
            raise SpecFormatError(f"value bounds inverted: min {self.min} >= max {self.max}")


@dataclass(frozen=True)
class PayloadRule:
    required_fields: tuple[str, ...] = ()
    value_bounds: ValueBounds | None = None


@dataclass(frozen=True)
class WorkflowState:
    name: str
    type: str = "input_collection"
    transitions: Mapping[str, str] = field(default_factory=dict)
    validation: PayloadRule | str | None = None
    options: tuple[str, ...] = ()

    @property
    def is_terminal(self) -> bool:
        return not self.transitions


@dataclass(frozen=True)
class WorkflowDefinition:
    states: Mapping[str, WorkflowState]
    fragment: bool = False  # single-state excerpt; not runnable on its own

    def state(self, name: str) -> WorkflowState:
        try:
            return self.states[name]
        except KeyError:
            raise WorkflowError(f"unknown workflow state '{name}'") from None


# named validators usable from state files via a string token
ValidatorFn = Callable[[Mapping[str, Any]], list[dict]]


def _validate_actor_params(payload: Mapping[str, Any]) -> list[dict]:
    """Built-in validator: every numeric entry within [0, 5]."""
    failures = []
    for key, value in payload.items():
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            if not 0.0 <= float(value) <= 5.0:
                failures.append({"field": key, "reason": f"value {value} outside bounds [0, 5]", "min": 0.0, "max": 5.0})
    return failures


NAMED_VALIDATORS: dict[str, ValidatorFn] = {
    "validate_actor_params": _validate_actor_params,
}


def _parse_state(name: str, body: Mapping[str, Any]) -> WorkflowState:
    transitions: dict[str, str] = {}
    if "transitions" in body:
        transitions.update({str(k): str(v) for k, v in body["transitions"].items()})
    if "next" in body:
        transitions.setdefault("complete", str(body["next"]))
    validation: PayloadRule | str | None = None
    raw_validation = body.get("validation")
    if isinstance(raw_validation, str):
        validation = raw_validation
    elif isinstance(raw_validation, Mapping):
        bounds = None
        raw_bounds = raw_validation.get("value_bounds")
        if raw_bounds is not None:
            bounds = ValueBounds(min=float(raw_bounds["min"]), max=float(raw_bounds["max"]))
        validation = PayloadRule(
            required_fields=tuple(str(f) for f in raw_validation.get("required_fields", [])),
            value_bounds=bounds,
        )
    # "required_params" appears on input_collection states in some files
    if validation is None and "required_params" in body:
        validation = PayloadRule(required_fields=tuple(str(f) for f in body["required_params"]))
    return WorkflowState(
        name=name,
        type=str(body.get("type", "input_collection")),
        transitions=transitions,
        validation=validation,
        options=tuple(str(o) for o in body.get("options", [])),
    )


def load_workflow(source: str | Path | Mapping[str, Any]) -> WorkflowDefinition:
    """Parse a workflow document.

    Accepts {"states": {name: body}} or a single-state fragment
    {"state": name, "transitions": ..., "validation": ...}.
    """
    if isinstance(source, Mapping):
        doc = source
    else:
        path = Path(source)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise SpecFormatError(f"cannot load workflow {path}: {exc}") from exc
    states: dict[str, WorkflowState] = {}
    fragment = False
    if "states" in doc:
        for name, body in doc["states"].items():
            states[str(name)] = _parse_state(str(name), body)
    elif "state" in doc:
        name = str(doc["state"])
        states[name] = _parse_state(name, doc)
        fragment = True
    else:
        raise SpecFormatError("workflow document needs 'states' or a single 'state'")
    definition = WorkflowDefinition(states=states, fragment=fragment)
    _check_definition(definition)
    return definition


def _check_definition(definition: WorkflowDefinition) -> None:
    names = set(definition.states)
    for state in definition.states.values():
        if isinstance(state.validation, str) and state.validation not in NAMED_VALIDATORS:
            raise SpecFormatError(f"state '{state.name}': unknown validator '{state.validation}'")
    if definition.fragment:
        return
    for state in definition.states.values():
        for event, target in state.transitions.items():
            if target not in names:
                raise SpecFormatError(
                    f"state '{state.name}' transition '{event}' targets unknown state '{target}'"
                )
    if INITIAL_STATE not in names:
        raise SpecFormatError(f"workflow has no '{INITIAL_STATE}' state")
    reachable = {INITIAL_STATE}
    frontier = [INITIAL_STATE]
    while frontier:
        current = frontier.pop()
        for target in definition.states[current].transitions.values():
            if target not in reachable:
                reachable.add(target)
                frontier.append(target)
    unreachable = sorted(names - reachable)
    if unreachable:
        raise SpecFormatError(f"states unreachable from '{INITIAL_STATE}': {unreachable}")


def validate_payload(
    state: WorkflowState,
    payload: Mapping[str, Any] | None,
    enforce_required: bool = True,
) -> None:
    """Apply the state's validation rules; raises with field-level detail.

    ``enforce_required=False`` waives the required-field check (used for
    explicitly-incomplete submissions); value bounds always apply.
    """
    payload = payload or {}
    failures: list[dict] = []
    rule = state.validation
    if isinstance(rule, str):
        failures.extend(NAMED_VALIDATORS[rule](payload))
    elif isinstance(rule, PayloadRule):
        if enforce_required:
            for fld in rule.required_fields:
                if fld not in payload:
                    failures.append({"field": fld, "reason": "required field missing"})
        if rule.value_bounds is not None:
            lo, hi = rule.value_bounds.min, rule.value_bounds.max
            for key, value in payload.items():
                if isinstance(value, (int, float)) and not isinstance(value, bool):
                    v = float(value)
                    if not (lo <= v <= hi) or not math.isfinite(v):
                        failures.append(
                            {"field": key, "reason": f"value {value} outside bounds [{lo}, {hi}]", "min": lo, "max": hi}
                        )
    if state.type == "single_choice" and state.options:
        choice = payload.get("choice")
        if choice not in state.options:
            failures.append(
                {"field": "choice", "reason": f"choice {choice!r} not one of {list(state.options)}"}
            )
    if failures:
        raise WorkflowValidationError(failures)


def advance(
    definition: WorkflowDefinition,
    position: str,
    event: str,
    payload: Mapping[str, Any] | None = None,
) -> str:
    """Validate the payload and return the next state.

    Raises WorkflowError for an undeclared event and
    WorkflowValidationError when the payload fails the state's rules.
    """
    state = definition.state(position)
    if event not in state.transitions:
        raise WorkflowError(
            f"event '{event}' not declared for state '{position}' "
            f"(declared: {sorted(state.transitions)})"
        )
    validate_payload(state, payload, enforce_required=(event != "incomplete"))
    return state.transitions[event]
