"""Packaged demo data: frameworks, heuristic sets, deterministic vector
tables, scenarios, workflow, templates, and expert annotations."""

from __future__ import annotations

from pathlib import Path

_ROOT = Path(__file__).parent


def fixtures_dir() -> Path:
    return _ROOT


def registry_dir() -> Path:
    """Directory holding frameworks/, heuristics/, and providers/."""
    return _ROOT


def framework_file(name: str) -> Path:
    return _ROOT / "frameworks" / f"{name}.json"


def heuristic_set_file(name: str) -> Path:
    return _ROOT / "heuristics" / f"{name}.json"


def provider_file(name: str) -> Path:
    return _ROOT / "providers" / f"{name}.json"


def scenario_file(name: str) -> Path:
    return _ROOT / "scenarios" / f"{name}.json"


def annotation_file(name: str) -> Path:
    return _ROOT / "annotations" / f"{name}.json"


def validation_file(name: str) -> Path:
    return _ROOT / "validation" / f"{name}.json"


def default_workflow_file() -> Path:
    return _ROOT / "workflows" / "default.json"


def default_template_file() -> Path:
    return _ROOT / "templates" / "strategy_explanation.json"
