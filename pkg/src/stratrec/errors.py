"""Exception hierarchy shared across the engine."""

from __future__ import annotations


class StratrecError(Exception):
    """Base class for all engine errors."""


class SpecFormatError(StratrecError):
    """A declarative definition file (framework, heuristic set, workflow,
    template, provider table, scenario) failed to parse or validate."""


class EmbeddingError(StratrecError):
    """Text could not be embedded (empty after normalization, vocabulary gap,
    provider failure)."""


class ProviderError(EmbeddingError):
    """An embedding provider failed; message carries the provider id."""

    def __init__(self, provider_id: str, message: str):
        super().__init__(f"provider '{provider_id}': {message}")
        self.provider_id = provider_id


class DegenerateColumnError(StratrecError):
    """A heuristic column has no positive mass to normalize."""

    def __init__(self, heuristic_id, message: str = "degenerate heuristic column"):
        super().__init__(f"{message} (heuristic {heuristic_id!r})")
        self.heuristic_id = heuristic_id


class WorkflowError(StratrecError):
    """Workflow advance rejected: undeclared event or unknown state."""


class WorkflowValidationError(WorkflowError):
    """Payload failed a workflow state's validation rules.

    ``failures`` holds one dict per offending field:
    {"field": name, "reason": text, and for bounds failures "min"/"max"}.
    """

    def __init__(self, failures: list[dict]):
        detail = "; ".join(f.get("field", "?") + ": " + f.get("reason", "invalid") for f in failures)
        super().__init__(f"payload validation failed: {detail}")
        self.failures = failures


class TemplateError(StratrecError):
    """Report template missing a placeholder value or of unknown type."""


class AnalysisError(StratrecError):
    """Pipeline-level failure: incomplete scenario, unknown provider or
    registry entry, values out of bounds."""
