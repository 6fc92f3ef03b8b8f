"""Constrained narrative reports over analysis records.

The external text generator is an explainer, never a decision-maker: every
number in a report is injected by the template engine straight from the
analysis record, and a machine check rejects any report whose numeric tokens
stray from the record.  When the generator fails, the report degrades to its
numbers-only form rather than blocking the analysis.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Protocol, Sequence

import httpx

from .errors import AnalysisError, SpecFormatError, TemplateError
from .pipeline import AnalysisRecord
from .registry import FrameworkSpec, HeuristicSetSpec

_PLACEHOLDER_RE = re.compile(r"\{\{\s*(\w+)\s*\}\}")
# standalone numeric tokens only: "0.85" and "16" but not the 6 in "6C"
_NUMBER_RE = re.compile(r"(?<![\w.])-?\d+(?:\.\d+)?(?!\w|\.\d)")


@dataclass(frozen=True)
class ReportConstraints:
    max_length: int
    required_sections: tuple[str, ...]
    style: str = "professional"


@dataclass(frozen=True)
class ReportTemplate:
    """Template of structured sections with {{placeholder}} slots."""

    template_type: str
    context_schema: Mapping[str, str]
    structure: Mapping[str, str]
    constraints: ReportConstraints

    def __post_init__(self):
        missing = [s for s in self.constraints.required_sections if s not in self.structure]
        if missing:
            raise SpecFormatError(
                f"template '{self.template_type}': required sections {missing} not in structure"
            )


def load_template(source: str | Path | Mapping) -> ReportTemplate:
    """Parse a template document:
    {template_type, components: {context, structure, constraints}}."""
    if isinstance(source, Mapping):
        doc = source
    else:
        path = Path(source)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise SpecFormatError(f"cannot load template {path}: {exc}") from exc
    try:
        template_type = str(doc["template_type"])
        components = doc["components"]
        structure = dict(components["structure"])
        constraints = components["constraints"]
    except KeyError as exc:
        raise SpecFormatError(f"template missing field {exc}") from exc
    return ReportTemplate(
        template_type=template_type,
        context_schema=dict(components.get("context", {})),
        structure=structure,
        constraints=ReportConstraints(
            max_length=int(constraints.get("max_length", 2000)),
            required_sections=tuple(constraints.get("required_sections", tuple(structure))),
            style=str(constraints.get("style", "professional")),
        ),
    )


def assemble_prompt(template: ReportTemplate, context: Mapping[str, object]) -> str:
    """Deterministically substitute context values into the template.

    Every placeholder must resolve; unknown keys in the context are ignored.
    """
    lines = [f"[template:{template.template_type}] style={template.constraints.style}"]
    missing: list[str] = []

    def substitute(match: re.Match) -> str:
        key = match.group(1)
        if key not in context:
            missing.append(key)
            return match.group(0)
        return str(context[key])

    for section, text in template.structure.items():
        rendered = _PLACEHOLDER_RE.sub(substitute, text)
        lines.append(f"{section}: {rendered}")
    if missing:
        raise TemplateError(f"missing placeholder values: {sorted(set(missing))}")
    lines.append(
        f"Write at most {template.constraints.max_length} characters across sections "
        f"{', '.join(template.constraints.required_sections)}. Do not introduce numbers."
    )
    return "\n".join(lines)


# ── generators ───────────────────────────────────────────────────────

class Generator(Protocol):
    """Narrow text-generation contract: generate(prompt, constraints) -> text."""

    id: str

    def generate(self, prompt: str, constraints: ReportConstraints) -> str:
        ...


class MockGenerator:
    """Deterministic stand-in used by tests and offline runs.

    Emits short connective prose derived only from the prompt hash; contains
    no digits, so it can never smuggle a number past the validation gate.
    """

    id = "mock"

    _OPENERS = (
        "The analysis supports a focused course of action.",
        "The evidence points to a coherent strategic direction.",
        "The mapped heuristics agree on a consistent posture.",
        "The recommended posture follows directly from the mapping.",
    )

    def generate(self, prompt: str, constraints: ReportConstraints) -> str:
        digest = hashlib.sha256(prompt.encode("utf-8")).digest()
        return self._OPENERS[digest[0] % len(self._OPENERS)]


class FailingGenerator:
    """Always raises; used to exercise the numbers-only degradation path."""

    id = "failing"

    def generate(self, prompt: str, constraints: ReportConstraints) -> str:
        raise AnalysisError("generator unavailable")


class HttpGenerator:
    """Client for the generator wire contract:
    request {template_type, prompt, constraints} -> response {text}."""

    def __init__(self, endpoint: str, generator_id: str = "remote", client: httpx.Client | None = None, timeout: float = 30.0):
        self.id = generator_id
        self.endpoint = endpoint
        self._client = client or httpx.Client(timeout=timeout)
        self._template_type = ""

    def bind_template(self, template_type: str) -> None:
        self._template_type = template_type

    def generate(self, prompt: str, constraints: ReportConstraints) -> str:
        payload = {
            "template_type": self._template_type,
            "prompt": prompt,
            "constraints": {
                "max_length": constraints.max_length,
                "required_sections": list(constraints.required_sections),
                "style": constraints.style,
            },
        }
        try:
            response = self._client.post(self.endpoint, json=payload)
            response.raise_for_status()
            return str(response.json()["text"])
        except (httpx.HTTPError, KeyError, json.JSONDecodeError) as exc:
            raise AnalysisError(f"generator '{self.id}' failed: {exc}") from exc


# ── generated reports and validation ─────────────────────────────────

def format_number(value) -> str:
    """Canonical rendering for cited values (ranks and ids stay integers)."""
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, int):
        return str(value)
    f = float(value)
    if f == int(f) and abs(f) < 1e15:
        return str(int(f))
    return f"{f:.4f}".rstrip("0").rstrip(".")


@dataclass(frozen=True)
class GeneratedReport:
    """Narrative sections plus the ledger of every number they may cite."""

    sections: Mapping[str, str]
    provenance: Mapping[str, str]         # template_type, generator_id, analysis_id
    numbers_cited: tuple[tuple[str, object], ...]


@dataclass(frozen=True)
class Violation:
    kind: str      # missing_section | max_length | numeric_mismatch | unsourced_number
    detail: str


def validate_generated_report(
    report: GeneratedReport,
    template: ReportTemplate,
    record_numbers: Mapping[str, object] | None = None,
) -> list[Violation]:
    """Check structure, length, and numeric fidelity; violations are data."""
    violations: list[Violation] = []
    for section in template.constraints.required_sections:
        if section not in report.sections or not report.sections[section].strip():
            violations.append(Violation("missing_section", f"required section '{section}' absent"))
    total = sum(len(text) for text in report.sections.values())
    if total > template.constraints.max_length:
        violations.append(
            Violation("max_length", f"report is {total} chars, limit {template.constraints.max_length}")
        )
    if record_numbers is not None:
        for label, value in report.numbers_cited:
            if label not in record_numbers:
                violations.append(Violation("numeric_mismatch", f"cited label '{label}' not in analysis record"))
            elif format_number(record_numbers[label]) != format_number(value):
                violations.append(
                    Violation(
                        "numeric_mismatch",
                        f"'{label}' cited as {format_number(value)} but record says "
                        f"{format_number(record_numbers[label])}",
                    )
                )
    allowed = _allowed_number_strings(report.numbers_cited)
    for section, text in report.sections.items():
        for token in _NUMBER_RE.findall(text):
            if token not in allowed:
                violations.append(
                    Violation("unsourced_number", f"section '{section}' cites {token} with no record source")
                )
    return violations


def _allowed_number_strings(numbers_cited) -> set[str]:
    allowed: set[str] = set()
    for _, value in numbers_cited:
        forms = {format_number(value)}
        try:
            f = float(value)
            forms.update({f"{f:.2f}", f"{f:.3f}", f"{f:.4f}", repr(f)})
            if f == int(f):
                forms.add(str(int(f)))
        except (TypeError, ValueError):
            pass
        allowed.update(forms)
    return allowed


# ── report rendering ─────────────────────────────────────────────────

@dataclass(frozen=True)
class ReportDocument:
    """Full rendered report: structured data plus narrative sections."""

    analysis_id: str
    scenario_id: str
    actors: tuple[dict, ...]
    narrative: GeneratedReport | None
    violations: tuple[Violation, ...]
    flags: tuple[str, ...] = ()

    def to_document(self) -> dict:
        return {
            "analysis_id": self.analysis_id,
            "scenario_id": self.scenario_id,
            "actors": [dict(a) for a in self.actors],
            "narrative": {
                "sections": dict(self.narrative.sections),
                "provenance": dict(self.narrative.provenance),
                "numbers_cited": [[label, value] for label, value in self.narrative.numbers_cited],
            }
            if self.narrative
            else None,
            "violations": [{"kind": v.kind, "detail": v.detail} for v in self.violations],
            "flags": list(self.flags),
        }

    def to_text(self) -> str:
        lines = [f"Strategic recommendation report  (analysis {self.analysis_id}, scenario {self.scenario_id})"]
        for actor in self.actors:
            lines.append("")
            lines.append(f"== Actor: {actor['actor_id']} ==")
            if actor.get("objective"):
                lines.append(f"Objective: {actor['objective']}")
            strategies = actor.get("strategies", [])
            if not strategies:
                lines.append("No heuristics cleared the similarity threshold for this actor.")
            else:
                kind = actor.get("score_kind", "semantic_cosine")
                label = "alignment score" if kind == "alignment_raw" else "match score"
                roles = ("Primary Strategy", "Supporting Strategy")
                for idx, strategy in enumerate(strategies):
                    role = roles[idx] if idx < len(roles) else f"Option {idx + 1}"
                    lines.append(
                        f"{role}: {strategy['name']} (heuristic {strategy['heuristic_id']}, "
                        f"{label} {format_number(strategy['score'])})"
                    )
                lines.append("Tactical Implementation:")
                for strategy in strategies[: 3]:
                    lines.append(f"  - Apply '{strategy['name']}' toward {actor.get('objective') or 'the stated objective'}")
            dist = actor.get("top_distribution")
            if dist:
                lines.append("Parameter weighting of the top match:")
                for pid, weight in dist:
                    lines.append(f"  {pid}: {format_number(weight)}")
        if self.narrative:
            lines.append("")
            lines.append("== Narrative ==")
            for section, text in self.narrative.sections.items():
                lines.append(f"[{section}] {text}")
        if self.flags:
            lines.append("")
            for flag in self.flags:
                lines.append(f"note: {flag}")
        return "\n".join(lines) + "\n"


def render_recommendation_report(
    record: AnalysisRecord,
    heuristic_set: HeuristicSetSpec,
    framework: FrameworkSpec,
    template: ReportTemplate,
    generator: Generator | None = None,
    top_n: int = 5,
) -> ReportDocument:
    """Assemble the full report for an analysis record.

    Per actor: strategies ranked by calibrated alignment score when the
    scenario supplied one, otherwise by the semantic match score; the label
    in the rendered text says which.  Narrative sections come from the
    generator under the template's constraints; on generator failure the
    report ships numbers-only with a flag.
    """
    if not record.actors:
        raise AnalysisError("analysis record has no actor results")
    generator = generator or MockGenerator()
    dist_doc = record.matrix_document.get("distributions", {})
    actor_blocks: list[dict] = []
    numbers: list[tuple[str, object]] = []
    numbers.append(("theta", record.theta))
    for actor in record.actors:
        if actor.alignment:
            rows = [
                {"heuristic_id": r["heuristic_id"], "score": r["raw"], "normalized": r["normalized"]}
                for r in actor.alignment[:top_n]
            ]
            score_kind = "alignment_raw"
        else:
            rows = [
                {"heuristic_id": r["heuristic_id"], "score": r["score"]}
                for r in actor.recommendations[:top_n]
            ]
            score_kind = "semantic_cosine"
        strategies = []
        for row in rows:
            hid = row["heuristic_id"]
            try:
                name = heuristic_set.heuristic(hid).name
            except KeyError:
                name = str(hid)
            strategies.append({**row, "name": name})
            numbers.append((f"{actor.actor_id}:{hid}:score", row["score"]))
            numbers.append((f"{actor.actor_id}:{hid}:id", hid))
        top_distribution = None
        if strategies:
            top_id = str(strategies[0]["heuristic_id"])
            weights = dist_doc.get(top_id)
            if weights:
                top_distribution = list(zip(framework.parameter_ids, weights))
                for pid, weight in top_distribution:
                    numbers.append((f"{actor.actor_id}:{top_id}:d:{pid}", weight))
        actor_blocks.append(
            {
                "actor_id": actor.actor_id,
                "objective": actor.objective,
                "score_kind": score_kind,
                "strategies": strategies,
                "top_distribution": top_distribution,
            }
        )
    for entry in record.validation:
        hid = entry.get("heuristic_id")
        for key in ("v", "s", "e", "c", "kl_system_expert", "kl_expert_system"):
            if entry.get(key) is not None:
                numbers.append((f"validation:{hid}:{key}", entry[key]))

    focal = actor_blocks[0]
    top_name = focal["strategies"][0]["name"] if focal["strategies"] else "none"
    context = {
        "framework_name": framework.name,
        "param_list": ", ".join(framework.parameter_ids),
        "similarity_scores": ", ".join(
            format_number(s["score"]) for s in focal["strategies"]
        )
        or "none",
        "top_strategy": top_name,
        "actor": focal["actor_id"],
        "objective": focal["objective"] or "the stated objective",
    }
    narrative: GeneratedReport | None = None
    flags: list[str] = []
    try:
        prompt = assemble_prompt(template, context)
        if isinstance(generator, HttpGenerator):
            generator.bind_template(template.template_type)
        prose = generator.generate(prompt, template.constraints)
        sections = {}
        for section, text in template.structure.items():
            rendered = _PLACEHOLDER_RE.sub(lambda m: str(context.get(m.group(1), m.group(0))), text)
            sections[section] = rendered + (" " + prose if section == list(template.structure)[-1] else "")
        narrative = GeneratedReport(
            sections=sections,
            provenance={
                "template_type": template.template_type,
                "generator_id": generator.id,
                "analysis_id": record.id,
            },
            numbers_cited=tuple(numbers),
        )
    except (AnalysisError, TemplateError) as exc:
        flags.append(f"narrative generation skipped: {exc}")
    violations: tuple[Violation, ...] = ()
    if narrative is not None:
        record_numbers = dict(numbers)
        violations = tuple(validate_generated_report(narrative, template, record_numbers))
    return ReportDocument(
        analysis_id=record.id,
        scenario_id=record.scenario_id,
        actors=tuple(actor_blocks),
        narrative=narrative,
        violations=violations,
        flags=tuple(flags),
    )
