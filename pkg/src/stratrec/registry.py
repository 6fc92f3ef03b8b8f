"""Declarative registry of analytical frameworks and heuristic sets.

Frameworks and heuristic sets are plain JSON documents; dropping a new file
in makes a new framework available without code changes.  Parameter and
heuristic order is canonical: it is taken from the document and defines the
row/column order of every matrix downstream, so it is never re-sorted.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping

from .errors import SpecFormatError

DEFAULT_SCALE_MIN = 0.0
DEFAULT_SCALE_MAX = 5.0


@dataclass(frozen=True)
class ParameterSpec:
    """One framework parameter: base definition plus contextual texts."""

    id: str
    name: str
    definition: str
    contexts: tuple[str, ...] = ()
    scale_min: float = DEFAULT_SCALE_MIN
    scale_max: float = DEFAULT_SCALE_MAX

    def __post_init__(self):
        if not self.definition or not self.definition.strip():
            raise SpecFormatError(f"parameter '{self.id}': empty definition")
        if not self.scale_min < self.scale_max:
            raise SpecFormatError(
                f"parameter '{self.id}': inverted scale bounds "
                f"({self.scale_min} >= {self.scale_max})"
            )


@dataclass(frozen=True)
class FrameworkSpec:
    """An ordered set of parameters; order defines matrix rows."""

    id: str
    name: str
    parameters: tuple[ParameterSpec, ...]

    def __post_init__(self):
        if len(self.parameters) < 2:
            raise SpecFormatError(f"framework '{self.id}': too few parameters (need >= 2)")
        seen: set[str] = set()
        for p in self.parameters:
            if p.id in seen:
                raise SpecFormatError(f"framework '{self.id}': duplicate parameter id '{p.id}'")
            seen.add(p.id)

    @property
    def parameter_ids(self) -> tuple[str, ...]:
        return tuple(p.id for p in self.parameters)

    def parameter(self, param_id: str) -> ParameterSpec:
        for p in self.parameters:
            if p.id == param_id:
                return p
        raise KeyError(param_id)

    @property
    def size(self) -> int:
        return len(self.parameters)


@dataclass(frozen=True)
class HeuristicSpec:
    """One recommendable decision heuristic."""

    id: int | str
    name: str
    description: str
    keywords: tuple[str, ...] = ()
    category: str | None = None

    def __post_init__(self):
        if not self.description or not self.description.strip():
            raise SpecFormatError(f"heuristic {self.id!r}: empty description")


@dataclass(frozen=True)
class HeuristicSetSpec:
    """An ordered heuristic collection; order defines matrix columns."""

    id: str
    name: str
    heuristics: tuple[HeuristicSpec, ...]

    def __post_init__(self):
        if not self.heuristics:
            raise SpecFormatError(f"heuristic set '{self.id}': empty set")
        seen: set = set()
        kinds = {type(h.id) for h in self.heuristics}
        if len(kinds) > 1:
            raise SpecFormatError(
                f"heuristic set '{self.id}': mixed id types; ids must be all "
                "integers or all strings so ranking tie-breaks stay well defined"
            )
        for h in self.heuristics:
            if h.id in seen:
                raise SpecFormatError(f"heuristic set '{self.id}': duplicate heuristic id {h.id!r}")
            seen.add(h.id)

    @property
    def heuristic_ids(self) -> tuple:
        return tuple(h.id for h in self.heuristics)

    def heuristic(self, heuristic_id) -> HeuristicSpec:
        for h in self.heuristics:
            if h.id == heuristic_id:
                return h
        raise KeyError(heuristic_id)

    @property
    def size(self) -> int:
        return len(self.heuristics)


# ── document parsing ─────────────────────────────────────────────────

def _as_document(source: str | Path | Mapping[str, Any]) -> Mapping[str, Any]:
    """Accept a parsed mapping, a JSON string, or a path to a JSON file."""
    if isinstance(source, Mapping):
        return source
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and source.endswith(".json")):
        path = Path(source)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise SpecFormatError(f"cannot read {path}: {exc}") from exc
    else:
        text = str(source)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecFormatError(f"parse failure: {exc}") from exc
    if not isinstance(doc, Mapping):
        raise SpecFormatError("top-level document must be an object")
    return doc


def _require(doc: Mapping[str, Any], key: str, context: str) -> Any:
    if key not in doc:
        raise SpecFormatError(f"{context}: missing field '{key}'")
    return doc[key]


def load_framework_spec(source: str | Path | Mapping[str, Any]) -> FrameworkSpec:
    """Parse and validate a framework document.

    Document shape: {id, name, parameters: [{id, name, definition,
    contexts[], scale_min?, scale_max?}]}.
    """
    doc = _as_document(source)
    fid = str(_require(doc, "id", "framework"))
    raw_params = _require(doc, "parameters", f"framework '{fid}'")
    if not isinstance(raw_params, list):
        raise SpecFormatError(f"framework '{fid}': 'parameters' must be a list")
    if len(raw_params) < 2:
        raise SpecFormatError(f"framework '{fid}': too few parameters (need >= 2)")
    params = []
    for i, raw in enumerate(raw_params):
        ctx = f"framework '{fid}' parameter #{i}"
        params.append(
            ParameterSpec(
                id=str(_require(raw, "id", ctx)),
                name=str(raw.get("name", raw["id"])),
                definition=str(_require(raw, "definition", ctx)),
                contexts=tuple(str(c) for c in raw.get("contexts", [])),
                scale_min=float(raw.get("scale_min", DEFAULT_SCALE_MIN)),
                scale_max=float(raw.get("scale_max", DEFAULT_SCALE_MAX)),
            )
        )
    return FrameworkSpec(id=fid, name=str(doc.get("name", fid)), parameters=tuple(params))


def load_heuristic_set(source: str | Path | Mapping[str, Any]) -> HeuristicSetSpec:
    """Parse and validate a heuristic-set document.

    Document shape: {id, name, heuristics: [{id, name, description,
    keywords?[], category?}]}.
    """
    doc = _as_document(source)
    sid = str(_require(doc, "id", "heuristic set"))
    raw_heuristics = _require(doc, "heuristics", f"heuristic set '{sid}'")
    if not isinstance(raw_heuristics, list):
        raise SpecFormatError(f"heuristic set '{sid}': 'heuristics' must be a list")
    heuristics = []
    for i, raw in enumerate(raw_heuristics):
        ctx = f"heuristic set '{sid}' heuristic #{i}"
        hid = _require(raw, "id", ctx)
        if not isinstance(hid, (int, str)):
            raise SpecFormatError(f"{ctx}: id must be an integer or string token")
        heuristics.append(
            HeuristicSpec(
                id=hid,
                name=str(raw.get("name", str(hid))),
                description=str(_require(raw, "description", ctx)),
                keywords=tuple(str(k) for k in raw.get("keywords", [])),
                category=str(raw["category"]) if raw.get("category") is not None else None,
            )
        )
    return HeuristicSetSpec(id=sid, name=str(doc.get("name", sid)), heuristics=tuple(heuristics))


def framework_to_document(spec: FrameworkSpec) -> dict:
    """Inverse of :func:`load_framework_spec` (round-trips to an equal spec)."""
    return {
        "id": spec.id,
        "name": spec.name,
        "parameters": [
            {
                "id": p.id,
                "name": p.name,
                "definition": p.definition,
                "contexts": list(p.contexts),
                "scale_min": p.scale_min,
                "scale_max": p.scale_max,
            }
            for p in spec.parameters
        ],
    }


def heuristic_set_to_document(spec: HeuristicSetSpec) -> dict:
    """Inverse of :func:`load_heuristic_set`."""
    doc: dict = {"id": spec.id, "name": spec.name, "heuristics": []}
    for h in spec.heuristics:
        entry: dict = {"id": h.id, "name": h.name, "description": h.description}
        if h.keywords:
            entry["keywords"] = list(h.keywords)
        if h.category is not None:
            entry["category"] = h.category
        doc["heuristics"].append(entry)
    return doc


# ── registry ─────────────────────────────────────────────────────────

@dataclass(frozen=True)
class RegistryCatalog:
    """Point-in-time snapshot of everything loaded, sorted by id."""

    frameworks: tuple[FrameworkSpec, ...] = ()
    heuristic_sets: tuple[HeuristicSetSpec, ...] = ()

    def to_document(self) -> dict:
        return {
            "frameworks": [{"id": f.id, "name": f.name, "parameters": len(f.parameters)} for f in self.frameworks],
            "heuristic_sets": [{"id": s.id, "name": s.name, "heuristics": len(s.heuristics)} for s in self.heuristic_sets],
        }


class Registry:
    """Immutable-after-load catalog of frameworks and heuristic sets.

    Loads swap whole dicts atomically, so concurrent readers always see a
    consistent catalog.
    """

    def __init__(self):
        self._frameworks: dict[str, FrameworkSpec] = {}
        self._heuristic_sets: dict[str, HeuristicSetSpec] = {}
        self._lock = threading.Lock()

    def add_framework(self, spec: FrameworkSpec) -> FrameworkSpec:
        with self._lock:
            catalog = dict(self._frameworks)
            catalog[spec.id] = spec
            self._frameworks = catalog
        return spec

    def add_heuristic_set(self, spec: HeuristicSetSpec) -> HeuristicSetSpec:
        with self._lock:
            catalog = dict(self._heuristic_sets)
            catalog[spec.id] = spec
            self._heuristic_sets = catalog
        return spec

    def load_framework(self, source) -> FrameworkSpec:
        return self.add_framework(load_framework_spec(source))

    def load_heuristic_set(self, source) -> HeuristicSetSpec:
        return self.add_heuristic_set(load_heuristic_set(source))

    def load_directory(self, directory: str | Path) -> RegistryCatalog:
        """Load every ``*.json`` under ``directory/frameworks`` and
        ``directory/heuristics``."""
        base = Path(directory)
        for path in sorted((base / "frameworks").glob("*.json")):
            self.load_framework(path)
        for path in sorted((base / "heuristics").glob("*.json")):
            self.load_heuristic_set(path)
        return self.list()

    def framework(self, framework_id: str) -> FrameworkSpec:
        try:
            return self._frameworks[framework_id]
        except KeyError:
            raise KeyError(f"framework '{framework_id}' not loaded") from None

    def heuristic_set(self, set_id: str) -> HeuristicSetSpec:
        try:
            return self._heuristic_sets[set_id]
        except KeyError:
            raise KeyError(f"heuristic set '{set_id}' not loaded") from None

    def list(self) -> RegistryCatalog:
        return RegistryCatalog(
            frameworks=tuple(sorted(self._frameworks.values(), key=lambda f: f.id)),
            heuristic_sets=tuple(sorted(self._heuristic_sets.values(), key=lambda s: s.id)),
        )
