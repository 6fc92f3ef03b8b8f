"""Text-to-vector layer: pluggable providers plus weighted-sum composition.

Texts become vectors as a term-weighted sum of per-token embeddings; a
framework parameter additionally folds in its contextual descriptions scaled
by a context factor.  Summation uses correctly rounded accumulation
(``math.fsum``) so results are reproducible to the last bit regardless of
token count or evaluation order.

Tokenization is deliberately plain: lowercase, punctuation stripped,
whitespace split, no stemming or subword pieces.  Multiword names therefore
embed as the sum of their surface words, which keeps every number
recomputable by hand from a token table.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Protocol, Sequence, runtime_checkable

import httpx

from .errors import EmbeddingError, ProviderError, SpecFormatError
from .registry import HeuristicSpec, ParameterSpec

DEFAULT_CONTEXT_FACTOR = 0.5  # lambda applied to contextual descriptions
REFERENCE_DIM = 64

_PUNCT_RE = re.compile(r"[^\w\s]+", re.UNICODE)


def normalize_tokens(text: str) -> list[str]:
    """Lowercase, strip punctuation, split on whitespace."""
    return _PUNCT_RE.sub(" ", text.lower()).split()


@dataclass(frozen=True)
class EmbeddingVector:
    """Dense real vector tagged with the provider that produced it."""

    values: tuple[float, ...]
    provider_id: str = ""

    def __post_init__(self):
        for v in self.values:
            if not math.isfinite(v):
                raise EmbeddingError(f"non-finite component in vector from '{self.provider_id}'")

    @property
    def dim(self) -> int:
        return len(self.values)

    def scaled(self, factor: float) -> "EmbeddingVector":
        return EmbeddingVector(tuple(factor * v for v in self.values), self.provider_id)


@dataclass(frozen=True)
class TermWeighting:
    """Per-term weights for the weighted sum; unlisted terms get the default."""

    weights: Mapping[str, float] = field(default_factory=dict)
    default_weight: float = 1.0

    def __post_init__(self):
        for term, w in self.weights.items():
            if not math.isfinite(w) or w < 0:
                raise ValueError(f"term weight for '{term}' must be finite and non-negative")
        if not math.isfinite(self.default_weight) or self.default_weight < 0:
            raise ValueError("default term weight must be finite and non-negative")

    def weight_for(self, token: str) -> float:
        return self.weights.get(token, self.default_weight)

    def cache_key(self) -> str:
        canonical = json.dumps(
            {"default": self.default_weight, "weights": dict(sorted(self.weights.items()))},
            sort_keys=True,
        )
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


UNIFORM_WEIGHTING = TermWeighting()


@runtime_checkable
class EmbeddingProvider(Protocol):
    """Contract every embedding backend satisfies.

    Implementations must be deterministic for a fixed ``id`` and input and
    safe to call from concurrent threads.
    """

    id: str
    dim: int

    def embed_tokens(self, tokens: Sequence[str]) -> list[EmbeddingVector]:
        ...


# ── providers ────────────────────────────────────────────────────────

class FixtureProvider:
    """Serves an explicit token -> vector table from a document.

    Unknown tokens raise rather than returning zeros, so gaps in a fixture
    table surface immediately instead of silently skewing sums.
    """

    def __init__(self, provider_id: str, dim: int, entries: Mapping[str, Sequence[float]]):
        self.id = provider_id
        self.dim = int(dim)
        self._entries: dict[str, tuple[float, ...]] = {}
        for token, vec in entries.items():
            values = tuple(float(v) for v in vec)
            if len(values) != self.dim:
                raise SpecFormatError(
                    f"fixture table '{provider_id}': token '{token}' has dim {len(values)}, expected {self.dim}"
                )
            self._entries[token] = values

    @classmethod
    def from_file(cls, path: str | Path, provider_id: str | None = None) -> "FixtureProvider":
        """Load a table document: {dim, entries: {token: [real]}}."""
        path = Path(path)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise SpecFormatError(f"cannot load fixture table {path}: {exc}") from exc
        if "dim" not in doc or "entries" not in doc:
            raise SpecFormatError(f"fixture table {path}: needs 'dim' and 'entries'")
        return cls(provider_id or doc.get("id", path.stem), doc["dim"], doc["entries"])

    def embed_tokens(self, tokens: Sequence[str]) -> list[EmbeddingVector]:
        out = []
        for token in tokens:
            if token not in self._entries:
                raise ProviderError(self.id, f"token '{token}' not in fixture vocabulary")
            out.append(EmbeddingVector(self._entries[token], self.id))
        return out

    def vocabulary(self) -> frozenset[str]:
        return frozenset(self._entries)


def reference_embed(token: str) -> EmbeddingVector:
    """Deterministic 64-dim stand-in for a learned embedder.

    Components derive from SHA-256 of the normalized token, mapped into
    [-1, 1]; stable across runs, platforms, and library versions.
    """
    if not token:
        raise EmbeddingError("cannot embed empty token")
    values: list[float] = []
    for block in range(REFERENCE_DIM // 16):
        digest = hashlib.sha256(token.encode("utf-8") + b"\x00" + bytes([block])).digest()
        for i in range(16):
            u = int.from_bytes(digest[2 * i : 2 * i + 2], "big")
            values.append(u / 65535.0 * 2.0 - 1.0)
    return EmbeddingVector(tuple(values), "reference")


class ReferenceProvider:
    """Hash-based provider usable on any vocabulary."""

    id = "reference"
    dim = REFERENCE_DIM

    def embed_tokens(self, tokens: Sequence[str]) -> list[EmbeddingVector]:
        return [reference_embed(t) for t in tokens]


class RemoteProvider:
    """Client for the provider wire contract.

    Request {provider_id, tokens: [string]} posted to ``endpoint``; response
    {dim, vectors: [[real]]}.  Failures propagate as :class:`ProviderError`
    tagged with the provider id.
    """

    def __init__(self, provider_id: str, endpoint: str, client: httpx.Client | None = None, timeout: float = 10.0):
        self.id = provider_id
        self.endpoint = endpoint
        self._client = client or httpx.Client(timeout=timeout)
        self.dim = -1  # learned from the first response

    def embed_tokens(self, tokens: Sequence[str]) -> list[EmbeddingVector]:
        try:
            response = self._client.post(self.endpoint, json={"provider_id": self.id, "tokens": list(tokens)})
            response.raise_for_status()
            payload = response.json()
        except (httpx.HTTPError, json.JSONDecodeError) as exc:
            raise ProviderError(self.id, str(exc)) from exc
        try:
            dim = int(payload["dim"])
            vectors = payload["vectors"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ProviderError(self.id, f"malformed response: {exc}") from exc
        if len(vectors) != len(tokens):
            raise ProviderError(self.id, f"expected {len(tokens)} vectors, got {len(vectors)}")
        out = []
        for vec in vectors:
            if len(vec) != dim:
                raise ProviderError(self.id, "vector length disagrees with declared dim")
            out.append(EmbeddingVector(tuple(float(v) for v in vec), self.id))
        if self.dim < 0:
            self.dim = dim
        return out


# ── cache ────────────────────────────────────────────────────────────

class EmbeddingCache:
    """Text-level cache keyed by (provider id, text hash, weighting hash).

    Reads are lock-free dict lookups; inserts are serialized.  Semantics are
    as-if uncached: the stored vector is exactly what embed_text computed.
    """

    def __init__(self):
        self._store: dict[tuple[str, str, str], EmbeddingVector] = {}
        self._lock = threading.Lock()

    @staticmethod
    def key(provider_id: str, tokens: Sequence[str], weighting: TermWeighting) -> tuple[str, str, str]:
        text_hash = hashlib.sha256(" ".join(tokens).encode("utf-8")).hexdigest()
        return (provider_id, text_hash, weighting.cache_key())

    def get(self, key: tuple[str, str, str]) -> EmbeddingVector | None:
        return self._store.get(key)

    def put(self, key: tuple[str, str, str], vector: EmbeddingVector) -> None:
        with self._lock:
            self._store[key] = vector

    def __len__(self) -> int:
        return len(self._store)


# ── composition operations ───────────────────────────────────────────

def _weighted_sum(tokens: Sequence[str], weighting: TermWeighting, provider: EmbeddingProvider) -> EmbeddingVector:
    vectors = provider.embed_tokens(tokens)
    dims = {v.dim for v in vectors}
    if len(dims) != 1:
        raise ProviderError(getattr(provider, "id", "?"), f"inconsistent vector dims {sorted(dims)}")
    dim = dims.pop()
    weights = [weighting.weight_for(t) for t in tokens]
    components = tuple(
        math.fsum(w * vec.values[k] for w, vec in zip(weights, vectors))
        for k in range(dim)
    )
    return EmbeddingVector(components, getattr(provider, "id", ""))


def embed_text(
    text: str,
    weighting: TermWeighting = UNIFORM_WEIGHTING,
    provider: EmbeddingProvider | None = None,
    cache: EmbeddingCache | None = None,
) -> EmbeddingVector:
    """Weighted sum of per-token vectors over the normalized text."""
    if provider is None:
        provider = ReferenceProvider()
    tokens = normalize_tokens(text)
    if not tokens:
        raise EmbeddingError(f"text {text!r} has no tokens after normalization")
    if cache is not None:
        key = EmbeddingCache.key(provider.id, tokens, weighting)
        hit = cache.get(key)
        if hit is not None:
            return hit
    vector = _weighted_sum(tokens, weighting, provider)
    if cache is not None:
        cache.put(key, vector)
    return vector


def compose_parameter_vector(
    param: ParameterSpec,
    context_factor: float = DEFAULT_CONTEXT_FACTOR,
    weighting: TermWeighting = UNIFORM_WEIGHTING,
    provider: EmbeddingProvider | None = None,
    cache: EmbeddingCache | None = None,
) -> EmbeddingVector:
    """Definition vector plus ``context_factor`` times the summed context vectors."""
    if context_factor < 0:
        raise ValueError("context factor must be >= 0")
    base = embed_text(param.definition, weighting, provider, cache)
    if not param.contexts or context_factor == 0:
        return base
    context_vectors = [embed_text(c, weighting, provider, cache) for c in param.contexts]
    if any(v.dim != base.dim for v in context_vectors):
        raise EmbeddingError(f"parameter '{param.id}': context dim mismatch")
    context_sum = [math.fsum(v.values[k] for v in context_vectors) for k in range(base.dim)]
    composed = tuple(
        math.fsum([base.values[k], context_factor * context_sum[k]])
        for k in range(base.dim)
    )
    return EmbeddingVector(composed, base.provider_id)


def embed_heuristic(
    heuristic: HeuristicSpec,
    weighting: TermWeighting = UNIFORM_WEIGHTING,
    provider: EmbeddingProvider | None = None,
    cache: EmbeddingCache | None = None,
) -> EmbeddingVector:
    """Weighted token sum over the description followed by the keywords.

    Token occurrences are kept (not deduplicated) so adding a keyword always
    adds exactly its weighted vector.
    """
    parts = [heuristic.description, *heuristic.keywords]
    tokens: list[str] = []
    for part in parts:
        tokens.extend(normalize_tokens(part))
    if not tokens:
        raise EmbeddingError(f"heuristic {heuristic.id!r} has no tokens after normalization")
    if provider is None:
        provider = ReferenceProvider()
    if cache is not None:
        key = EmbeddingCache.key(provider.id, tokens, weighting)
        hit = cache.get(key)
        if hit is not None:
            return hit
    vector = _weighted_sum(tokens, weighting, provider)
    if cache is not None:
        cache.put(key, vector)
    return vector


def heuristic_terms(heuristic: HeuristicSpec) -> list[str]:
    """Unique tokens of description plus keywords, first occurrence order."""
    seen: set[str] = set()
    terms: list[str] = []
    for part in (heuristic.description, *heuristic.keywords):
        for token in normalize_tokens(part):
            if token not in seen:
                seen.add(token)
                terms.append(token)
    return terms
