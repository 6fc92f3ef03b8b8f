"""Similarity, distribution, divergence, and alignment kernels.

Everything here is a pure function over immutable inputs.  Dot products and
norms accumulate with ``math.fsum`` so cell values are independent of
evaluation order and reproducible bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .embedding import EmbeddingProvider, EmbeddingVector, heuristic_terms
from .errors import DegenerateColumnError
from .registry import HeuristicSpec

SUM_TOLERANCE = 1e-9
DEFAULT_LOG_BASE = 10.0
DEFAULT_EPSILON = 1e-9


def _values(v) -> Sequence[float]:
    return v.values if isinstance(v, EmbeddingVector) else tuple(float(x) for x in v)


def cosine_similarity(a, b) -> float:
    """Cosine of the angle between two vectors, in [-1, 1].

    Raises ValueError on dimension mismatch or a zero-norm argument.
    """
    av, bv = _values(a), _values(b)
    if len(av) != len(bv):
        raise ValueError(f"dimension mismatch: {len(av)} vs {len(bv)}")
    dot = math.fsum(x * y for x, y in zip(av, bv))
    norm_a = math.sqrt(math.fsum(x * x for x in av))
    norm_b = math.sqrt(math.fsum(y * y for y in bv))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ValueError("cosine similarity undefined for zero-norm vector")
    value = dot / (norm_a * norm_b)
    # guard against |value| creeping past 1 by a rounding ulp
    return max(-1.0, min(1.0, value))


@dataclass(frozen=True)
class SimilarityMatrix:
    """Parameter-by-heuristic similarity grid with canonical row/col order."""

    row_ids: tuple[str, ...]
    col_ids: tuple
    cells: tuple[tuple[float, ...], ...]  # cells[i][j] = sim(param i, heuristic j)

    def __post_init__(self):
        if len(self.cells) != len(self.row_ids):
            raise ValueError("row count disagrees with row ids")
        for row in self.cells:
            if len(row) != len(self.col_ids):
                raise ValueError("column count disagrees with col ids")
            for cell in row:
                if not math.isfinite(cell):
                    raise ValueError("non-finite similarity cell")

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.row_ids), len(self.col_ids))

    def col_index(self, heuristic_id) -> int:
        try:
            return self.col_ids.index(heuristic_id)
        except ValueError:
            raise KeyError(f"heuristic {heuristic_id!r} not in matrix") from None

    def column(self, heuristic_id) -> tuple[float, ...]:
        j = self.col_index(heuristic_id)
        return tuple(row[j] for row in self.cells)

    def cell(self, param_id: str, heuristic_id) -> float:
        i = self.row_ids.index(param_id)
        return self.cells[i][self.col_index(heuristic_id)]


def build_similarity_matrix(
    param_vectors: Mapping[str, EmbeddingVector] | Sequence[tuple[str, EmbeddingVector]],
    heuristic_vectors: Mapping | Sequence[tuple],
) -> SimilarityMatrix:
    """Cell (i, j) = cosine similarity of parameter i and heuristic j.

    Input order is preserved; cell errors are re-raised with their indices.
    """
    p_items = list(param_vectors.items()) if isinstance(param_vectors, Mapping) else list(param_vectors)
    h_items = list(heuristic_vectors.items()) if isinstance(heuristic_vectors, Mapping) else list(heuristic_vectors)
    rows = []
    for pid, pvec in p_items:
        row = []
        for hid, hvec in h_items:
            try:
                row.append(cosine_similarity(pvec, hvec))
            except ValueError as exc:
                raise ValueError(f"cell ({pid!r}, {hid!r}): {exc}") from exc
        rows.append(tuple(row))
    return SimilarityMatrix(
        row_ids=tuple(pid for pid, _ in p_items),
        col_ids=tuple(hid for hid, _ in h_items),
        cells=tuple(rows),
    )


@dataclass(frozen=True)
class ParameterDistribution:
    """A heuristic's invariant weighting over the framework parameters.

    ``signed`` marks the unclamped variant, which may carry negative weights
    and is not a probability-style distribution.
    """

    heuristic_id: object
    weights: tuple[float, ...]
    norm: str = "l1"
    signed: bool = False

    def __post_init__(self):
        if not self.signed and any(w < 0 for w in self.weights):
            raise ValueError("distribution weights must be non-negative")
        if self.norm == "l1":
            total = math.fsum(self.weights)
            if abs(total - 1.0) > SUM_TOLERANCE:
                raise ValueError(f"distribution for {self.heuristic_id!r} sums to {total}, not 1")


def discover_distribution(
    matrix: SimilarityMatrix,
    heuristic_id,
    clamp_negative: bool = True,
    norm: str = "l1",
) -> ParameterDistribution:
    """Normalize a heuristic's similarity column into a parameter weighting.

    Negative similarities are clamped to zero before normalizing (a
    probability-style weighting has no negative mass); pass
    ``clamp_negative=False`` to normalize raw cells.  ``norm`` selects the
    summation ("l1", default) or Euclidean ("l2") normalizer.
    """
    column = matrix.column(heuristic_id)
    cells = tuple(max(c, 0.0) for c in column) if clamp_negative else column
    if norm == "l1":
        total = math.fsum(cells)
        if total <= 0.0:
            raise DegenerateColumnError(heuristic_id)
        weights = tuple(c / total for c in cells)
    elif norm == "l2":
        total = math.sqrt(math.fsum(c * c for c in cells))
        if total <= 0.0:
            raise DegenerateColumnError(heuristic_id)
        weights = tuple(c / total for c in cells)
    else:
        raise ValueError(f"unknown norm '{norm}'")
    return ParameterDistribution(
        heuristic_id=heuristic_id, weights=weights, norm=norm, signed=not clamp_negative
    )


def discover_all_distributions(
    matrix: SimilarityMatrix,
    clamp_negative: bool = True,
    norm: str = "l1",
) -> tuple[dict, list]:
    """All columns at once; degenerate columns are collected, not fatal.

    Returns (distributions by heuristic id, skipped [(id, reason), ...]).
    """
    distributions: dict = {}
    skipped: list = []
    for hid in matrix.col_ids:
        try:
            distributions[hid] = discover_distribution(matrix, hid, clamp_negative, norm)
        except DegenerateColumnError as exc:
            skipped.append((hid, str(exc)))
    return distributions, skipped


# ── divergence ───────────────────────────────────────────────────────

def _smooth(dist: Sequence[float], epsilon: float) -> list[float]:
    raised = [float(p) + epsilon for p in dist]
    total = math.fsum(raised)
    return [p / total for p in raised]


def kl_terms(
    p: Sequence[float],
    q: Sequence[float],
    log_base: float = DEFAULT_LOG_BASE,
    epsilon: float = DEFAULT_EPSILON,
) -> tuple[float, ...]:
    """Per-outcome contributions p_i * log((p_i + eps)/(q_i + eps)).

    Both arguments are epsilon-smoothed and renormalized first, so zero
    weights never produce infinities and identical inputs give exact zeros.
    """
    pv = _values(p) if not isinstance(p, ParameterDistribution) else p.weights
    qv = _values(q) if not isinstance(q, ParameterDistribution) else q.weights
    if len(pv) != len(qv):
        raise ValueError(f"support size mismatch: {len(pv)} vs {len(qv)}")
    if log_base <= 0 or log_base == 1.0:
        raise ValueError("log base must be positive and != 1")
    ps = _smooth(pv, epsilon)
    qs = _smooth(qv, epsilon)
    scale = math.log(log_base)
    return tuple(pi * (math.log(pi / qi) / scale) if pi > 0.0 else 0.0 for pi, qi in zip(ps, qs))


def kl_divergence(
    p: Sequence[float],
    q: Sequence[float],
    log_base: float = DEFAULT_LOG_BASE,
    epsilon: float = DEFAULT_EPSILON,
) -> float:
    """How much distribution p diverges from reference q (asymmetric, >= 0)."""
    return math.fsum(kl_terms(p, q, log_base, epsilon))


# ── term weights and alignment ───────────────────────────────────────

@dataclass(frozen=True)
class TermWeightMatrix:
    """Per-heuristic parameter weights derived from heuristic term sets."""

    param_ids: tuple[str, ...]
    columns: Mapping[object, tuple[float, ...]]  # heuristic id -> weights over params


def compute_term_weights(
    heuristic: HeuristicSpec,
    param_vectors: Mapping[str, EmbeddingVector] | Sequence[tuple[str, EmbeddingVector]],
    provider: EmbeddingProvider,
) -> tuple[float, ...]:
    """Share of each parameter in a heuristic's summed term similarities.

    Terms are the unique tokens of the description plus keywords; each
    term-parameter cosine is clamped at zero before summing, and the result
    is normalized to sum to one across parameters.
    """
    p_items = list(param_vectors.items()) if isinstance(param_vectors, Mapping) else list(param_vectors)
    terms = heuristic_terms(heuristic)
    if not terms:
        raise ValueError(f"heuristic {heuristic.id!r} has no terms")
    term_vectors = provider.embed_tokens(terms)
    # zero-vector terms (stopword-like table entries) carry no signal
    live = [tv for tv in term_vectors if any(v != 0.0 for v in tv.values)]
    sums = []
    for pid, pvec in p_items:
        sums.append(math.fsum(max(cosine_similarity(tv, pvec), 0.0) for tv in live))
    total = math.fsum(sums)
    if total <= 0.0:
        raise DegenerateColumnError(heuristic.id, "degenerate term-weight denominator")
    return tuple(s / total for s in sums)


def build_term_weight_matrix(
    heuristics: Sequence[HeuristicSpec],
    param_vectors,
    provider: EmbeddingProvider,
) -> TermWeightMatrix:
    p_items = list(param_vectors.items()) if isinstance(param_vectors, Mapping) else list(param_vectors)
    columns = {h.id: compute_term_weights(h, p_items, provider) for h in heuristics}
    return TermWeightMatrix(param_ids=tuple(pid for pid, _ in p_items), columns=columns)


@dataclass(frozen=True)
class AlignmentContext:
    """Per-parameter contextual relevance factors (default 1.0 each)."""

    factors: tuple[float, ...]

    def __post_init__(self):
        for f in self.factors:
            if not math.isfinite(f) or f < 0:
                raise ValueError("context factors must be finite and non-negative")

    @classmethod
    def uniform(cls, size: int, value: float = 1.0) -> "AlignmentContext":
        return cls(factors=(value,) * size)


@dataclass(frozen=True)
class AlignmentScore:
    """Raw weighted score plus its [0, 1] normalization."""

    raw: float
    normalized: float


def alignment_score(
    weights: Sequence[float],
    actor_values: Sequence[float],
    context: AlignmentContext | Sequence[float] | None = None,
    scale_max: float = 5.0,
) -> AlignmentScore:
    """Sum of weight * actor value * context factor per parameter.

    ``normalized`` divides by the score of a maxed-out actor (every value at
    ``scale_max``), giving a scale-free variant in [0, 1].
    """
    w = tuple(float(x) for x in weights)
    p = tuple(float(x) for x in actor_values)
    if len(w) != len(p):
        raise ValueError(f"length mismatch: {len(w)} weights vs {len(p)} values")
    if context is None:
        c = (1.0,) * len(w)
    elif isinstance(context, AlignmentContext):
        c = context.factors
    else:
        c = tuple(float(x) for x in context)
    if len(c) != len(w):
        raise ValueError(f"length mismatch: {len(c)} context factors vs {len(w)} weights")
    for v in p:
        if v < 0:
            raise ValueError("actor values must be non-negative")
    raw = math.fsum(wi * pi * ci for wi, pi, ci in zip(w, p, c))
    denom = math.fsum(wi * scale_max * ci for wi, ci in zip(w, c))
    normalized = raw / denom if denom > 0 else 0.0
    return AlignmentScore(raw=raw, normalized=normalized)


# ── export ───────────────────────────────────────────────────────────

def matrix_to_document(
    matrix: SimilarityMatrix,
    distributions: Mapping[object, ParameterDistribution],
    framework_id: str,
    heuristic_set_id: str,
    provider_id: str,
) -> dict:
    """Matrix/distribution export: one self-describing document."""
    return {
        "framework_id": framework_id,
        "heuristic_set_id": heuristic_set_id,
        "provider_id": provider_id,
        "rows": list(matrix.row_ids),
        "cols": list(matrix.col_ids),
        "cells": [list(row) for row in matrix.cells],
        "distributions": {str(hid): list(d.weights) for hid, d in distributions.items()},
    }


def matrix_from_document(doc: Mapping) -> tuple[SimilarityMatrix, dict]:
    """Inverse of :func:`matrix_to_document`; distribution keys stay strings."""
    matrix = SimilarityMatrix(
        row_ids=tuple(doc["rows"]),
        col_ids=tuple(doc["cols"]),
        cells=tuple(tuple(float(c) for c in row) for row in doc["cells"]),
    )
    distributions = {hid: tuple(float(w) for w in ws) for hid, ws in doc.get("distributions", {}).items()}
    return matrix, distributions
