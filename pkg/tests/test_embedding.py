from __future__ import annotations

import httpx
import pytest

from stratrec.embedding import (
    EmbeddingCache,
    EmbeddingVector,
    FixtureProvider,
    ReferenceProvider,
    RemoteProvider,
    TermWeighting,
    compose_parameter_vector,
    embed_heuristic,
    embed_text,
    normalize_tokens,
    reference_embed,
)
from stratrec.errors import EmbeddingError, ProviderError, SpecFormatError
from stratrec.registry import HeuristicSpec, ParameterSpec


def test_normalize_tokens_strips_case_and_punctuation():
    assert normalize_tokens("Use Allies' Resources!") == ["use", "allies", "resources"]
    assert normalize_tokens("Feint East, Strike West.") == ["feint", "east", "strike", "west"]
    assert normalize_tokens("   ") == []


def test_embed_text_sums_token_vectors(appendix_provider):
    vec = embed_text("manage relationships stakeholders", provider=appendix_provider)
    assert vec.values == (1.2, 1.5, 1.1)


def test_embed_single_token_is_identity(appendix_provider):
    vec = embed_text("manage", provider=appendix_provider)
    assert vec.values == (0.2, 0.5, 0.3)


def test_doubling_weights_doubles_output(appendix_provider):
    text = "manage relationships stakeholders"
    base = embed_text(text, provider=appendix_provider)
    doubled = embed_text(text, TermWeighting(default_weight=2.0), provider=appendix_provider)
    for b, d in zip(base.values, doubled.values):
        assert d == pytest.approx(2.0 * b, abs=1e-12)


def test_empty_text_rejected(appendix_provider):
    with pytest.raises(EmbeddingError, match="no tokens"):
        embed_text("...", provider=appendix_provider)


def test_out_of_vocabulary_token_is_loud(appendix_provider):
    with pytest.raises(ProviderError, match="'quantum' not in fixture vocabulary"):
        embed_text("quantum", provider=appendix_provider)


def test_negative_term_weight_rejected():
    with pytest.raises(ValueError, match="non-negative"):
        TermWeighting(weights={"bad": -1.0})


def test_compose_parameter_vector_worked_example(sixc, appendix_provider):
    relational = sixc.parameter("relational_capacity")
    composed = compose_parameter_vector(relational, 0.5, provider=appendix_provider)
    assert composed.values == (1.65, 2.05, 1.5)


def test_compose_with_zero_context_factor_is_base(sixc, appendix_provider):
    relational = sixc.parameter("relational_capacity")
    composed = compose_parameter_vector(relational, 0.0, provider=appendix_provider)
    base = embed_text(relational.definition, provider=appendix_provider)
    assert composed.values == base.values


def test_compose_duplicate_contexts_add_up(appendix_provider):
    param = ParameterSpec(
        id="p",
        name="p",
        definition="manage relationships stakeholders",
        contexts=("coordinate partnership networks", "coordinate partnership networks"),
    )
    composed = compose_parameter_vector(param, 0.5, provider=appendix_provider)
    # two identical contexts at factor 0.5 contribute exactly one context vector
    expected = (1.2 + 0.9, 1.5 + 1.1, 1.1 + 0.8)
    for got, want in zip(composed.values, expected):
        assert got == pytest.approx(want, abs=1e-12)


def test_negative_context_factor_rejected(sixc, appendix_provider):
    with pytest.raises(ValueError, match=">= 0"):
        compose_parameter_vector(sixc.parameter("relational_capacity"), -0.1, provider=appendix_provider)


def test_embed_heuristic_includes_keywords(stratagems, appendix_provider):
    vec = embed_heuristic(stratagems.heuristic(24), provider=appendix_provider)
    # description tokens sum to (0.9, 1.3, 0.8); keywords add (0.9, 0.6, 0.6)
    assert vec.values == pytest.approx((1.8, 1.9, 1.4), abs=1e-12)


def test_embed_heuristic_single_token():
    provider = FixtureProvider("mini", 2, {"strike": [0.3, 0.7]})
    h = HeuristicSpec(id=1, name="one", description="Strike")
    assert embed_heuristic(h, provider=provider).values == (0.3, 0.7)


def test_adding_keyword_adds_its_vector():
    provider = FixtureProvider("mini", 2, {"strike": [0.3, 0.7], "fast": [0.1, 0.2]})
    bare = embed_heuristic(HeuristicSpec(id=1, name="n", description="strike"), provider=provider)
    keyed = embed_heuristic(
        HeuristicSpec(id=1, name="n", description="strike", keywords=("fast",)), provider=provider
    )
    assert keyed.values == (bare.values[0] + 0.1, bare.values[1] + 0.2)


def test_reference_embed_deterministic():
    a = reference_embed("alliance")
    b = reference_embed("alliance")
    assert a.values == b.values
    assert a.dim == 64
    assert all(-1.0 <= v <= 1.0 for v in a.values)


def test_reference_embed_distinct_tokens_differ():
    tokens = [f"token{i}" for i in range(100)]
    vectors = [reference_embed(t).values for t in tokens]
    seen = set(vectors)
    assert len(seen) == len(tokens)


def test_reference_embed_empty_token_rejected():
    with pytest.raises(EmbeddingError):
        reference_embed("")


def test_provider_determinism_bit_identical():
    provider = ReferenceProvider()
    first = provider.embed_tokens(["shape", "influence"])
    second = provider.embed_tokens(["shape", "influence"])
    assert [v.values for v in first] == [v.values for v in second]


def test_fixture_provider_dim_mismatch_rejected():
    with pytest.raises(SpecFormatError, match="dim"):
        FixtureProvider("bad", 3, {"a": [1.0, 2.0]})


def test_cache_transparency(sixc, appendix_provider):
    cache = EmbeddingCache()
    relational = sixc.parameter("relational_capacity")
    cold = compose_parameter_vector(relational, 0.5, provider=appendix_provider, cache=cache)
    warm = compose_parameter_vector(relational, 0.5, provider=appendix_provider, cache=cache)
    uncached = compose_parameter_vector(relational, 0.5, provider=appendix_provider)
    assert cold.values == warm.values == uncached.values
    assert len(cache) > 0


def test_cache_key_separates_weightings():
    k1 = EmbeddingCache.key("p", ["a"], TermWeighting())
    k2 = EmbeddingCache.key("p", ["a"], TermWeighting(default_weight=2.0))
    assert k1 != k2


def test_remote_provider_wire_contract():
    seen = {}

    def handler(request: httpx.Request) -> httpx.Response:
        import json

        seen.update(json.loads(request.content))
        return httpx.Response(200, json={"dim": 2, "vectors": [[0.1, 0.2], [0.3, 0.4]]})

    client = httpx.Client(transport=httpx.MockTransport(handler))
    provider = RemoteProvider("remote-test", "http://provider.local/embed", client=client)
    vectors = provider.embed_tokens(["alpha", "beta"])
    assert seen == {"provider_id": "remote-test", "tokens": ["alpha", "beta"]}
    assert vectors[0].values == (0.1, 0.2)
    assert vectors[1].values == (0.3, 0.4)
    assert provider.dim == 2


def test_remote_provider_failure_carries_provider_id():
    def handler(request: httpx.Request) -> httpx.Response:
        return httpx.Response(500, text="boom")

    client = httpx.Client(transport=httpx.MockTransport(handler))
    provider = RemoteProvider("flaky", "http://provider.local/embed", client=client)
    with pytest.raises(ProviderError, match="flaky"):
        provider.embed_tokens(["alpha"])


def test_non_finite_vector_rejected():
    with pytest.raises(EmbeddingError, match="non-finite"):
        EmbeddingVector((float("nan"),), "x")
