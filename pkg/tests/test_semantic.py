from __future__ import annotations

import math

import pytest

from oracles import cosine_oracle, kl_oracle, matrix_oracle
from stratrec.embedding import FixtureProvider, compose_parameter_vector, embed_heuristic
from stratrec.errors import DegenerateColumnError
from stratrec.registry import HeuristicSpec
from stratrec.semantic import (
    AlignmentContext,
    ParameterDistribution,
    SimilarityMatrix,
    alignment_score,
    build_similarity_matrix,
    compute_term_weights,
    cosine_similarity,
    discover_all_distributions,
    discover_distribution,
    kl_divergence,
    kl_terms,
    matrix_from_document,
    matrix_to_document,
)

SYSTEM_DIST = (0.10, 0.15, 0.40, 0.20, 0.05, 0.10)
EXPERT_DIST = (0.15, 0.10, 0.45, 0.15, 0.05, 0.10)


class TestCosine:
    def test_identical_vectors_score_one(self):
        assert cosine_similarity((1.0, 0.0, 2.0), (1.0, 0.0, 2.0)) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_vectors_score_zero(self):
        assert cosine_similarity((1.0, 0.0), (0.0, 1.0)) == 0.0

    def test_worked_pair_matches_high_precision_oracle(self):
        p3 = (1.65, 2.05, 1.5)
        h24 = (1.8, 1.9, 1.4)
        value = cosine_similarity(p3, h24)
        assert value == pytest.approx(0.9971, abs=1e-4)
        assert value == pytest.approx(cosine_oracle(p3, h24), abs=1e-12)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            cosine_similarity((1.0, 2.0), (1.0, 2.0, 3.0))

    def test_zero_norm_rejected(self):
        with pytest.raises(ValueError, match="zero-norm"):
            cosine_similarity((0.0, 0.0), (1.0, 2.0))

    def test_symmetry_and_scale_invariance(self):
        a = (0.3, -0.2, 0.9)
        b = (1.1, 0.4, -0.5)
        assert cosine_similarity(a, b) == pytest.approx(cosine_similarity(b, a), abs=1e-15)
        scaled = tuple(7.3 * v for v in a)
        assert cosine_similarity(scaled, b) == pytest.approx(cosine_similarity(a, b), abs=1e-12)


class TestSimilarityMatrix:
    def test_one_by_one_identical(self):
        m = build_similarity_matrix([("p", (1.0, 0.0))], [(1, (1.0, 0.0))])
        assert m.cells == ((1.0,),)

    def test_two_by_two_matches_cell_oracle(self):
        params = [("p1", (0.9, 0.2, 0.1)), ("p2", (0.1, 0.8, 0.3))]
        heuristics = [(1, (0.5, 0.5, 0.5)), (2, (0.2, 0.1, 0.9))]
        m = build_similarity_matrix(params, heuristics)
        expected = matrix_oracle(params, heuristics)
        for i in range(2):
            for j in range(2):
                assert m.cells[i][j] == pytest.approx(expected[i][j], abs=1e-12)

    def test_full_fixture_matrix_is_finite(self, sixc, stratagems, hydrogen_provider):
        params = [(p.id, compose_parameter_vector(p, provider=hydrogen_provider)) for p in sixc.parameters]
        heuristics = [(h.id, embed_heuristic(h, provider=hydrogen_provider)) for h in stratagems.heuristics]
        m = build_similarity_matrix(params, heuristics)
        assert m.shape == (6, 36)
        assert all(math.isfinite(c) for row in m.cells for c in row)

    def test_cell_error_carries_indices(self):
        with pytest.raises(ValueError, match=r"cell \('p1', 2\)"):
            build_similarity_matrix([("p1", (1.0, 0.0))], [(1, (1.0, 1.0)), (2, (0.0, 0.0))])

    def test_export_round_trip(self):
        m = build_similarity_matrix(
            [("p1", (1.0, 0.2)), ("p2", (0.1, 0.9))],
            [(1, (0.4, 0.4)), (2, (0.9, 0.1))],
        )
        dists, _ = discover_all_distributions(m)
        doc = matrix_to_document(m, dists, "6C", "set", "prov")
        again, dist_doc = matrix_from_document(doc)
        assert again == m
        assert dist_doc["1"] == pytest.approx(list(dists[1].weights))


class TestDistributionDiscovery:
    def _matrix(self, *columns):
        n = len(columns)
        rows = len(columns[0])
        cells = tuple(tuple(columns[j][i] for j in range(n)) for i in range(rows))
        return SimilarityMatrix(
            row_ids=tuple(f"p{i}" for i in range(rows)),
            col_ids=tuple(range(1, n + 1)),
            cells=cells,
        )

    def test_already_normalized_column_unchanged(self):
        m = self._matrix([0.2, 0.2, 0.6])
        assert discover_distribution(m, 1).weights == pytest.approx((0.2, 0.2, 0.6), abs=1e-12)

    def test_symmetric_column(self):
        m = self._matrix([1.0, 1.0])
        assert discover_distribution(m, 1).weights == (0.5, 0.5)

    def test_negative_cells_clamped(self):
        m = self._matrix([0.3, -0.1, 0.3])
        assert discover_distribution(m, 1).weights == pytest.approx((0.5, 0.0, 0.5), abs=1e-12)

    def test_unclamped_mode(self):
        m = self._matrix([0.3, -0.1, 0.3])
        weights = discover_distribution(m, 1, clamp_negative=False).weights
        assert weights == pytest.approx((0.6, -0.2, 0.6), abs=1e-12)

    def test_degenerate_column_rejected(self):
        m = self._matrix([-0.2, -0.1, 0.0])
        with pytest.raises(DegenerateColumnError, match="degenerate"):
            discover_distribution(m, 1)

    def test_l2_mode_gives_unit_vector(self):
        m = self._matrix([0.3, 0.4])
        d = discover_distribution(m, 1, norm="l2")
        assert math.fsum(w * w for w in d.weights) == pytest.approx(1.0, abs=1e-12)

    def test_discover_all_collects_degenerates(self):
        m = self._matrix([0.5, 0.5], [-0.3, -0.2])
        dists, skipped = discover_all_distributions(m)
        assert set(dists) == {1}
        assert skipped[0][0] == 2

    def test_distribution_type_validates_sum(self):
        with pytest.raises(ValueError, match="sums to"):
            ParameterDistribution(heuristic_id=1, weights=(0.5, 0.6))


class TestKlDivergence:
    def test_identical_distributions_give_exact_zero(self):
        assert kl_divergence(SYSTEM_DIST, SYSTEM_DIST) == 0.0

    def test_worked_pair_matches_direct_evaluation(self):
        value = kl_divergence(SYSTEM_DIST, EXPERT_DIST, log_base=10)
        assert value == pytest.approx(kl_oracle(SYSTEM_DIST, EXPERT_DIST, 10), abs=1e-9)
        assert value == pytest.approx(0.013331, abs=5e-4)

    def test_first_term_value(self):
        terms = kl_terms(SYSTEM_DIST, EXPERT_DIST, log_base=10)
        assert terms[0] == pytest.approx(-0.0176, abs=5e-4)
        assert terms[4] == pytest.approx(0.0, abs=1e-9)
        assert terms[5] == pytest.approx(0.0, abs=1e-9)

    def test_asymmetry(self):
        forward = kl_divergence(SYSTEM_DIST, EXPERT_DIST)
        backward = kl_divergence(EXPERT_DIST, SYSTEM_DIST)
        assert forward != backward

    def test_support_mismatch_rejected(self):
        with pytest.raises(ValueError, match="support size"):
            kl_divergence((0.5, 0.5), (0.3, 0.3, 0.4))

    def test_natural_log_base(self):
        value = kl_divergence(SYSTEM_DIST, EXPERT_DIST, log_base=math.e)
        assert value == pytest.approx(kl_oracle(SYSTEM_DIST, EXPERT_DIST, math.e), abs=1e-9)

    def test_zero_weights_survive_smoothing(self):
        value = kl_divergence((1.0, 0.0), (0.5, 0.5))
        assert math.isfinite(value) and value > 0


class TestTermWeights:
    def test_equal_similarity_gives_uniform_weights(self):
        provider = FixtureProvider("t", 2, {"term": [1.0, 1.0]})
        params = [("p1", (1.0, 0.0)), ("p2", (0.0, 1.0))]
        h = HeuristicSpec(id=1, name="h", description="term")
        weights = compute_term_weights(h, params, provider)
        assert weights == pytest.approx((0.5, 0.5), abs=1e-12)

    def test_weight_concentrates_on_matching_parameter(self):
        provider = FixtureProvider("t", 2, {"sharp": [1.0, 0.0], "blunt": [0.9, 0.05]})
        params = [("p1", (1.0, 0.0)), ("p2", (0.0, 1.0))]
        h = HeuristicSpec(id=1, name="h", description="sharp blunt")
        weights = compute_term_weights(h, params, provider)
        assert weights[0] > 0.9
        assert math.fsum(weights) == pytest.approx(1.0, abs=1e-9)

    def test_weights_always_sum_to_one(self, sixc, stratagems, hydrogen_provider):
        params = [(p.id, compose_parameter_vector(p, provider=hydrogen_provider)) for p in sixc.parameters]
        for h in stratagems.heuristics[:5]:
            weights = compute_term_weights(h, params, hydrogen_provider)
            assert math.fsum(weights) == pytest.approx(1.0, abs=1e-9)


class TestAlignment:
    def test_uniform_weights_give_weighted_mean(self):
        score = alignment_score([1 / 6] * 6, [4.0] * 6)
        assert score.raw == pytest.approx(4.0, abs=1e-12)
        assert score.normalized == pytest.approx(0.8, abs=1e-12)

    def test_zero_context_factors_zero_score(self):
        score = alignment_score([0.5, 0.5], [3.0, 4.0], context=[0.0, 0.0])
        assert score.raw == 0.0
        assert score.normalized == 0.0

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError, match="length mismatch"):
            alignment_score([0.5, 0.5], [3.0])

    def test_negative_actor_value_rejected(self):
        with pytest.raises(ValueError, match="non-negative"):
            alignment_score([1.0], [-2.0])

    def test_context_validation(self):
        with pytest.raises(ValueError, match="non-negative"):
            AlignmentContext(factors=(-1.0,))
