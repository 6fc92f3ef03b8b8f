"""Acceptance suite: one test per numbered criterion, each printing a
[PASS]/[FAIL] line (visible with ``pytest -s``) and asserting its stated
tolerances.

Criterion 2 carries anchor values for the divergence worked example whose
nonzero terms (beyond the first) and total are mutually inconsistent with
the divergence formula itself; direct evaluation yields 0.0133, not 0.0273.
The test asserts the anchors as stated and therefore fails; the sibling
``test_kl_worked_example_direct_evaluation`` pins the values the formula
actually produces.
"""

from __future__ import annotations

import json
import math
import time

import numpy as np
import pytest

from oracles import cosine_oracle, matrix_oracle, select_oracle
from stratrec import fixtures
from stratrec.embedding import compose_parameter_vector
from stratrec.errors import DegenerateColumnError, WorkflowError, WorkflowValidationError
from stratrec.pipeline import run_analysis
from stratrec.reporting import (
    GeneratedReport,
    MockGenerator,
    load_template,
    render_recommendation_report,
    validate_generated_report,
)
from stratrec.selection import build_situation_vector, select_stratagems
from stratrec.semantic import (
    SimilarityMatrix,
    cosine_similarity,
    discover_distribution,
    kl_divergence,
    kl_terms,
)
from stratrec.validation import (
    confidence_score,
    cross_validation_score,
    expert_agreement_score,
    stability_score,
)
from stratrec.workflow import advance, load_workflow

_BLOCK_START = time.perf_counter()

SYSTEM_DIST = (0.10, 0.15, 0.40, 0.20, 0.05, 0.10)
EXPERT_DIST = (0.15, 0.10, 0.45, 0.15, 0.05, 0.10)
D24 = (0.10, 0.07, 0.61, 0.13, 0.03, 0.06)
D3 = (0.30, 0.10, 0.35, 0.15, 0.05, 0.05)
D15 = (0.40, 0.15, 0.20, 0.15, 0.05, 0.05)


def _criterion(number: int, description: str, checks: list[tuple[str, bool, str]]) -> None:
    ok = all(passed for _, passed, _ in checks)
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {description}")
    for label, passed, detail in checks:
        if not passed:
            print(f"        failed check '{label}': {detail}")
    assert ok, f"criterion {number}: " + "; ".join(label for label, passed, _ in checks if not passed)


def _matrix_from_columns(columns: dict) -> SimilarityMatrix:
    ids = tuple(columns)
    rows = len(next(iter(columns.values())))
    cells = tuple(tuple(columns[h][i] for h in ids) for i in range(rows))
    return SimilarityMatrix(row_ids=tuple(f"p{i + 1}" for i in range(rows)), col_ids=ids, cells=cells)


def test_criterion_01_parameter_composition(sixc, appendix_provider):
    composed = compose_parameter_vector(sixc.parameter("relational_capacity"), 0.5, provider=appendix_provider)
    _criterion(1, "context-weighted parameter composition is exact", [
        ("values", composed.values == (1.65, 2.05, 1.5), f"got {composed.values}"),
    ])


def test_criterion_02_kl_worked_example():
    # anchor values as stated for this worked example; terms 2-4 and the
    # total cannot be produced by the divergence formula in any log base
    expected_terms = (-0.0176, 0.0347, -0.0186, 0.0288, 0.0, 0.0)
    expected_total = 0.0273
    terms = kl_terms(SYSTEM_DIST, EXPERT_DIST, log_base=10)
    total = kl_divergence(SYSTEM_DIST, EXPERT_DIST, log_base=10)
    checks = [
        (f"term[{i}]", abs(terms[i] - expected_terms[i]) <= 5e-4,
         f"got {terms[i]:+.4f}, anchor {expected_terms[i]:+.4f}")
        for i in range(6)
    ]
    checks.append(("total", abs(total - expected_total) <= 5e-4, f"got {total:.4f}, anchor {expected_total}"))
    _criterion(2, "divergence worked example (base 10, system first)", checks)


def test_kl_worked_example_direct_evaluation():
    """Values the divergence formula actually yields for the same inputs."""
    terms = kl_terms(SYSTEM_DIST, EXPERT_DIST, log_base=10)
    total = kl_divergence(SYSTEM_DIST, EXPERT_DIST, log_base=10)
    expected = (-0.017609, 0.026414, -0.020461, 0.024988, 0.0, 0.0)
    for got, want in zip(terms, expected):
        assert got == pytest.approx(want, abs=5e-6)
    assert total == pytest.approx(0.013331, abs=5e-6)
    assert total == pytest.approx(math.fsum(terms), abs=1e-15)


def test_criterion_03_confidence_blend():
    combined = confidence_score(0.92, 0.88, 0.94, 0.3, 0.3, 0.4).combined
    _criterion(3, "confidence blend of (0.92, 0.88, 0.94) at weights (0.3, 0.3, 0.4)", [
        ("combined", abs(combined - 0.916) <= 1e-12, f"got {combined!r}"),
    ])


def test_criterion_04_selection_ordering():
    matrix = _matrix_from_columns({24: D24, 3: D3, 15: D15})
    situation = build_situation_vector([1.5, 1.0, 4.5, 2.0, 0.5, 0.5])
    result = select_stratagems(situation, matrix, threshold=0.75)
    oracle_scores = {hid: cosine_oracle(situation.weights, d) for hid, d in ((24, D24), (3, D3), (15, D15))}
    checks = [
        ("ordering", result.heuristic_ids == (24, 3, 15), f"got {result.heuristic_ids}"),
        ("all retained", len(result.recommendations) == 3, f"kept {len(result.recommendations)}"),
    ]
    for rec, anchor in zip(result.recommendations, (0.967, 0.936, 0.756)):
        checks.append((
            f"score[{rec.heuristic_id}] vs oracle",
            abs(rec.score - oracle_scores[rec.heuristic_id]) <= 1e-12,
            f"{rec.score} vs {oracle_scores[rec.heuristic_id]}",
        ))
        checks.append((
            f"score[{rec.heuristic_id}] anchor",
            abs(rec.score - anchor) <= 1e-3,
            f"{rec.score:.4f} vs {anchor}",
        ))
    _criterion(4, "selection returns (24, 3, 15) with oracle-matched scores", checks)


def test_criterion_05_validation_calibration():
    provider_dists = []
    for name in ("mapping_provider_a", "mapping_provider_b", "mapping_provider_c"):
        doc = json.loads(fixtures.validation_file(name).read_text())
        provider_dists.append(tuple(doc["distributions"]["24"]))
    variant_dists = []
    for name in ("perturbation_v0", "perturbation_v1", "perturbation_v2", "perturbation_v3"):
        doc = json.loads(fixtures.validation_file(name).read_text())
        variant_dists.append(tuple(doc["distributions"]["24"]))
    v = cross_validation_score(provider_dists, 2)
    e = expert_agreement_score(0.61, [0.55, 0.60, 0.58])
    stability = stability_score(variant_dists, 2)
    elapsed = time.perf_counter() - _BLOCK_START
    _criterion(5, "validation calibration from raw fixture data", [
        ("cross-validation v", abs(v - 0.92) <= 0.01, f"got {v:.4f}"),
        ("expert agreement e", abs(e - 0.94) <= 0.01, f"got {e:.4f}"),
        ("variant std dev", abs(stability.std_dev - 0.0192) <= 1e-4, f"got {stability.std_dev:.5f}"),
        ("std dev bound", stability.std_dev < 0.03, f"got {stability.std_dev:.5f}"),
        ("criteria 1-5 runtime < 10 s", elapsed < 10.0, f"took {elapsed:.2f}s"),
    ])


def test_criterion_06_distribution_normalization():
    rng = np.random.default_rng(601)
    cases = 0
    for _ in range(1000):
        m = int(rng.integers(2, 9))
        n = int(rng.integers(1, 11))
        cells = rng.uniform(-1.0, 1.0, size=(m, n))
        matrix = SimilarityMatrix(
            row_ids=tuple(f"p{i}" for i in range(m)),
            col_ids=tuple(range(n)),
            cells=tuple(tuple(float(c) for c in row) for row in cells),
        )
        for hid in matrix.col_ids:
            try:
                dist = discover_distribution(matrix, hid)
            except DegenerateColumnError:
                continue
            cases += 1
            assert all(w >= 0 for w in dist.weights)
            assert abs(math.fsum(dist.weights) - 1.0) <= 1e-9
    _criterion(6, "discovered distributions stay normalized", [
        ("case count", cases >= 1000, f"only {cases} cases"),
    ])


def test_criterion_07_kl_properties():
    rng = np.random.default_rng(701)
    asymmetry_witnessed = False
    for _ in range(1000):
        n = int(rng.integers(2, 9))
        p = rng.uniform(0.0, 1.0, size=n)
        q = rng.uniform(0.0, 1.0, size=n)
        p = tuple(p / p.sum())
        q = tuple(q / q.sum())
        assert kl_divergence(p, p) == 0.0
        forward = kl_divergence(p, q)
        assert forward >= -1e-12
        if abs(forward - kl_divergence(q, p)) > 1e-12:
            asymmetry_witnessed = True
    _criterion(7, "divergence identity, non-negativity, asymmetry", [
        ("asymmetry witnessed", asymmetry_witnessed, "no fuzzed pair differed between directions"),
    ])


def test_criterion_08_cosine_and_ranking_invariance():
    rng = np.random.default_rng(801)
    for _ in range(1000):
        n = int(rng.integers(2, 9))
        a = rng.uniform(-1.0, 1.0, size=n) + 0.0
        b = rng.uniform(-1.0, 1.0, size=n)
        if (a == 0).all() or (b == 0).all():
            continue
        k = float(rng.uniform(1e-3, 1e3))
        assert cosine_similarity(a, b) == pytest.approx(cosine_similarity(b, a), abs=1e-12)
        assert cosine_similarity(k * a, b) == pytest.approx(cosine_similarity(a, b), abs=1e-12)
    order_checked = 0
    for _ in range(1000):
        m = int(rng.integers(2, 7))
        n = int(rng.integers(1, 9))
        cells = rng.uniform(-1.0, 1.0, size=(m, n))
        matrix = SimilarityMatrix(
            row_ids=tuple(f"p{i}" for i in range(m)),
            col_ids=tuple(range(n)),
            cells=tuple(tuple(float(c) for c in row) for row in cells),
        )
        values = rng.uniform(0.05, 5.0, size=m)
        k = float(rng.uniform(1e-2, 1e2))
        base = select_stratagems(build_situation_vector(list(values)), matrix, threshold=-1.0)
        scaled = select_stratagems(build_situation_vector(list(values * k)), matrix, threshold=-1.0)
        assert base.heuristic_ids == scaled.heuristic_ids
        order_checked += 1
    _criterion(8, "cosine symmetry/scale invariance and ranking invariance", [
        ("ranking instances", order_checked >= 1000, f"only {order_checked}"),
    ])


def test_criterion_09_oracle_equivalence():
    rng = np.random.default_rng(901)
    for _ in range(1000):
        m = int(rng.integers(2, 7))
        n = int(rng.integers(1, 11))
        dim = int(rng.integers(3, 7))
        params = [(f"p{i}", tuple(rng.uniform(0.05, 1.0, size=dim) * rng.choice((-1.0, 1.0), size=dim)))
                  for i in range(m)]
        heuristics = [(j, tuple(rng.uniform(0.05, 1.0, size=dim) * rng.choice((-1.0, 1.0), size=dim)))
                      for j in range(1, n + 1)]
        from stratrec.semantic import build_similarity_matrix

        matrix = build_similarity_matrix(params, heuristics)
        expected_cells = matrix_oracle(params, heuristics)
        for i in range(m):
            for j in range(n):
                assert matrix.cells[i][j] == pytest.approx(expected_cells[i][j], abs=1e-12)
        theta = float(rng.uniform(-0.2, 0.9))
        situation = build_situation_vector(list(rng.uniform(0.05, 5.0, size=m)))
        ours = select_stratagems(situation, matrix, threshold=theta)
        expected = select_oracle(situation.weights, matrix.cells, matrix.col_ids, theta)
        assert ours.heuristic_ids == tuple(hid for hid, _ in expected)
    _criterion(9, "matrix and selection match brute-force reimplementations", [
        ("completed", True, ""),
    ])


def test_criterion_10_workflow_enforcement():
    flow = load_workflow(fixtures.default_workflow_file())
    out_of_bounds_rejected = False
    try:
        advance(flow, "actor_details", "complete", {"offensive_strength": 7.5, "defensive_strength": 3.0})
    except WorkflowValidationError as exc:
        out_of_bounds_rejected = any(f["field"] == "offensive_strength" for f in exc.failures)
    undeclared_rejected = False
    try:
        advance(flow, "framework_selection", "retry", {})
    except WorkflowError:
        undeclared_rejected = True
    position = "initial"
    path = [position]
    for event, payload in (
        ("complete", {"scenario_type": "market", "actor_count": 2}),
        ("complete", {"offensive_strength": 4.2, "defensive_strength": 3.8}),
        ("complete", {"choice": "6C"}),
    ):
        position = advance(flow, position, event, payload)
        path.append(position)
    _criterion(10, "workflow rejects bad input and reaches analysis", [
        ("out-of-bounds rejected", out_of_bounds_rejected, "7.5 was accepted"),
        ("undeclared rejected", undeclared_rejected, "undeclared event accepted"),
        ("reaches analysis", position == "analysis", f"path {path}"),
    ])


def test_criterion_11_report_gate(sixc, stratagems, hydrogen_scenario, hydrogen_provider):
    record = run_analysis(hydrogen_scenario, sixc, stratagems, hydrogen_provider, theta=0.75)
    template = load_template(fixtures.default_template_file())
    report = render_recommendation_report(record, stratagems, sixc, template, MockGenerator())
    hydrogen = next(a for a in report.actors if a["actor_id"] == "HydrogenEngines")
    top = hydrogen["strategies"][0]

    tampered = GeneratedReport(
        sections={"introduction": "top score 0.91", "rationale": "r", "implementation": "i"},
        provenance={"template_type": template.template_type, "generator_id": "mock", "analysis_id": record.id},
        numbers_cited=(("top_score", 0.91),),
    )
    violations = validate_generated_report(tampered, template, {"top_score": 0.89})
    _criterion(11, "report numeric gate and calibrated demo report", [
        ("clean report passes", report.violations == (), f"violations {report.violations}"),
        ("top strategy", top["heuristic_id"] == 16, f"got {top['heuristic_id']}"),
        ("top raw score", abs(top["score"] - 6.03) <= 1e-9, f"got {top['score']!r}"),
        ("tampered number caught", any(v.kind == "numeric_mismatch" for v in violations),
         f"violations {violations}"),
    ])
