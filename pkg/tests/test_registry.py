from __future__ import annotations

import pytest

from stratrec import fixtures
from stratrec.errors import SpecFormatError
from stratrec.registry import (
    Registry,
    framework_to_document,
    heuristic_set_to_document,
    load_framework_spec,
    load_heuristic_set,
)


def test_sixc_loads_with_six_ordered_parameters(sixc):
    assert sixc.id == "6C"
    assert sixc.size == 6
    assert sixc.parameter_ids == (
        "offensive_strength",
        "defensive_strength",
        "relational_capacity",
        "potential_energy",
        "temporal_availability",
        "contextual_fit",
    )
    assert all(p.scale_min == 0.0 and p.scale_max == 5.0 for p in sixc.parameters)


def test_swot_loads_four_parameters():
    swot = load_framework_spec(fixtures.framework_file("swot"))
    assert swot.size == 4
    assert swot.parameter_ids[0] == "strengths"


def test_framework_with_no_parameters_rejected():
    with pytest.raises(SpecFormatError, match="too few parameters"):
        load_framework_spec({"id": "empty", "name": "empty", "parameters": []})


def test_framework_single_parameter_rejected():
    doc = {"id": "one", "parameters": [{"id": "a", "definition": "only one"}]}
    with pytest.raises(SpecFormatError, match="too few parameters"):
        load_framework_spec(doc)


def test_duplicate_parameter_id_rejected():
    doc = {
        "id": "dup",
        "parameters": [
            {"id": "a", "definition": "first"},
            {"id": "a", "definition": "second"},
        ],
    }
    with pytest.raises(SpecFormatError, match="duplicate parameter id"):
        load_framework_spec(doc)


def test_empty_definition_rejected():
    doc = {"id": "f", "parameters": [{"id": "a", "definition": "  "}, {"id": "b", "definition": "ok"}]}
    with pytest.raises(SpecFormatError, match="empty definition"):
        load_framework_spec(doc)


def test_inverted_scale_bounds_rejected():
    doc = {
        "id": "f",
        "parameters": [
            {"id": "a", "definition": "x", "scale_min": 5, "scale_max": 1},
            {"id": "b", "definition": "y"},
        ],
    }
    with pytest.raises(SpecFormatError, match="inverted scale bounds"):
        load_framework_spec(doc)


def test_parse_failure_reported():
    with pytest.raises(SpecFormatError, match="parse failure"):
        load_framework_spec("{not json")


def test_stratagem_set_has_36_in_order(stratagems):
    assert stratagems.size == 36
    assert stratagems.heuristic_ids == tuple(range(1, 37))
    assert stratagems.heuristic(24).name == "Use Allies' Resources"


def test_duplicate_heuristic_id_rejected():
    doc = {
        "id": "s",
        "heuristics": [
            {"id": 1, "description": "a"},
            {"id": 1, "description": "b"},
        ],
    }
    with pytest.raises(SpecFormatError, match="duplicate heuristic id"):
        load_heuristic_set(doc)


def test_single_heuristic_set_is_valid():
    spec = load_heuristic_set({"id": "solo", "heuristics": [{"id": 1, "description": "only move"}]})
    assert spec.size == 1


def test_empty_heuristic_set_rejected():
    with pytest.raises(SpecFormatError, match="empty set"):
        load_heuristic_set({"id": "none", "heuristics": []})


def test_mixed_id_types_rejected():
    doc = {"id": "m", "heuristics": [{"id": 1, "description": "a"}, {"id": "two", "description": "b"}]}
    with pytest.raises(SpecFormatError, match="mixed id types"):
        load_heuristic_set(doc)


def test_framework_round_trip(sixc):
    again = load_framework_spec(framework_to_document(sixc))
    assert again == sixc


def test_heuristic_set_round_trip(stratagems):
    again = load_heuristic_set(heuristic_set_to_document(stratagems))
    assert again == stratagems


def test_registry_catalog_sorted_by_id():
    reg = Registry()
    reg.load_framework(fixtures.framework_file("swot"))
    reg.load_framework(fixtures.framework_file("porter"))
    reg.load_framework(fixtures.framework_file("sixc"))
    reg.load_heuristic_set(fixtures.heuristic_set_file("thirty_six_stratagems"))
    catalog = reg.list()
    assert [f.id for f in catalog.frameworks] == ["6C", "Porter", "SWOT"]
    assert [s.id for s in catalog.heuristic_sets] == ["thirty-six-stratagems"]


def test_empty_registry_catalog():
    catalog = Registry().list()
    assert catalog.frameworks == () and catalog.heuristic_sets == ()


def test_load_directory_picks_up_all_files():
    reg = Registry()
    reg.load_directory(fixtures.registry_dir())
    catalog = reg.list()
    assert len(catalog.frameworks) == 3
    assert len(catalog.heuristic_sets) == 1
