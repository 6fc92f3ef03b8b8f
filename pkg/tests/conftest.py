from __future__ import annotations

import pytest

from stratrec import fixtures
from stratrec.embedding import FixtureProvider
from stratrec.registry import load_framework_spec, load_heuristic_set
from stratrec.scenario import load_scenario


@pytest.fixture(scope="session")
def sixc():
    return load_framework_spec(fixtures.framework_file("sixc"))


@pytest.fixture(scope="session")
def stratagems():
    return load_heuristic_set(fixtures.heuristic_set_file("thirty_six_stratagems"))


@pytest.fixture(scope="session")
def appendix_provider():
    return FixtureProvider.from_file(fixtures.provider_file("appendix_3d"))


@pytest.fixture(scope="session")
def selection_provider():
    return FixtureProvider.from_file(fixtures.provider_file("selection_demo"))


@pytest.fixture(scope="session")
def hydrogen_provider():
    return FixtureProvider.from_file(fixtures.provider_file("hydrogen_demo"))


@pytest.fixture(scope="session")
def commodore_provider():
    return FixtureProvider.from_file(fixtures.provider_file("commodore_demo"))


@pytest.fixture(scope="session")
def hydrogen_scenario():
    return load_scenario(fixtures.scenario_file("hydrogen_vs_electric"))


@pytest.fixture(scope="session")
def commodore_scenario():
    return load_scenario(fixtures.scenario_file("commodore_vs_apple"))


@pytest.fixture(scope="session")
def selection_scenario():
    return load_scenario(fixtures.scenario_file("appendix_selection"))
