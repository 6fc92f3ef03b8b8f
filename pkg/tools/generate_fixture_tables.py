#!/usr/bin/env python3
"""Regenerate the packaged 6-dim demo vector tables and case scenarios.

The demo tables are built so the engine's outputs on the packaged scenarios
are exact and stable:

* each framework parameter embeds to a pure basis vector (one carrier token
  per parameter carries the axis, every other token is zero), and
* each heuristic embeds to a designed parameter distribution (one carrier
  keyword carries the whole vector).

Column-normalizing such a matrix returns the designed distribution exactly,
so the demo rankings are chosen here, not emergent: each heuristic's
distribution is constructed to have a preset cosine against the scenario's
anchor situation vector.  Rerun after editing the framework or heuristic
texts; the script re-verifies carrier uniqueness and ranking order.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

FIXTURES = Path(__file__).resolve().parent.parent / "src" / "stratrec" / "fixtures"
sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from stratrec.embedding import FixtureProvider, compose_parameter_vector, embed_heuristic, normalize_tokens
from stratrec.pipeline import run_analysis
from stratrec.registry import load_framework_spec, load_heuristic_set
from stratrec.scenario import load_scenario
from stratrec.selection import build_situation_vector

PARAM_CARRIERS = {
    "offensive_strength": "proactively",
    "defensive_strength": "resilience",
    "relational_capacity": "relationships",
    "potential_energy": "readiness",
    "temporal_availability": "timing",
    "contextual_fit": "align",
}

# category -> axis used as the default skew seed
CATEGORY_AXIS = {
    "positioning": 0,
    "confrontation": 1,
    "attack": 3,
    "confusion": 2,
    "ground": 5,
    "desperate": 4,
}

HYDROGEN_VALUES = {
    "offensive_strength": 3.75,
    "defensive_strength": 3.25,
    "relational_capacity": 3.6,
    "potential_energy": 4.0,
    "temporal_availability": 3.2,
    "contextual_fit": 3.8,
}
ELECTRIC_VALUES = {
    "offensive_strength": 4.2,
    "defensive_strength": 4.0,
    "relational_capacity": 4.5,
    "potential_energy": 4.8,
    "temporal_availability": 4.3,
    "contextual_fit": 4.6,
}
COMMODORE_VALUES = {
    "offensive_strength": 3.5,
    "defensive_strength": 3.0,
    "relational_capacity": 2.8,
    "potential_energy": 3.0,
    "temporal_availability": 3.5,
    "contextual_fit": 2.9,
}
APPLE_VALUES = {
    "offensive_strength": 4.0,
    "defensive_strength": 3.5,
    "relational_capacity": 3.8,
    "potential_energy": 4.2,
    "temporal_availability": 4.0,
    "contextual_fit": 4.0,
}
SELECTION_VALUES = {
    "offensive_strength": 1.5,
    "defensive_strength": 1.0,
    "relational_capacity": 4.5,
    "potential_energy": 2.0,
    "temporal_availability": 0.5,
    "contextual_fit": 0.5,
}

# demo distributions pinned verbatim (selection table)
SELECTION_EXACT = {
    24: [0.10, 0.07, 0.61, 0.13, 0.03, 0.06],
    3: [0.30, 0.10, 0.35, 0.15, 0.05, 0.05],
    15: [0.40, 0.15, 0.20, 0.15, 0.05, 0.05],
}

# anchor-actor target cosines per table
HYDROGEN_TARGETS = {16: 0.93, 15: 0.915, 24: 0.905, 3: 0.895, 1: 0.885}
COMMODORE_TARGETS = {18: 0.85, 11: 0.82, 23: 0.78}

# alignment-path calibration: (EFF target, emphasized parameter index)
HYDROGEN_EFF = {16: (6.03, 0), 15: (5.72, 3), 24: (5.68, 2), 3: (5.56, 0), 1: (5.41, 5)}
CONTEXT_FACTOR = 1.6


def unit(vec):
    norm = math.sqrt(math.fsum(v * v for v in vec))
    return [v / norm for v in vec]


def cosine(a, b):
    return math.fsum(x * y for x, y in zip(a, b)) / (
        math.sqrt(math.fsum(x * x for x in a)) * math.sqrt(math.fsum(y * y for y in b))
    )


def construct_distribution(x_hat, target, seed_axes):
    """Non-negative L1 distribution with cosine(x_hat, d) == target."""
    dim = len(x_hat)
    candidate_seeds = []
    for axes in seed_axes:
        seed = [0.0] * dim
        for a in axes:
            seed[a] = 1.0 / len(axes)
        candidate_seeds.append(seed)
    for seed in candidate_seeds:
        proj = math.fsum(s * x for s, x in zip(seed, x_hat))
        w = [s - proj * x for s, x in zip(seed, x_hat)]
        norm = math.sqrt(math.fsum(v * v for v in w))
        if norm < 1e-12:
            continue
        w_hat = [v / norm for v in w]
        u = [target * x + math.sqrt(1 - target * target) * v for x, v in zip(x_hat, w_hat)]
        if min(u) < -1e-12:
            continue
        u = [max(v, 0.0) for v in u]
        total = math.fsum(u)
        d = [v / total for v in u]
        if abs(cosine(x_hat, d) - target) < 1e-9:
            return d
    raise RuntimeError(f"no feasible seed for target {target}")


def solve_alignment_weights(values, eff_target, emphasis_index):
    """Weights summing to 1 with sum(w*p)*CONTEXT_FACTOR == eff_target.

    Starts from uniform weights with extra mass on the emphasized parameter,
    then shifts mass between one other pair to hit the target exactly; the
    emphasis boost is relaxed stepwise if the shift cannot stay in [0, 1].
    """
    p = list(values)
    n = len(p)
    t = eff_target / CONTEXT_FACTOR
    low = min(range(n), key=lambda i: p[i])
    if low == emphasis_index:
        low = sorted(range(n), key=lambda i: p[i])[1]
    free = [i for i in range(n) if i != emphasis_index]
    for boost in (0.12, 0.08, 0.05, 0.02, 0.0):
        w = [1.0 / n] * n
        w[emphasis_index] += boost
        w[low] -= boost
        # waterfill: trade mass between low- and high-value parameters
        # (emphasis slot untouched) until the weighted sum hits the target
        for _ in range(4 * n):
            diff = t - math.fsum(wi * v for wi, v in zip(w, p))
            if abs(diff) < 1e-12:
                break
            if diff > 0:
                donors = sorted((i for i in free if w[i] > 0), key=lambda i: p[i])
                recipients = sorted((i for i in free if w[i] < 1), key=lambda i: -p[i])
            else:
                donors = sorted((i for i in free if w[i] > 0), key=lambda i: -p[i])
                recipients = sorted((i for i in free if w[i] < 1), key=lambda i: p[i])
            moved = False
            for d in donors:
                for r in recipients:
                    gap = p[r] - p[d]
                    if (diff > 0) != (gap > 0) or gap == 0:
                        continue
                    move = min(w[d], 1 - w[r], diff / gap)
                    if move <= 0:
                        continue
                    w[d] -= move
                    w[r] += move
                    moved = True
                    break
                if moved:
                    break
            if not moved:
                break
        achieved = math.fsum(wi * v for wi, v in zip(w, p)) * CONTEXT_FACTOR
        if abs(achieved - eff_target) <= 1e-9 and min(w) >= 0 and max(w) <= 1:
            return w
    raise RuntimeError(f"no feasible weight adjustment for target {eff_target}")


def corpus_tokens(framework, heuristic_set):
    owners: dict[str, set] = {}

    def note(token, owner):
        owners.setdefault(token, set()).add(owner)

    for param in framework.parameters:
        for token in normalize_tokens(param.definition):
            note(token, ("param", param.id))
        for ctx in param.contexts:
            for token in normalize_tokens(ctx):
                note(token, ("param", param.id))
    for h in heuristic_set.heuristics:
        for token in normalize_tokens(h.description):
            note(token, ("heuristic", h.id))
        for kw in h.keywords:
            for token in normalize_tokens(kw):
                note(token, ("heuristic", h.id))
    return owners


def pick_heuristic_carriers(heuristic_set, owners):
    carriers = {}
    for h in heuristic_set.heuristics:
        sequence = []
        for kw in h.keywords:
            sequence.extend(normalize_tokens(kw))
        sequence.extend(normalize_tokens(h.description))
        unique = [
            t for t in sequence
            if owners[t] == {("heuristic", h.id)} and sequence.count(t) == 1
        ]
        if not unique:
            raise RuntimeError(f"heuristic {h.id} has no unique single-occurrence carrier token")
        carriers[h.id] = unique[0]
    return carriers


def build_table(provider_id, framework, heuristic_set, owners, distributions):
    carriers = pick_heuristic_carriers(heuristic_set, owners)
    dim = framework.size
    entries = {token: [0.0] * dim for token in owners}
    for i, param in enumerate(framework.parameters):
        carrier = PARAM_CARRIERS[param.id]
        if owners.get(carrier) != {("param", param.id)}:
            raise RuntimeError(f"parameter carrier '{carrier}' not unique to {param.id}: {owners.get(carrier)}")
        axis = [0.0] * dim
        axis[i] = 1.0
        entries[carrier] = axis
    for h in heuristic_set.heuristics:
        entries[carriers[h.id]] = list(distributions[h.id])
    return {"id": provider_id, "dim": dim, "entries": entries}


def design_table(provider_id, framework, heuristic_set, owners, anchor_values, targets, exact=None, rest_cap=None):
    ordered = [framework.parameter(p.id) for p in framework.parameters]
    x = [anchor_values[p.id] for p in ordered]
    x_hat = unit(x)
    exact = exact or {}
    taken = dict(exact)
    # remaining heuristics get descending sub-threshold (or sub-target) cosines
    assigned_targets = dict(targets)
    rest = [h.id for h in heuristic_set.heuristics if h.id not in taken and h.id not in assigned_targets]
    top_cap = rest_cap if rest_cap is not None else (min(targets.values()) if targets else 0.75) - 0.013
    for k, hid in enumerate(rest):
        assigned_targets[hid] = round(top_cap - 0.005 * k, 6)
    distributions = {}
    for h in heuristic_set.heuristics:
        if h.id in taken:
            distributions[h.id] = taken[h.id]
            continue
        axis = CATEGORY_AXIS.get(h.category or "", h.id % len(x))
        seeds = [(axis,), ((axis + 1) % len(x),), (axis, (axis + 2) % len(x)), ((axis + 3) % len(x),), ((axis + 4) % len(x),)]
        distributions[h.id] = construct_distribution(x_hat, assigned_targets[h.id], seeds)
    table = build_table(provider_id, framework, heuristic_set, owners, distributions)
    return table, distributions, x


def verify_table(table_doc, framework, heuristic_set, distributions, anchor_values, expected_top):
    provider = FixtureProvider(table_doc["id"], table_doc["dim"], table_doc["entries"])
    for i, param in enumerate(framework.parameters):
        vec = compose_parameter_vector(param, provider=provider)
        for k, v in enumerate(vec.values):
            assert (v > 0) == (k == i), f"{param.id} not a pure axis: {vec.values}"
    for h in heuristic_set.heuristics:
        vec = embed_heuristic(h, provider=provider)
        expected = distributions[h.id]
        assert all(abs(a - b) < 1e-12 for a, b in zip(vec.values, expected)), f"heuristic {h.id} off"
    ordered_values = [anchor_values[p.id] for p in framework.parameters]
    situation = build_situation_vector(ordered_values, framework)
    scored = sorted(
        ((cosine(situation.weights, distributions[h.id]), h.id) for h in heuristic_set.heuristics),
        key=lambda t: (-t[0], t[1]),
    )
    top_ids = [hid for _, hid in scored[: len(expected_top)]]
    assert top_ids == expected_top, f"{table_doc['id']}: top {top_ids} != expected {expected_top}"
    return scored


def main():
    framework = load_framework_spec(FIXTURES / "frameworks" / "sixc.json")
    heuristic_set = load_heuristic_set(FIXTURES / "heuristics" / "thirty_six_stratagems.json")
    owners = corpus_tokens(framework, heuristic_set)

    providers_dir = FIXTURES / "providers"
    scenarios_dir = FIXTURES / "scenarios"
    scenarios_dir.mkdir(exist_ok=True)

    # selection demo: pinned distributions for 24/3/15, everything else below threshold
    sel_table, sel_dists, _ = design_table(
        "selection-demo", framework, heuristic_set, owners, SELECTION_VALUES,
        targets={}, exact=SELECTION_EXACT,
    )
    # re-assign the undesignated columns against the selection anchor below 0.75
    x_hat = unit([SELECTION_VALUES[p.id] for p in framework.parameters])
    rest = [h for h in heuristic_set.heuristics if h.id not in SELECTION_EXACT]
    for k, h in enumerate(rest):
        axis = CATEGORY_AXIS.get(h.category or "", 0)
        seeds = [(axis,), ((axis + 1) % 6,), (axis, (axis + 2) % 6), ((axis + 3) % 6,), ((axis + 4) % 6,)]
        sel_dists[h.id] = construct_distribution(x_hat, round(0.73 - 0.005 * k, 6), seeds)
    sel_table = build_table("selection-demo", framework, heuristic_set, owners, sel_dists)
    scored = verify_table(sel_table, framework, heuristic_set, sel_dists, SELECTION_VALUES, [24, 3, 15])
    assert all(score < 0.75 for score, hid in scored if hid not in SELECTION_EXACT)
    (providers_dir / "selection_demo.json").write_text(json.dumps(sel_table, indent=1) + "\n")

    hyd_table, hyd_dists, _ = design_table(
        "hydrogen-demo", framework, heuristic_set, owners, HYDROGEN_VALUES, HYDROGEN_TARGETS
    )
    verify_table(hyd_table, framework, heuristic_set, hyd_dists, HYDROGEN_VALUES, [16, 15, 24, 3, 1])
    (providers_dir / "hydrogen_demo.json").write_text(json.dumps(hyd_table, indent=1) + "\n")

    com_table, com_dists, _ = design_table(
        "commodore-demo", framework, heuristic_set, owners, COMMODORE_VALUES, COMMODORE_TARGETS,
        rest_cap=0.74,
    )
    scored = verify_table(com_table, framework, heuristic_set, com_dists, COMMODORE_VALUES, [18, 11, 23])
    assert all(score < 0.75 for score, hid in scored if hid not in COMMODORE_TARGETS)
    (providers_dir / "commodore_demo.json").write_text(json.dumps(com_table, indent=1) + "\n")

    # scenarios
    param_ids = [p.id for p in framework.parameters]
    hydrogen_weights = {
        str(hid): dict(zip(param_ids, solve_alignment_weights(
            [HYDROGEN_VALUES[p] for p in param_ids], eff, emphasis)))
        for hid, (eff, emphasis) in HYDROGEN_EFF.items()
    }
    scenarios = {
        "appendix_selection.json": {
            "id": "appendix-selection",
            "description": "Market expansion while preserving existing partnerships",
            "scenario_type": "market_expansion",
            "framework_id": "6C",
            "heuristic_set_id": "thirty-six-stratagems",
            "provider_id": "selection-demo",
            "theta": 0.75,
            "actors": [
                {
                    "actor_id": "focal-company",
                    "objective": "ExpandMarketPresenceWithPartners",
                    "parameters": SELECTION_VALUES,
                }
            ],
        },
        "hydrogen_vs_electric.json": {
            "id": "hydrogen-vs-electric",
            "description": "Rivalry between hydrogen and battery-electric propulsion programs",
            "scenario_type": "market_competition",
            "framework_id": "6C",
            "heuristic_set_id": "thirty-six-stratagems",
            "provider_id": "hydrogen-demo",
            "theta": 0.75,
            "actors": [
                {
                    "actor_id": "HydrogenEngines",
                    "objective": "MarketDominanceInSustainableAutomotive",
                    "parameters": HYDROGEN_VALUES,
                    "context_factors": {p: CONTEXT_FACTOR for p in param_ids},
                },
                {
                    "actor_id": "ElectricEngines",
                    "objective": "MarketDominanceInSustainableAutomotive",
                    "parameters": ELECTRIC_VALUES,
                    "context_factors": {p: CONTEXT_FACTOR for p in param_ids},
                },
            ],
            "alignment_weights": hydrogen_weights,
        },
        "commodore_vs_apple.json": {
            "id": "commodore-vs-apple",
            "description": "Historical personal-computer market rivalry",
            "scenario_type": "market_competition",
            "framework_id": "6C",
            "heuristic_set_id": "thirty-six-stratagems",
            "provider_id": "commodore-demo",
            "theta": 0.75,
            "actors": [
                {"actor_id": "Commodore", "objective": "RetainPersonalComputerLeadership", "parameters": COMMODORE_VALUES},
                {"actor_id": "Apple", "objective": "GrowPersonalComputerShare", "parameters": APPLE_VALUES},
            ],
        },
    }
    for name, doc in scenarios.items():
        (scenarios_dir / name).write_text(json.dumps(doc, indent=1) + "\n")

    # end-to-end smoke: run the pipeline on each scenario with its table
    for scenario_name, table in [
        ("appendix_selection.json", sel_table),
        ("hydrogen_vs_electric.json", hyd_table),
        ("commodore_vs_apple.json", com_table),
    ]:
        scenario = load_scenario(scenarios_dir / scenario_name)
        provider = FixtureProvider(table["id"], table["dim"], table["entries"])
        record = run_analysis(scenario, framework, heuristic_set, provider, theta=scenario.theta or 0.75)
        top = record.actors[0].recommendations[0]
        print(f"{scenario.id}: top={top['heuristic_id']} score={top['score']:.4f}")
        if scenario.id == "hydrogen-vs-electric":
            align = record.actors[0].alignment[0]
            print(f"  alignment top={align['heuristic_id']} raw={align['raw']:.6f}")
    print("tables and scenarios written")


if __name__ == "__main__":
    main()
