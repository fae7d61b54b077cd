"""Acceptance gate: one test per release criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines; every tolerance is pinned here, not configurable.
"""

import random
import statistics
import time
from dataclasses import replace
from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

from ecoexp import sim
from ecoexp.analytics import (
    analytics_report,
    build_parameter_space,
    classify_pattern,
    coverage,
    focus_share,
    model_complexity,
    model_variety,
    transition_matrix,
)
from ecoexp.bundle import replay
from ecoexp.events import ActionEvent, Session, export_jsonl, import_jsonl
from ecoexp.exemplars import load_exemplar
from ecoexp.experiment import ExperimentStore, GroupConfig, Phase, all_enabled, create_experiment
from ecoexp.harness import ScenarioScript, guided_policy, run_scenario, unguided_policy
from ecoexp.model import (
    add_component,
    add_relationship,
    model_from_json,
    model_to_json,
    new_model,
    set_relationship_rate,
)
from ecoexp.util import canonical_json

BIOS_FIXTURE = Path(__file__).resolve().parents[1] / "src" / "ecoexp" / "fixtures" / "bios"

TABLE_1_PAIRS = {
    ("Canis lupus", "lifespan"),
    ("Canis lupus", "offspring count"),
    ("Canis lupus", "reproductive interval"),
    ("Canis lupus", "reproductive maturity"),
    ("Canis lupus", "starting population"),
    ("Consumes", "consumption rate"),
    ("Grass", "body mass"),
    ("Grass", "lifespan"),
    ("Grass", "minimum population"),
    ("Grass", "starting population"),
    ("Ovis aries", "body mass"),
    ("Ovis aries", "lifespan"),
    ("Ovis aries", "offspring count"),
    ("Ovis aries", "starting population"),
}

T0 = datetime(2026, 2, 2, 10, 0, tzinfo=timezone.utc)


def _passed(name):
    print(f"\nPASS {name}", flush=True)


# -- 1 ------------------------------------------------------------------------


def test_criterion_1_table_1_fixture_replication():
    started = time.monotonic()
    report = replay(BIOS_FIXTURE)
    space = {tuple(pair) for pair in report["parameter_space"]}
    assert space == TABLE_1_PAIRS
    coverage_by_phase = {
        (c["group"], c["phase"]): c["pct"] for c in report["coverage"]
    }
    group = next(c["group"] for c in report["coverage"] if c["pct"] > 0)
    assert coverage_by_phase[(group, "Phase I")] == 78.57
    assert coverage_by_phase[(group, "Phase II")] == 71.43
    elapsed = time.monotonic() - started
    assert elapsed < 1.0, f"replay took {elapsed:.2f}s"
    _passed("criterion 1: Table-1 fixture replication (14 pairs, 78.57% / 71.43%)")


# -- 2 ------------------------------------------------------------------------


def _synthetic_log(r):
    components = ["Kudzu", "Grass", "Ovis aries", "Canis lupus", "Light", "Consumes"]
    parameters = [
        "lifespan", "body_mass", "offspring_count", "starting_population",
        "minimum_population", "consumption_rate", "amount",
    ]
    participants = [f"u{i}" for i in range(r.randint(1, 10))]
    events = []
    for i in range(r.randint(1, 50)):
        events.append(
            ActionEvent(
                ts=T0 + timedelta(minutes=r.randint(0, 80_000)),
                experiment="e1",
                group=r.choice(["A", "B"]),
                participant=r.choice(participants),
                model="m1",
                action="P",
                payload={
                    "component": r.choice(components),
                    "parameter": r.choice(parameters),
                    "old": 0,
                    "new": i,
                },
            )
        )
    return events


def test_criterion_2_coverage_oracle_equivalence():
    started = time.monotonic()
    phases = [
        None,
        Phase("Phase I", T0, T0 + timedelta(days=30)),
        Phase("Phase II", T0 + timedelta(days=45), T0 + timedelta(days=75)),
    ]
    r = random.Random(20260810)
    for _ in range(500):
        events = _synthetic_log(r)
        space = build_parameter_space(events)
        assert space  # every log has at least one P event
        for group in ("A", "B"):
            for phase in phases:
                report = coverage(events, group, phase, space)
                brute = set()
                for e in events:  # independent enumeration over raw events
                    if e.group != group:
                        continue
                    if phase is not None and not (phase.start <= e.ts < phase.end):
                        continue
                    brute.add(
                        (e.payload["component"], e.payload["parameter"].replace("_", " "))
                    )
                brute &= set(space)
                assert report.explored == frozenset(brute)
                expected_pct = round(100.0 * len(brute) / len(space) + 1e-12, 2)
                assert abs(report.percentage - expected_pct) < 0.011
    elapsed = time.monotonic() - started
    assert elapsed < 30.0, f"oracle sweep took {elapsed:.2f}s"
    _passed("criterion 2: coverage equals brute-force enumeration on 500 random logs")


# -- 3 ------------------------------------------------------------------------


def test_criterion_3_assignment_properties():
    store = ExperimentStore()
    store.add(
        create_experiment(
            "balance",
            (GroupConfig("1", all_enabled()), GroupConfig("2", all_enabled())),
            assignment_mode="random",
            seed=97,
            experiment_id="rand",
        )
    )
    first = store.join("rand", "sticky-one").group_id
    for _ in range(1000):
        assert store.join("rand", "sticky-one").group_id == first

    counts = {"1": 0, "2": 0}
    for i in range(10_000):
        counts[store.join("rand", f"p{i}").group_id] += 1
    sigma = (10_000 * 0.25) ** 0.5  # 50
    assert abs(counts["1"] - 5000) <= 3 * sigma, counts

    manual = ExperimentStore()
    manual.add(
        create_experiment(
            "manual",
            (GroupConfig("3", all_enabled()), GroupConfig("4", all_enabled())),
            assignment_mode="manual",
            experiment_id="man",
        )
    )
    for i in range(200):
        wanted = "3" if i % 2 == 0 else "4"
        assert manual.join("man", f"m{i}", group_param=wanted).group_id == wanted
    _passed(
        "criterion 3: assignment stickiness (10^3 re-joins), balance "
        f"(|{counts['1']} - 5000| <= {3 * sigma:.0f}), manual fidelity (100%)"
    )


# -- 4 ------------------------------------------------------------------------

FLAG_EVENT_CHECKS = {
    "simulation": lambda e: e.action == "S",
    "lookup_eol": lambda e: e.action == "E",
    "cloning": lambda e: e.action == "N"
    and isinstance(e.payload.get("provenance"), dict)
    and "cloned_from" in e.payload["provenance"],
    "exemplar_models": lambda e: e.action == "N"
    and isinstance(e.payload.get("provenance"), dict)
    and "exemplar" in e.payload["provenance"],
    "advanced_parameters": lambda e: e.action == "P"
    and e.payload.get("parameter")
    in {
        "photosynthesis_rate", "assimilation_efficiency", "move_velocity",
        "respiratory_rate", "move_direction", "carbon_biomass",
    },
}


def _probe_gated_route(result, flag):
    client = result.client
    joined = client.get(
        "/researcher/join-experiment",
        params={"group": result.group_b, "participant": f"probe-{flag}"},
    ).json()
    headers = {"Authorization": f"Bearer {joined['token']}"}
    fresh = client.post("/models", json={"name": "probe model"}, headers=headers)
    assert fresh.status_code == 201
    model_id = fresh.json()["id"]
    if flag == "simulation":
        probe = client.post(f"/models/{model_id}/simulate", json={}, headers=headers)
    elif flag == "lookup_eol":
        probe = client.get("/traits", params={"name": "Grass"}, headers=headers)
    elif flag == "cloning":
        probe = client.post(f"/models/{model_id}/clone", headers=headers)
    elif flag == "exemplar_models":
        probe = client.post("/models", json={"exemplar": "kudzu"}, headers=headers)
    else:
        put = client.put(
            f"/models/{model_id}",
            json={"add_component": {"name": "Grass", "kind": "biotic"}},
            headers=headers,
        )
        assert put.status_code == 200
        cid = put.json()["components"][0]["id"]
        probe = client.post(
            f"/models/{model_id}/parameters",
            json={"component": cid, "parameter": "photosynthesis_rate", "value": 0.4},
            headers=headers,
        )
    assert probe.status_code == 403, f"{flag}: {probe.text}"
    assert probe.json()["code"] == "feature_disabled"


def test_criterion_4_gate_log_consistency():
    for flag, is_gated_event in FLAG_EVENT_CHECKS.items():
        script = ScenarioScript(
            seed=31,
            learners=3,
            phases=(("Phase I", 1),),
            flags_b={**all_enabled(), flag: False},
        )
        result = run_scenario(script, unguided_policy(), guided_policy())
        b_events = [
            e for e in result.workspace.events.events if e.group == result.group_b
        ]
        assert b_events, f"group B inactive with {flag} disabled"
        leaked = [e for e in b_events if is_gated_event(e)]
        assert not leaked, f"{flag}: {leaked[:3]}"
        a_hits = [
            e
            for e in result.workspace.events.events
            if e.group == result.group_a and is_gated_event(e)
        ]
        assert a_hits, f"group A never exercised {flag}"
        with result.client:
            _probe_gated_route(result, flag)
    _passed("criterion 4: gate/log consistency for all five feature flags")


# -- 5 ------------------------------------------------------------------------


def test_criterion_5_simulation_determinism_and_direction():
    wsg = load_exemplar("wolf-sheep-grass")
    spec = sim.compile(wsg)
    config = sim.SimConfig(seed=4242, runs=3)
    for run_index in range(3):
        a = sim.run(spec, config, run_index)
        b = sim.run(spec, config, run_index)
        assert a.values == b.values

    forced = sim.SimConfig(seed=1, runs=1, expectation_forced=True)
    baseline_mean = sim.aggregate(sim.run_batch(spec, forced), "wsg-sheep").mean
    raised, _, _ = set_relationship_rate(wsg, "wsg-rel-wolf-sheep", 0.4)
    treated_mean = sim.aggregate(
        sim.run_batch(sim.compile(raised), forced), "wsg-sheep"
    ).mean
    assert treated_mean < baseline_mean

    stochastic = sim.SimConfig(seed=77, runs=10)
    baseline = sim.aggregate(sim.run_batch(spec, stochastic), "wsg-sheep")
    shifted = replace(
        baseline, summaries=tuple(s + 10 for s in baseline.summaries),
        mean=baseline.mean + 10,
    )
    report = sim.peak_shift(baseline, shifted)
    assert report.shifted_right
    assert abs(report.delta_mean - 10.0) < 1e-9
    _passed(
        "criterion 5: bit-identical reruns; predation 0.1->0.4 lowers sheep mean "
        f"({baseline_mean:.1f} -> {treated_mean:.1f}); +10 shift detected"
    )


# -- 6 ------------------------------------------------------------------------


def _session(actions):
    events = tuple(
        ActionEvent(
            ts=T0 + timedelta(minutes=i),
            experiment="e1",
            group="A",
            participant="u",
            model="m",
            action=a,
            payload={"component": "c", "parameter": "lifespan"} if a == "P" else {},
        )
        for i, a in enumerate(actions)
    )
    return Session(id="s", participant="u", events=events, start=events[0].ts,
                   end=events[-1].ts)


def test_criterion_6_markov_suite():
    r = random.Random(6)
    checked_rows = 0
    for _ in range(300):
        actions = [r.choice("NSPCRE") for _ in range(r.randint(2, 25))]
        tm = transition_matrix(_session(actions))
        for row in tm.probs.values():
            assert abs(sum(row.values()) - 1.0) <= 1e-9
            checked_rows += 1
    assert checked_rows > 500
    assert classify_pattern(_session(["N", "S", "P", "S", "P"])) == "Observation"
    assert classify_pattern(_session(["N", "C", "C", "S"])) == "Construction"
    assert classify_pattern(_session(["N", "C", "S", "P", "R", "S"])) == "Exploration"
    _passed(
        f"criterion 6: {checked_rows} probability rows sum to 1 +/- 1e-9; "
        "canonical sequences classify correctly"
    )


# -- 7 ------------------------------------------------------------------------


def test_criterion_7_guided_vs_unguided_reproduction():
    started = time.monotonic()
    seeds = range(7, 18)  # 11 seeds
    gaps, guided_p1, checks = [], [], []
    for seed in seeds:
        script = ScenarioScript(seed=seed, learners=20, phases=(("Phase I", 1), ("Phase II", 1)))
        result = run_scenario(script, unguided_policy(), guided_policy())
        cov = {(c["group"], c["phase"]): c["pct"] for c in result.report["coverage"]}
        foc = {(f["group"], f["phase"]): f["pct"] for f in result.report["focus"]}
        a, b = result.group_a, result.group_b
        gaps.append(cov[(a, "Phase I")] - cov[(b, "Phase I")])
        guided_p1.append(foc[(b, "Phase I")])
        checks.append(
            foc[(b, "Phase I")] >= foc[(a, "Phase I")]
            and foc[(b, "Phase II")] >= foc[(a, "Phase II")]
        )
    median_gap = statistics.median(gaps)
    assert median_gap > 0, gaps
    assert all(p >= 70.0 for p in guided_p1), guided_p1
    assert all(checks)
    elapsed = time.monotonic() - started
    assert elapsed < 120.0, f"scenario sweep took {elapsed:.1f}s"
    _passed(
        "criterion 7: median phase-I coverage gap (unguided - guided) = "
        f"{median_gap:.2f} > 0; guided focus share min {min(guided_p1):.2f}% >= 70%; "
        f"guided >= unguided in both phases ({elapsed:.0f}s)"
    )


# -- 8 ------------------------------------------------------------------------


def test_criterion_8_round_trips(tmp_path):
    r = random.Random(8)
    events = []
    for i in range(10_000):
        action = r.choice("NSPCRE")
        payload = {"custom": i, "nested": {"deep": [1, 2, 3]}}
        if action == "P":
            payload.update({"component": f"c{r.randint(0, 5)}", "parameter": "lifespan",
                            "old": r.randint(1, 9), "new": r.randint(1, 9)})
        events.append(
            ActionEvent(
                ts=T0 + timedelta(seconds=i * 7),
                experiment="e1",
                group=r.choice(["A", "B"]),
                participant=f"u{r.randint(0, 30)}",
                model=f"m{r.randint(0, 40)}",
                action=action,
                payload=payload,
                seq=i + 1,
            )
        )
    text = export_jsonl(events)
    assert import_jsonl(text) == events
    assert export_jsonl(import_jsonl(text)) == text

    script = ScenarioScript(seed=88, learners=3, phases=(("Phase I", 1), ("Phase II", 1)))
    result = run_scenario(script, unguided_policy(), guided_policy(),
                          out_dir=tmp_path / "bundle")
    assert canonical_json(replay(result.bundle_dir)) == result.report_json

    for name in ("kudzu", "wolf-sheep-grass"):
        model = load_exemplar(name)
        assert model_to_json(model_from_json(model_to_json(model))) == model_to_json(model)
    _passed(
        "criterion 8: 10^4-event jsonl round-trip lossless; replay(export(run)) "
        "byte-equal; model JSON canonical"
    )


# -- 9 ------------------------------------------------------------------------


def _random_valid_model(r):
    m = new_model("rnd", "u")
    n_biotic = r.randint(1, 5)
    n_abiotic = r.randint(0, 2)
    for i in range(n_biotic):
        m = add_component(m, f"b{i}", "biotic")
    for i in range(n_abiotic):
        m = add_component(m, f"a{i}", "abiotic")
    biotic = [c.id for c in m.components if c.kind == "biotic"]
    abiotic = [c.id for c in m.components if c.kind == "abiotic"]
    triples = set()
    for _ in range(r.randint(0, 6)):
        kind = r.choice(["consumes", "produces", "destroys"])
        if kind == "consumes":
            source, target = r.choice(biotic), r.choice(biotic + abiotic)
        elif kind == "produces":
            if not abiotic:
                continue
            source, target = r.choice(biotic), r.choice(abiotic)
        else:
            if not abiotic:
                continue
            source, target = r.choice(abiotic), r.choice(biotic)
        if source == target or (source, target, kind) in triples:
            continue
        triples.add((source, target, kind))
        m = add_relationship(m, source, target, kind, rate=round(r.random(), 3))
    return m


def test_criterion_9_metric_identities():
    assert model_complexity(load_exemplar("kudzu")) == 8
    assert model_variety(load_exemplar("wolf-sheep-grass")) == 4
    r = random.Random(9)
    for _ in range(1000):
        m = _random_valid_model(r)
        assert model_variety(m) <= model_complexity(m)
    _passed(
        "criterion 9: complexity(kudzu)=8, variety(wolf-sheep-grass)=4, "
        "variety <= complexity on 1000 random models"
    )
