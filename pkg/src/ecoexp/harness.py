"""Desk-scale reproduction: scripted learners drive the full stack in-process.

Scenarios run against the real HTTP surface (an in-process test client), so
gating, capture, and analytics are exercised end to end. Everything is
seeded: the simulated clock, policy decisions, and simulation batches, which
makes two runs of the same script byte-identical.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from fastapi.testclient import TestClient

from . import rng
from .analytics import DEFAULT_FOCUS_SET
from .bundle import write_bundle
from .experiment import FEATURE_FLAGS, all_enabled
from .service import ServiceConfig, Workspace, create_app
from .util import canonical_json, format_ts

SCENARIO_EPOCH = datetime(2026, 1, 5, 9, 0, tzinfo=timezone.utc)
PHASE_LENGTH_DAYS = 30
PHASE_SPACING_DAYS = 45  # paper-style phases at least 30 days apart

# Species available for structural additions; all present in the trait fixture
SPECIES_POOL = (
    "Vulpes vulpes",
    "Lepus europaeus",
    "Cervus elaphus",
    "Trifolium repens",
    "Rattus norvegicus",
    "Apis mellifera",
)

_BASIC_FOCUS_PARAMS = (
    "starting_population",
    "minimum_population",
    "offspring_count",
    "reproductive_interval",
    "reproductive_maturity",
)
_BIOTIC_FREE_PARAMS = (
    "lifespan",
    "body_mass",
    "starting_population",
    "offspring_count",
    "reproductive_maturity",
    "reproductive_interval",
    "minimum_population",
)
_BIOTIC_ADVANCED_PARAMS = (
    "photosynthesis_rate",
    "assimilation_efficiency",
    "move_velocity",
    "respiratory_rate",
    "move_direction",
    "carbon_biomass",
)
_ABIOTIC_PARAMS = ("amount", "minimum_amount", "growth_rate")


class SimulatedClock:
    def __init__(self, start: datetime = SCENARIO_EPOCH):
        self.now = start

    def __call__(self) -> datetime:
        return self.now

    def advance_minutes(self, minutes: float) -> None:
        self.now += timedelta(minutes=minutes)

    def jump_to(self, when: datetime) -> None:
        if when > self.now:
            self.now = when


@dataclass(frozen=True)
class LearnerPolicy:
    kind: str  # guided | unguided
    focus_set: frozenset = DEFAULT_FOCUS_SET
    focus_probability: float = 0.9
    changes_per_session_mean: float = 4.0
    structural_edit_probability: float = 0.15
    eol_probability: float = 0.1
    simulate_between_changes_probability: float = 0.5
    clone_probability: float = 0.05

    def __post_init__(self):
        for p in (
            self.focus_probability,
            self.structural_edit_probability,
            self.eol_probability,
            self.simulate_between_changes_probability,
            self.clone_probability,
        ):
            if not 0.0 <= p <= 1.0:
                raise ValueError("policy probabilities must lie in [0, 1]")
        if self.changes_per_session_mean <= 0:
            raise ValueError("changes-per-session mean must be positive")


def guided_policy(**overrides) -> LearnerPolicy:
    return LearnerPolicy(kind="guided", changes_per_session_mean=4.0, **overrides)


def unguided_policy(**overrides) -> LearnerPolicy:
    return LearnerPolicy(
        kind="unguided",
        focus_probability=0.0,
        changes_per_session_mean=8.0,
        structural_edit_probability=0.25,
        eol_probability=0.15,
        simulate_between_changes_probability=0.4,
        **overrides,
    )


@dataclass(frozen=True)
class ScenarioScript:
    phases: tuple[tuple[str, int], ...] = (("Phase I", 1), ("Phase II", 1))
    learners: int = 20  # per group
    base_model: str = "wolf-sheep-grass"
    seed: int = 7
    flags_a: dict = field(default_factory=all_enabled)
    flags_b: dict = field(default_factory=all_enabled)
    sim_runs: int = 3
    sim_steps: int = 12

    def __post_init__(self):
        if not self.phases:
            raise ValueError("a scenario needs at least one phase")
        if self.learners < 1:
            raise ValueError("a scenario needs at least one learner per group")


def script_from_doc(doc: dict) -> tuple[ScenarioScript, LearnerPolicy, LearnerPolicy]:
    script = ScenarioScript(
        phases=tuple((p["name"], int(p.get("sessions", 1))) for p in doc.get("phases", []))
        or ScenarioScript().phases,
        learners=int(doc.get("learners", 20)),
        base_model=doc.get("base_model", "wolf-sheep-grass"),
        seed=int(doc.get("seed", 7)),
        flags_a={**all_enabled(), **doc.get("flags", {}).get("A", {})},
        flags_b={**all_enabled(), **doc.get("flags", {}).get("B", {})},
        sim_runs=int(doc.get("sim_runs", 3)),
        sim_steps=int(doc.get("sim_steps", 12)),
    )
    policies = doc.get("policies", {})

    def build(policy_doc, default):
        if not policy_doc:
            return default
        kind = policy_doc.get("kind", default.kind)
        base = guided_policy() if kind == "guided" else unguided_policy()
        known = {
            k: v
            for k, v in policy_doc.items()
            if k
            in (
                "focus_probability",
                "changes_per_session_mean",
                "structural_edit_probability",
                "eol_probability",
                "simulate_between_changes_probability",
                "clone_probability",
            )
        }
        return replace(base, **known)

    return script, build(policies.get("A"), unguided_policy()), build(policies.get("B"), guided_policy())


@dataclass
class ScenarioResult:
    experiment_id: str
    workspace: Workspace
    client: "TestClient"
    report: dict
    report_json: str
    bundle_dir: Optional[Path]
    group_a: str
    group_b: str


class _Learner:
    """One participant's API session: token, model ids, cached flags."""

    def __init__(self, participant: str, group_url_param: str):
        self.participant = participant
        self.group_param = group_url_param
        self.token = ""
        self.flags: dict = {}
        self.model_id: Optional[str] = None

    def headers(self) -> dict:
        return {"Authorization": f"Bearer {self.token}"}


def _expect(response, *statuses):
    if response.status_code not in statuses:
        raise RuntimeError(
            f"{response.request.method} {response.request.url} -> "
            f"{response.status_code}: {response.text}"
        )
    return response.json() if response.content else None


def run_scenario(
    script: ScenarioScript,
    policy_a: LearnerPolicy,
    policy_b: LearnerPolicy,
    out_dir=None,
) -> ScenarioResult:
    from fastapi.testclient import TestClient

    clock = SimulatedClock()
    ws = Workspace(
        ServiceConfig(researcher_token="harness-researcher", default_seed=script.seed),
        clock=clock,
    )
    client = TestClient(create_app(ws))
    auth = {"Authorization": "Bearer harness-researcher"}

    phase_windows = []
    for i, (name, _sessions) in enumerate(script.phases):
        start = SCENARIO_EPOCH + timedelta(days=i * PHASE_SPACING_DAYS)
        phase_windows.append(
            {
                "name": name,
                "start": format_ts(start),
                "end": format_ts(start + timedelta(days=PHASE_LENGTH_DAYS)),
            }
        )

    with client:  # one transport portal for the whole scenario
        created = _expect(
            client.post(
                "/researcher/experiments",
                json={
                    "name": f"scenario-{script.base_model}-{script.seed}",
                    "mode": "manual",
                    "seed": script.seed,
                    "groups": [{"flags": script.flags_a}, {"flags": script.flags_b}],
                    "phases": phase_windows,
                },
                headers=auth,
            ),
            201,
        )
        experiment_id = created["experiment"]["id"]
        group_a, group_b = [g["group_id"] for g in created["experiment"]["groups"]]

        learners = [
            _Learner(f"A-{i + 1}", group_a) for i in range(script.learners)
        ] + [_Learner(f"B-{i + 1}", group_b) for i in range(script.learners)]
        policies = {group_a: policy_a, group_b: policy_b}

        pacing = random.Random(script.seed)  # clock jumps between session blocks

        for phase_index, (_name, sessions) in enumerate(script.phases):
            phase_start = SCENARIO_EPOCH + timedelta(days=phase_index * PHASE_SPACING_DAYS)
            clock.jump_to(phase_start + timedelta(hours=1))
            for session_index in range(sessions):
                for learner in learners:
                    clock.advance_minutes(pacing.randint(35, 90))
                    _run_session(
                        client,
                        clock,
                        script,
                        learner,
                        policies,
                        phase_index,
                        session_index,
                    )

        report_response = client.get(
            f"/researcher/experiments/{experiment_id}/analytics", headers=auth
        )
        report_json = report_response.text
        report = report_response.json()

    bundle_dir = None
    if out_dir is not None:
        bundle_dir = write_bundle(ws, experiment_id, out_dir)

    return ScenarioResult(
        experiment_id=experiment_id,
        workspace=ws,
        client=client,
        report=report,
        report_json=report_json,
        bundle_dir=bundle_dir,
        group_a=group_a,
        group_b=group_b,
    )


def _run_session(client, clock, script, learner, policies, phase_index, session_index):
    r = random.Random(
        rng.u64(script.seed, phase_index, session_index, learner.participant, 0)
    )
    joined = _expect(
        client.get(
            "/researcher/join-experiment",
            params={"group": learner.group_param, "participant": learner.participant},
        ),
        200,
    )
    learner.token = joined["token"]
    learner.flags = joined["flags"]
    policy = policies[joined["group"]]
    clock.advance_minutes(r.randint(1, 5))

    model_doc = _bootstrap_model(client, clock, script, learner, r)
    learner.model_id = model_doc["id"]

    if policy.kind == "guided":
        _scripted_hypotheses(client, clock, script, learner, r)
        model_doc = _get_model(client, learner)

    n_changes = max(1, int(round(r.gauss(policy.changes_per_session_mean, 1.0))))
    for _ in range(n_changes):
        roll = r.random()
        if roll < policy.structural_edit_probability:
            model_doc = _structural_edit(client, clock, learner, model_doc, r) or model_doc
        elif roll < policy.structural_edit_probability + policy.eol_probability:
            _eol_lookup(client, clock, learner, model_doc, r)
        else:
            # value sampling never reads the current doc, so no refetch needed
            _parameter_change(client, clock, learner, model_doc, policy, r)
        if r.random() < policy.simulate_between_changes_probability:
            _simulate(client, clock, script, learner, r)
        if r.random() < policy.clone_probability and learner.flags.get("cloning"):
            clock.advance_minutes(r.randint(1, 5))
            copied = _expect(
                client.post(f"/models/{learner.model_id}/clone", headers=learner.headers()),
                201,
            )
            learner.model_id = copied["id"]
            model_doc = copied


def _get_model(client, learner):
    return _expect(client.get(f"/models/{learner.model_id}", headers=learner.headers()), 200)


def _bootstrap_model(client, clock, script, learner, r):
    clock.advance_minutes(r.randint(1, 5))
    if learner.flags.get("exemplar_models"):
        return _expect(
            client.post(
                "/models", json={"exemplar": script.base_model}, headers=learner.headers()
            ),
            201,
        )
    # exemplars gated off: build a small food chain from scratch
    doc = _expect(
        client.post(
            "/models",
            json={"name": f"scratch {learner.participant}"},
            headers=learner.headers(),
        ),
        201,
    )
    chain = [
        ("Trifolium repens", "biotic", {"photosynthesis_rate": 0.7, "offspring_count": 0}),
        ("Lepus europaeus", "biotic", None),
        ("Vulpes vulpes", "biotic", None),
    ]
    ids = []
    for name, kind, params in chain:
        clock.advance_minutes(r.randint(1, 5))
        doc = _expect(
            client.put(
                f"/models/{doc['id']}",
                json={"add_component": {"name": name, "kind": kind, "params": params}},
                headers=learner.headers(),
            ),
            200,
        )
        ids.append(next(c["id"] for c in doc["components"] if c["name"] == name))
    for source, target, rate in ((ids[1], ids[0], 1.0), (ids[2], ids[1], 0.2)):
        clock.advance_minutes(r.randint(1, 5))
        doc = _expect(
            client.post(
                f"/models/{doc['id']}/relationships",
                json={"source": source, "target": target, "kind": "consumes", "rate": rate},
                headers=learner.headers(),
            ),
            201,
        )
    return doc


def _scripted_hypotheses(client, clock, script, learner, r):
    """Encode the guided instructions: reproduction, predator population, and
    consumption-rate changes, each followed by a simulation run when allowed."""
    doc = _get_model(client, learner)
    consumes = [rel for rel in doc["relationships"] if rel["kind"] == "consumes"]
    if not consumes:
        return
    rel = consumes[0]
    by_id = {c["id"]: c for c in doc["components"]}
    prey = by_id.get(rel["target"])
    consumer = by_id.get(rel["source"])

    steps = []
    if prey is not None and prey["kind"] == "biotic":
        steps.append(("component", prey["id"], "offspring_count",
                      max(0, int(prey["params"]["offspring_count"]) - 1), "h1-reproduction"))
        steps.append(("component", prey["id"], "reproductive_interval",
                      min(60, int(prey["params"]["reproductive_interval"]) + r.randint(1, 6)),
                      "h1-reproduction"))
    if consumer is not None and consumer["kind"] == "biotic":
        steps.append(("component", consumer["id"], "starting_population",
                      int(consumer["params"]["starting_population"]) + r.randint(10, 100),
                      "h2-population"))
    steps.append(("relationship", rel["id"], None, round(r.uniform(0.0, 0.6), 3), "h3-consumption"))

    for kind, target, param, value, note in steps:
        clock.advance_minutes(r.randint(1, 5))
        if kind == "component":
            body = {"component": target, "parameter": param, "value": value, "note": note}
        else:
            body = {"relationship": target, "value": value, "note": note}
        _expect(
            client.post(
                f"/models/{learner.model_id}/parameters", json=body, headers=learner.headers()
            ),
            200,
        )
        if learner.flags.get("simulation"):
            _simulate(client, clock, script, learner, r)


def _structural_edit(client, clock, learner, model_doc, r):
    clock.advance_minutes(r.randint(1, 5))
    existing = {c["name"] for c in model_doc["components"]}
    candidates = [s for s in SPECIES_POOL if s not in existing]
    if candidates and (len(existing) < 3 or r.random() < 0.7):
        name = r.choice(candidates)
        params = {"photosynthesis_rate": 0.7, "offspring_count": 0} if name == "Trifolium repens" else None
        return _expect(
            client.put(
                f"/models/{learner.model_id}",
                json={"add_component": {"name": name, "kind": "biotic", "params": params}},
                headers=learner.headers(),
            ),
            200,
        )
    added = [c for c in model_doc["components"] if c["name"] in SPECIES_POOL]
    if added:
        victim = r.choice(added)
        return _expect(
            client.put(
                f"/models/{learner.model_id}",
                json={"remove_component": victim["id"]},
                headers=learner.headers(),
            ),
            200,
        )
    return None


def _eol_lookup(client, clock, learner, model_doc, r):
    if not learner.flags.get("lookup_eol"):
        return
    biotic = [c for c in model_doc["components"] if c["kind"] == "biotic"]
    if not biotic:
        return
    component = r.choice(biotic)
    clock.advance_minutes(r.randint(1, 5))
    found = client.get(
        "/traits", params={"name": component["name"]}, headers=learner.headers()
    )
    if found.status_code != 200:
        return
    _expect(
        client.post(
            f"/models/{learner.model_id}/apply-traits",
            json={"component": component["id"]},
            headers=learner.headers(),
        ),
        200,
    )


def _sample_value(param: str, r) -> object:
    if param in ("lifespan", "reproductive_maturity", "reproductive_interval"):
        return r.randint(1, 60)
    if param in ("starting_population", "offspring_count", "minimum_population"):
        return r.randint(0, 500)
    if param in ("photosynthesis_rate", "assimilation_efficiency"):
        return round(r.uniform(0.0, 1.0), 3)
    if param == "growth_rate":
        return round(r.uniform(-0.5, 2.0), 3)
    if param in ("amount", "minimum_amount"):
        return r.randint(0, 5000)
    if param == "body_mass":
        return round(r.uniform(0.01, 500.0), 3)
    return round(r.uniform(0.0, 10.0), 3)  # inert placeholders


def _parameter_change(client, clock, learner, model_doc, policy, r):
    clock.advance_minutes(r.randint(1, 5))
    components = model_doc["components"]
    relationships = model_doc["relationships"]
    biotic = [c for c in components if c["kind"] == "biotic"]

    focused = policy.focus_probability > 0 and r.random() < policy.focus_probability
    if focused and biotic:
        choices = [("rate", rel) for rel in relationships if rel["kind"] == "consumes"]
        choices += [("component", (c, p)) for c in biotic for p in _BASIC_FOCUS_PARAMS]
        kind, pick = r.choice(choices)
    else:
        choices = [("rate", rel) for rel in relationships]
        for c in components:
            if c["kind"] == "biotic":
                params = _BIOTIC_FREE_PARAMS + (
                    _BIOTIC_ADVANCED_PARAMS if learner.flags.get("advanced_parameters") else ()
                )
            else:
                params = _ABIOTIC_PARAMS
            choices += [("component", (c, p)) for p in params]
        kind, pick = r.choice(choices)

    if kind == "rate":
        body = {"relationship": pick["id"], "value": round(r.uniform(0.0, 1.0), 3)}
    else:
        component, param = pick
        body = {"component": component["id"], "parameter": param, "value": _sample_value(param, r)}
    _expect(
        client.post(
            f"/models/{learner.model_id}/parameters", json=body, headers=learner.headers()
        ),
        200,
    )


def _simulate(client, clock, script, learner, r):
    if not learner.flags.get("simulation"):
        return
    clock.advance_minutes(r.randint(1, 5))
    _expect(
        client.post(
            f"/models/{learner.model_id}/simulate",
            json={
                "runs": script.sim_runs,
                "steps": script.sim_steps,
                "seed": r.getrandbits(32),
            },
            headers=learner.headers(),
        ),
        201,
    )


def save_scenario_outputs(result: ScenarioResult, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if result.bundle_dir is None:
        write_bundle(result.workspace, result.experiment_id, out)
    (out / "analytics.json").write_text(result.report_json, encoding="utf-8")
    return out
