"""Regenerate the bundled BIOS class log fixture.

Four participants work on the wolf-sheep-grass exemplar over two phases.
The parameter-change events are planned so the combined parameter space is
exactly 14 pairs, with 11 explored in Phase I (78.57%) and 10 in Phase II
(71.43%).
"""

from __future__ import annotations

import pathlib
import shutil
import sys
from datetime import datetime, timezone

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from fastapi.testclient import TestClient  # noqa: E402

from ecoexp.bundle import write_bundle  # noqa: E402
from ecoexp.harness import SimulatedClock  # noqa: E402
from ecoexp.service import ServiceConfig, Workspace, create_app  # noqa: E402

OUT_DIR = pathlib.Path(__file__).resolve().parents[1] / "src" / "ecoexp" / "fixtures" / "bios"

PHASE_I_START = datetime(2022, 2, 1, tzinfo=timezone.utc)

# (participant, component name | "rate", parameter, value); grouped per phase.
# Phase I covers rows 1-11 of the 14-pair space, Phase II rows 5-14.
PHASE_I_CHANGES = [
    ("s1", "Canis lupus", "lifespan", 48),
    ("s1", "Canis lupus", "offspring_count", 4),
    ("s1", "Canis lupus", "reproductive_interval", 6),
    ("s2", "Canis lupus", "reproductive_maturity", 10),
    ("s2", "Canis lupus", "starting_population", 30),
    ("s2", "rate", None, 0.25),
    ("s3", "Grass", "body_mass", 0.2),
    ("s3", "Grass", "lifespan", 10),
    ("s3", "Grass", "minimum_population", 80),
    ("s4", "Grass", "starting_population", 900),
    ("s4", "Ovis aries", "body_mass", 60.0),
    # repeat visits to already-explored pairs (set semantics keeps them at 11)
    ("s1", "Canis lupus", "lifespan", 36),
    ("s4", "rate", None, 0.05),
]
PHASE_II_CHANGES = [
    ("s1", "Canis lupus", "starting_population", 10),
    ("s1", "rate", None, 0.4),
    ("s1", "Grass", "body_mass", 0.15),
    ("s2", "Grass", "lifespan", 14),
    ("s2", "Grass", "minimum_population", 40),
    ("s2", "Grass", "starting_population", 700),
    ("s3", "Ovis aries", "body_mass", 52.0),
    ("s3", "Ovis aries", "lifespan", 30),
    ("s4", "Ovis aries", "offspring_count", 2),
    ("s4", "Ovis aries", "starting_population", 150),
    ("s4", "Ovis aries", "starting_population", 200),
]


def main():
    clock = SimulatedClock(PHASE_I_START.replace(hour=9))
    ws = Workspace(ServiceConfig(researcher_token="fixture", default_seed=4401), clock=clock)
    with TestClient(create_app(ws)) as client:
        auth = {"Authorization": "Bearer fixture"}
        created = client.post(
            "/researcher/experiments",
            json={
                "name": "BIOS 4401 guidance study",
                "mode": "manual",
                "seed": 4401,
                "groups": [{"flags": _all_on()}, {"flags": _all_on()}],
                "phases": [
                    {"name": "Phase I", "start": "2022-02-01T00:00:00Z", "end": "2022-03-01T00:00:00Z"},
                    {"name": "Phase II", "start": "2022-04-01T00:00:00Z", "end": "2022-05-01T00:00:00Z"},
                ],
            },
            headers=auth,
        ).json()
        experiment_id = created["experiment"]["id"]
        group_a = created["experiment"]["groups"][0]["group_id"]

        for phase_start, changes in (
            (datetime(2022, 2, 7, 13, 0, tzinfo=timezone.utc), PHASE_I_CHANGES),
            (datetime(2022, 4, 5, 13, 0, tzinfo=timezone.utc), PHASE_II_CHANGES),
        ):
            clock.jump_to(phase_start)
            sessions: dict[str, dict] = {}
            for participant, component, parameter, value in changes:
                if participant not in sessions:
                    clock.advance_minutes(45)
                    joined = client.get(
                        "/researcher/join-experiment",
                        params={"group": group_a, "participant": participant},
                    ).json()
                    headers = {"Authorization": f"Bearer {joined['token']}"}
                    clock.advance_minutes(2)
                    model = client.post(
                        "/models", json={"exemplar": "wolf-sheep-grass"}, headers=headers
                    ).json()
                    clock.advance_minutes(3)
                    _simulate(client, headers, model["id"])
                    sessions[participant] = {"headers": headers, "model": model}
                state = sessions[participant]
                clock.advance_minutes(4)
                _change(client, state, component, parameter, value)
                clock.advance_minutes(3)
                _simulate(client, state["headers"], state["model"]["id"])

        write_bundle(ws, experiment_id, OUT_DIR)
    print(f"wrote fixture bundle to {OUT_DIR}")


def _all_on():
    return {
        "advanced_parameters": True,
        "cloning": True,
        "exemplar_models": True,
        "lookup_eol": True,
        "simulation": True,
    }


def _simulate(client, headers, model_id):
    response = client.post(
        f"/models/{model_id}/simulate",
        json={"runs": 10, "steps": 24, "seed": 4401},
        headers=headers,
    )
    assert response.status_code == 201, response.text


def _change(client, state, component, parameter, value):
    model = state["model"]
    if component == "rate":
        rel = next(
            r
            for r in model["relationships"]
            if r["kind"] == "consumes" and r["source"].startswith("v")
        )
        body = {"relationship": rel["id"], "value": value}
    else:
        cid = next(c["id"] for c in model["components"] if c["name"] == component)
        body = {"component": cid, "parameter": parameter, "value": value}
    response = client.post(
        f"/models/{model['id']}/parameters", json=body, headers=state["headers"]
    )
    assert response.status_code == 200, response.text


if __name__ == "__main__":
    if OUT_DIR.exists():
        shutil.rmtree(OUT_DIR)
    main()
