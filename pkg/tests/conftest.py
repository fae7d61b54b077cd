from __future__ import annotations

from datetime import datetime, timezone

import pytest
from fastapi.testclient import TestClient

from ecoexp.experiment import FEATURE_FLAGS
from ecoexp.harness import SimulatedClock
from ecoexp.service import ServiceConfig, Workspace, create_app

RESEARCHER_TOKEN = "test-researcher"


def all_flags(**overrides) -> dict:
    flags = {f: True for f in FEATURE_FLAGS}
    flags.update(overrides)
    return flags


@pytest.fixture()
def clock():
    return SimulatedClock(datetime(2026, 3, 2, 9, 0, tzinfo=timezone.utc))


@pytest.fixture()
def workspace(clock):
    return Workspace(ServiceConfig(researcher_token=RESEARCHER_TOKEN), clock=clock)


@pytest.fixture()
def client(workspace):
    with TestClient(create_app(workspace)) as c:
        yield c


@pytest.fixture()
def researcher_auth():
    return {"Authorization": f"Bearer {RESEARCHER_TOKEN}"}


def make_experiment(client, researcher_auth, *, mode="manual", flags_a=None, flags_b=None,
                    phases=None, seed=11):
    body = {
        "name": "exp",
        "mode": mode,
        "seed": seed,
        "groups": [
            {"flags": flags_a or all_flags()},
            {"flags": flags_b or all_flags()},
        ],
    }
    if phases is not None:
        body["phases"] = phases
    response = client.post("/researcher/experiments", json=body, headers=researcher_auth)
    assert response.status_code == 201, response.text
    return response.json()


def join(client, group_id, participant):
    response = client.get(
        "/researcher/join-experiment", params={"group": group_id, "participant": participant}
    )
    assert response.status_code == 200, response.text
    doc = response.json()
    return doc, {"Authorization": f"Bearer {doc['token']}"}
