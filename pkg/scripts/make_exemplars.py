"""Regenerate the bundled exemplar model fixtures in canonical form."""

from __future__ import annotations

import pathlib
import sys
from datetime import datetime, timezone

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from ecoexp.model import (  # noqa: E402
    Model,
    Provenance,
    add_component,
    add_relationship,
    model_to_json,
    validate,
)

FIXTURE_DIR = pathlib.Path(__file__).resolve().parents[1] / "src" / "ecoexp" / "fixtures" / "exemplars"
EPOCH = datetime(2022, 1, 1, tzinfo=timezone.utc)


def _seq(prefix: str):
    counter = iter(range(1, 100))
    return lambda: f"{prefix}{next(counter):02d}"


def wolf_sheep_grass() -> Model:
    ids = iter(
        ["wsg-grass", "wsg-sheep", "wsg-wolf", "wsg-rel-sheep-grass", "wsg-rel-wolf-sheep"]
    )
    gen = lambda: next(ids)  # noqa: E731
    m = Model(
        id="exemplar-wolf-sheep-grass",
        name="Wolf, sheep, and grass",
        owner="library",
        provenance=Provenance.exemplar("wolf-sheep-grass"),
        created_at=EPOCH,
        updated_at=EPOCH,
    )
    m = add_component(
        m,
        "Grass",
        "biotic",
        {
            "lifespan": 12,
            "body_mass": 0.1,
            "starting_population": 800,
            "offspring_count": 0,
            "reproductive_maturity": 1,
            "reproductive_interval": 6,
            "minimum_population": 50,
            "photosynthesis_rate": 0.8,
        },
        id_gen=gen,
        now=EPOCH,
    )
    m = add_component(
        m,
        "Ovis aries",
        "biotic",
        {
            "lifespan": 24,
            "body_mass": 45.0,
            "starting_population": 100,
            "offspring_count": 1,
            "reproductive_maturity": 6,
            "reproductive_interval": 12,
            "minimum_population": 0,
        },
        id_gen=gen,
        now=EPOCH,
    )
    m = add_component(
        m,
        "Canis lupus",
        "biotic",
        {
            "lifespan": 60,
            "body_mass": 40.0,
            "starting_population": 20,
            "offspring_count": 2,
            "reproductive_maturity": 12,
            "reproductive_interval": 12,
            "minimum_population": 0,
        },
        id_gen=gen,
        now=EPOCH,
    )
    m = add_relationship(m, "wsg-sheep", "wsg-grass", "consumes", rate=1.0, id_gen=gen, now=EPOCH)
    m = add_relationship(m, "wsg-wolf", "wsg-sheep", "consumes", rate=0.1, id_gen=gen, now=EPOCH)
    return m


def kudzu() -> Model:
    ids = iter(
        [
            "kz-bug",
            "kz-hornbeam",
            "kz-kudzu",
            "kz-light",
            "kz-rel-bug-hornbeam",
            "kz-rel-bug-kudzu",
            "kz-rel-hornbeam-light",
            "kz-rel-kudzu-light",
        ]
    )
    gen = lambda: next(ids)  # noqa: E731
    m = Model(
        id="exemplar-kudzu",
        name="Kudzu invasion",
        owner="library",
        provenance=Provenance.exemplar("kudzu"),
        created_at=EPOCH,
        updated_at=EPOCH,
    )
    m = add_component(
        m,
        "Kudzu bug",
        "biotic",
        {
            "lifespan": 6,
            "body_mass": 0.001,
            "starting_population": 150,
            "offspring_count": 4,
            "reproductive_maturity": 1,
            "reproductive_interval": 1,
            "minimum_population": 0,
            "assimilation_efficiency": 0.8,
        },
        id_gen=gen,
        now=EPOCH,
    )
    m = add_component(
        m,
        "American hornbeam",
        "biotic",
        {
            "lifespan": 240,
            "body_mass": 500.0,
            "starting_population": 80,
            "offspring_count": 1,
            "reproductive_maturity": 24,
            "reproductive_interval": 12,
            "minimum_population": 5,
        },
        id_gen=gen,
        now=EPOCH,
    )
    m = add_component(
        m,
        "Kudzu",
        "biotic",
        {
            "lifespan": 18,
            "body_mass": 0.5,
            "starting_population": 300,
            "offspring_count": 3,
            "reproductive_maturity": 2,
            "reproductive_interval": 2,
            "minimum_population": 10,
        },
        id_gen=gen,
        now=EPOCH,
    )
    m = add_component(
        m,
        "Light",
        "abiotic",
        {"amount": 1000, "minimum_amount": 1000, "growth_rate": 0.0},
        id_gen=gen,
        now=EPOCH,
    )
    m = add_relationship(m, "kz-bug", "kz-hornbeam", "consumes", rate=0.3, id_gen=gen, now=EPOCH)
    m = add_relationship(m, "kz-bug", "kz-kudzu", "consumes", rate=0.8, id_gen=gen, now=EPOCH)
    m = add_relationship(m, "kz-hornbeam", "kz-light", "consumes", rate=1.0, id_gen=gen, now=EPOCH)
    m = add_relationship(m, "kz-kudzu", "kz-light", "consumes", rate=1.0, id_gen=gen, now=EPOCH)
    return m


def main():
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    for filename, model in [("wolf_sheep_grass.json", wolf_sheep_grass()), ("kudzu.json", kudzu())]:
        problems = validate(model)
        if problems:
            raise SystemExit(f"{filename}: {problems}")
        (FIXTURE_DIR / filename).write_text(model_to_json(model), encoding="utf-8")
        print(f"wrote {FIXTURE_DIR / filename}")


if __name__ == "__main__":
    main()
