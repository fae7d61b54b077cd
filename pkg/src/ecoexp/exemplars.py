"""Bundled template models participants can start from."""

from __future__ import annotations

import json
from importlib import resources

from .model import Model, ValidationError, model_from_doc

EXEMPLAR_FILES = {
    "kudzu": "kudzu.json",
    "wolf-sheep-grass": "wolf_sheep_grass.json",
}


class ExemplarLoadError(RuntimeError):
    pass


def _fixture_text(filename: str) -> str:
    ref = resources.files("ecoexp").joinpath("fixtures", "exemplars", filename)
    return ref.read_text(encoding="utf-8")


def load_exemplar(name: str) -> Model:
    if name not in EXEMPLAR_FILES:
        raise KeyError(f"no exemplar named {name!r}")
    text = _fixture_text(EXEMPLAR_FILES[name])
    try:
        return model_from_doc(json.loads(text))
    except (json.JSONDecodeError, ValidationError) as exc:
        raise ExemplarLoadError(f"corrupt exemplar fixture {name!r}: {exc}") from exc


def load_exemplars() -> list[Model]:
    return [load_exemplar(name) for name in sorted(EXEMPLAR_FILES)]
