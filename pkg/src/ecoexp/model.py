"""Conceptual ecology models: typed components, causal relationships, validation.

Models are plain values. Every operation returns a new model and leaves its
input untouched, so callers can hold onto old states (undo, cloning, event
payloads) without defensive copying.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime
from typing import Callable, Optional

from .util import format_ts, parse_ts, utc_now

BIOTIC = "biotic"
ABIOTIC = "abiotic"

CONSUMES = "consumes"
PRODUCES = "produces"
DESTROYS = "destroys"
RELATIONSHIP_KINDS = (CONSUMES, PRODUCES, DESTROYS)

BIOTIC_BASIC = (
    "lifespan",
    "body_mass",
    "starting_population",
    "offspring_count",
    "reproductive_maturity",
    "reproductive_interval",
    "minimum_population",
)
BIOTIC_ADVANCED = (
    "photosynthesis_rate",
    "assimilation_efficiency",
    "move_velocity",
    "respiratory_rate",
    "move_direction",
    "carbon_biomass",
)
ABIOTIC_PARAMS = ("amount", "minimum_amount", "growth_rate")

BIOTIC_PARAMS = BIOTIC_BASIC + BIOTIC_ADVANCED

PARAM_DEFAULTS = {
    "lifespan": 24,
    "body_mass": 1.0,
    "starting_population": 100,
    "offspring_count": 2,
    "reproductive_maturity": 6,
    "reproductive_interval": 6,
    "minimum_population": 0,
    "photosynthesis_rate": 0.0,
    "assimilation_efficiency": 1.0,
    "move_velocity": 0.0,
    "respiratory_rate": 0.0,
    "move_direction": 0.0,
    "carbon_biomass": 0.0,
    "amount": 1000,
    "minimum_amount": 0,
    "growth_rate": 0.0,
}
DEFAULT_INTERACTION_RATE = 0.1

_COUNT_PARAMS = {"starting_population", "offspring_count", "minimum_population"}
_MONTH_PARAMS = {"lifespan", "reproductive_maturity", "reproductive_interval"}
_UNIT_RATE_PARAMS = {"photosynthesis_rate", "assimilation_efficiency"}
_INERT_PARAMS = {"move_velocity", "respiratory_rate", "move_direction", "carbon_biomass"}


class ValidationError(ValueError):
    """Raised when an operation's preconditions fail."""


def params_for_kind(kind: str) -> tuple[str, ...]:
    return BIOTIC_PARAMS if kind == BIOTIC else ABIOTIC_PARAMS


def check_param_value(name: str, value) -> None:
    """Range rules per parameter family; raises ValidationError."""
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"parameter {name!r} must be numeric, got {value!r}")
    if name in _COUNT_PARAMS:
        if value < 0 or int(value) != value:
            raise ValidationError(f"{name} must be a non-negative integer, got {value!r}")
    elif name in _MONTH_PARAMS:
        if value < 1 or int(value) != value:
            raise ValidationError(f"{name} must be an integer number of months >= 1, got {value!r}")
    elif name in _UNIT_RATE_PARAMS or name == "interaction_rate":
        if not 0.0 <= value <= 1.0:
            raise ValidationError(f"{name} must lie in [0, 1], got {value!r}")
    elif name == "growth_rate":
        if not -1.0 <= value <= 10.0:
            raise ValidationError(f"growth_rate must lie in [-1, 10], got {value!r}")
    elif name in ("body_mass", "amount", "minimum_amount"):
        if value < 0:
            raise ValidationError(f"{name} must be non-negative, got {value!r}")
    elif name in _INERT_PARAMS:
        pass  # stored and reported, dynamically inert
    else:
        raise ValidationError(f"unknown parameter {name!r}")


def default_id() -> str:
    return uuid.uuid4().hex[:12]


IdGen = Callable[[], str]


@dataclass(frozen=True)
class Component:
    id: str
    name: str
    kind: str  # biotic | abiotic
    params: dict

    def param(self, name: str):
        return self.params.get(name, PARAM_DEFAULTS.get(name))


@dataclass(frozen=True)
class Relationship:
    id: str
    source: str
    target: str
    kind: str  # consumes | produces | destroys
    rate: float


@dataclass(frozen=True)
class Provenance:
    kind: str  # fresh | cloned_from | exemplar
    ref: Optional[str] = None

    @staticmethod
    def fresh() -> "Provenance":
        return Provenance("fresh")

    @staticmethod
    def cloned_from(model_id: str) -> "Provenance":
        return Provenance("cloned_from", model_id)

    @staticmethod
    def exemplar(name: str) -> "Provenance":
        return Provenance("exemplar", name)


@dataclass(frozen=True)
class Model:
    id: str
    name: str
    owner: str
    components: tuple[Component, ...] = ()
    relationships: tuple[Relationship, ...] = ()
    provenance: Provenance = field(default_factory=Provenance.fresh)
    created_at: datetime = field(default_factory=utc_now)
    updated_at: datetime = field(default_factory=utc_now)

    def component(self, component_id: str) -> Component:
        for c in self.components:
            if c.id == component_id:
                return c
        raise ValidationError(f"unknown component {component_id!r}")

    def component_by_name(self, name: str) -> Component:
        for c in self.components:
            if c.name == name:
                return c
        raise ValidationError(f"no component named {name!r}")

    def relationship(self, rel_id: str) -> Relationship:
        for r in self.relationships:
            if r.id == rel_id:
                return r
        raise ValidationError(f"unknown relationship {rel_id!r}")


def _full_params(kind: str, overrides: Optional[dict]) -> dict:
    params = {name: PARAM_DEFAULTS[name] for name in params_for_kind(kind)}
    for name, value in (overrides or {}).items():
        if name not in params:
            raise ValidationError(f"parameter {name!r} is not a {kind} parameter")
        check_param_value(name, value)
        params[name] = value
    return params


def new_model(
    name: str,
    owner: str,
    id_gen: IdGen = default_id,
    now: Optional[datetime] = None,
) -> Model:
    if not name:
        raise ValidationError("model name must be non-empty")
    ts = now or utc_now()
    return Model(id=id_gen(), name=name, owner=owner, created_at=ts, updated_at=ts)


def add_component(
    model: Model,
    name: str,
    kind: str,
    params: Optional[dict] = None,
    id_gen: IdGen = default_id,
    now: Optional[datetime] = None,
) -> Model:
    if kind not in (BIOTIC, ABIOTIC):
        raise ValidationError(f"component kind must be biotic or abiotic, got {kind!r}")
    if not name:
        raise ValidationError("component name must be non-empty")
    if any(c.name == name for c in model.components):
        raise ValidationError(f"component name {name!r} already used in this model")
    comp = Component(id=id_gen(), name=name, kind=kind, params=_full_params(kind, params))
    return replace(
        model,
        components=model.components + (comp,),
        updated_at=now or utc_now(),
    )


def remove_component(model: Model, component_id: str, now: Optional[datetime] = None) -> Model:
    model.component(component_id)
    return replace(
        model,
        components=tuple(c for c in model.components if c.id != component_id),
        relationships=tuple(
            r for r in model.relationships if component_id not in (r.source, r.target)
        ),
        updated_at=now or utc_now(),
    )


def set_parameter(
    model: Model,
    component_id: str,
    param: str,
    value,
    now: Optional[datetime] = None,
) -> tuple[Model, object, object]:
    """Returns (model', old value, new value) for event payloads."""
    comp = model.component(component_id)
    if param not in params_for_kind(comp.kind):
        raise ValidationError(f"parameter {param!r} does not apply to {comp.kind} components")
    check_param_value(param, value)
    old = comp.params[param]
    updated = Component(comp.id, comp.name, comp.kind, {**comp.params, param: value})
    model2 = replace(
        model,
        components=tuple(updated if c.id == component_id else c for c in model.components),
        updated_at=now or utc_now(),
    )
    return model2, old, value


def _check_relationship_typing(model: Model, source_id: str, target_id: str, kind: str) -> None:
    source = model.component(source_id)
    target = model.component(target_id)
    if source_id == target_id:
        raise ValidationError("relationship source and target must differ")
    if kind == CONSUMES:
        if source.kind != BIOTIC:
            raise ValidationError("consumes requires a biotic source")
    elif kind == PRODUCES:
        if source.kind != BIOTIC or target.kind != ABIOTIC:
            raise ValidationError("produces requires a biotic source and abiotic target")
    elif kind == DESTROYS:
        if source.kind != ABIOTIC or target.kind != BIOTIC:
            raise ValidationError("destroys requires an abiotic source and biotic target")
    else:
        raise ValidationError(f"unknown relationship kind {kind!r}")


def add_relationship(
    model: Model,
    source_id: str,
    target_id: str,
    kind: str,
    rate: float = DEFAULT_INTERACTION_RATE,
    id_gen: IdGen = default_id,
    now: Optional[datetime] = None,
) -> Model:
    _check_relationship_typing(model, source_id, target_id, kind)
    check_param_value("interaction_rate", rate)
    if any(
        (r.source, r.target, r.kind) == (source_id, target_id, kind) for r in model.relationships
    ):
        raise ValidationError("duplicate relationship (source, target, kind)")
    rel = Relationship(id=id_gen(), source=source_id, target=target_id, kind=kind, rate=rate)
    return replace(
        model,
        relationships=model.relationships + (rel,),
        updated_at=now or utc_now(),
    )


def remove_relationship(model: Model, rel_id: str, now: Optional[datetime] = None) -> Model:
    model.relationship(rel_id)
    return replace(
        model,
        relationships=tuple(r for r in model.relationships if r.id != rel_id),
        updated_at=now or utc_now(),
    )


def set_relationship_rate(
    model: Model,
    rel_id: str,
    rate: float,
    now: Optional[datetime] = None,
) -> tuple[Model, float, float]:
    """Rate tweaks are parameter changes, not structural revisions."""
    rel = model.relationship(rel_id)
    check_param_value("interaction_rate", rate)
    updated = Relationship(rel.id, rel.source, rel.target, rel.kind, rate)
    model2 = replace(
        model,
        relationships=tuple(updated if r.id == rel_id else r for r in model.relationships),
        updated_at=now or utc_now(),
    )
    return model2, rel.rate, rate


def clone_model(
    model: Model,
    new_owner: str,
    id_gen: IdGen = default_id,
    now: Optional[datetime] = None,
    provenance: Optional[Provenance] = None,
) -> Model:
    """Deep copy with fresh ids; provenance points at the immediate parent."""
    ts = now or utc_now()
    id_map = {c.id: id_gen() for c in model.components}
    components = tuple(
        Component(id_map[c.id], c.name, c.kind, dict(c.params)) for c in model.components
    )
    relationships = tuple(
        Relationship(id_gen(), id_map[r.source], id_map[r.target], r.kind, r.rate)
        for r in model.relationships
    )
    return Model(
        id=id_gen(),
        name=model.name,
        owner=new_owner,
        components=components,
        relationships=relationships,
        provenance=provenance or Provenance.cloned_from(model.id),
        created_at=ts,
        updated_at=ts,
    )


def validate(model: Model) -> list[str]:
    """Violations as data; an empty list means every invariant holds."""
    violations: list[str] = []
    ids = [c.id for c in model.components]
    if len(set(ids)) != len(ids):
        violations.append("duplicate component ids")
    names = [c.name for c in model.components]
    if len(set(names)) != len(names):
        violations.append("component names not unique")
    by_id = {c.id: c for c in model.components}
    for c in model.components:
        if c.kind not in (BIOTIC, ABIOTIC):
            violations.append(f"component {c.name!r} has unknown kind {c.kind!r}")
            continue
        allowed = set(params_for_kind(c.kind))
        for pname, pvalue in c.params.items():
            if pname not in allowed:
                violations.append(f"component {c.name!r} carries foreign parameter {pname!r}")
                continue
            try:
                check_param_value(pname, pvalue)
            except ValidationError as exc:
                violations.append(f"component {c.name!r}: {exc}")
        required = BIOTIC_BASIC if c.kind == BIOTIC else ABIOTIC_PARAMS
        for pname in required:
            if pname not in c.params:
                violations.append(f"component {c.name!r} missing parameter {pname!r}")
    seen_triples = set()
    for r in model.relationships:
        if r.source not in by_id or r.target not in by_id:
            violations.append(f"relationship {r.id!r} has a dangling endpoint")
            continue
        source, target = by_id[r.source], by_id[r.target]
        if r.source == r.target:
            violations.append(f"relationship {r.id!r} is a self-loop")
        if r.kind == CONSUMES and source.kind != BIOTIC:
            violations.append(f"consumes relationship {r.id!r} has an abiotic source")
        elif r.kind == PRODUCES and (source.kind != BIOTIC or target.kind != ABIOTIC):
            violations.append(f"produces relationship {r.id!r} mistyped")
        elif r.kind == DESTROYS and (source.kind != ABIOTIC or target.kind != BIOTIC):
            violations.append(f"destroys relationship {r.id!r} mistyped")
        elif r.kind not in RELATIONSHIP_KINDS:
            violations.append(f"relationship {r.id!r} has unknown kind {r.kind!r}")
        if not 0.0 <= r.rate <= 1.0:
            violations.append(f"relationship {r.id!r} rate out of [0, 1]")
        triple = (r.source, r.target, r.kind)
        if triple in seen_triples:
            violations.append(f"duplicate relationship triple {triple}")
        seen_triples.add(triple)
    return violations


# ---------------------------------------------------------------------------
# Model file format


def provenance_to_json(p: Provenance):
    if p.kind == "fresh":
        return "fresh"
    return {p.kind: p.ref}


def provenance_from_json(doc) -> Provenance:
    if doc == "fresh":
        return Provenance.fresh()
    if isinstance(doc, dict) and len(doc) == 1:
        kind, ref = next(iter(doc.items()))
        if kind in ("cloned_from", "exemplar"):
            return Provenance(kind, ref)
    raise ValidationError(f"bad provenance {doc!r}")


def model_to_doc(model: Model) -> dict:
    """Canonical document: components and relationships ordered by id."""
    return {
        "id": model.id,
        "name": model.name,
        "owner": model.owner,
        "provenance": provenance_to_json(model.provenance),
        "components": [
            {"id": c.id, "name": c.name, "kind": c.kind, "params": dict(sorted(c.params.items()))}
            for c in sorted(model.components, key=lambda c: c.id)
        ],
        "relationships": [
            {"id": r.id, "source": r.source, "target": r.target, "kind": r.kind, "rate": r.rate}
            for r in sorted(model.relationships, key=lambda r: r.id)
        ],
        "created_at": format_ts(model.created_at),
        "updated_at": format_ts(model.updated_at),
    }


def model_from_doc(doc: dict) -> Model:
    try:
        components = tuple(
            Component(c["id"], c["name"], c["kind"], dict(c["params"]))
            for c in doc["components"]
        )
        relationships = tuple(
            Relationship(r["id"], r["source"], r["target"], r["kind"], r["rate"])
            for r in doc["relationships"]
        )
        return Model(
            id=doc["id"],
            name=doc["name"],
            owner=doc["owner"],
            components=components,
            relationships=relationships,
            provenance=provenance_from_json(doc["provenance"]),
            created_at=parse_ts(doc["created_at"]),
            updated_at=parse_ts(doc["updated_at"]),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed model document: {exc}") from exc


def model_to_json(model: Model) -> str:
    from .util import canonical_json

    return canonical_json(model_to_doc(model))


def model_from_json(text: str) -> Model:
    return model_from_doc(json.loads(text))
