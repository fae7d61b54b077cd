"""Experiment lifecycle: two feature-gated groups, assignment, phases, status.

Assignment is sticky and replayable: manual joins take the URL's group, random
joins flip a deterministic coin keyed by (experiment seed, participant id).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field, replace
from datetime import datetime
from typing import Optional

from . import rng
from .model import ValidationError
from .util import format_ts, parse_ts, utc_now

FEATURE_FLAGS = (
    "advanced_parameters",
    "cloning",
    "exemplar_models",
    "lookup_eol",
    "simulation",
)

MANUAL = "manual"
RANDOM = "random"

DRAFT = "draft"
ACTIVE = "active"
CLOSED = "closed"

MAX_DOC_BYTES = 20 * 1024 * 1024


class StateError(RuntimeError):
    """Operation not allowed in the experiment's current status."""


class UnknownGroupError(KeyError):
    pass


def all_enabled() -> dict:
    return {flag: True for flag in FEATURE_FLAGS}


@dataclass(frozen=True)
class GroupConfig:
    group_id: str
    flags: dict

    def __post_init__(self):
        missing = [f for f in FEATURE_FLAGS if f not in self.flags]
        if missing:
            raise ValidationError(f"group {self.group_id!r} missing flags {missing}")
        unknown = [f for f in self.flags if f not in FEATURE_FLAGS]
        if unknown:
            raise ValidationError(f"group {self.group_id!r} has unknown flags {unknown}")


@dataclass(frozen=True)
class Phase:
    name: str
    start: datetime
    end: datetime

    def __post_init__(self):
        if self.end <= self.start:
            raise ValidationError(f"phase {self.name!r} must end after it starts")

    def contains(self, ts: datetime) -> bool:
        return self.start <= ts < self.end


@dataclass(frozen=True)
class Document:
    data: bytes
    media_type: str = "application/pdf"

    def __post_init__(self):
        if len(self.data) > MAX_DOC_BYTES:
            raise ValidationError("document exceeds the 20 MiB limit")


@dataclass(frozen=True)
class Experiment:
    id: str
    name: str
    groups: tuple[GroupConfig, GroupConfig]
    assignment_mode: str = MANUAL
    welcome_doc: Optional[Document] = None
    exit_doc: Optional[Document] = None
    phases: tuple[Phase, ...] = ()
    status: str = ACTIVE
    seed: int = 0
    created_at: datetime = field(default_factory=utc_now)

    def group(self, group_id: str) -> GroupConfig:
        for g in self.groups:
            if g.group_id == group_id:
                return g
        raise UnknownGroupError(group_id)


@dataclass(frozen=True)
class AssignmentRecord:
    experiment_id: str
    participant: str
    group_id: str
    joined_at: datetime
    sticky: bool = True


def _check_phases(phases) -> tuple[Phase, ...]:
    ordered = tuple(phases)
    for earlier, later in zip(ordered, ordered[1:]):
        if later.start < earlier.end:
            raise ValidationError(
                f"phases {earlier.name!r} and {later.name!r} overlap or are out of order"
            )
    return ordered


def create_experiment(
    name: str,
    groups,
    assignment_mode: str = MANUAL,
    welcome_doc: Optional[Document] = None,
    exit_doc: Optional[Document] = None,
    phases=(),
    seed: int = 0,
    experiment_id: Optional[str] = None,
    now: Optional[datetime] = None,
) -> Experiment:
    if not name:
        raise ValidationError("experiment name must be non-empty")
    if len(groups) != 2:
        raise ValidationError(f"an experiment has exactly two groups, got {len(groups)}")
    if assignment_mode not in (MANUAL, RANDOM):
        raise ValidationError(f"assignment mode must be manual or random, got {assignment_mode!r}")
    return Experiment(
        id=experiment_id or f"exp-{rng.u64(seed, 0, 0, name, 0) % 10**8:08d}",
        name=name,
        groups=tuple(groups),
        assignment_mode=assignment_mode,
        welcome_doc=welcome_doc,
        exit_doc=exit_doc,
        phases=_check_phases(phases),
        status=ACTIVE,
        seed=seed,
        created_at=now or utc_now(),
    )


def join_links(experiment: Experiment, base_url: str = "http://localhost:8080") -> list[str]:
    if experiment.status != ACTIVE:
        raise StateError(f"experiment is {experiment.status}, links require an active experiment")
    base = base_url.rstrip("/")
    if experiment.assignment_mode == MANUAL:
        return [
            f"{base}/researcher/join-experiment?group={g.group_id}" for g in experiment.groups
        ]
    return [f"{base}/researcher/join-experiment?experiment={experiment.id}"]


def is_enabled(experiment: Experiment, group_id: str, flag: str) -> bool:
    if flag not in FEATURE_FLAGS:
        raise ValidationError(f"unknown feature flag {flag!r}")
    return experiment.group(group_id).flags[flag]


def random_group(experiment: Experiment, participant: str) -> str:
    bit = rng.coin(experiment.seed, f"assign:{experiment.id}:{participant}")
    return experiment.groups[bit].group_id


def close(experiment: Experiment) -> Experiment:
    if experiment.status == CLOSED:
        raise StateError("experiment already closed")
    return replace(experiment, status=CLOSED)


class ExperimentStore:
    """Registry plus linearized first-join-wins assignment."""

    def __init__(self):
        self._lock = threading.Lock()
        self._experiments: dict[str, Experiment] = {}
        self._assignments: dict[tuple[str, str], AssignmentRecord] = {}
        self._group_index: dict[str, str] = {}  # group id -> experiment id
        self._next_group = 1
        self._next_exp = 1

    def allocate_group_ids(self, n: int = 2) -> list[str]:
        with self._lock:
            ids = [str(self._next_group + i) for i in range(n)]
            self._next_group += n
            return ids

    def allocate_experiment_id(self) -> str:
        with self._lock:
            eid = f"exp-{self._next_exp}"
            self._next_exp += 1
            return eid

    def add(self, experiment: Experiment) -> Experiment:
        with self._lock:
            if experiment.id in self._experiments:
                raise ValidationError(f"experiment id {experiment.id!r} already exists")
            for g in experiment.groups:
                if g.group_id in self._group_index:
                    raise ValidationError(f"group id {g.group_id!r} already in use")
            self._experiments[experiment.id] = experiment
            for g in experiment.groups:
                self._group_index[g.group_id] = experiment.id
            return experiment

    def get(self, experiment_id: str) -> Experiment:
        try:
            return self._experiments[experiment_id]
        except KeyError:
            raise KeyError(f"unknown experiment {experiment_id!r}") from None

    def by_group(self, group_id: str) -> Experiment:
        try:
            return self._experiments[self._group_index[group_id]]
        except KeyError:
            raise UnknownGroupError(group_id) from None

    def update(self, experiment: Experiment) -> None:
        with self._lock:
            self._experiments[experiment.id] = experiment

    def join(
        self,
        experiment_id: str,
        participant: str,
        group_param: Optional[str] = None,
        now: Optional[datetime] = None,
    ) -> AssignmentRecord:
        """First join assigns and sticks; later joins return the original record."""
        experiment = self.get(experiment_id)
        with self._lock:
            existing = self._assignments.get((experiment_id, participant))
            if existing is not None:
                return existing
            if experiment.status != ACTIVE:
                raise StateError(f"experiment is {experiment.status}; joins are rejected")
            if experiment.assignment_mode == MANUAL:
                if group_param is None:
                    raise ValidationError("manual assignment requires a group parameter")
                group_id = experiment.group(group_param).group_id
            else:
                group_id = random_group(experiment, participant)
            record = AssignmentRecord(
                experiment_id=experiment_id,
                participant=participant,
                group_id=group_id,
                joined_at=now or utc_now(),
            )
            self._assignments[(experiment_id, participant)] = record
            return record

    def assignment(self, experiment_id: str, participant: str) -> Optional[AssignmentRecord]:
        return self._assignments.get((experiment_id, participant))

    def assignments_for(self, experiment_id: str) -> list[AssignmentRecord]:
        records = [r for (eid, _), r in self._assignments.items() if eid == experiment_id]
        return sorted(records, key=lambda r: (r.joined_at, r.participant))

    def experiments(self) -> list[Experiment]:
        return sorted(self._experiments.values(), key=lambda e: e.id)

    def restore_assignment(self, record: AssignmentRecord) -> None:
        with self._lock:
            self._assignments.setdefault((record.experiment_id, record.participant), record)

    def counters(self) -> dict:
        return {"next_group": self._next_group, "next_experiment": self._next_exp}

    def restore_counters(self, doc: dict) -> None:
        with self._lock:
            self._next_group = max(self._next_group, doc.get("next_group", 1))
            self._next_exp = max(self._next_exp, doc.get("next_experiment", 1))


# ---------------------------------------------------------------------------
# experiment.json


def experiment_to_doc(experiment: Experiment, assignments: list[AssignmentRecord]) -> dict:
    return {
        "id": experiment.id,
        "name": experiment.name,
        "mode": experiment.assignment_mode,
        "seed": experiment.seed,
        "groups": [
            {"group_id": g.group_id, "flags": dict(sorted(g.flags.items()))}
            for g in experiment.groups
        ],
        "phases": [
            {"name": p.name, "start": format_ts(p.start), "end": format_ts(p.end)}
            for p in experiment.phases
        ],
        "status": experiment.status,
        "created_at": format_ts(experiment.created_at),
        "assignments": [
            {
                "participant": r.participant,
                "group_id": r.group_id,
                "joined_at": format_ts(r.joined_at),
            }
            for r in assignments
        ],
    }


def experiment_from_doc(doc: dict) -> tuple[Experiment, list[AssignmentRecord]]:
    groups = tuple(GroupConfig(g["group_id"], dict(g["flags"])) for g in doc["groups"])
    phases = tuple(
        Phase(p["name"], parse_ts(p["start"]), parse_ts(p["end"])) for p in doc["phases"]
    )
    experiment = Experiment(
        id=doc["id"],
        name=doc["name"],
        groups=groups,  # type: ignore[arg-type]
        assignment_mode=doc["mode"],
        phases=_check_phases(phases),
        status=doc["status"],
        seed=doc.get("seed", 0),
        created_at=parse_ts(doc["created_at"]),
    )
    assignments = [
        AssignmentRecord(
            experiment_id=experiment.id,
            participant=a["participant"],
            group_id=a["group_id"],
            joined_at=parse_ts(a["joined_at"]),
        )
        for a in doc.get("assignments", [])
    ]
    return experiment, assignments
