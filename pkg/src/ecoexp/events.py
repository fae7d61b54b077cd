"""Append-only action capture in the N/S/P/C/R/E alphabet, plus sessionization.

The log is the analytic substrate: nothing here ever mutates or deletes a
recorded event. Gating is enforced at record time so a disabled feature can
never leak into a group's log.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta
from typing import IO, Iterable, Optional

from .model import BIOTIC_ADVANCED, ValidationError
from .util import format_ts, parse_ts

ACTION_KINDS = ("N", "S", "P", "C", "R", "E")

NEW = "N"
SIMULATE = "S"
PARAMETER = "P"
CONSTRUCTION = "C"
REVISION = "R"
EOL = "E"


class GateViolation(PermissionError):
    """The action's feature flag is disabled for the participant's group."""

    def __init__(self, flag: str, group_id: str):
        super().__init__(f"feature {flag!r} is disabled for group {group_id!r}")
        self.flag = flag
        self.group_id = group_id


class UnknownAssignment(LookupError):
    pass


@dataclass(frozen=True)
class ActionEvent:
    ts: datetime
    experiment: str
    group: str
    participant: str
    model: str
    action: str
    payload: dict = field(default_factory=dict)
    seq: Optional[int] = None

    def __post_init__(self):
        if self.action not in ACTION_KINDS:
            raise ValidationError(f"unknown action kind {self.action!r}")
        if self.action == PARAMETER:
            if "component" not in self.payload or "parameter" not in self.payload:
                raise ValidationError("P events must carry component and parameter")


def required_flag(event: ActionEvent) -> Optional[str]:
    """Which feature flag must be enabled for this event to be recordable."""
    if event.action == SIMULATE:
        return "simulation"
    if event.action == EOL:
        return "lookup_eol"
    if event.action == NEW:
        provenance = event.payload.get("provenance")
        if isinstance(provenance, dict):
            if "cloned_from" in provenance:
                return "cloning"
            if "exemplar" in provenance:
                return "exemplar_models"
        return None
    if event.action == PARAMETER:
        if event.payload.get("parameter") in BIOTIC_ADVANCED:
            return "advanced_parameters"
        return None
    return None


# Participant-facing operation -> action kind. Structural edits depend on
# whether the model has been simulated yet (construction vs revision).
_OPERATION_ACTIONS = {
    "new_model": NEW,
    "clone_model": NEW,
    "instantiate_exemplar": NEW,
    "run_batch": SIMULATE,
    "set_parameter": PARAMETER,
    "set_relationship_rate": PARAMETER,
    "apply_traits": EOL,
}
_STRUCTURAL_OPERATIONS = {
    "add_component",
    "remove_component",
    "add_relationship",
    "remove_relationship",
}


def derive_action(operation: str, simulated_before: bool = False) -> str:
    if operation in _OPERATION_ACTIONS:
        return _OPERATION_ACTIONS[operation]
    if operation in _STRUCTURAL_OPERATIONS:
        return REVISION if simulated_before else CONSTRUCTION
    raise ValidationError(f"not a participant-facing operation: {operation!r}")


class EventLog:
    """Sequenced append-only store with an optional JSONL sink.

    When an experiment resolver is supplied, `record` checks that the event's
    participant is assigned to the named group and that the action's feature
    flag is on for that group.
    """

    def __init__(self, experiments=None, sink: Optional[IO[str]] = None):
        self._lock = threading.Lock()
        self._events: list[ActionEvent] = []
        self._experiments = experiments  # ExperimentStore or None
        self._sink = sink
        self._simulated_models: set[str] = set()

    def __len__(self) -> int:
        return len(self._events)

    @property
    def events(self) -> tuple[ActionEvent, ...]:
        return tuple(self._events)

    def has_simulated(self, model_id: str) -> bool:
        return model_id in self._simulated_models

    def _check(self, event: ActionEvent) -> None:
        experiment = None
        if self._experiments is not None:
            try:
                experiment = self._experiments.get(event.experiment)
            except KeyError:
                raise UnknownAssignment(f"unknown experiment {event.experiment!r}") from None
            record = self._experiments.assignment(event.experiment, event.participant)
            if record is None or record.group_id != event.group:
                raise UnknownAssignment(
                    f"participant {event.participant!r} is not assigned to group {event.group!r}"
                )
        flag = required_flag(event)
        if flag is not None and experiment is not None:
            if not experiment.group(event.group).flags[flag]:
                raise GateViolation(flag, event.group)

    def record(self, event: ActionEvent) -> int:
        self._check(event)
        with self._lock:
            seq = len(self._events) + 1
            stamped = replace(event, seq=seq)
            self._events.append(stamped)
            if event.action == SIMULATE:
                self._simulated_models.add(event.model)
            if self._sink is not None:
                self._sink.write(event_to_line(stamped) + "\n")
                self._sink.flush()
            return seq

    def append_imported(self, event: ActionEvent) -> None:
        """Trusted append used by import/replay; preserves the original seq."""
        with self._lock:
            self._events.append(event)
            if event.action == SIMULATE:
                self._simulated_models.add(event.model)

    def for_experiment(self, experiment_id: str) -> list[ActionEvent]:
        return [e for e in self._events if e.experiment == experiment_id]


@dataclass(frozen=True)
class Session:
    id: str
    participant: str
    events: tuple[ActionEvent, ...]
    start: datetime
    end: datetime

    @property
    def duration(self) -> timedelta:
        return self.end - self.start

    @property
    def actions(self) -> list[str]:
        return [e.action for e in self.events]


DEFAULT_SESSION_GAP = timedelta(minutes=30)


def sessionize(
    events: Iterable[ActionEvent], gap: timedelta = DEFAULT_SESSION_GAP
) -> list[Session]:
    """Split each participant's stream where consecutive events are more than
    `gap` apart. Deterministic: ids derive from participant and start time."""
    ordered = sorted(events, key=lambda e: (e.participant, e.ts, e.seq or 0))
    sessions: list[Session] = []
    current: list[ActionEvent] = []

    def flush():
        if current:
            start, end = current[0].ts, current[-1].ts
            sessions.append(
                Session(
                    id=f"{current[0].participant}@{format_ts(start)}",
                    participant=current[0].participant,
                    events=tuple(current),
                    start=start,
                    end=end,
                )
            )

    for event in ordered:
        if current and (
            event.participant != current[-1].participant or event.ts - current[-1].ts > gap
        ):
            flush()
            current = []
        current.append(event)
    flush()
    return sessions


# ---------------------------------------------------------------------------
# events.jsonl


def event_to_line(event: ActionEvent) -> str:
    doc = {
        "seq": event.seq,
        "ts": format_ts(event.ts),
        "experiment": event.experiment,
        "group": event.group,
        "participant": event.participant,
        "model": event.model,
        "action": event.action,
        "payload": event.payload,
    }
    return json.dumps(doc, sort_keys=True, ensure_ascii=False)


class ImportError_(ValueError):
    def __init__(self, line_number: int, reason: str):
        super().__init__(f"line {line_number}: {reason}")
        self.line_number = line_number


def event_from_doc(doc: dict) -> ActionEvent:
    return ActionEvent(
        seq=doc.get("seq"),
        ts=parse_ts(doc["ts"]),
        experiment=doc["experiment"],
        group=doc["group"],
        participant=doc["participant"],
        model=doc["model"],
        action=doc["action"],
        payload=dict(doc.get("payload") or {}),  # unknown keys ride along verbatim
    )


def export_jsonl(events: Iterable[ActionEvent]) -> str:
    return "".join(event_to_line(e) + "\n" for e in events)


def import_jsonl(text: str) -> list[ActionEvent]:
    events: list[ActionEvent] = []
    for i, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ImportError_(i, f"invalid JSON ({exc.msg})") from exc
        try:
            events.append(event_from_doc(doc))
        except (KeyError, ValidationError, ValueError) as exc:
            raise ImportError_(i, str(exc)) from exc
    return events
