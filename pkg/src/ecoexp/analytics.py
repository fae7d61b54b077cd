"""Automated analysis over the captured event log.

Everything here is a pure function of an immutable event snapshot: group
descriptives, model complexity/variety, parameter-space coverage, focus
share, per-session transition matrices, and behavior-pattern classes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .events import ActionEvent, Session, sessionize
from .experiment import Experiment, Phase
from .model import Model
from .util import pct

OBSERVATION = "Observation"
CONSTRUCTION = "Construction"
EXPLORATION = "Exploration"
PATTERN_CLASSES = (OBSERVATION, CONSTRUCTION, EXPLORATION)

# Parameter labels the guided instructions steer learners toward
DEFAULT_FOCUS_SET = frozenset(
    {
        "consumption rate",
        "starting population",
        "minimum population",
        "offspring count",
        "reproductive interval",
        "reproductive maturity",
    }
)


def parameter_label(raw: str) -> str:
    return raw.replace("_", " ")


def change_pair(event: ActionEvent) -> tuple[str, str]:
    """(component name, parameter label) identifying what a P event touched."""
    return (event.payload["component"], parameter_label(event.payload["parameter"]))


def _in_phase(event: ActionEvent, phase: Optional[Phase]) -> bool:
    return phase is None or phase.contains(event.ts)


@dataclass(frozen=True)
class GroupStats:
    learners: int
    models: int
    total_session_time_s: float
    mean_session_time_s: float
    action_frequency: dict


def group_stats(events: Iterable[ActionEvent], group_id: str) -> GroupStats:
    group_events = [e for e in events if e.group == group_id]
    participants = {e.participant for e in group_events}
    model_ids = {e.model for e in group_events if e.model}
    sessions = sessionize(group_events)
    total = sum(s.duration.total_seconds() for s in sessions)
    frequency = {kind: 0 for kind in "NSPCRE"}
    for e in group_events:
        frequency[e.action] += 1
    return GroupStats(
        learners=len(participants),
        models=len(model_ids),
        total_session_time_s=total,
        mean_session_time_s=total / len(participants) if participants else 0.0,
        action_frequency=frequency,
    )


def model_complexity(model: Model) -> int:
    return len(model.components) + len(model.relationships)


def model_variety(model: Model) -> int:
    names = {c.name for c in model.components}
    kinds = {r.kind for r in model.relationships}
    return len(names) + len(kinds)


def build_parameter_space(
    events: Iterable[ActionEvent], groups: Optional[set] = None
) -> frozenset:
    """Unique (component, parameter) pairs changed across all phases in scope."""
    pairs = set()
    for e in events:
        if e.action != "P":
            continue
        if groups is not None and e.group not in groups:
            continue
        pairs.add(change_pair(e))
    return frozenset(pairs)


@dataclass(frozen=True)
class CoverageReport:
    group: str
    phase: str
    explored: frozenset
    percentage: float


class EmptySpaceError(ValueError):
    pass


def coverage(
    events: Iterable[ActionEvent],
    group_id: str,
    phase: Optional[Phase],
    space: frozenset,
) -> CoverageReport:
    if not space:
        raise EmptySpaceError("coverage is undefined over an empty parameter space")
    explored = {
        change_pair(e)
        for e in events
        if e.action == "P" and e.group == group_id and _in_phase(e, phase)
    } & space
    return CoverageReport(
        group=group_id,
        phase=phase.name if phase else "all",
        explored=frozenset(explored),
        percentage=pct(len(explored), len(space)),
    )


def focus_share(
    events: Iterable[ActionEvent],
    group_id: str,
    phase: Optional[Phase],
    focus_set: frozenset = DEFAULT_FOCUS_SET,
) -> Optional[float]:
    """Share of P events aimed at the focus parameters; None when no P events."""
    if not focus_set:
        raise ValueError("focus set must be non-empty")
    changes = [
        e for e in events if e.action == "P" and e.group == group_id and _in_phase(e, phase)
    ]
    if not changes:
        return None
    hits = sum(1 for e in changes if parameter_label(e.payload["parameter"]) in focus_set)
    return pct(hits, len(changes))


@dataclass(frozen=True)
class TransitionMatrix:
    states: tuple[str, ...]
    counts: dict  # state -> state -> int
    probs: dict  # rows with >=1 outgoing transition, rows sum to 1

    def prob(self, a: str, b: str) -> float:
        return self.probs.get(a, {}).get(b, 0.0)


def transition_matrix(session: Session) -> TransitionMatrix:
    actions = session.actions
    if not actions:
        raise ValueError("transition matrix of an empty session")
    states = tuple(k for k in "NSPCRE" if k in set(actions))
    counts: dict = {}
    for a, b in zip(actions, actions[1:]):
        counts.setdefault(a, {}).setdefault(b, 0)
        counts[a][b] += 1
    probs = {}
    for a, row in counts.items():
        total = sum(row.values())
        probs[a] = {b: n / total for b, n in row.items()}
    return TransitionMatrix(states=states, counts=counts, probs=probs)


def classify_pattern(session: Session) -> str:
    """Coarse behavior class of one session.

    Precedence: Observation (no structural edits), then Exploration (edits
    plus parameter changes inside a simulate-edit-simulate cycle), then
    Construction (any other session with structural edits).
    """
    actions = session.actions
    if not actions:
        raise ValueError("cannot classify an empty session")
    present = set(actions)
    if not present & {"C", "R"}:
        return OBSERVATION
    if "P" in present and _has_edit_between_simulations(actions):
        return EXPLORATION
    return CONSTRUCTION


def _has_edit_between_simulations(actions: list[str]) -> bool:
    sim_positions = [i for i, a in enumerate(actions) if a == "S"]
    for lo, hi in zip(sim_positions, sim_positions[1:]):
        if any(a in ("C", "R") for a in actions[lo + 1 : hi]):
            return True
    return False


# ---------------------------------------------------------------------------
# The combined report (analytics.json)


def _phases_or_all(experiment: Experiment) -> list[Optional[Phase]]:
    return list(experiment.phases) if experiment.phases else [None]


def analytics_report(
    experiment: Experiment,
    events: Iterable[ActionEvent],
    models: Iterable[Model] = (),
) -> dict:
    events = [e for e in events if e.experiment == experiment.id]
    group_ids = [g.group_id for g in experiment.groups]

    groups_doc = {}
    for gid in group_ids:
        stats = group_stats(events, gid)
        groups_doc[gid] = {
            "learners": stats.learners,
            "models": stats.models,
            "total_session_time_s": stats.total_session_time_s,
            "mean_session_time_s": stats.mean_session_time_s,
            "frequency": stats.action_frequency,
        }

    models_doc = [
        {"id": m.id, "complexity": model_complexity(m), "variety": model_variety(m)}
        for m in sorted(models, key=lambda m: m.id)
    ]

    space = build_parameter_space(events)
    space_doc = [list(pair) for pair in sorted(space)]

    coverage_doc = []
    focus_doc = []
    for gid in group_ids:
        for phase in _phases_or_all(experiment):
            phase_name = phase.name if phase else "all"
            if space:
                report = coverage(events, gid, phase, space)
                coverage_doc.append(
                    {
                        "group": gid,
                        "phase": phase_name,
                        "explored": [list(p) for p in sorted(report.explored)],
                        "pct": report.percentage,
                    }
                )
            focus_doc.append(
                {
                    "group": gid,
                    "phase": phase_name,
                    "pct": focus_share(events, gid, phase),
                }
            )

    group_of = {e.participant: e.group for e in events}
    patterns_doc = {
        gid: {OBSERVATION: 0, CONSTRUCTION: 0, EXPLORATION: 0} for gid in group_ids
    }
    for session in sessionize(events):
        gid = group_of.get(session.participant)
        if gid in patterns_doc:
            patterns_doc[gid][classify_pattern(session)] += 1

    return {
        "groups": groups_doc,
        "models": models_doc,
        "parameter_space": space_doc,
        "coverage": coverage_doc,
        "focus": focus_doc,
        "patterns": patterns_doc,
    }
