"""Export bundles and offline replay.

A bundle is a directory: experiment.json, models.json, events.jsonl, one CSV
per simulation batch under simulations/, and analytics.json. Replaying a
bundle (or a bare events.jsonl) recomputes analytics from the captured data
alone, byte-identical to what the live service reports.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

from .analytics import analytics_report
from .events import ActionEvent, export_jsonl, import_jsonl
from .experiment import Experiment, GroupConfig, all_enabled, experiment_from_doc, experiment_to_doc
from .model import Model, model_from_doc, model_to_doc
from .util import canonical_json

EXPERIMENT_FILE = "experiment.json"
MODELS_FILE = "models.json"
EVENTS_FILE = "events.jsonl"
ANALYTICS_FILE = "analytics.json"


def bundle_files(ws, experiment_id: str) -> dict[str, bytes]:
    """All bundle members as name -> bytes; experiment must exist."""
    experiment = ws.experiments.get(experiment_id)
    assignments = ws.experiments.assignments_for(experiment_id)
    events = ws.events.for_experiment(experiment_id)
    models = ws.experiment_models(experiment_id)

    files = {
        EXPERIMENT_FILE: canonical_json(experiment_to_doc(experiment, assignments)).encode(),
        MODELS_FILE: canonical_json([model_to_doc(m) for m in models]).encode(),
        EVENTS_FILE: export_jsonl(events).encode(),
        ANALYTICS_FILE: canonical_json(analytics_report(experiment, events, models)).encode(),
    }
    from .sim import batch_csv

    for batch_id in sorted(ws.batches):
        record = ws.batches[batch_id]
        if record.experiment == experiment_id and record.status == "done":
            record = ws.ensure_batch_runs(record)
            files[f"simulations/{batch_id}.csv"] = batch_csv(record.runs, record.names).encode()
    return files


def write_bundle(ws, experiment_id: str, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, data in bundle_files(ws, experiment_id).items():
        path = out / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    return out


def _pseudo_experiment(events: list[ActionEvent]) -> Experiment:
    """Stand-in config when a bare log arrives without experiment.json."""
    groups = sorted({e.group for e in events})
    while len(groups) < 2:
        groups.append(f"unassigned-{len(groups)}")
    return Experiment(
        id=events[0].experiment if events else "unknown",
        name="replayed",
        groups=(
            GroupConfig(groups[0], all_enabled()),
            GroupConfig(groups[1], all_enabled()),
        ),
    )


def load_bundle(path) -> tuple[Optional[Experiment], list[ActionEvent], list[Model]]:
    """Accepts a bundle directory or a bare events.jsonl path.

    A sidecar experiment.json / models.json next to a bare log is picked up
    when present.
    """
    path = Path(path)
    if path.is_dir():
        events_path = path / EVENTS_FILE
        base = path
    else:
        events_path = path
        base = path.parent
    events = import_jsonl(events_path.read_text(encoding="utf-8"))

    experiment = None
    exp_path = base / EXPERIMENT_FILE
    if exp_path.exists():
        experiment, _ = experiment_from_doc(json.loads(exp_path.read_text(encoding="utf-8")))

    models: list[Model] = []
    models_path = base / MODELS_FILE
    if models_path.exists():
        models = [
            model_from_doc(doc) for doc in json.loads(models_path.read_text(encoding="utf-8"))
        ]
    return experiment, events, models


def replay(path) -> dict:
    """Recompute the analytics report from captured data."""
    experiment, events, models = load_bundle(path)
    if experiment is None:
        if not events:
            return {}
        experiment = _pseudo_experiment(events)
    return analytics_report(experiment, events, models)
