"""HTTP facade binding experiments, models, simulation, traits, and capture.

Participant mutations emit exactly one capture event, atomically with the
operation: the event is recorded first and the state change committed after,
so a capture failure rolls the whole operation back.
"""

from __future__ import annotations

import base64
import binascii
import functools
import hashlib
import hmac
import json
import threading
import zipfile
from dataclasses import dataclass, field
from datetime import datetime
from io import BytesIO
from pathlib import Path
from typing import Callable, Optional

from fastapi import Body, FastAPI, Header, Query, Request, Response
from fastapi.responses import JSONResponse

from . import analytics, sim
from .events import (
    ActionEvent,
    EventLog,
    GateViolation,
    UnknownAssignment,
    derive_action,
    import_jsonl,
)
from .exemplars import EXEMPLAR_FILES, load_exemplar
from .experiment import (
    ACTIVE,
    FEATURE_FLAGS,
    Document,
    ExperimentStore,
    GroupConfig,
    Phase,
    StateError,
    UnknownGroupError,
    close,
    create_experiment,
    experiment_from_doc,
    experiment_to_doc,
    is_enabled,
    join_links,
)
from .model import (
    BIOTIC_ADVANCED as _ADVANCED,
    Model,
    Provenance,
    ValidationError,
    add_component,
    add_relationship,
    clone_model,
    model_from_doc,
    model_to_doc,
    new_model,
    remove_component,
    remove_relationship,
    set_parameter,
    set_relationship_rate,
)
from .traits import ProviderTimeout, SpeciesNotFound, TraitService, apply_traits, record_to_doc
from .util import canonical_json, parse_ts, utc_now

RATE_PARAMETER = {
    "consumes": "consumption_rate",
    "produces": "production_rate",
    "destroys": "destruction_rate",
}


class ApiError(Exception):
    def __init__(self, code: str, message: str, status: int, detail: Optional[dict] = None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.status = status
        self.detail = detail or {}


def _validation(message, detail=None):
    return ApiError("validation_error", str(message), 400, detail)


def _not_found(message):
    return ApiError("not_found", str(message), 404)


def _unauthorized(message):
    return ApiError("unauthorized", str(message), 401)


@dataclass
class ServiceConfig:
    researcher_token: str = "researcher-secret"
    base_url: str = "http://localhost:8080"
    data_dir: Optional[str] = None
    default_seed: int = 0
    sync_sim_limit: int = 100_000
    ui_dir: Optional[str] = None  # built frontend to serve at /


class SequentialIds:
    """Deterministic id allocator; one shared counter keeps ids unique."""

    def __init__(self, start: int = 1):
        self._lock = threading.Lock()
        self._next = start

    def new(self, prefix: str) -> str:
        with self._lock:
            n = self._next
            self._next += 1
            return f"{prefix}{n}"

    def gen(self, prefix: str) -> Callable[[], str]:
        return lambda: self.new(prefix)

    @property
    def next_value(self) -> int:
        return self._next


@dataclass
class BatchRecord:
    id: str
    experiment: str
    participant: str
    model_id: str
    config: sim.SimConfig
    spec: sim.SimSpec
    names: dict
    status: str = "done"  # pending | done | failed
    runs: list = field(default_factory=list)
    error: str = ""


class Workspace:
    """All state behind the API; shared by the server and the in-process harness.

    With a data_dir configured, experiments/models/batch metadata live in
    state.json and events append to events.jsonl; batch series are recomputed
    from their stored spec and config on demand (they are deterministic).
    """

    def __init__(
        self,
        config: Optional[ServiceConfig] = None,
        clock: Callable[[], datetime] = utc_now,
        trait_service: Optional[TraitService] = None,
    ):
        self.config = config or ServiceConfig()
        self.clock = clock
        self.ids = SequentialIds()
        self.experiments = ExperimentStore()
        self.models: dict[str, Model] = {}
        self.model_experiment: dict[str, str] = {}
        self.batches: dict[str, BatchRecord] = {}
        self.traits = trait_service or TraitService(clock=clock)
        self._write_lock = threading.Lock()
        self._secret = hashlib.sha256(
            ("participant-tokens:" + self.config.researcher_token).encode()
        ).digest()
        self._dir = Path(self.config.data_dir) if self.config.data_dir else None
        self._events_sink = None
        if self._dir is not None:
            self._dir.mkdir(parents=True, exist_ok=True)
            self._load_state()
            self._events_sink = open(self._dir / "events.jsonl", "a", encoding="utf-8")
        self.events = EventLog(experiments=self.experiments, sink=self._events_sink)
        if self._dir is not None:
            events_path = self._dir / "events.jsonl"
            if events_path.exists():
                for event in import_jsonl(events_path.read_text(encoding="utf-8")):
                    self.events.append_imported(event)

    # -- persistence ----------------------------------------------------------

    def _load_state(self) -> None:
        path = self._dir / "state.json"
        if not path.exists():
            return
        doc = json.loads(path.read_text(encoding="utf-8"))
        for exp_doc in doc.get("experiments", []):
            experiment, assignments = experiment_from_doc(exp_doc)
            self.experiments.add(experiment)
            for record in assignments:
                self.experiments.restore_assignment(record)
        self.experiments.restore_counters(doc.get("counters", {}))
        self.ids = SequentialIds(doc.get("next_id", 1))
        for model_doc in doc.get("models", []):
            model = model_from_doc(model_doc)
            self.models[model.id] = model
        self.model_experiment.update(doc.get("model_experiment", {}))
        for b in doc.get("batches", []):
            record = BatchRecord(
                id=b["id"],
                experiment=b["experiment"],
                participant=b["participant"],
                model_id=b["model"],
                config=sim.config_from_doc(b["config"]),
                spec=sim.spec_from_doc(b["spec"]),
                names=dict(b["names"]),
                status=b["status"],
            )
            self.batches[record.id] = record

    def save(self) -> None:
        if self._dir is None:
            return
        doc = {
            "experiments": [
                experiment_to_doc(e, self.experiments.assignments_for(e.id))
                for e in self.experiments.experiments()
            ],
            "counters": self.experiments.counters(),
            "next_id": self.ids.next_value,
            "models": [model_to_doc(self.models[mid]) for mid in sorted(self.models)],
            "model_experiment": dict(sorted(self.model_experiment.items())),
            "batches": [
                {
                    "id": b.id,
                    "experiment": b.experiment,
                    "participant": b.participant,
                    "model": b.model_id,
                    "config": sim.config_to_doc(b.config),
                    "spec": sim.spec_to_doc(b.spec),
                    "names": b.names,
                    "status": b.status,
                }
                for _, b in sorted(self.batches.items())
            ],
        }
        tmp = self._dir / "state.json.tmp"
        tmp.write_text(canonical_json(doc), encoding="utf-8")
        tmp.replace(self._dir / "state.json")

    def ensure_batch_runs(self, record: BatchRecord) -> BatchRecord:
        if record.status == "done" and not record.runs:
            record.runs = sim.run_batch(record.spec, record.config)
        return record

    # -- participant tokens -------------------------------------------------

    def issue_token(self, experiment_id: str, group_id: str, participant: str) -> str:
        payload = base64.urlsafe_b64encode(
            json.dumps(
                {"e": experiment_id, "g": group_id, "p": participant}, sort_keys=True
            ).encode()
        ).decode()
        sig = hmac.new(self._secret, payload.encode(), hashlib.sha256).hexdigest()[:32]
        return f"pt.{payload}.{sig}"

    def verify_token(self, token: str) -> tuple[str, str, str]:
        try:
            kind, payload, sig = token.split(".")
        except ValueError:
            raise _unauthorized("malformed participant token") from None
        expected = hmac.new(self._secret, payload.encode(), hashlib.sha256).hexdigest()[:32]
        if kind != "pt" or not hmac.compare_digest(sig, expected):
            raise _unauthorized("invalid participant token")
        try:
            doc = json.loads(base64.urlsafe_b64decode(payload.encode()))
        except (binascii.Error, json.JSONDecodeError):
            raise _unauthorized("invalid participant token") from None
        return doc["e"], doc["g"], doc["p"]

    # -- models -------------------------------------------------------------

    def model_for(self, model_id: str, participant: str) -> Model:
        model = self.models.get(model_id)
        if model is None or model.owner != participant:
            raise _not_found(f"no model {model_id!r}")
        return model

    def commit(self, event: ActionEvent, model: Optional[Model] = None) -> int:
        """Record the capture event, then apply the state change.

        A rejected event (gate violation, bad assignment) leaves no trace of
        the operation; a failed operation never reaches this point.
        """
        with self._write_lock:
            seq = self.events.record(event)
            if model is not None:
                self.models[model.id] = model
                self.model_experiment.setdefault(model.id, event.experiment)
            self.save()
            return seq

    def experiment_models(self, experiment_id: str) -> list[Model]:
        return sorted(
            (m for mid, m in self.models.items() if self.model_experiment.get(mid) == experiment_id),
            key=lambda m: m.id,
        )


@dataclass(frozen=True)
class ParticipantCtx:
    experiment_id: str
    group_id: str
    participant: str


def _phases_from_docs(docs) -> list[Phase]:
    phases = []
    for p in docs or []:
        try:
            phases.append(Phase(p["name"], parse_ts(p["start"]), parse_ts(p["end"])))
        except (KeyError, ValueError) as exc:
            raise _validation(f"bad phase: {exc}")
    return phases


def _decode_doc(doc_b64: Optional[str], media_type: str) -> Optional[Document]:
    if not doc_b64:
        return None
    try:
        return Document(base64.b64decode(doc_b64), media_type)
    except binascii.Error as exc:
        raise _validation(f"bad document encoding: {exc}")


def create_app(workspace: Optional[Workspace] = None) -> FastAPI:
    ws = workspace or Workspace()
    app = FastAPI(title="ecoexp", docs_url=None, redoc_url=None)

    # -- error envelope ------------------------------------------------------

    @app.exception_handler(ApiError)
    async def _api_error(_req: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message, "detail": exc.detail},
        )

    def _translate(exc: Exception) -> ApiError:
        if isinstance(exc, ApiError):
            return exc
        if isinstance(exc, GateViolation):
            return ApiError(
                "feature_disabled", str(exc), 403, {"flag": exc.flag, "group": exc.group_id}
            )
        if isinstance(exc, sim.CompileError):
            return _validation(str(exc), {"violations": exc.violations})
        if isinstance(exc, ValidationError):
            return _validation(exc)
        if isinstance(exc, StateError):
            return ApiError("conflict", str(exc), 409)
        if isinstance(exc, UnknownAssignment):
            return _unauthorized(exc)
        if isinstance(exc, (UnknownGroupError, SpeciesNotFound, KeyError)):
            return _not_found(str(exc).strip("'\""))
        if isinstance(exc, ProviderTimeout):
            return ApiError("no_data", str(exc), 503)
        raise exc

    def guard(fn):
        @functools.wraps(fn)  # FastAPI reads the wrapped signature for params
        def wrapped(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except Exception as exc:  # noqa: BLE001 - translated to the error envelope
                raise _translate(exc)

        return wrapped

    # -- auth ----------------------------------------------------------------

    def researcher(authorization: Optional[str]) -> None:
        token = (authorization or "").removeprefix("Bearer ").strip()
        if token != ws.config.researcher_token:
            raise _unauthorized("researcher token required")

    def participant(authorization: Optional[str]) -> ParticipantCtx:
        token = (authorization or "").removeprefix("Bearer ").strip()
        if not token:
            raise _unauthorized("participant token required")
        if token == ws.config.researcher_token:
            raise _unauthorized("researcher tokens are not valid on participant routes")
        experiment_id, group_id, who = ws.verify_token(token)
        record = ws.experiments.assignment(experiment_id, who)
        if record is None or record.group_id != group_id:
            raise _unauthorized("token does not match a live assignment")
        return ParticipantCtx(experiment_id, group_id, who)

    def require_flag(ctx: ParticipantCtx, flag: str) -> None:
        experiment = ws.experiments.get(ctx.experiment_id)
        if not is_enabled(experiment, ctx.group_id, flag):
            raise GateViolation(flag, ctx.group_id)

    def emit(ctx: ParticipantCtx, model_id: str, action: str, payload: dict,
             model: Optional[Model] = None) -> int:
        return ws.commit(
            ActionEvent(
                ts=ws.clock(),
                experiment=ctx.experiment_id,
                group=ctx.group_id,
                participant=ctx.participant,
                model=model_id,
                action=action,
                payload=payload,
            ),
            model=model,
        )

    # -- researcher routes ----------------------------------------------------

    @app.post("/researcher/experiments", status_code=201)
    @guard
    def create_experiment_route(
        body: dict = Body(...), authorization: Optional[str] = Header(None)
    ):
        researcher(authorization)
        groups_doc = body.get("groups")
        if not isinstance(groups_doc, list) or len(groups_doc) != 2:
            raise _validation("an experiment requires exactly two groups")
        group_ids = ws.experiments.allocate_group_ids(2)
        groups = [
            GroupConfig(group_ids[i], dict(g.get("flags", {}))) for i, g in enumerate(groups_doc)
        ]
        experiment = create_experiment(
            name=body.get("name", ""),
            groups=groups,
            assignment_mode=body.get("mode", "manual"),
            welcome_doc=_decode_doc(body.get("welcome_doc_b64"), "application/pdf"),
            exit_doc=_decode_doc(body.get("exit_doc_b64"), "application/pdf"),
            phases=_phases_from_docs(body.get("phases")),
            seed=body.get("seed", ws.config.default_seed),
            experiment_id=ws.experiments.allocate_experiment_id(),
            now=ws.clock(),
        )
        ws.experiments.add(experiment)
        ws.save()
        return {
            "experiment": experiment_to_doc(experiment, []),
            "links": join_links(experiment, ws.config.base_url),
        }

    @app.get("/researcher/experiments/{experiment_id}")
    @guard
    def get_experiment_route(experiment_id: str, authorization: Optional[str] = Header(None)):
        researcher(authorization)
        experiment = ws.experiments.get(experiment_id)
        return experiment_to_doc(experiment, ws.experiments.assignments_for(experiment_id))

    @app.get("/researcher/experiments/{experiment_id}/links")
    @guard
    def links_route(experiment_id: str, authorization: Optional[str] = Header(None)):
        researcher(authorization)
        experiment = ws.experiments.get(experiment_id)
        return {"links": join_links(experiment, ws.config.base_url)}

    @app.post("/researcher/experiments/{experiment_id}/close")
    @guard
    def close_route(experiment_id: str, authorization: Optional[str] = Header(None)):
        researcher(authorization)
        experiment = close(ws.experiments.get(experiment_id))
        ws.experiments.update(experiment)
        ws.save()
        return experiment_to_doc(experiment, ws.experiments.assignments_for(experiment_id))

    @app.get("/researcher/experiments/{experiment_id}/analytics")
    @guard
    def analytics_route(experiment_id: str, authorization: Optional[str] = Header(None)):
        researcher(authorization)
        experiment = ws.experiments.get(experiment_id)
        report = analytics.analytics_report(
            experiment,
            ws.events.for_experiment(experiment_id),
            ws.experiment_models(experiment_id),
        )
        return Response(content=canonical_json(report), media_type="application/json")

    @app.get("/researcher/experiments/{experiment_id}/export")
    @guard
    def export_route(experiment_id: str, authorization: Optional[str] = Header(None)):
        researcher(authorization)
        from .bundle import bundle_files

        files = bundle_files(ws, experiment_id)
        buffer = BytesIO()
        with zipfile.ZipFile(buffer, "w", zipfile.ZIP_DEFLATED) as zf:
            for name in sorted(files):
                zf.writestr(name, files[name])
        return Response(
            content=buffer.getvalue(),
            media_type="application/zip",
            headers={"Content-Disposition": f'attachment; filename="{experiment_id}.zip"'},
        )

    # -- join -----------------------------------------------------------------

    @app.get("/researcher/join-experiment")
    @guard
    def join_route(
        group: Optional[str] = Query(None),
        experiment: Optional[str] = Query(None),
        participant_id: Optional[str] = Query(None, alias="participant"),
    ):
        if group is None and experiment is None:
            raise _validation("provide either group= (manual) or experiment= (random)")
        if group is not None:
            exp = ws.experiments.by_group(group)
            if exp.assignment_mode != "manual":
                raise _validation("group links are only valid for manual-assignment experiments")
        else:
            exp = ws.experiments.get(experiment)
            if exp.assignment_mode != "random":
                raise _validation("experiment links are only valid for random assignment")
        who = participant_id or ws.ids.new("anon")
        record = ws.experiments.join(exp.id, who, group_param=group, now=ws.clock())
        ws.save()
        flags = exp.group(record.group_id).flags
        return {
            "token": ws.issue_token(exp.id, record.group_id, who),
            "experiment": exp.id,
            "group": record.group_id,
            "participant": who,
            "flags": dict(sorted(flags.items())),
            "welcome_doc": (
                f"{ws.config.base_url}/experiments/{exp.id}/docs/welcome"
                if exp.welcome_doc
                else None
            ),
            "exit_doc": (
                f"{ws.config.base_url}/experiments/{exp.id}/docs/exit" if exp.exit_doc else None
            ),
        }

    @app.get("/experiments/{experiment_id}/docs/{which}")
    @guard
    def docs_route(experiment_id: str, which: str):
        experiment = ws.experiments.get(experiment_id)
        doc = {"welcome": experiment.welcome_doc, "exit": experiment.exit_doc}.get(which)
        if which not in ("welcome", "exit"):
            raise _validation("document must be welcome or exit")
        if doc is None:
            raise _not_found(f"experiment has no {which} document")
        return Response(content=doc.data, media_type=doc.media_type)

    # -- participant: exemplars and models -------------------------------------

    @app.get("/exemplars")
    @guard
    def exemplars_route(authorization: Optional[str] = Header(None)):
        ctx = participant(authorization)
        require_flag(ctx, "exemplar_models")
        return {
            "exemplars": [
                {"name": name, "model": model_to_doc(load_exemplar(name))}
                for name in sorted(EXEMPLAR_FILES)
            ]
        }

    @app.post("/models", status_code=201)
    @guard
    def create_model_route(body: dict = Body(...), authorization: Optional[str] = Header(None)):
        ctx = participant(authorization)
        now = ws.clock()
        if "exemplar" in body:
            require_flag(ctx, "exemplar_models")
            name = body["exemplar"]
            if name not in EXEMPLAR_FILES:
                raise _not_found(f"no exemplar named {name!r}")
            model = clone_model(
                load_exemplar(name),
                new_owner=ctx.participant,
                id_gen=ws.ids.gen("v"),
                now=now,
                provenance=Provenance.exemplar(name),
            )
        else:
            model = new_model(
                body.get("name", ""), ctx.participant, id_gen=ws.ids.gen("m"), now=now
            )
        payload = {"provenance": _provenance_payload(model)}
        emit(ctx, model.id, derive_action("new_model"), payload, model=model)
        return model_to_doc(model)

    @app.get("/models/{model_id}")
    @guard
    def get_model_route(model_id: str, authorization: Optional[str] = Header(None)):
        ctx = participant(authorization)
        return model_to_doc(ws.model_for(model_id, ctx.participant))

    @app.put("/models/{model_id}")
    @guard
    def edit_model_route(
        model_id: str, body: dict = Body(...), authorization: Optional[str] = Header(None)
    ):
        ctx = participant(authorization)
        model = ws.model_for(model_id, ctx.participant)
        edits = [k for k in (
            "add_component", "remove_component", "add_relationship", "remove_relationship"
        ) if k in body]
        if len(edits) != 1:
            raise _validation("exactly one structural edit per update")
        edit = edits[0]
        now = ws.clock()
        if edit == "add_component":
            spec = body[edit]
            model2 = add_component(
                model,
                spec.get("name", ""),
                spec.get("kind", ""),
                spec.get("params"),
                id_gen=ws.ids.gen("c"),
                now=now,
            )
            target = model2.component_by_name(spec.get("name", "")).id
        elif edit == "remove_component":
            target = body[edit]
            model2 = remove_component(model, target, now=now)
        elif edit == "add_relationship":
            spec = body[edit]
            model2 = add_relationship(
                model,
                spec.get("source", ""),
                spec.get("target", ""),
                spec.get("kind", ""),
                rate=spec.get("rate", 0.1),
                id_gen=ws.ids.gen("r"),
                now=now,
            )
            target = model2.relationships[-1].id
        else:
            target = body[edit]
            model2 = remove_relationship(model, target, now=now)
        action = derive_action(edit, simulated_before=ws.events.has_simulated(model_id))
        emit(ctx, model_id, action, {"edit": edit, "target": target}, model=model2)
        return model_to_doc(model2)

    @app.post("/models/{model_id}/clone", status_code=201)
    @guard
    def clone_route(model_id: str, authorization: Optional[str] = Header(None)):
        ctx = participant(authorization)
        require_flag(ctx, "cloning")
        model = ws.model_for(model_id, ctx.participant)
        copy = clone_model(model, ctx.participant, id_gen=ws.ids.gen("v"), now=ws.clock())
        emit(ctx, copy.id, derive_action("clone_model"), {"provenance": _provenance_payload(copy)},
             model=copy)
        return model_to_doc(copy)

    @app.post("/models/{model_id}/relationships", status_code=201)
    @guard
    def add_relationship_route(
        model_id: str, body: dict = Body(...), authorization: Optional[str] = Header(None)
    ):
        ctx = participant(authorization)
        model = ws.model_for(model_id, ctx.participant)
        model2 = add_relationship(
            model,
            body.get("source", ""),
            body.get("target", ""),
            body.get("kind", ""),
            rate=body.get("rate", 0.1),
            id_gen=ws.ids.gen("r"),
            now=ws.clock(),
        )
        rel = model2.relationships[-1]
        action = derive_action(
            "add_relationship", simulated_before=ws.events.has_simulated(model_id)
        )
        emit(ctx, model_id, action, {"edit": "add_relationship", "target": rel.id}, model=model2)
        return model_to_doc(model2)

    @app.post("/models/{model_id}/parameters")
    @guard
    def set_parameter_route(
        model_id: str, body: dict = Body(...), authorization: Optional[str] = Header(None)
    ):
        ctx = participant(authorization)
        model = ws.model_for(model_id, ctx.participant)
        now = ws.clock()
        if "relationship" in body:
            rel = model.relationship(body["relationship"])
            model2, old, new = set_relationship_rate(
                model, body["relationship"], body.get("value"), now=now
            )
            payload = {
                "component": rel.kind.capitalize(),
                "parameter": RATE_PARAMETER[rel.kind],
                "relationship": rel.id,
                "old": old,
                "new": new,
            }
        else:
            component_id = body.get("component", "")
            param = body.get("parameter", "")
            if param in _ADVANCED:
                require_flag(ctx, "advanced_parameters")
            component = model.component(component_id)
            model2, old, new = set_parameter(model, component_id, param, body.get("value"), now=now)
            payload = {
                "component": component.name,
                "component_id": component_id,
                "parameter": param,
                "old": old,
                "new": new,
            }
        if "note" in body:
            payload["note"] = body["note"]
        emit(ctx, model_id, derive_action("set_parameter"), payload, model=model2)
        return {"old": payload["old"], "new": payload["new"]}

    # -- participant: simulation ------------------------------------------------

    @app.post("/models/{model_id}/simulate", status_code=201)
    @guard
    def simulate_route(
        model_id: str, body: dict = Body(None), authorization: Optional[str] = Header(None)
    ):
        ctx = participant(authorization)
        require_flag(ctx, "simulation")
        model = ws.model_for(model_id, ctx.participant)
        body = body or {}
        try:
            config = sim.SimConfig(
                steps=int(body.get("steps", 24)),
                runs=int(body.get("runs", 10)),
                seed=int(body.get("seed", ws.config.default_seed)),
                arena_scale=float(body.get("arena_scale", 1000.0)),
                starvation_severity=float(body.get("starvation_severity", 0.5)),
                histogram_bins=int(body.get("histogram_bins", 20)),
            )
        except (TypeError, ValueError) as exc:
            raise _validation(f"bad simulation config: {exc}")
        spec = sim.compile(model)
        batch_id = ws.ids.new("b")
        record = BatchRecord(
            id=batch_id,
            experiment=ctx.experiment_id,
            participant=ctx.participant,
            model_id=model_id,
            config=config,
            spec=spec,
            names=dict(spec.names),
        )
        if config.runs * config.steps <= ws.config.sync_sim_limit:
            record.runs = sim.run_batch(spec, config)
            record.status = "done"
            emit(ctx, model_id, derive_action("run_batch"),
                 {"batch": batch_id, "runs": config.runs})
            ws.batches[batch_id] = record
        else:
            record.status = "pending"
            emit(ctx, model_id, derive_action("run_batch"),
                 {"batch": batch_id, "runs": config.runs})
            ws.batches[batch_id] = record

            def _job():
                try:
                    record.runs = sim.run_batch(spec, config)
                    record.status = "done"
                except Exception as exc:  # noqa: BLE001
                    record.status = "failed"
                    record.error = str(exc)
                ws.save()

            threading.Thread(target=_job, daemon=True).start()
        ws.save()
        return {"batch": batch_id, "runs": config.runs, "status": record.status}

    @app.get("/simulations/{batch_id}")
    @guard
    def get_batch_route(batch_id: str, authorization: Optional[str] = Header(None)):
        ctx = participant(authorization)
        record = _batch_for(ctx, batch_id)
        doc = {
            "batch": record.id,
            "model": record.model_id,
            "status": record.status,
            "runs": record.config.runs,
            "steps": record.config.steps,
            "seed": record.config.seed,
        }
        if record.status == "done":
            doc["series"] = {
                record.names[cid]: [series.values[cid] for series in record.runs]
                for cid in sorted(record.names)
            }
        if record.status == "failed":
            doc["error"] = record.error
        return doc

    @app.get("/simulations/{batch_id}/aggregate")
    @guard
    def aggregate_route(
        batch_id: str,
        target: str = Query(...),
        authorization: Optional[str] = Header(None),
    ):
        ctx = participant(authorization)
        record = _batch_for(ctx, batch_id)
        if record.status != "done":
            raise ApiError("no_data", f"batch is {record.status}", 409)
        cid = _component_id_for(record, target)
        agg = sim.aggregate(record.runs, cid, record.config.histogram_bins)
        doc = sim.aggregate_sidecar(agg)
        doc["target"] = record.names[cid]
        doc["summaries"] = list(agg.summaries)
        return doc

    def _batch_for(ctx: ParticipantCtx, batch_id: str) -> BatchRecord:
        record = ws.batches.get(batch_id)
        if record is None or record.participant != ctx.participant:
            raise _not_found(f"no simulation batch {batch_id!r}")
        return ws.ensure_batch_runs(record)

    def _component_id_for(record: BatchRecord, target: str) -> str:
        if target in record.names:
            return target
        for cid, name in record.names.items():
            if name == target:
                return cid
        raise _not_found(f"no component {target!r} in batch {record.id!r}")

    # -- participant: traits -------------------------------------------------------

    @app.get("/traits")
    @guard
    def traits_route(name: str = Query(...), authorization: Optional[str] = Header(None)):
        ctx = participant(authorization)
        require_flag(ctx, "lookup_eol")
        return record_to_doc(ws.traits.lookup(name))

    @app.post("/models/{model_id}/apply-traits")
    @guard
    def apply_traits_route(
        model_id: str, body: dict = Body(...), authorization: Optional[str] = Header(None)
    ):
        ctx = participant(authorization)
        require_flag(ctx, "lookup_eol")
        model = ws.model_for(model_id, ctx.participant)
        component = model.component(body.get("component", ""))
        record = ws.traits.lookup(body.get("species") or component.name)
        model2, changes = apply_traits(model, component.id, record, now=ws.clock())
        payload = {
            "component": component.name,
            "component_id": component.id,
            "species": record.canonical_name,
            "changes": [{"parameter": p, "old": o, "new": n} for p, o, n in changes],
        }
        emit(ctx, model_id, derive_action("apply_traits"), payload, model=model2)
        return {"species": record.canonical_name, "changes": payload["changes"]}

    if ws.config.ui_dir:
        from fastapi.staticfiles import StaticFiles

        # mounted last so API routes always win
        app.mount("/", StaticFiles(directory=ws.config.ui_dir, html=True), name="ui")

    app.state.workspace = ws
    return app


def _provenance_payload(model: Model):
    from .model import provenance_to_json

    return provenance_to_json(model.provenance)
