"""Species-trait lookup: pluggable providers, a bundled dataset, TTL caching.

The default provider serves the packaged fixture entirely offline. A remote
provider exists as an adapter (GET {base}/traits?name=...) so a live trait
database can be swapped in without touching callers.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from datetime import datetime, timedelta
from importlib import resources
from typing import Callable, Optional

from .model import BIOTIC, BIOTIC_PARAMS, Model, ValidationError, check_param_value, set_parameter
from .util import format_ts, utc_now


class SpeciesNotFound(LookupError):
    pass


class ProviderTimeout(TimeoutError):
    pass


@dataclass(frozen=True)
class TraitRecord:
    canonical_name: str
    params: dict  # partial map of biotic parameter names -> values
    source: str = "local"
    retrieved_at: Optional[datetime] = None

    def __post_init__(self):
        for name, value in self.params.items():
            if name not in BIOTIC_PARAMS:
                raise ValidationError(f"trait {name!r} is not a biotic parameter")
            check_param_value(name, value)


@dataclass(frozen=True)
class ProviderConfig:
    fixture_path: Optional[str] = None  # None -> packaged dataset
    base_url: Optional[str] = None  # set -> remote provider
    cache_ttl: timedelta = timedelta(hours=24)
    timeout: float = 5.0

    def __post_init__(self):
        if self.cache_ttl <= timedelta(0):
            raise ValidationError("cache TTL must be positive")


def _records_from_docs(docs: list, source: str) -> dict:
    by_name = {}
    for doc in docs:
        record = TraitRecord(
            canonical_name=doc["canonical_name"], params=dict(doc["params"]), source=source
        )
        by_name[record.canonical_name.lower()] = record
    return by_name


class LocalTraitProvider:
    """Reads a JSON array of trait records; no network, ever."""

    def __init__(self, fixture_path: Optional[str] = None):
        if fixture_path is None:
            text = (
                resources.files("ecoexp").joinpath("fixtures", "traits", "species.json")
            ).read_text(encoding="utf-8")
            self._source = "local"
        else:
            with open(fixture_path, encoding="utf-8") as f:
                text = f.read()
            self._source = "local"
        self._records = _records_from_docs(json.loads(text), self._source)

    def fetch(self, name: str) -> TraitRecord:
        try:
            return self._records[name.lower()]
        except KeyError:
            raise SpeciesNotFound(name) from None


class RemoteTraitProvider:
    """Adapter for GET {base}/traits?name={urlencoded} -> TraitRecord JSON.

    An httpx transport can be injected, so tests run against recorded
    responses without any network.
    """

    def __init__(self, base_url: str, timeout: float = 5.0, transport=None):
        self._base = base_url.rstrip("/")
        self._timeout = timeout
        self._transport = transport

    def fetch(self, name: str) -> TraitRecord:
        import httpx

        try:
            with httpx.Client(transport=self._transport, timeout=self._timeout) as client:
                response = client.get(f"{self._base}/traits", params={"name": name})
        except httpx.TimeoutException as exc:
            raise ProviderTimeout(f"trait provider timed out after {self._timeout}s") from exc
        if response.status_code == 404:
            raise SpeciesNotFound(name)
        response.raise_for_status()
        doc = response.json()
        return TraitRecord(
            canonical_name=doc["canonical_name"],
            params=dict(doc["params"]),
            source=self._base,
        )


class TraitService:
    """Cached lookup with single-flight misses."""

    def __init__(
        self,
        provider=None,
        config: ProviderConfig = ProviderConfig(),
        clock: Callable[[], datetime] = utc_now,
    ):
        if provider is None:
            if config.base_url:
                provider = RemoteTraitProvider(config.base_url, config.timeout)
            else:
                provider = LocalTraitProvider(config.fixture_path)
        self._provider = provider
        self._ttl = config.cache_ttl
        self._clock = clock
        self._cache: dict[str, TraitRecord] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _name_lock(self, key: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(key, threading.Lock())

    def lookup(self, name: str) -> TraitRecord:
        if not name:
            raise ValidationError("species name must be non-empty")
        key = name.lower()
        now = self._clock()
        cached = self._cache.get(key)
        if cached is not None and now - cached.retrieved_at < self._ttl:
            return cached
        with self._name_lock(key):
            now = self._clock()
            cached = self._cache.get(key)  # a concurrent miss may have filled it
            if cached is not None and now - cached.retrieved_at < self._ttl:
                return cached
            record = self._provider.fetch(name)
            stamped = TraitRecord(
                canonical_name=record.canonical_name,
                params=record.params,
                source=record.source,
                retrieved_at=now,
            )
            self._cache[key] = stamped
            return stamped


def apply_traits(
    model: Model, component_id: str, record: TraitRecord, now: Optional[datetime] = None
) -> tuple[Model, list[tuple[str, object, object]]]:
    """Overwrite only the parameters present in the record.

    Returns (model', changes) where changes lists (parameter, old, new) for
    every value that actually moved -- the E-event payload.
    """
    component = model.component(component_id)
    if component.kind != BIOTIC:
        raise ValidationError(f"cannot apply species traits to abiotic {component.name!r}")
    changes = []
    for param in sorted(record.params):
        value = record.params[param]
        if component.params.get(param) == value:
            continue  # idempotence: re-applying a record is a no-op
        model, old, new = set_parameter(model, component_id, param, value, now=now)
        component = model.component(component_id)
        changes.append((param, old, new))
    return model, changes


def record_to_doc(record: TraitRecord) -> dict:
    return {
        "canonical_name": record.canonical_name,
        "params": dict(sorted(record.params.items())),
        "source": record.source,
        "retrieved_at": format_ts(record.retrieved_at) if record.retrieved_at else None,
    }
