import threading
from datetime import datetime, timedelta, timezone

import pytest

from ecoexp.exemplars import load_exemplar
from ecoexp.model import ValidationError
from ecoexp.traits import (
    LocalTraitProvider,
    ProviderConfig,
    SpeciesNotFound,
    TraitRecord,
    TraitService,
    apply_traits,
)


class CountingProvider:
    """Wraps the local dataset and counts fetches; proves no hidden calls."""

    def __init__(self):
        self.inner = LocalTraitProvider()
        self.calls = 0
        self.lock = threading.Lock()

    def fetch(self, name):
        with self.lock:
            self.calls += 1
        return self.inner.fetch(name)


class TickingClock:
    def __init__(self):
        self.now = datetime(2026, 1, 1, tzinfo=timezone.utc)

    def __call__(self):
        return self.now


def test_lookup_bundled_wolf():
    record = TraitService().lookup("Canis lupus")
    assert record.canonical_name == "Canis lupus"
    for key in ("lifespan", "body_mass", "offspring_count"):
        assert key in record.params


def test_lookup_is_case_insensitive_exact():
    service = TraitService()
    assert service.lookup("CANIS LUPUS").canonical_name == "Canis lupus"
    with pytest.raises(SpeciesNotFound):
        service.lookup("Canis")


def test_lookup_not_found_and_empty():
    service = TraitService()
    with pytest.raises(SpeciesNotFound):
        service.lookup("no-such-species")
    with pytest.raises(ValidationError):
        service.lookup("")


def test_cache_serves_within_ttl():
    provider = CountingProvider()
    clock = TickingClock()
    service = TraitService(provider=provider, clock=clock)
    service.lookup("Grass")
    service.lookup("Grass")
    assert provider.calls == 1
    clock.now += timedelta(hours=25)  # past the 24h TTL
    service.lookup("Grass")
    assert provider.calls == 2


def test_fixture_has_at_least_ten_species():
    provider = LocalTraitProvider()
    names = [
        "Canis lupus", "Ovis aries", "Grass", "Kudzu", "Kudzu bug", "American hornbeam",
        "Vulpes vulpes", "Lepus europaeus", "Cervus elaphus", "Quercus alba",
    ]
    for name in names:
        assert provider.fetch(name).canonical_name == name


def test_single_flight_on_concurrent_misses():
    provider = CountingProvider()
    service = TraitService(provider=provider, clock=TickingClock())
    threads = [threading.Thread(target=lambda: service.lookup("Kudzu")) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert provider.calls == 1


def test_trait_record_rejects_foreign_params():
    with pytest.raises(ValidationError):
        TraitRecord(canonical_name="x", params={"amount": 5})
    with pytest.raises(ValidationError):
        TraitRecord(canonical_name="x", params={"lifespan": 0})


def test_apply_traits_overwrites_only_present_params():
    model = load_exemplar("wolf-sheep-grass")
    sheep = model.component_by_name("Ovis aries")
    record = TraitRecord(canonical_name="Ovis aries", params={"lifespan": 72})
    updated, changes = apply_traits(model, sheep.id, record)
    assert changes == [("lifespan", 24, 72)]
    after = updated.component_by_name("Ovis aries").params
    before = sheep.params
    assert after["lifespan"] == 72
    assert {k: v for k, v in after.items() if k != "lifespan"} == {
        k: v for k, v in before.items() if k != "lifespan"
    }


def test_apply_traits_is_idempotent():
    model = load_exemplar("wolf-sheep-grass")
    sheep = model.component_by_name("Ovis aries").id
    record = TraitRecord(canonical_name="Ovis aries", params={"lifespan": 72, "body_mass": 80.0})
    once, first_changes = apply_traits(model, sheep, record)
    twice, second_changes = apply_traits(once, sheep, record)
    assert once == twice
    assert first_changes and second_changes == []


def test_apply_traits_empty_record_is_noop():
    model = load_exemplar("wolf-sheep-grass")
    sheep = model.component_by_name("Ovis aries").id
    updated, changes = apply_traits(model, sheep, TraitRecord("Ovis aries", {}))
    assert updated == model and changes == []


def test_apply_traits_rejects_abiotic_target():
    model = load_exemplar("kudzu")
    light = model.component_by_name("Light").id
    with pytest.raises(ValidationError):
        apply_traits(model, light, TraitRecord("Light", {"lifespan": 2}))


def test_provider_config_validation():
    with pytest.raises(ValidationError):
        ProviderConfig(cache_ttl=timedelta(0))


def _recorded_transport():
    import httpx

    def handler(request):
        name = request.url.params.get("name", "")
        if name.lower() == "canis lupus":
            return httpx.Response(
                200,
                json={"canonical_name": "Canis lupus",
                      "params": {"lifespan": 160, "body_mass": 42.0}},
            )
        return httpx.Response(404, json={"error": "unknown species"})

    return httpx.MockTransport(handler)


def test_remote_provider_against_recorded_responses():
    from ecoexp.traits import RemoteTraitProvider

    provider = RemoteTraitProvider("http://traits.example", transport=_recorded_transport())
    record = provider.fetch("Canis lupus")
    assert record.canonical_name == "Canis lupus"
    assert record.params["lifespan"] == 160
    assert record.source == "http://traits.example"
    with pytest.raises(SpeciesNotFound):
        provider.fetch("Nessie")


def test_remote_provider_behind_the_service_cache():
    from ecoexp.traits import RemoteTraitProvider

    provider = RemoteTraitProvider("http://traits.example", transport=_recorded_transport())
    service = TraitService(provider=provider, clock=TickingClock())
    assert service.lookup("canis lupus").params["body_mass"] == 42.0
