"""Discrete-time stochastic population simulator.

A conceptual model compiles into an update program over monthly steps. The
per-step stage order is fixed and documented on `run`; all randomness comes
from counter-based draws keyed by (seed, run_index, step, entity, stage), so
a batch is reproducible no matter how its runs are scheduled.
"""

from __future__ import annotations

import csv
import io
import math
import random
import warnings
from dataclasses import dataclass

from . import rng
from .model import ABIOTIC, BIOTIC, CONSUMES, DESTROYS, PRODUCES, Model, validate

POPULATION_CAP = 10**9

# RNG stage tags
_STAGE_GROWTH = 1
_STAGE_REPRODUCTION = 4
_STAGE_MORTALITY = 5
_STAGE_STARVATION = 6
_STAGE_DESTROYS = 7


@dataclass(frozen=True)
class SimConfig:
    steps: int = 24
    runs: int = 10
    seed: int = 0
    arena_scale: float = 1000.0
    starvation_severity: float = 0.5
    histogram_bins: int = 20
    expectation_forced: bool = False

    def __post_init__(self):
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.arena_scale <= 0:
            raise ValueError("arena_scale must be positive")
        if not 0.0 <= self.starvation_severity <= 1.0:
            raise ValueError("starvation_severity must lie in [0, 1]")
        if self.histogram_bins < 1:
            raise ValueError("histogram_bins must be >= 1")


class CompileError(ValueError):
    def __init__(self, violations: list[str]):
        super().__init__("model does not compile: " + "; ".join(violations))
        self.violations = violations


@dataclass(frozen=True)
class _Edge:
    id: str
    source: str
    target: str
    rate: float


@dataclass(frozen=True)
class SimSpec:
    model_id: str
    order: tuple[str, ...]  # component ids, canonical order
    names: dict
    kinds: dict
    params: dict  # component id -> param map
    consumes: tuple[_Edge, ...]
    produces: tuple[_Edge, ...]
    destroys: tuple[_Edge, ...]
    producers: frozenset
    consumers: frozenset

    def initial_state(self) -> dict:
        state = {}
        for cid in self.order:
            p = self.params[cid]
            state[cid] = int(p["starting_population"] if self.kinds[cid] == BIOTIC else p["amount"])
        return state


def compile(model: Model) -> SimSpec:
    violations = validate(model)
    if violations:
        raise CompileError(violations)
    components = sorted(model.components, key=lambda c: c.id)
    edges = {CONSUMES: [], PRODUCES: [], DESTROYS: []}
    for r in sorted(model.relationships, key=lambda r: r.id):
        edges[r.kind].append(_Edge(r.id, r.source, r.target, r.rate))
    producers = frozenset(
        c.id for c in components if c.kind == BIOTIC and c.params.get("photosynthesis_rate", 0) > 0
    )
    consumers = frozenset(e.source for e in edges[CONSUMES])
    return SimSpec(
        model_id=model.id,
        order=tuple(c.id for c in components),
        names={c.id: c.name for c in components},
        kinds={c.id: c.kind for c in components},
        params={c.id: dict(c.params) for c in components},
        consumes=tuple(edges[CONSUMES]),
        produces=tuple(edges[PRODUCES]),
        destroys=tuple(edges[DESTROYS]),
        producers=producers,
        consumers=consumers,
    )


@dataclass
class RunSeries:
    run_index: int
    seed: int
    values: dict  # component id -> list of length steps+1
    overflow: bool = False


def _clamp(value: int) -> tuple[int, bool]:
    if value > POPULATION_CAP:
        return POPULATION_CAP, True
    return value, False


def run(spec: SimSpec, config: SimConfig, run_index: int) -> RunSeries:
    """One seeded trajectory.

    Stage order within each step t = 1..steps:
      1 producer logistic growth, 2 consumption along consumes edges,
      3 satiation, 4 reproduction (on the component's interval),
      5 natural mortality, 6 starvation of under-fed consumers,
      7 destroys edges, 8 produces edges, 9 abiotic regrowth/floor,
      10 biotic minimum-population floor.
    """
    draws_cls = rng.ForcedDraws if config.expectation_forced else rng.StageDraws
    state = spec.initial_state()
    series = {cid: [state[cid]] for cid in spec.order}
    overflow = False
    biotic = [cid for cid in spec.order if spec.kinds[cid] == BIOTIC]
    abiotic = [cid for cid in spec.order if spec.kinds[cid] == ABIOTIC]

    def draws(step: int, entity: str, stage: int):
        return draws_cls(config.seed, run_index, step, entity, stage)

    for t in range(1, config.steps + 1):
        intake = {cid: 0 for cid in spec.order}

        for cid in biotic:  # 1: producers grow logistically
            if cid in spec.producers:
                n = state[cid]
                lam = spec.params[cid]["photosynthesis_rate"] * n * max(
                    0.0, 1.0 - n / config.arena_scale
                )
                grown, hit = _clamp(n + draws(t, cid, _STAGE_GROWTH).poisson(lam))
                state[cid] = grown
                overflow = overflow or hit

        for e in spec.consumes:  # 2: consumption (canonical edge order)
            attempted = int(round(e.rate * state[e.source]))
            consumed = min(state[e.target], attempted)
            state[e.target] -= consumed
            intake[e.source] += consumed

        satiation = {}  # 3
        for cid in spec.consumers:
            ae = spec.params[cid].get("assimilation_efficiency", 1.0)
            satiation[cid] = min(1.0, ae * intake[cid] / max(1, state[cid]))

        for cid in biotic:  # 4: reproduction
            p = spec.params[cid]
            if t % int(p["reproductive_interval"]) != 0:
                continue
            maturity_share = min(1.0, max(0.0, 1.0 - p["reproductive_maturity"] / p["lifespan"]))
            mature = math.floor(state[cid] * maturity_share)
            fertility = satiation[cid] if cid in spec.consumers else 1.0
            births = draws(t, cid, _STAGE_REPRODUCTION).poisson(
                mature * p["offspring_count"] * fertility
            )
            state[cid], hit = _clamp(state[cid] + births)
            overflow = overflow or hit

        for cid in biotic:  # 5: natural mortality
            deaths = draws(t, cid, _STAGE_MORTALITY).binomial(
                state[cid], 1.0 / spec.params[cid]["lifespan"]
            )
            state[cid] -= deaths

        for cid in biotic:  # 6: starvation
            if cid not in spec.consumers:
                continue
            p_starve = (1.0 - satiation[cid]) * config.starvation_severity
            state[cid] -= draws(t, cid, _STAGE_STARVATION).binomial(state[cid], p_starve)

        for e in spec.destroys:  # 7: abiotic harm, keyed by edge id
            p_hit = min(1.0, e.rate * state[e.source] / config.arena_scale)
            state[e.target] -= draws(t, e.id, _STAGE_DESTROYS).binomial(state[e.target], p_hit)

        for e in spec.produces:  # 8
            state[e.target], hit = _clamp(state[e.target] + int(round(e.rate * state[e.source])))
            overflow = overflow or hit

        for cid in abiotic:  # 9: abiotic regrowth and floor
            p = spec.params[cid]
            regrown = int(round(state[cid] * (1.0 + p["growth_rate"])))
            state[cid], hit = _clamp(max(int(p["minimum_amount"]), regrown))
            overflow = overflow or hit

        for cid in biotic:  # 10
            state[cid] = max(state[cid], int(spec.params[cid]["minimum_population"]))

        for cid in spec.order:
            series[cid].append(state[cid])

    if overflow:
        warnings.warn(
            f"simulation of {spec.model_id} clamped a population at {POPULATION_CAP}",
            RuntimeWarning,
            stacklevel=2,
        )
    return RunSeries(run_index=run_index, seed=config.seed, values=series, overflow=overflow)


def run_batch(spec: SimSpec, config: SimConfig) -> list[RunSeries]:
    return [run(spec, config, i) for i in range(config.runs)]


@dataclass(frozen=True)
class HistogramBin:
    lo: float
    hi: float
    count: int


@dataclass(frozen=True)
class BatchAggregate:
    target: str
    summaries: tuple[float, ...]  # time-averaged population, one per run
    bins: tuple[HistogramBin, ...]
    peak: float  # midpoint of the modal bin
    mean: float


def time_average(series: RunSeries, target: str) -> float:
    values = series.values[target]
    return sum(values) / len(values)


def aggregate(batch: list[RunSeries], target: str, histogram_bins: int = 20) -> BatchAggregate:
    if not batch:
        raise ValueError("empty batch")
    if target not in batch[0].values:
        raise KeyError(f"unknown target component {target!r}")
    summaries = tuple(time_average(series, target) for series in batch)
    lo, hi = min(summaries), max(summaries)
    if lo == hi:  # degenerate batch collapses to a single bin
        return BatchAggregate(
            target=target,
            summaries=summaries,
            bins=(HistogramBin(lo=lo, hi=hi, count=len(summaries)),),
            peak=lo,
            mean=lo,
        )
    width = (hi - lo) / histogram_bins
    counts = [0] * histogram_bins
    for s in summaries:
        counts[min(int((s - lo) / width), histogram_bins - 1)] += 1
    bins = tuple(
        HistogramBin(lo=lo + i * width, hi=lo + (i + 1) * width, count=counts[i])
        for i in range(histogram_bins)
    )
    modal = max(range(histogram_bins), key=lambda i: (counts[i], -i))
    return BatchAggregate(
        target=target,
        summaries=summaries,
        bins=bins,
        peak=(bins[modal].lo + bins[modal].hi) / 2.0,
        mean=sum(summaries) / len(summaries),
    )


@dataclass(frozen=True)
class PeakShiftReport:
    delta_mean: float
    delta_peak: float
    shifted_right: bool
    ci_low: float
    ci_high: float


def peak_shift(
    baseline: BatchAggregate,
    treatment: BatchAggregate,
    resamples: int = 1000,
    seed: int = 0,
) -> PeakShiftReport:
    """Bootstrap test of whether the treatment distribution moved right."""
    if baseline.target != treatment.target:
        raise ValueError(
            f"mismatched targets: {baseline.target!r} vs {treatment.target!r}"
        )
    delta_mean = treatment.mean - baseline.mean
    delta_peak = treatment.peak - baseline.peak
    r = random.Random(seed)
    deltas = []
    for _ in range(resamples):
        b = [r.choice(baseline.summaries) for _ in baseline.summaries]
        t = [r.choice(treatment.summaries) for _ in treatment.summaries]
        deltas.append(sum(t) / len(t) - sum(b) / len(b))
    deltas.sort()
    ci_low = deltas[max(0, int(0.025 * resamples) - 1)] if resamples else delta_mean
    ci_high = deltas[min(resamples - 1, int(math.ceil(0.975 * resamples)) - 1)]
    shifted_right = delta_mean > 0 and ci_low > 0
    return PeakShiftReport(
        delta_mean=delta_mean,
        delta_peak=delta_peak,
        shifted_right=shifted_right,
        ci_low=ci_low,
        ci_high=ci_high,
    )


# ---------------------------------------------------------------------------
# Persistence of compiled specs (batches are recomputable from spec + config)


def spec_to_doc(spec: SimSpec) -> dict:
    def edges(items):
        return [
            {"id": e.id, "source": e.source, "target": e.target, "rate": e.rate} for e in items
        ]

    return {
        "model_id": spec.model_id,
        "order": list(spec.order),
        "names": dict(spec.names),
        "kinds": dict(spec.kinds),
        "params": {cid: dict(p) for cid, p in spec.params.items()},
        "consumes": edges(spec.consumes),
        "produces": edges(spec.produces),
        "destroys": edges(spec.destroys),
        "producers": sorted(spec.producers),
        "consumers": sorted(spec.consumers),
    }


def spec_from_doc(doc: dict) -> SimSpec:
    def edges(items):
        return tuple(_Edge(e["id"], e["source"], e["target"], e["rate"]) for e in items)

    return SimSpec(
        model_id=doc["model_id"],
        order=tuple(doc["order"]),
        names=dict(doc["names"]),
        kinds=dict(doc["kinds"]),
        params={cid: dict(p) for cid, p in doc["params"].items()},
        consumes=edges(doc["consumes"]),
        produces=edges(doc["produces"]),
        destroys=edges(doc["destroys"]),
        producers=frozenset(doc["producers"]),
        consumers=frozenset(doc["consumers"]),
    )


def config_to_doc(config: SimConfig) -> dict:
    return {
        "steps": config.steps,
        "runs": config.runs,
        "seed": config.seed,
        "arena_scale": config.arena_scale,
        "starvation_severity": config.starvation_severity,
        "histogram_bins": config.histogram_bins,
        "expectation_forced": config.expectation_forced,
    }


def config_from_doc(doc: dict) -> SimConfig:
    return SimConfig(**doc)


# ---------------------------------------------------------------------------
# Exports


def batch_csv(batch: list[RunSeries], names: dict) -> str:
    """One row per sample: run,step,component,value."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["run", "step", "component", "value"])
    for series in batch:
        for cid in sorted(series.values):
            label = names.get(cid, cid)
            for step, value in enumerate(series.values[cid]):
                writer.writerow([series.run_index, step, label, value])
    return out.getvalue()


def aggregate_csv(agg: BatchAggregate) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["run", "summary"])
    for i, s in enumerate(agg.summaries):
        writer.writerow([i, s])
    return out.getvalue()


def aggregate_sidecar(agg: BatchAggregate) -> dict:
    return {
        "target": agg.target,
        "bins": [{"lo": b.lo, "hi": b.hi, "count": b.count} for b in agg.bins],
        "peak": agg.peak,
        "mean": agg.mean,
    }
