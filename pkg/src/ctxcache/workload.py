"""Synthetic sub-query stream: Poisson arrivals over weighted templates.

Arrivals are exponential-gap draws at the base rate, multiplied inside spike
intervals; provider latencies are truncated normals. Everything is driven by
a caller-owned seeded generator so runs replay exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .model import ContextCatalog, ContextProvider

LATENCY_FLOOR = 0.001  # seconds; keeps degenerate normal draws physical


@dataclass(frozen=True)
class SubQueryTemplate:
    template_id: str
    entity_ids: tuple[str, ...]
    attribute_ids: tuple[str, ...]
    sla_id: str
    weight: float = 1.0


@dataclass
class WorkloadSpec:
    lambda_rate: float  # arrivals per second
    duration: float  # seconds in one planning period
    templates: list[SubQueryTemplate]
    spike_schedule: list[tuple[float, float, float]] = field(default_factory=list)
    seed: int = 0


@dataclass(frozen=True)
class SubQueryInstance:
    arrival_time: float
    template_id: str
    sla_id: str


def validate_workload(spec: WorkloadSpec, catalog: ContextCatalog) -> WorkloadSpec:
    if spec.lambda_rate <= 0:
        raise ValueError("lambda_rate must be positive")
    if spec.duration < 0:
        raise ValueError("duration must be non-negative")
    if spec.templates and not any(t.weight > 0 for t in spec.templates):
        raise ValueError("at least one template needs positive weight")
    for start, end, mult in spec.spike_schedule:
        if mult < 1.0:
            raise ValueError(f"spike multiplier {mult} below 1")
        if end <= start:
            raise ValueError(f"empty spike interval [{start}, {end})")
    for t in spec.templates:
        if t.weight < 0:
            raise ValueError(f"negative weight on template {t.template_id}")
        if t.sla_id not in catalog.slas:
            raise ValueError(f"template {t.template_id} names unknown SLA {t.sla_id}")
        covered = set()
        for eid in t.entity_ids:
            if eid not in catalog.entities:
                raise ValueError(f"template {t.template_id} names unknown entity {eid}")
            covered |= catalog.entities[eid].attribute_ids
        missing = set(t.attribute_ids) - covered
        if missing:
            raise ValueError(
                f"template {t.template_id} requests attributes outside its entities: {sorted(missing)}"
            )
    return spec


def _rate_at(spec: WorkloadSpec, t: float) -> float:
    rate = spec.lambda_rate
    for start, end, mult in spec.spike_schedule:
        if start <= t < end:
            rate = spec.lambda_rate * mult
    return rate


def _next_rate_change(spec: WorkloadSpec, t: float) -> float:
    edges = [b for start, end, _ in spec.spike_schedule for b in (start, end) if b > t]
    return min(edges) if edges else float("inf")

def generate_arrivals(spec: WorkloadSpec, rng: np.random.Generator) -> list[SubQueryInstance]:
    """Draw the full arrival trace for one planning period.

    Piecewise-constant rate: draw an exponential gap at the current rate and,
    if it crosses a spike boundary, restart from the boundary (memorylessness
    keeps this exact). Templates are sampled in proportion to weight.
    """
    templates = [t for t in spec.templates if t.weight > 0]
    if not templates or spec.duration <= 0:
        return []
    weights = np.array([t.weight for t in templates], dtype=float)
    probs = weights / weights.sum()

    arrivals: list[SubQueryInstance] = []
    t = 0.0
    while True:
        rate = _rate_at(spec, t)
        gap = rng.exponential(1.0 / rate)
        boundary = _next_rate_change(spec, t)
        if t + gap > boundary:
            t = boundary
            continue
        t += gap
        if t >= spec.duration:
            break
        tmpl = templates[int(rng.choice(len(templates), p=probs))]
        arrivals.append(SubQueryInstance(t, tmpl.template_id, tmpl.sla_id))
    return arrivals


def sample_provider_latency(
    provider: ContextProvider, rng: np.random.Generator, floor: float = LATENCY_FLOOR
) -> float:
    """One latency draw: Normal(mean, var) truncated below at the floor."""
    if provider.latency_var == 0:
        return max(provider.latency_mean, floor)
    draw = rng.normal(provider.latency_mean, np.sqrt(provider.latency_var))
    return max(float(draw), floor)


def arrivals_to_csv(arrivals: list[SubQueryInstance], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["arrival_time", "template_id", "sla_id"])
        for a in arrivals:
            writer.writerow([repr(a.arrival_time), a.template_id, a.sla_id])


def workload_to_dict(spec: WorkloadSpec) -> dict:
    return {
        "lambda_rate": spec.lambda_rate,
        "duration": spec.duration,
        "seed": spec.seed,
        "spikes": [list(s) for s in spec.spike_schedule],
        "templates": [
            {
                "template_id": t.template_id,
                "entities": list(t.entity_ids),
                "attributes": list(t.attribute_ids),
                "sla": t.sla_id,
                "weight": t.weight,
            }
            for t in spec.templates
        ],
    }


def workload_from_dict(data: dict) -> WorkloadSpec:
    return WorkloadSpec(
        lambda_rate=float(data["lambda_rate"]),
        duration=float(data["duration"]),
        seed=int(data.get("seed", 0)),
        spike_schedule=[tuple(s) for s in data.get("spikes", [])],
        templates=[
            SubQueryTemplate(
                template_id=t["template_id"],
                entity_ids=tuple(t["entities"]),
                attribute_ids=tuple(t["attributes"]),
                sla_id=t["sla"],
                weight=float(t.get("weight", 1.0)),
            )
            for t in data.get("templates", [])
        ],
    )
