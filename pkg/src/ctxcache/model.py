"""Domain model: the context hierarchy, providers, consumer SLAs, and freshness math.

Entities own attributes, attributes are sourced from providers, and consumer
SLAs price every response. Freshness decays linearly with age over a static
lifetime; everything downstream (admission heuristics, eviction, pricing)
builds on the three small formulas here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

INF = math.inf


@dataclass(frozen=True)
class ContextAttribute:
    attr_id: str
    entity_id: str
    provider_ids: tuple[str, ...]
    lifetime: float  # seconds; math.inf for values that never age out


@dataclass(frozen=True)
class ContextEntity:
    entity_id: str
    attribute_ids: frozenset[str]


@dataclass(frozen=True)
class ContextProvider:
    provider_id: str
    latency_mean: float  # seconds
    latency_var: float  # seconds^2
    sampling_rate: float  # Hz
    cost_per_retrieval: float
    availability: float = 1.0


@dataclass(frozen=True)
class ConsumerSla:
    sla_id: str
    price_per_response: float
    freshness_threshold: float  # minimum accepted freshness, in [0, 1)
    delay_penalty: float  # charged when response time exceeds rt_max
    invalid_penalty: float  # charged when a response cannot meet freshness
    rt_max: float  # seconds


@dataclass
class ContextCatalog:
    entities: dict[str, ContextEntity] = field(default_factory=dict)
    attributes: dict[str, ContextAttribute] = field(default_factory=dict)
    providers: dict[str, ContextProvider] = field(default_factory=dict)
    slas: dict[str, ConsumerSla] = field(default_factory=dict)

    def primary_provider(self, attr_id: str) -> ContextProvider:
        """Cheapest refresh path: the provider with the lowest mean latency."""
        attr = self.attributes[attr_id]
        return min(
            (self.providers[p] for p in attr.provider_ids),
            key=lambda p: (p.latency_mean, p.provider_id),
        )

    def effective_lifetime(self, attr_id: str) -> float:
        """max(sampling period, declared lifetime) for the primary provider."""
        attr = self.attributes[attr_id]
        provider = self.primary_provider(attr_id)
        return max(1.0 / provider.sampling_rate, attr.lifetime)

    def min_freshness_threshold(self) -> float:
        """Loosest freshness bound over the SLA book (used for ghost purging)."""
        if not self.slas:
            return 0.0
        return min(s.freshness_threshold for s in self.slas.values())


@dataclass(frozen=True)
class DanglingReference:
    kind: str  # "provider" | "entity" | "attribute"
    ref_id: str
    referred_from: str

    def __str__(self) -> str:
        return f"dangling {self.kind} reference {self.ref_id!r} from {self.referred_from!r}"


@dataclass(frozen=True)
class NonPositiveField:
    field_name: str
    owner_id: str

    def __str__(self) -> str:
        return f"non-positive field {self.field_name!r} on {self.owner_id!r}"


class CatalogValidationError(ValueError):
    """Raised with every violation found, not just the first."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


def validate_catalog(catalog: ContextCatalog) -> ContextCatalog:
    """Check referential integrity and field ranges; return the catalog unchanged.

    Collects every violation before raising so a broken scenario file can be
    fixed in one pass.
    """
    bad: list = []
    for attr in catalog.attributes.values():
        if not attr.provider_ids:
            bad.append(DanglingReference("provider", "<empty>", attr.attr_id))
        for pid in attr.provider_ids:
            if pid not in catalog.providers:
                bad.append(DanglingReference("provider", pid, attr.attr_id))
        if attr.entity_id not in catalog.entities:
            bad.append(DanglingReference("entity", attr.entity_id, attr.attr_id))
        if not (attr.lifetime > 0):
            bad.append(NonPositiveField("lifetime", attr.attr_id))
    for entity in catalog.entities.values():
        if not entity.attribute_ids:
            bad.append(DanglingReference("attribute", "<empty>", entity.entity_id))
        for aid in entity.attribute_ids:
            if aid not in catalog.attributes:
                bad.append(DanglingReference("attribute", aid, entity.entity_id))
    for p in catalog.providers.values():
        if not (p.latency_mean > 0):
            bad.append(NonPositiveField("latency_mean", p.provider_id))
        if p.latency_var < 0:
            bad.append(NonPositiveField("latency_var", p.provider_id))
        if not (p.sampling_rate > 0):
            bad.append(NonPositiveField("sampling_rate", p.provider_id))
        if not (0.0 <= p.availability <= 1.0):
            bad.append(NonPositiveField("availability", p.provider_id))
        if p.cost_per_retrieval < 0:
            bad.append(NonPositiveField("cost_per_retrieval", p.provider_id))
    for s in catalog.slas.values():
        if not (0.0 <= s.freshness_threshold < 1.0):
            bad.append(NonPositiveField("freshness_threshold", s.sla_id))
        if not (s.rt_max > 0):
            bad.append(NonPositiveField("rt_max", s.sla_id))
        for name in ("price_per_response", "delay_penalty", "invalid_penalty"):
            if getattr(s, name) < 0:
                bad.append(NonPositiveField(name, s.sla_id))
    if bad:
        raise CatalogValidationError(bad)
    return catalog


def arrival_freshness(mean_retrieval_latency: float, lifetime: float) -> float:
    """Freshness left in a value the moment it arrives: 1 - latency / lifetime.

    Clamped to [0, 1]; an immortal lifetime arrives fully fresh.
    """
    if mean_retrieval_latency < 0:
        raise ValueError("retrieval latency must be non-negative")
    if math.isinf(lifetime):
        return 1.0
    if lifetime <= 0:
        raise ValueError("lifetime must be positive or infinite")
    return min(1.0, max(0.0, 1.0 - mean_retrieval_latency / lifetime))


def residual_lifetime(f_arrive: float, f_thresh: float, mean_retrieval_latency: float) -> float:
    """Seconds of useful cache residency left after retrieval eats into freshness.

    (f_arrive - f_thresh) * latency / (1 - f_arrive). Non-positive means the
    item is not worth caching for this threshold; f_arrive == 1 means it never
    expires.
    """
    if f_arrive >= 1.0:
        return INF
    return (f_arrive - f_thresh) * mean_retrieval_latency / (1.0 - f_arrive)


def freshness_at(age: float, lifetime: float) -> float:
    """Linear decay: 1 - age / lifetime, clamped to [0, 1]."""
    if age < 0:
        raise ValueError("age must be non-negative")
    if math.isinf(lifetime):
        return 1.0
    return min(1.0, max(0.0, 1.0 - age / lifetime))


def catalog_to_dict(catalog: ContextCatalog) -> dict:
    return {
        "entities": {
            e.entity_id: {"attributes": sorted(e.attribute_ids)}
            for e in catalog.entities.values()
        },
        "attributes": {
            a.attr_id: {
                "entity": a.entity_id,
                "providers": list(a.provider_ids),
                "lifetime": None if math.isinf(a.lifetime) else a.lifetime,
            }
            for a in catalog.attributes.values()
        },
        "providers": {
            p.provider_id: {
                "latency_mean": p.latency_mean,
                "latency_var": p.latency_var,
                "sampling_rate": p.sampling_rate,
                "cost_per_retrieval": p.cost_per_retrieval,
                "availability": p.availability,
            }
            for p in catalog.providers.values()
        },
        "slas": {
            s.sla_id: {
                "price_per_response": s.price_per_response,
                "freshness_threshold": s.freshness_threshold,
                "delay_penalty": s.delay_penalty,
                "invalid_penalty": s.invalid_penalty,
                "rt_max": s.rt_max,
            }
            for s in catalog.slas.values()
        },
    }


def catalog_from_dict(data: dict) -> ContextCatalog:
    """Build a catalog from its JSON form. Lifetime null means never expires."""
    catalog = ContextCatalog()
    for eid, spec in data.get("entities", {}).items():
        catalog.entities[eid] = ContextEntity(eid, frozenset(spec["attributes"]))
    for aid, spec in data.get("attributes", {}).items():
        lifetime = spec.get("lifetime")
        catalog.attributes[aid] = ContextAttribute(
            attr_id=aid,
            entity_id=spec["entity"],
            provider_ids=tuple(spec["providers"]),
            lifetime=INF if lifetime is None else float(lifetime),
        )
    for pid, spec in data.get("providers", {}).items():
        catalog.providers[pid] = ContextProvider(
            provider_id=pid,
            latency_mean=float(spec["latency_mean"]),
            latency_var=float(spec["latency_var"]),
            sampling_rate=float(spec["sampling_rate"]),
            cost_per_retrieval=float(spec["cost_per_retrieval"]),
            availability=float(spec.get("availability", 1.0)),
        )
    for sid, spec in data.get("slas", {}).items():
        catalog.slas[sid] = ConsumerSla(
            sla_id=sid,
            price_per_response=float(spec["price_per_response"]),
            freshness_threshold=float(spec["freshness_threshold"]),
            delay_penalty=float(spec["delay_penalty"]),
            invalid_penalty=float(spec["invalid_penalty"]),
            rt_max=float(spec["rt_max"]),
        )
    return catalog
