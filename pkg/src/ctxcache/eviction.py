"""Victim selection over an immutable cache snapshot.

Entities are ranked ascending by a policy score (windowed frequency, a
weighted keep-value, a seeded random draw, or the time-aware hierarchical
combination). A candidate scoring below eta times the median is evicted
whole (mandatory); otherwise only its weakest attributes are trimmed
(selective). Mandatory evictions are what free entity slots, so the walk
escalates leftover candidates when the first pass cannot free enough.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

POLICIES = ("random", "lfu", "lvf", "tah", "none")


class InsufficientEvictable(RuntimeError):
    pass


@dataclass(frozen=True)
class EvictionConfig:
    policy: str = "lfu"
    eta: float = 1.0
    value_weights: tuple[float, float, float] = (1.0, 1.0, 1.0)  # popularity, residency, latency

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise ValueError(f"unknown eviction policy {self.policy!r}")
        if not (0.0 <= self.eta <= 1.0):
            raise ValueError("eta must be in [0, 1]")
        if any(w < 0 for w in self.value_weights):
            raise ValueError("value weights must be non-negative")


@dataclass(frozen=True)
class AttrView:
    attr_id: str
    freq: int
    cached_at: float
    remaining_cl: float
    granted_cl: float


@dataclass(frozen=True)
class EntityView:
    entity_id: str
    cached_at: float
    freq: int
    remaining_cl: float
    granted_cl: float
    retrieval_latency: float
    attrs: tuple[AttrView, ...]


@dataclass
class VictimPlan:
    mandatory_entities: set[str] = field(default_factory=set)
    selective_attributes: set[str] = field(default_factory=set)
    freed_units: int = 0
    used_fallback: bool = False


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def value_of(
    view: EntityView,
    weights: tuple[float, float, float],
    pop_max: float,
    latency_max: float,
) -> float:
    """Keep-value of a cached entity; lower means a better eviction candidate.

    Weighted sum of three [0, 1] ratios: popularity against the most popular
    entity, remaining against granted residency, and mean retrieval latency
    against the slowest entity (cheap-to-reproduce items are expendable).
    """
    kappa, mu, nu = weights
    pop_ratio = _clamp01(view.freq / pop_max) if pop_max > 0 else 0.0
    if math.isinf(view.granted_cl):
        cl_ratio = 1.0
    elif view.granted_cl > 0:
        cl_ratio = _clamp01(view.remaining_cl / view.granted_cl)
    else:
        cl_ratio = 0.0
    lat_ratio = _clamp01(view.retrieval_latency / latency_max) if latency_max > 0 else 0.0
    return kappa * pop_ratio + mu * cl_ratio + nu * lat_ratio


def _lvf_scores(entities, weights):
    pop_max = max((e.freq for e in entities), default=0)
    lat_max = max((e.retrieval_latency for e in entities), default=0.0)
    return {e.entity_id: value_of(e, weights, pop_max, lat_max) for e in entities}


def _selective_trim(view: EntityView) -> set[str]:
    """Attributes to drop when the entity itself survives: the strictly
    below-median by frequency, or the single worst when all tie."""
    attrs = list(view.attrs)
    if not attrs:
        return set()
    median = float(np.median([a.freq for a in attrs]))
    below = {a.attr_id for a in attrs if a.freq < median}
    if below:
        return below
    worst = min(attrs, key=lambda a: (a.freq, a.cached_at, a.attr_id))
    return {worst.attr_id}


def _plan_over(entities, scores, eta, needed_units) -> VictimPlan:
    plan = VictimPlan()
    if not entities:
        return plan
    ordered = sorted(entities, key=lambda e: (scores[e.entity_id], e.cached_at, e.entity_id))
    median = float(np.median([scores[e.entity_id] for e in ordered]))
    selective_entities: list[EntityView] = []
    for view in ordered:
        if plan.freed_units >= needed_units:
            break
        if scores[view.entity_id] < eta * median:
            plan.mandatory_entities.add(view.entity_id)
            plan.freed_units += 1
        else:
            selective_entities.append(view)
            plan.selective_attributes |= _selective_trim(view)
    # Selective trims free no entity slots; escalate the cheapest leftovers.
    for view in selective_entities:
        if plan.freed_units >= needed_units:
            break
        plan.mandatory_entities.add(view.entity_id)
        plan.selective_attributes -= {a.attr_id for a in view.attrs}
        plan.freed_units += 1
    return plan


def tah_select(
    entities: list[EntityView],
    needed_units: int,
    eta: float,
    weights: tuple[float, float, float] = (1.0, 1.0, 1.0),
) -> VictimPlan:
    """Time-aware hierarchical selection.

    Only entities whose granted residency has elapsed, or whose remaining
    fraction sits below eta, are eligible. Eligible entities rank by
    keep-value; attribute-level trims always rank by frequency. When the
    eligible set cannot free enough, the plan falls back to plain value
    ranking over everything and says so.
    """
    eligible = [
        e
        for e in entities
        if e.remaining_cl <= 0
        or (not math.isinf(e.granted_cl) and e.granted_cl > 0 and e.remaining_cl / e.granted_cl < eta)
    ]
    plan = _plan_over(eligible, _lvf_scores(eligible, weights), eta, needed_units)
    if plan.freed_units >= needed_units:
        return plan
    fallback = _plan_over(entities, _lvf_scores(entities, weights), eta, needed_units)
    fallback.used_fallback = True
    return fallback


def select_victims(
    cfg: EvictionConfig,
    entities: list[EntityView],
    needed_units: int,
    rng: np.random.Generator | None = None,
) -> VictimPlan:
    """Build a victim plan freeing at least needed_units entity slots."""
    if needed_units < 1:
        return VictimPlan()
    if cfg.policy == "none":
        raise InsufficientEvictable("eviction disabled")
    if not entities:
        raise InsufficientEvictable("cache is empty")
    if cfg.policy == "tah":
        plan = tah_select(entities, needed_units, cfg.eta, cfg.value_weights)
    else:
        if cfg.policy == "lfu":
            scores = {e.entity_id: float(e.freq) for e in entities}
        elif cfg.policy == "lvf":
            scores = _lvf_scores(entities, cfg.value_weights)
        else:  # random
            if rng is None:
                raise ValueError("random policy needs a generator")
            scores = {
                e.entity_id: float(rng.random())
                for e in sorted(entities, key=lambda e: e.entity_id)
            }
        plan = _plan_over(entities, scores, cfg.eta, needed_units)
    if plan.freed_units < needed_units:
        raise InsufficientEvictable(
            f"only {plan.freed_units} of {needed_units} units evictable"
        )
    return plan
