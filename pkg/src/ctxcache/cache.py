"""Logical hierarchical cache: entity shells holding attribute entries.

Capacity is counted in entity slots (a unit holds a fixed number of
entities; attributes under an already-cached entity are free). Evicted but
still-fresh entries linger in a small FIFO ghost buffer so in-flight demand
can still be served. The CLR/DTR/decision-history registries drive the
agents' delayed-reward events.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .model import ContextCatalog, freshness_at


class ItemNotCached(KeyError):
    pass


class CannotShrinkBelowOccupancy(ValueError):
    pass


@dataclass
class CacheEntry:
    item_id: str
    entity_id: str
    provider_id: str
    cached_at: float
    last_refreshed_at: float
    expected_cl: float  # granted residency in seconds
    cl_expires_at: float
    access_count_window: int = 0

    def freshness(self, now: float, lifetime: float) -> float:
        return freshness_at(now - self.last_refreshed_at, lifetime)


@dataclass
class LookupResult:
    fresh: set[str] = field(default_factory=set)
    stale_or_missing: set[str] = field(default_factory=set)
    ghost_hits: set[str] = field(default_factory=set)

    @property
    def kind(self) -> str:
        if not self.fresh:
            return "miss"
        if self.stale_or_missing:
            return "partial"
        return "ghost" if self.ghost_hits else "complete"


@dataclass
class AdmitResult:
    admitted: bool
    needed_units: int = 0


class CacheMemory:
    def __init__(
        self,
        catalog: ContextCatalog,
        mode: str = "scalable",
        capacity_units: int = 1,
        unit_size_entities: int = 3,
        ghost_units: int = 1,
        max_units: int | None = None,
    ):
        if mode not in ("scalable", "limited"):
            raise ValueError(f"unknown cache mode {mode!r}")
        self.catalog = catalog
        self.mode = mode
        self.capacity_units = capacity_units
        self.unit_size_entities = unit_size_entities
        self.ghost_units = ghost_units
        self.max_units = max_units
        self.entries: dict[str, dict[str, CacheEntry]] = {}
        self.ghost: dict[str, CacheEntry] = {}
        self._ghost_entity_order: list[str] = []

    # -- capacity ---------------------------------------------------------

    @property
    def total_slots(self) -> int:
        return self.capacity_units * self.unit_size_entities

    @property
    def occupied_slots(self) -> int:
        return len(self.entries)

    def check_capacity(self) -> None:
        if self.occupied_slots > self.total_slots:
            raise AssertionError(
                f"capacity violated: {self.occupied_slots} entities in {self.total_slots} slots"
            )

    def utilization(self) -> float:
        return self.occupied_slots / self.total_slots if self.total_slots else 0.0

    # -- queries ----------------------------------------------------------

    def entry(self, attr_id: str) -> CacheEntry | None:
        entity_id = self.catalog.attributes[attr_id].entity_id
        return self.entries.get(entity_id, {}).get(attr_id)

    def is_cached(self, attr_id: str) -> bool:
        return self.entry(attr_id) is not None

    def cached_attr_ids(self) -> list[str]:
        return [aid for attrs in self.entries.values() for aid in attrs]

    def lookup(self, attribute_ids, f_thresh: float, now: float) -> LookupResult:
        """Split a request into servable-fresh and must-retrieve sets.

        Ghost entries count as cached for serving but are flagged so both
        hit-rate readings stay computable downstream.
        """
        result = LookupResult()
        for attr_id in attribute_ids:
            lifetime = self.catalog.effective_lifetime(attr_id)
            entry = self.entry(attr_id)
            if entry is not None and entry.freshness(now, lifetime) >= f_thresh:
                result.fresh.add(attr_id)
                continue
            ghost = self.ghost.get(attr_id)
            if ghost is not None and ghost.freshness(now, lifetime) >= f_thresh:
                result.fresh.add(attr_id)
                result.ghost_hits.add(attr_id)
                continue
            result.stale_or_missing.add(attr_id)
        return result

    # -- mutation ---------------------------------------------------------

    def admit(
        self,
        attr_id: str,
        expected_cl: float,
        now: float,
        refreshed_at: float | None = None,
        provider_id: str | None = None,
    ) -> AdmitResult:
        """Insert an attribute entry, creating its entity shell if needed.

        A new entity needs a free slot; the caller runs eviction or scaling
        on NeedsSpace and retries.
        """
        attr = self.catalog.attributes[attr_id]
        if attr.entity_id not in self.entries and self.occupied_slots >= self.total_slots:
            return AdmitResult(admitted=False, needed_units=1)
        expires = math.inf if math.isinf(expected_cl) else now + expected_cl
        self.entries.setdefault(attr.entity_id, {})[attr_id] = CacheEntry(
            item_id=attr_id,
            entity_id=attr.entity_id,
            provider_id=provider_id or self.catalog.primary_provider(attr_id).provider_id,
            cached_at=now,
            last_refreshed_at=refreshed_at if refreshed_at is not None else now,
            expected_cl=expected_cl,
            cl_expires_at=expires,
        )
        self.ghost.pop(attr_id, None)
        return AdmitResult(admitted=True)

    def refresh_provider(self, provider_id: str, now: float) -> set[str]:
        """Apply one completed retrieval to every cached attribute it sources."""
        refreshed = set()
        for attrs in self.entries.values():
            for attr_id, entry in attrs.items():
                if entry.provider_id == provider_id:
                    entry.last_refreshed_at = now
                    refreshed.add(attr_id)
        return refreshed

    def evict(
        self, victims, mode: str, now: float, min_f_thresh: float
    ) -> tuple[set[str], dict[str, CacheEntry]]:
        """Remove victims (entity ids for mandatory, attribute ids for selective).

        Entries still fresh against the loosest SLA move to the ghost buffer;
        the rest drop. Returns (ghosted attr ids, all removed entries).
        """
        removed: dict[str, CacheEntry] = {}
        if mode == "mandatory":
            for entity_id in victims:
                for attr_id, entry in self.entries.pop(entity_id, {}).items():
                    removed[attr_id] = entry
        elif mode == "selective":
            for attr_id in victims:
                entity_id = self.catalog.attributes[attr_id].entity_id
                attrs = self.entries.get(entity_id)
                if attrs and attr_id in attrs:
                    removed[attr_id] = attrs.pop(attr_id)
                    if not attrs:
                        del self.entries[entity_id]
        else:
            raise ValueError(f"unknown eviction mode {mode!r}")

        ghosted = set()
        for attr_id, entry in removed.items():
            lifetime = self.catalog.effective_lifetime(attr_id)
            freshness = entry.freshness(now, lifetime)
            if freshness >= min_f_thresh and freshness > 0:
                self._ghost_add(attr_id, entry)
                ghosted.add(attr_id)
        return ghosted, removed

    def _ghost_add(self, attr_id: str, entry: CacheEntry) -> None:
        self.ghost[attr_id] = entry
        if entry.entity_id in self._ghost_entity_order:
            self._ghost_entity_order.remove(entry.entity_id)
        self._ghost_entity_order.append(entry.entity_id)
        limit = self.ghost_units * self.unit_size_entities
        while len(self._ghost_entity_order) > limit:
            oldest = self._ghost_entity_order.pop(0)
            for aid in [a for a, e in self.ghost.items() if e.entity_id == oldest]:
                del self.ghost[aid]

    def purge_ghosts(self, now: float, min_f_thresh: float) -> set[str]:
        """Drop ghost entries that can no longer serve any SLA."""
        dead = {
            aid
            for aid, entry in self.ghost.items()
            if entry.freshness(now, self.catalog.effective_lifetime(aid)) < min_f_thresh
        }
        for aid in dead:
            del self.ghost[aid]
        live_entities = {e.entity_id for e in self.ghost.values()}
        self._ghost_entity_order = [e for e in self._ghost_entity_order if e in live_entities]
        return dead

    def scale(self, direction: str, units: int = 1) -> int:
        if self.mode != "scalable":
            raise ValueError("scaling requires a scalable cache")
        if units < 1:
            raise ValueError("units must be positive")
        if direction == "grow":
            target = self.capacity_units + units
            if self.max_units is not None:
                target = min(target, self.max_units)
            self.capacity_units = target
        elif direction == "shrink":
            target = self.capacity_units - units
            if target * self.unit_size_entities < self.occupied_slots:
                raise CannotShrinkBelowOccupancy(
                    f"{self.occupied_slots} entities do not fit in {target} units"
                )
            if target < 1:
                raise CannotShrinkBelowOccupancy("cannot shrink below one unit")
            self.capacity_units = target
        else:
            raise ValueError(f"unknown scale direction {direction!r}")
        return self.capacity_units

    def extend_cache_life(self, attr_id: str, new_expected_cl: float, now: float) -> None:
        entry = self.entry(attr_id)
        if entry is None:
            raise ItemNotCached(attr_id)
        entry.expected_cl = new_expected_cl
        entry.cl_expires_at = math.inf if math.isinf(new_expected_cl) else now + new_expected_cl

    def dump_state(self, now: float) -> dict:
        """Debug snapshot: per-entry age, freshness, and residency remaining."""
        out = {"capacity_units": self.capacity_units, "entities": {}, "ghost": sorted(self.ghost)}
        for entity_id in sorted(self.entries):
            attrs = {}
            for attr_id, entry in sorted(self.entries[entity_id].items()):
                lifetime = self.catalog.effective_lifetime(attr_id)
                remaining = entry.cl_expires_at - now if not math.isinf(entry.cl_expires_at) else None
                attrs[attr_id] = {
                    "age": now - entry.cached_at,
                    "freshness": entry.freshness(now, lifetime),
                    "cl_remaining": remaining,
                }
            out["entities"][entity_id] = attrs
        return out


@dataclass
class CacheProfile:
    """Bounded per-decision return samples; filling the list ends the
    observation period early."""

    cap: int
    ret_samples: list[float] = field(default_factory=list)
    expected_samples: list[float] = field(default_factory=list)

    @property
    def full(self) -> bool:
        return len(self.ret_samples) >= self.cap


class Registries:
    """CLR/DTR occupancy plus the append-only decision history.

    An item sits in at most one of the two registries at any time; the
    simulator cancels and re-enters entries as decisions resolve.
    """

    def __init__(self, ret_list_cap: int = 10):
        self.clr: dict[str, int] = {}  # attr -> decision id
        self.dtr: dict[str, int] = {}
        self.history: list = []
        self.profiles: dict[int, CacheProfile] = {}
        self.ret_list_cap = ret_list_cap

    def enter_clr(self, attr_id: str, decision_id: int) -> None:
        if attr_id in self.dtr:
            raise AssertionError(f"{attr_id} already in DTR")
        self.clr[attr_id] = decision_id
        self.profiles[decision_id] = CacheProfile(cap=self.ret_list_cap)

    def enter_dtr(self, attr_id: str, decision_id: int) -> None:
        if attr_id in self.clr:
            raise AssertionError(f"{attr_id} already in CLR")
        self.dtr[attr_id] = decision_id
        self.profiles[decision_id] = CacheProfile(cap=self.ret_list_cap)

    def leave(self, attr_id: str) -> None:
        self.clr.pop(attr_id, None)
        self.dtr.pop(attr_id, None)

    def clear(self) -> None:
        self.clr.clear()
        self.dtr.clear()
        self.profiles.clear()
