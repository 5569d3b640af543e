"""SLA-priced accounting: per-access returns, window metrics, pessimistic
re-pricing, and the run-level total with its earnings/penalties/retrievals
decomposition.

Cache space is treated as free, so a response earns its SLA price when valid,
loses the invalid penalty otherwise, and pays the delay penalty plus any
retrieval charges it triggered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .model import ConsumerSla

HIT_KINDS = ("complete", "partial", "miss", "ghost")


@dataclass
class AccessOutcome:
    query_ref: int
    sla_id: str
    response_time: float
    valid: bool
    delayed: bool
    retrieval_costs_charged: float
    hit_kind: str
    window_index: int = 0
    recurrence: int = 0
    attr_count: int = 0
    fresh_attr_count: int = 0
    template_id: str = ""
    arrival_time: float = 0.0


@dataclass
class WindowMetrics:
    window_index: int
    recurrence: int
    query_count: int
    mean_rt: float
    hit_rate: float
    delay_probability: float
    throughput: float
    cache_throughput: float
    retrieval_count: int
    entity_evictions: int
    attribute_evictions: int
    pessi_ret: float
    decision_count: int = 0
    empty: bool = False


def per_access_return(outcome: AccessOutcome, sla: ConsumerSla) -> float:
    """Money earned (or lost) on one response under its SLA."""
    earned = sla.price_per_response if outcome.valid else -sla.invalid_penalty
    if outcome.delayed:
        earned -= sla.delay_penalty
    return earned - outcome.retrieval_costs_charged


def expected_cached_return(sla: ConsumerSla, expected_hit_rate: float, retrieval_cost: float) -> float:
    """Per-access return an item would earn if cached.

    Delay-while-cached probability is approximated by 1 - E[HR]; refresh cost
    amortizes the same way (each expected miss implies one shared retrieval).
    """
    miss = 1.0 - expected_hit_rate
    return sla.price_per_response - sla.delay_penalty * miss - retrieval_cost * miss


def return_components(outcome: AccessOutcome, sla: ConsumerSla) -> tuple[float, float, float]:
    """(earnings, penalties, retrieval cost) for one response; the ledger view."""
    earnings = sla.price_per_response if outcome.valid else 0.0
    penalties = 0.0 if outcome.valid else sla.invalid_penalty
    if outcome.delayed:
        penalties += sla.delay_penalty
    return earnings, penalties, outcome.retrieval_costs_charged


def pessi_ret(outcomes: list[AccessOutcome], sla_book: dict[str, ConsumerSla]) -> float:
    """Mean per-query return re-priced under the window's worst observed SLAs.

    The most expensive SLA (highest delay penalty, tightest rt_max on ties)
    contributes penalties and the deadline; the least valuable contributes
    the price. Each component is clamped against the query's own SLA so the
    re-pricing can never be optimistic.
    """
    if not outcomes:
        return 0.0
    seen = sorted({o.sla_id for o in outcomes})
    expensive = max((sla_book[s] for s in seen), key=lambda s: (s.delay_penalty, -s.rt_max))
    cheapest_price = min(sla_book[s].price_per_response for s in seen)
    total = 0.0
    for o in outcomes:
        own = sla_book[o.sla_id]
        price = min(cheapest_price, own.price_per_response)
        pen_del = max(expensive.delay_penalty, own.delay_penalty)
        pen_invalid = max(expensive.invalid_penalty, own.invalid_penalty)
        rt_max = min(expensive.rt_max, own.rt_max)
        value = price if o.valid else -pen_invalid
        if o.response_time > rt_max:
            value -= pen_del
        total += value - o.retrieval_costs_charged
    return total / len(outcomes)


def window_metrics(
    outcomes: list[AccessOutcome],
    sla_book: dict[str, ConsumerSla],
    window_index: int,
    recurrence: int,
    window_seconds: float,
    retrieval_count: int = 0,
    entity_evictions: int = 0,
    attribute_evictions: int = 0,
    decision_count: int = 0,
) -> WindowMetrics:
    queries = len(outcomes)
    if queries == 0:
        return WindowMetrics(
            window_index=window_index,
            recurrence=recurrence,
            query_count=0,
            mean_rt=0.0,
            hit_rate=0.0,
            delay_probability=0.0,
            throughput=0.0,
            cache_throughput=0.0,
            retrieval_count=retrieval_count,
            entity_evictions=entity_evictions,
            attribute_evictions=attribute_evictions,
            pessi_ret=0.0,
            decision_count=decision_count,
            empty=True,
        )
    attr_total = sum(o.attr_count for o in outcomes)
    fresh_total = sum(o.fresh_attr_count for o in outcomes)
    cache_served = sum(1 for o in outcomes if o.hit_kind in ("complete", "ghost"))
    return WindowMetrics(
        window_index=window_index,
        recurrence=recurrence,
        query_count=queries,
        mean_rt=sum(o.response_time for o in outcomes) / queries,
        hit_rate=fresh_total / attr_total if attr_total else 0.0,
        delay_probability=sum(1 for o in outcomes if o.delayed) / queries,
        throughput=queries / window_seconds,
        cache_throughput=cache_served / window_seconds,
        retrieval_count=retrieval_count,
        entity_evictions=entity_evictions,
        attribute_evictions=attribute_evictions,
        pessi_ret=pessi_ret(outcomes, sla_book),
        decision_count=decision_count,
    )


@dataclass
class ReturnSummary:
    total: float
    earnings: float
    penalties: float
    retrieval_cost: float
    query_count: int

    @property
    def earnings_minus_penalties(self) -> float:
        return self.earnings - self.penalties

    def as_dict(self) -> dict:
        return {
            "total_return": self.total,
            "earnings": self.earnings,
            "penalties": self.penalties,
            "earnings_minus_penalties": self.earnings_minus_penalties,
            "retrieval_cost": self.retrieval_cost,
            "query_count": self.query_count,
        }


def total_return(outcomes: list[AccessOutcome], sla_book: dict[str, ConsumerSla]) -> ReturnSummary:
    """Sum of every per-access return, reported with its decomposition.

    The total is defined as earnings - penalties - retrieval costs; summing
    per_access_return over the ledger recovers the same figure.
    """
    earnings, penalties, retrievals = [], [], []
    for o in outcomes:
        e, p, r = return_components(o, sla_book[o.sla_id])
        earnings.append(e)
        penalties.append(p)
        retrievals.append(r)
    earn = math.fsum(earnings)
    pen = math.fsum(penalties)
    ret = math.fsum(retrievals)
    return ReturnSummary(
        total=earn - pen - ret,
        earnings=earn,
        penalties=pen,
        retrieval_cost=ret,
        query_count=len(outcomes),
    )
