"""Per-item sliding-window bookkeeping: access/hit rates, trend extrapolation,
spike detection, and the 15-feature state vector the agents consume.

Each window of W seconds seals a per-item access count n, fresh-hit count m,
and the global query count N. Rates are summarized at three relative offsets
(short/mid/long) and extrapolated forward with a least-squares line.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .model import residual_lifetime


@dataclass(frozen=True)
class WindowConfig:
    window_seconds: float = 5.0
    short: int = 1
    mid: int = 5
    long: int = 10

    def __post_init__(self):
        if not (0 < self.short <= self.mid <= self.long):
            raise ValueError("need 0 < short <= mid <= long")
        if self.window_seconds <= 0:
            raise ValueError("window_seconds must be positive")


@dataclass
class ItemStats:
    """Rings of sealed per-window counts plus running retrieval averages.

    total_queries_history is shared with the tracker: one global N ring.
    """

    item_id: str
    access_history: deque = field(default_factory=deque)  # n per window
    hit_history: deque = field(default_factory=deque)  # m per window, m <= n
    total_queries_history: deque = field(default_factory=deque)  # N per window
    ar_history: deque = field(default_factory=deque)
    hr_history: deque = field(default_factory=deque)
    avg_cached_lifetime: float = 0.0
    avg_retrieval_latency: float = 0.0
    avg_retrieval_cost: float = 0.0
    delay_given_cached: float = 0.0
    _cl_samples: int = 0
    _ret_samples: int = 0
    _cached_access_samples: int = 0

    def observe_cached_lifetime(self, seconds: float) -> None:
        self._cl_samples += 1
        self.avg_cached_lifetime += (seconds - self.avg_cached_lifetime) / self._cl_samples

    def observe_retrieval(self, latency: float, cost: float) -> None:
        self._ret_samples += 1
        self.avg_retrieval_latency += (latency - self.avg_retrieval_latency) / self._ret_samples
        self.avg_retrieval_cost += (cost - self.avg_retrieval_cost) / self._ret_samples

    def observe_cached_access(self, delayed: bool) -> None:
        self._cached_access_samples += 1
        self.delay_given_cached += (
            (1.0 if delayed else 0.0) - self.delay_given_cached
        ) / self._cached_access_samples


FEATURE_NAMES = (
    "ar_long", "ar_mid", "ar_short",
    "e_ar_long", "e_ar_mid", "e_ar_short",
    "hr_long", "hr_mid", "hr_short",
    "e_hr_long", "e_hr_mid", "e_hr_short",
    "avg_cached_lifetime", "avg_retrieval_latency", "avg_retrieval_cost",
)


@dataclass(frozen=True)
class StateVector:
    ar_long: float
    ar_mid: float
    ar_short: float
    e_ar_long: float
    e_ar_mid: float
    e_ar_short: float
    hr_long: float
    hr_mid: float
    hr_short: float
    e_hr_long: float
    e_hr_mid: float
    e_hr_short: float
    avg_cached_lifetime: float
    avg_retrieval_latency: float
    avg_retrieval_cost: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in FEATURE_NAMES], dtype=float)


def summarize_observed(history, cfg: WindowConfig) -> list[float]:
    """Pick the short/mid/long readings from the last `long` sealed values.

    The slice is left-padded with zeros when fewer windows exist. Short and
    long count back from the current window; mid is anchored to the oldest
    end of the span (mid-th value after T - long).
    """
    window = [0.0] * cfg.long
    tail = list(history)[-cfg.long:]
    if tail:
        window[cfg.long - len(tail):] = [float(v) for v in tail]
    return [window[cfg.long - cfg.short], window[cfg.mid - 1], window[0]]


def extrapolate_expected(history, cfg: WindowConfig, clamp_unit: bool = True) -> list[float]:
    """Least-squares line over the last `long` observed values, read at
    T + short, T + mid, T + long. Falls back to the last value when fewer
    than two windows exist."""
    values = [float(v) for v in list(history)[-cfg.long:]]
    if not values:
        return [0.0, 0.0, 0.0]
    if len(values) < 2:
        out = [values[-1]] * 3
    else:
        x = np.arange(len(values), dtype=float)
        slope, intercept = np.polyfit(x, np.array(values), 1)
        last = len(values) - 1
        out = [float(intercept + slope * (last + k)) for k in (cfg.short, cfg.mid, cfg.long)]
    if clamp_unit:
        out = [min(1.0, max(0.0, v)) for v in out]
    return out


def expected_hit_rate(
    e_retrieval_latency: float,
    e_lambda: float,
    e_access_rate: float,
    lifetime: float,
    f_arrive: float,
    f_thresh: float,
) -> float:
    """Cold-start hit-rate estimate: x / (x + 1) with x = E[ReL] * E[lambda] * E[AR].

    Immortal items always hit; items whose arrival freshness cannot clear the
    threshold never do (their residual lifetime is non-positive).
    """
    if math.isinf(lifetime):
        return 1.0
    if residual_lifetime(f_arrive, f_thresh, e_retrieval_latency) <= 0:
        return 0.0
    x = e_retrieval_latency * e_lambda * e_access_rate
    return x / (x + 1.0)


@dataclass(frozen=True)
class FeatureNormalizers:
    """Divisors that bring the three magnitude features to O(1) for the nets."""

    cached_lifetime: float
    retrieval_latency: float
    retrieval_cost: float


class StatsTracker:
    """Single-writer tracker; the simulator owns all mutation."""

    def __init__(self, cfg: WindowConfig, normalizers: FeatureNormalizers | None = None):
        self.cfg = cfg
        self.normalizers = normalizers or FeatureNormalizers(
            cached_lifetime=cfg.long * cfg.window_seconds,
            retrieval_latency=1.0,
            retrieval_cost=1.0,
        )
        self.window_index = 0
        self.window_start = 0.0
        self.items: dict[str, ItemStats] = {}
        self.total_queries_history: deque = deque()
        self.current_queries = 0
        self._current_n: dict[str, int] = {}
        self._current_m: dict[str, int] = {}
        self._rows: list[tuple] = []  # sealed (window, item, n, m, N, AR, HR)

    def stats_for(self, item_id: str) -> ItemStats:
        if item_id not in self.items:
            self.items[item_id] = ItemStats(
                item_id, total_queries_history=self.total_queries_history
            )
        return self.items[item_id]

    def record_query(self, now: float) -> None:
        self.current_queries += 1

    def record_access(self, item_id: str, was_fresh_cache_hit: bool, now: float) -> None:
        self.stats_for(item_id)
        self._current_n[item_id] = self._current_n.get(item_id, 0) + 1
        if was_fresh_cache_hit:
            self._current_m[item_id] = self._current_m.get(item_id, 0) + 1

    def current_access_count(self, item_id: str) -> int:
        return self._current_n.get(item_id, 0)

    def roll_window(self, now: float) -> int:
        """Seal the current window for every tracked item and advance T."""
        keep = self.cfg.long + 1
        n_queries = self.current_queries
        self.total_queries_history.append(n_queries)
        while len(self.total_queries_history) > keep:
            self.total_queries_history.popleft()
        for item_id, stats in self.items.items():
            n = self._current_n.get(item_id, 0)
            m = self._current_m.get(item_id, 0)
            ar = n / n_queries if n_queries > 0 else 0.0
            hr = m / n if n > 0 else 0.0
            stats.access_history.append(n)
            stats.hit_history.append(m)
            stats.ar_history.append(ar)
            stats.hr_history.append(hr)
            for ring in (stats.access_history, stats.hit_history, stats.ar_history, stats.hr_history):
                while len(ring) > keep:
                    ring.popleft()
            self._rows.append((self.window_index, item_id, n, m, n_queries, ar, hr))
        self._current_n.clear()
        self._current_m.clear()
        self.current_queries = 0
        self.window_index += 1
        self.window_start = now
        return self.window_index

    def windowed_access_count(self, item_id: str, windows: int, include_current: bool = True) -> int:
        """Accesses over the last `windows` sealed windows plus the running one."""
        stats = self.items.get(item_id)
        total = self._current_n.get(item_id, 0) if include_current else 0
        if stats is not None and windows > 0:
            total += sum(list(stats.access_history)[-windows:])
        return total

    def detect_spike(self, item_id: str, spike_factor: float) -> bool:
        """Short-horizon access rate running well ahead of the mid horizon.

        Uses the live current-window rate so bursts register before the roll.
        A brand-new item with traffic counts as a spike outright: there is no
        baseline to compare against.
        """
        stats = self.items.get(item_id)
        n_cur = self._current_n.get(item_id, 0)
        if stats is None or not stats.ar_history:
            return n_cur > 0
        if self.current_queries > 0:
            ar_short = n_cur / self.current_queries
            n_ref = self.current_queries
        else:
            ar_short = summarize_observed(stats.ar_history, self.cfg)[0]
            n_ref = self.total_queries_history[-1] if self.total_queries_history else 1
        ar_mid = summarize_observed(stats.ar_history, self.cfg)[1]
        floor = 1.0 / max(n_ref, 1)
        return ar_short > spike_factor * max(ar_mid, floor)

    def build_state_vector(self, item_id: str) -> StateVector:
        stats = self.stats_for(item_id)
        ar_s, ar_m, ar_l = summarize_observed(stats.ar_history, self.cfg)
        hr_s, hr_m, hr_l = summarize_observed(stats.hr_history, self.cfg)
        e_ar_s, e_ar_m, e_ar_l = extrapolate_expected(stats.ar_history, self.cfg)
        e_hr_s, e_hr_m, e_hr_l = extrapolate_expected(stats.hr_history, self.cfg)
        norm = self.normalizers
        return StateVector(
            ar_long=ar_l, ar_mid=ar_m, ar_short=ar_s,
            e_ar_long=e_ar_l, e_ar_mid=e_ar_m, e_ar_short=e_ar_s,
            hr_long=hr_l, hr_mid=hr_m, hr_short=hr_s,
            e_hr_long=e_hr_l, e_hr_mid=e_hr_m, e_hr_short=e_hr_s,
            avg_cached_lifetime=stats.avg_cached_lifetime / norm.cached_lifetime,
            avg_retrieval_latency=stats.avg_retrieval_latency / norm.retrieval_latency,
            avg_retrieval_cost=stats.avg_retrieval_cost / norm.retrieval_cost,
        )

    def window_rows(self) -> list[tuple]:
        return list(self._rows)

    def rows_to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["window_index", "item_id", "n", "m", "N", "AR", "HR"])
            for row in self._rows:
                writer.writerow([row[0], row[1], row[2], row[3], row[4], repr(row[5]), repr(row[6])])
