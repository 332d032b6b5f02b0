"""Exact solver for tiny instances, the ground truth behind heuristic tests.

Two implementations live here on purpose. `solve_exact` enumerates day by
day with memoization on (day, wakeup, nights away, meeting history) and is
the oracle proper. `brute_force_reference` generates complete schedules
outright and filters them through the public feasibility checker; it knows
nothing about the oracle's pruning and exists to catch bugs in it.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .model import Instance
from .rewards import RewardModel, net_benefit, reward_at
from .scenarios import ScenarioConfig
from .schedule import DayTour, Schedule, check_feasibility


class OracleLimitError(RuntimeError):
    """The instance or the run outgrew the configured limits."""


@dataclass(frozen=True)
class OracleLimits:
    """Hard bounds; beyond them the oracle refuses instead of crawling."""

    max_cities: int = 6
    max_days: int = 2
    max_states: int = 50_000_000
    time_cap_s: Optional[float] = 120.0

    def __post_init__(self):
        if self.max_cities < 1 or self.max_days < 1:
            raise ValueError("limits must allow at least one city and day")
        if self.max_states < 1:
            raise ValueError("max_states must be positive")


def _routes_from(instance: Instance, wakeup: int, alpha: int
                 ) -> List[Tuple[Tuple[int, ...], float, float, int]]:
    """Every route shape for one day: (route, minutes, cost, terminal).

    Single-city stay, open paths, and closed loops over up to alpha other
    cities, in a deterministic order.
    """
    others = sorted(c.id for c in instance.cities if c.id != wakeup)
    out = [((wakeup,), 0.0, 0.0, wakeup)]
    for k in range(1, alpha + 1):
        for combo in itertools.combinations(others, k):
            for perm in itertools.permutations(combo):
                legs = (wakeup,) + perm
                minutes = sum(instance.minutes(a, b)
                              for a, b in zip(legs, legs[1:]))
                cost = sum(instance.cost(a, b)
                           for a, b in zip(legs, legs[1:]))
                out.append((legs, minutes, cost, perm[-1]))
                loop = legs + (wakeup,)
                back_min = instance.minutes(perm[-1], wakeup)
                back_cost = instance.cost(perm[-1], wakeup)
                out.append((loop, minutes + back_min, cost + back_cost, wakeup))
    return out


def _meeting_subsets(distinct: Sequence[int], alpha: int) -> List[Tuple[int, ...]]:
    cities = sorted(distinct)
    subsets: List[Tuple[int, ...]] = [()]
    for k in range(1, min(alpha, len(cities)) + 1):
        subsets.extend(itertools.combinations(cities, k))
    return subsets


class _Budget:
    def __init__(self, limits: OracleLimits):
        self.limits = limits
        self.states = 0
        self.started = time.monotonic()

    def spend(self) -> None:
        self.states += 1
        if self.states > self.limits.max_states:
            raise OracleLimitError(
                f"state budget of {self.limits.max_states} exhausted")
        if self.limits.time_cap_s is not None and self.states % 1024 == 0:
            if time.monotonic() - self.started > self.limits.time_cap_s:
                raise OracleLimitError(
                    f"time cap of {self.limits.time_cap_s}s exhausted")


def _refuse_if_oversized(instance: Instance, limits: OracleLimits) -> None:
    n = len(instance.cities)
    m = instance.params.days
    if n > limits.max_cities:
        raise OracleLimitError(
            f"{n} cities exceed the oracle limit of {limits.max_cities}")
    if m > limits.max_days:
        raise OracleLimitError(
            f"{m} days exceed the oracle limit of {limits.max_days}")


def solve_exact(instance: Instance, scenario: ScenarioConfig,
                limits: Optional[OracleLimits] = None
                ) -> Tuple[Schedule, float]:
    """Provably optimal schedule of a tiny instance.

    Enumerates all day tours (subsets, orders, open/closed/stay shapes and
    every meeting attribution), chained on overnight cities, memoized on
    the full meeting history since rewards depend on it. Ties break toward
    the lexicographically smallest schedule encoding.
    """
    limits = limits or OracleLimits()
    _refuse_if_oversized(instance, limits)
    params = instance.params
    model = RewardModel.for_scenario(instance, scenario)
    weight = model.travel_cost_weight * model.cost_normalizer
    capital = params.capital_id
    alpha = params.max_meetings_per_day
    t_max = params.max_tour_minutes
    m = params.days
    kappa = params.kappa
    big = frozenset(instance.big_city_ids())
    sigma = {c.id: c.meeting_minutes for c in instance.cities}
    base = {c.id: c.base_reward for c in instance.cities}
    caps = {c.id: scenario.cap_for(c.size_class) for c in instance.cities}
    budget = _Budget(limits)
    routes: Dict[int, list] = {}
    subset_cache: Dict[frozenset, List[Tuple[int, ...]]] = {}

    memo: Dict[tuple, Tuple[Optional[float], tuple]] = {}

    def best_from(t: int, wakeup: int, away: int, ledger: tuple
                  ) -> Tuple[Optional[float], tuple]:
        """Best value and day encodings for days t..m, None if stuck."""
        if t > m:
            return 0.0, ()
        counts = dict(ledger)
        key = (t, wakeup, away, ledger)
        hit = memo.get(key)
        if hit is not None:
            return hit
        best_val: Optional[float] = None
        best_suffix: tuple = ()
        if wakeup not in routes:
            routes[wakeup] = _routes_from(instance, wakeup, alpha)
        for route, minutes, cost, terminal in routes[wakeup]:
            if scenario.force_closed_at_capital and (
                    wakeup != capital or terminal != capital):
                continue
            if scenario.end_at_capital and t == m and terminal != capital:
                continue
            away_next = 0 if terminal == capital else away + 1
            if scenario.kappa_enabled and away_next > kappa:
                # kappa+1 consecutive nights away from the capital
                continue
            distinct = frozenset(route)
            subsets = subset_cache.get(distinct)
            if subsets is None:
                subsets = _meeting_subsets(distinct, alpha)
                subset_cache[distinct] = subsets
            for meetings in subsets:
                budget.spend()
                if scenario.require_daily_meeting and not meetings:
                    continue
                if len(big.intersection(meetings)) > 1:
                    continue
                used = minutes + sum(sigma[c] for c in meetings)
                if used > t_max + 1e-9:
                    continue
                reward = 0.0
                ok = True
                for c in meetings:
                    days = counts.get(c)
                    if days is not None and len(days) >= caps[c]:
                        ok = False
                        break
                    last = days[-1] if days else None
                    reward += reward_at(base[c], t, last, model)
                if not ok:
                    continue
                new_ledger = dict(counts)
                for c in meetings:
                    new_ledger[c] = new_ledger.get(c, ()) + (t,)
                frozen = tuple(sorted(new_ledger.items()))
                sub_val, sub_suffix = best_from(t + 1, terminal, away_next,
                                                frozen)
                if sub_val is None:
                    continue
                val = reward - weight * cost + sub_val
                suffix = ((route, meetings),) + sub_suffix
                if best_val is None or val > best_val or (
                        val == best_val and suffix < best_suffix):
                    best_val, best_suffix = val, suffix
        memo[key] = (best_val, best_suffix)
        return best_val, best_suffix

    val, suffix = best_from(1, capital, 0, ())
    if val is None:
        raise OracleLimitError("no feasible schedule exists within the rules")
    days = [DayTour.of(list(route), sorted(meetings))
            for route, meetings in suffix]
    schedule = Schedule.of(days)
    return schedule, net_benefit(schedule, model)


def brute_force_reference(instance: Instance, scenario: ScenarioConfig,
                          limits: Optional[OracleLimits] = None
                          ) -> Tuple[Schedule, float]:
    """Slow, unmemoized optimum: generate whole schedules, filter, rank.

    Deliberately naive. Candidate days are every route shape with every
    meeting subset; chaining only matches overnight cities; all rule
    knowledge is delegated to check_feasibility.
    """
    limits = limits or OracleLimits(max_cities=4, max_days=2,
                                    max_states=20_000_000)
    _refuse_if_oversized(instance, limits)
    params = instance.params
    model = RewardModel.for_scenario(instance, scenario)
    alpha = params.max_meetings_per_day
    m = params.days
    budget = _Budget(limits)

    def day_candidates(wakeup: int) -> List[DayTour]:
        out = []
        for route, _minutes, _cost, _terminal in _routes_from(
                instance, wakeup, alpha):
            for meetings in _meeting_subsets(set(route), alpha):
                out.append(DayTour.of(list(route), sorted(meetings)))
        return out

    by_wakeup: Dict[int, List[DayTour]] = {}

    def extend(prefix: List[DayTour], wakeup: int,
               best: Tuple[Optional[float], Optional[Schedule]]
               ) -> Tuple[Optional[float], Optional[Schedule]]:
        if len(prefix) == m:
            budget.spend()
            schedule = Schedule.of(list(prefix))
            if check_feasibility(schedule, instance, scenario):
                return best
            val = net_benefit(schedule, model)
            cur_val, cur_sched = best
            if cur_val is None or val > cur_val or (
                    val == cur_val and schedule.encoding() < cur_sched.encoding()):
                return val, schedule
            return best
        if wakeup not in by_wakeup:
            by_wakeup[wakeup] = day_candidates(wakeup)
        for tour in by_wakeup[wakeup]:
            best = extend(prefix + [tour], tour.terminal, best)
        return best

    val, schedule = extend([], params.capital_id, (None, None))
    if schedule is None:
        raise OracleLimitError("no feasible schedule exists within the rules")
    return schedule, val
