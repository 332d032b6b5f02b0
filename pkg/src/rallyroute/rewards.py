"""Time-dependent meeting rewards and the schedule objective.

A city's first meeting on day t is worth its base reward scaled by a
horizon factor: (m - t + 1) / m when the campaign front-loads attention,
(t + m) / m when it back-loads toward election day. A repeat meeting is
depreciated by s / (K * m) on top of the same horizon factor, where s is
the number of days since the previous meeting in that city.

The schedule objective is total meeting reward minus the normalised travel
cost. Per-city contributions depend only on that city's meeting days, which
is what makes incremental move evaluation in the search safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .model import Instance
from .scenarios import ScenarioConfig


class RewardAccountingError(ValueError):
    """Raised in strict mode when a ledger entry contradicts the routes."""


@dataclass(frozen=True)
class RewardModel:
    """Everything needed to price meetings and travel for one scenario."""

    instance: Instance
    direction: str = "front_loaded"
    depreciation_k: float = 2.0
    cost_normalizer: float = 1.0
    travel_cost_weight: float = 1.0
    repeat_rewards_enabled: bool = True

    @classmethod
    def from_instance(cls, instance: Instance) -> "RewardModel":
        p = instance.params
        return cls(instance=instance,
                   direction=p.reward_direction,
                   depreciation_k=p.repeat_depreciation,
                   cost_normalizer=p.cost_normalizer)

    @classmethod
    def for_scenario(cls, instance: Instance, scenario: ScenarioConfig) -> "RewardModel":
        p = instance.params
        return cls(instance=instance,
                   direction=scenario.reward_direction,
                   depreciation_k=p.repeat_depreciation,
                   cost_normalizer=p.cost_normalizer,
                   travel_cost_weight=scenario.travel_cost_weight,
                   repeat_rewards_enabled=scenario.repeat_rewards_enabled)

    @property
    def horizon(self) -> int:
        return self.instance.params.days

    def base_reward(self, city_id: int) -> float:
        return self.instance.city(city_id).base_reward


def _horizon_factor(day: int, m: int, direction: str, exact: bool):
    if direction == "back_loaded":
        num = day + m
    else:
        num = m - day + 1
    return Fraction(num, m) if exact else num / m


def first_meeting_reward(base_reward, day: int, model: RewardModel, *,
                         exact: bool = False):
    """Reward of the first meeting in a city on the given day (1-based)."""
    m = model.horizon
    if not 1 <= day <= m:
        raise ValueError(f"day {day} outside horizon 1..{m}")
    pi = Fraction(base_reward) if exact else base_reward
    return pi * _horizon_factor(day, m, model.direction, exact)


def repeat_meeting_reward(base_reward, day: int, recency: int, model: RewardModel, *,
                          exact: bool = False):
    """Reward of a repeat meeting on the given day, recency days after the
    previous one.

    Front-loaded: pi * ((m - t + 1) / m) * (s / (K m)).
    Back-loaded:  pi * s * (t + m) / (K m^2).
    """
    m = model.horizon
    if not 1 <= day <= m:
        raise ValueError(f"day {day} outside horizon 1..{m}")
    if not 1 <= recency < day:
        raise ValueError(f"recency {recency} must satisfy 1 <= s < day ({day})")
    if not model.repeat_rewards_enabled:
        return Fraction(0) if exact else 0.0
    pi = Fraction(base_reward) if exact else base_reward
    factor = _horizon_factor(day, m, model.direction, exact)
    if exact:
        dep = factor * Fraction(recency) / (Fraction(model.depreciation_k) * m)
    else:
        dep = factor * recency / (model.depreciation_k * m)
    return pi * dep


def reward_at(base_reward, day: int, last_meeting_day: Optional[int],
              model: RewardModel, *, exact: bool = False):
    """Reward of the next meeting in a city: first if none held yet."""
    if last_meeting_day is None:
        return first_meeting_reward(base_reward, day, model, exact=exact)
    return repeat_meeting_reward(base_reward, day, day - last_meeting_day,
                                 model, exact=exact)


def chain_reward(base_reward, meeting_days, model: RewardModel, *,
                 exact: bool = False):
    """Total reward of one city's whole meeting-day chain."""
    total = Fraction(0) if exact else 0.0
    last = None
    for day in sorted(meeting_days):
        if last is not None and day == last:
            continue  # duplicate entries carry no extra reward
        total += reward_at(base_reward, day, last, model, exact=exact)
        last = day
    return total


class MeetingLedger:
    """Per-city ordered meeting days, derived from a schedule."""

    def __init__(self, days: Dict[int, List[int]]):
        self.days = days

    @classmethod
    def from_schedule(cls, schedule) -> "MeetingLedger":
        days: Dict[int, List[int]] = {}
        for t, tour in enumerate(schedule.days, start=1):
            for city_id in tour.meetings:
                days.setdefault(city_id, []).append(t)
        for v in days.values():
            v.sort()
        return cls(days)

    def days_for(self, city_id: int) -> List[int]:
        return self.days.get(city_id, [])

    def items(self):
        return self.days.items()


def day_travel_cost(route, instance: Instance, *, exact: bool = False):
    """Travel cost of one day's route; single-city days cost nothing."""
    total = Fraction(0) if exact else 0.0
    for a, b in zip(route, route[1:]):
        c = instance.cost(a, b)
        total += Fraction(c) if exact else c
    return total


def net_benefit(schedule, model: RewardModel, *, strict: bool = False,
                exact: bool = False):
    """Objective of a schedule: meeting rewards minus weighted travel cost.

    This is a pure evaluator; it prices exactly what it is given and leaves
    feasibility to the checker. With strict=True, a meeting recorded in a
    city that does not appear in that day's route raises instead.

    Args:
        schedule: the Schedule to price.
        model: RewardModel (use RewardModel.for_scenario for non-base runs).
        strict: raise RewardAccountingError on route/ledger mismatches.
        exact: compute in rational arithmetic and return a Fraction.
    """
    instance = model.instance
    if strict:
        for t, tour in enumerate(schedule.days, start=1):
            present = set(tour.route)
            seen = set()
            for city_id in tour.meetings:
                if city_id not in present:
                    raise RewardAccountingError(
                        f"day {t}: meeting in city {city_id} which the route never visits")
                if city_id in seen:
                    raise RewardAccountingError(
                        f"day {t}: duplicate meeting entry for city {city_id}")
                seen.add(city_id)

    ledger = MeetingLedger.from_schedule(schedule)
    total = Fraction(0) if exact else 0.0
    for city_id, days in ledger.items():
        total += chain_reward(model.base_reward(city_id), days, model, exact=exact)

    weight = model.travel_cost_weight * model.cost_normalizer
    if weight:
        cost = Fraction(0) if exact else 0.0
        for tour in schedule.days:
            cost += day_travel_cost(tour.route, instance, exact=exact)
        total -= (Fraction(weight) if exact else weight) * cost
    return total
