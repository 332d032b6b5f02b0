"""Initial-solution constructors.

Two complementary builders assemble a feasible multi-day schedule from an
empty slate. ``shrc`` appends roulette-picked cities while the day holds,
keeping the city that overflows the budget as the overnight stop with its
meeting shifted to the next morning. ``escc`` runs a deterministic per-day
permutation search over the highest-reward candidates and crops the
cheapest ordering until it fits. Both track every campaign rule while
building, so their output passes the full feasibility check.

When every day must hold a meeting, the builders also guard the future:
they never spend so many meetings that the remaining days run dry, and a
day never ends in a city from which no meeting is reachable tomorrow
(riding back to the capital instead).
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .model import Instance
from .rewards import RewardModel, reward_at
from .scenarios import ScenarioConfig
from .schedule import DayTour, Schedule, check_feasibility


class ConstructionError(RuntimeError):
    """No feasible schedule could be assembled."""


@dataclass(frozen=True)
class ConstructorConfig:
    """Knobs of the deterministic constructor."""

    max_time_init: float = 1.0  # permutation budget per day, in seconds
    tour_size_cap: int = 6      # wakeup city plus five meeting candidates

    def __post_init__(self):
        if self.max_time_init <= 0:
            raise ValueError("max_time_init must be positive")
        if self.tour_size_cap < 2:
            raise ValueError("tour_size_cap must admit at least one candidate")


def _day_minutes(instance: Instance, route: Sequence[int], meeting_cities) -> float:
    total = 0.0
    for c in set(meeting_cities):
        total += instance.city(c).meeting_minutes
    for a, b in zip(route, route[1:]):
        total += instance.minutes(a, b)
    return total


class _Build:
    """Running ledger while a schedule is assembled day by day."""

    def __init__(self, instance: Instance, scenario: ScenarioConfig):
        self.instance = instance
        self.scenario = scenario
        self.model = RewardModel.for_scenario(instance, scenario)
        self.meeting_days: Dict[int, List[int]] = {}
        self.tours: List[DayTour] = []
        self.away = 0  # consecutive overnights spent off the capital
        self.supply = sum(scenario.cap_for(c.size_class) for c in instance.cities)

    def meetings_held(self, city_id: int) -> int:
        return len(self.meeting_days.get(city_id, ()))

    def last_day(self, city_id: int) -> Optional[int]:
        days = self.meeting_days.get(city_id)
        return days[-1] if days else None

    def cap_room(self, city_id: int) -> bool:
        size = self.instance.city(city_id).size_class
        return self.meetings_held(city_id) < self.scenario.cap_for(size)

    def reward_today(self, city_id: int, day: int) -> float:
        base = self.model.base_reward(city_id)
        return reward_at(base, day, self.last_day(city_id), self.model)

    def record(self, city_id: int, day: int) -> None:
        self.meeting_days.setdefault(city_id, []).append(day)
        self.supply -= 1

    def close_day(self, route: Sequence[int], meetings) -> None:
        self.tours.append(DayTour.of(route, sorted(meetings)))
        if route[-1] == self.instance.params.capital_id:
            self.away = 0
        else:
            self.away += 1

    def must_end_at_capital(self, day: int) -> bool:
        if self.scenario.force_closed_at_capital:
            return True
        if self.scenario.end_at_capital and day == self.instance.params.days:
            return True
        return (self.scenario.kappa_enabled
                and self.away >= self.instance.params.kappa)

    def forces_return_after(self, day: int, terminal: int) -> bool:
        """Must day+1 end at the capital, if day ends in `terminal`?"""
        params = self.instance.params
        if day + 1 > params.days:
            return False
        if self.scenario.force_closed_at_capital:
            return True
        if self.scenario.end_at_capital and day + 1 == params.days:
            return True
        away_next = 0 if terminal == params.capital_id else self.away + 1
        return self.scenario.kappa_enabled and away_next >= params.kappa

    def finish(self) -> Schedule:
        schedule = Schedule.of(self.tours)
        problems = check_feasibility(schedule, self.instance, self.scenario)
        if problems:
            raise ConstructionError(
                "constructor bug, schedule fails its own rules: "
                + "; ".join(str(v) for v in problems))
        return schedule


def _viable_next_day(build: _Build, terminal: int, today_meetings,
                     forced_next: bool) -> bool:
    """Can any meeting be held tomorrow after waking up in `terminal`?"""
    instance = build.instance
    params = instance.params
    t_max = params.max_tour_minutes
    capital = params.capital_id
    for c in instance.cities:
        held = build.meetings_held(c.id) + (1 if c.id in today_meetings else 0)
        if held >= build.scenario.cap_for(c.size_class):
            continue
        need = float(c.meeting_minutes)
        if c.id == terminal:
            if forced_next and terminal != capital:
                need += instance.minutes(terminal, capital)
        else:
            need += instance.minutes(terminal, c.id)
            if forced_next and c.id != capital:
                need += instance.minutes(c.id, capital)
        if need <= t_max:
            return True
    return False


def _roulette(rng, weighted) -> Optional[int]:
    """Pick an id with probability proportional to its weight."""
    total = 0.0
    for _, w in weighted:
        total += w
    if total <= 0:
        return None
    x = rng.random() * total
    acc = 0.0
    for c, w in weighted:
        acc += w
        if x < acc:
            return c
    return weighted[-1][0]


def _require_supply(instance: Instance, scenario: ScenarioConfig) -> None:
    if not scenario.require_daily_meeting:
        return
    total = sum(scenario.cap_for(c.size_class) for c in instance.cities)
    if total < instance.params.days:
        raise ConstructionError(
            f"every day needs a meeting but the caps only allow {total} "
            f"meetings over {instance.params.days} days")


def _rescue_meeting(instance: Instance, build: _Build, rng, route: List[int],
                    meetings: Set[int], day: int, must_close: bool,
                    pending: Optional[int], unrouted: Set[int]) -> None:
    """Force one meeting into an otherwise empty day, repeats allowed."""
    params = instance.params
    capital = params.capital_id
    alpha = params.max_meetings_per_day
    t_max = params.max_tour_minutes
    barred: Set[int] = set()
    while True:
        weighted = []
        for c in sorted(cc.id for cc in instance.cities):
            if c in barred or c == pending:
                continue
            if pending is not None and c not in route:
                continue  # appending would steal the promised overnight stop
            if not build.cap_room(c):
                continue
            weighted.append((c, build.reward_today(c, day)))
        pick = _roulette(rng, weighted)
        if pick is None:
            raise ConstructionError(f"day {day}: no meeting can be held")
        probe = list(route) if pick in route else list(route) + [pick]
        if must_close and probe[-1] != capital:
            probe.append(capital)
        if (len(set(probe)) <= alpha + 1
                and _day_minutes(instance, probe, meetings | {pick}) <= t_max):
            route[:] = probe
            meetings.add(pick)
            build.record(pick, day)
            unrouted.discard(pick)
            return
        barred.add(pick)


def shrc(instance: Instance, scenario: ScenarioConfig, rng) -> Schedule:
    """Stochastic constructor.

    Day by day, unrouted cities are drawn by reward-proportional roulette
    and appended while the day stays inside its time budget. Every appended
    city hosts a meeting; the city that overflows the budget stays on the
    route as the overnight stop and meets the next morning instead. Days
    that have to end at the capital reserve the ride home up front.
    """
    _require_supply(instance, scenario)
    params = instance.params
    capital = params.capital_id
    alpha = params.max_meetings_per_day
    t_max = params.max_tour_minutes
    guard_future = scenario.require_daily_meeting
    big = set(instance.big_city_ids())
    build = _Build(instance, scenario)

    unrouted: Set[int] = {c.id for c in instance.cities} - {capital}
    pending: Optional[int] = None  # owed a wakeup meeting from yesterday

    for t in range(1, params.days + 1):
        wakeup = capital if t == 1 else build.tours[-1].terminal
        route: List[int] = [wakeup]
        meetings: Set[int] = set()

        if t == 1:
            if instance.city(capital).meeting_minutes > t_max:
                raise ConstructionError(
                    "the opening meeting at the capital does not fit the day")
            meetings.add(capital)
            build.record(capital, 1)
        if pending is not None:
            meetings.add(pending)
            build.record(pending, t)
            pending = None

        must_close = build.must_end_at_capital(t)
        barred: Set[int] = set()

        while len(meetings) < alpha:
            if guard_future and meetings and build.supply - 1 < params.days - t:
                break  # hold the remaining meetings for the days to come
            weighted = []
            for c in sorted(unrouted - barred):
                if not build.cap_room(c):
                    continue
                if c in big and meetings & big:
                    continue
                weighted.append((c, build.reward_today(c, t)))
            pick = _roulette(rng, weighted)
            if pick is None:
                break
            trial = route + [pick]
            probe = trial + [capital] if must_close else trial
            if len(set(probe)) > alpha + 1:
                break  # the day cannot physically take one more stop
            if _day_minutes(instance, probe, meetings | {pick}) <= t_max:
                if guard_future and not must_close and t < params.days:
                    # never accept a stop that turns tomorrow into a dead
                    # end the ride home cannot fix
                    after = meetings | {pick}
                    ride = trial + [capital]
                    ok = (_viable_next_day(build, pick, after,
                                           build.forces_return_after(t, pick))
                          or (len(set(ride)) <= alpha + 1
                              and _day_minutes(instance, ride, after) <= t_max
                              and _viable_next_day(
                                  build, capital, after,
                                  build.forces_return_after(t, capital))))
                    if not ok:
                        barred.add(pick)
                        continue
                route = trial
                meetings.add(pick)
                build.record(pick, t)
                unrouted.discard(pick)
                continue
            # the pick overflows the day; keep it as overnight transit when
            # its meeting fits tomorrow morning, otherwise close the day
            can_shift = (not must_close and t < params.days
                         and (bool(meetings) or not scenario.require_daily_meeting)
                         and len(set(trial)) <= alpha + 1
                         and _day_minutes(instance, trial, meetings) <= t_max
                         and instance.city(pick).meeting_minutes <= t_max)
            if can_shift and build.forces_return_after(t, pick):
                # tomorrow must ride home on top of the shifted meeting
                owed = (instance.city(pick).meeting_minutes
                        + instance.minutes(pick, capital))
                can_shift = owed <= t_max
            if can_shift:
                route = trial
                pending = pick
                unrouted.discard(pick)
            break

        if scenario.require_daily_meeting and not meetings:
            _rescue_meeting(instance, build, rng, route, meetings, t,
                            must_close, pending, unrouted)

        ride_home = False
        if route[-1] != capital:
            if must_close:
                ride_home = True
            elif (guard_future and t < params.days and pending is None
                  and not _viable_next_day(build, route[-1], meetings,
                                           build.forces_return_after(t, route[-1]))):
                ride_home = True
        if ride_home:
            # rides back home are transit only; the capital's repeat budget
            # stays in reserve for days when nothing else is in reach
            closed = route + [capital]
            if (len(set(closed)) > alpha + 1
                    or _day_minutes(instance, closed, meetings) > t_max):
                raise ConstructionError(
                    f"day {t}: no feasible ride back to the capital")
            route = closed

        if (guard_future and t < params.days and pending is None
                and not _viable_next_day(build, route[-1], meetings,
                                         build.forces_return_after(t, route[-1]))):
            raise ConstructionError(f"day {t}: tomorrow is a dead end")

        build.close_day(route, meetings)

    return build.finish()


def _ranked_candidates(build: _Build, ids: Sequence[int], wakeup: int,
                       day: int) -> List[int]:
    """Eligible meeting hosts for the day, best current reward first."""
    scored = []
    for c in ids:
        if c == wakeup:
            continue  # the wakeup city hosted yesterday evening
        if not build.cap_room(c):
            continue
        w = build.reward_today(c, day)
        if w <= 0:
            continue
        scored.append((-w, c))
    scored.sort()
    return [c for _, c in scored]


def _full_route(wakeup: int, order: Sequence[int], capital: int,
                must_close: bool) -> List[int]:
    route = [wakeup] + list(order)
    if must_close and route[-1] != capital:
        route.append(capital)
    return route


def _cheapest_order(instance: Instance, wakeup: int, top: Sequence[int],
                    capital: int, must_close: bool, budget: float) -> List[int]:
    """Order the candidates by exhaustive permutation, cheapest travel first."""
    if not top:
        return []
    best_key = None
    best_perm: List[int] = []
    started = time.monotonic()
    for perm in itertools.permutations(top):
        if must_close and capital in perm and perm[-1] != capital:
            continue  # home can only be the last stop of a closing day
        route = _full_route(wakeup, perm, capital, must_close)
        cost = 0.0
        for a, b in zip(route, route[1:]):
            cost += instance.cost(a, b)
        key = (cost, tuple(route))
        if best_key is None or key < best_key:
            best_key = key
            best_perm = list(perm)
        if time.monotonic() - started > budget:
            break
    return best_perm


def _escc_day(instance: Instance, build: _Build, config: ConstructorConfig,
              wakeup: int, t: int, must_close: bool,
              ids: Sequence[int], big: Set[int]) -> Tuple[List[int], Set[int]]:
    """One deterministic day: candidates, cheapest ordering, crop, fallbacks."""
    scenario = build.scenario
    params = instance.params
    capital = params.capital_id
    alpha = params.max_meetings_per_day
    t_max = params.max_tour_minutes

    ranked = _ranked_candidates(build, ids, wakeup, t)
    top: List[int] = []
    for c in ranked:
        if len(top) >= config.tour_size_cap - 1:
            break
        if c in big and any(x in big for x in top):
            continue  # big cities never share a day
        top.append(c)

    order = _cheapest_order(instance, wakeup, top, capital, must_close,
                            config.max_time_init)
    while order:
        full = _full_route(wakeup, order, capital, must_close)
        if (len(order) <= alpha
                and len(set(full)) <= alpha + 1
                and _day_minutes(instance, full, set(order)) <= t_max
                and (not scenario.require_daily_meeting
                     or len(order) <= 1
                     or build.supply - len(order) >= params.days - t)):
            break
        order.pop()
    meetings: Set[int] = set(order)
    full = _full_route(wakeup, order, capital, must_close)

    if scenario.require_daily_meeting and not meetings:
        # first fallback: best single companion that fits the day
        for c in ranked:
            two = _full_route(wakeup, [c], capital, must_close)
            if (len(set(two)) <= alpha + 1
                    and _day_minutes(instance, two, {c}) <= t_max):
                meetings = {c}
                full = two
                break
        else:
            # last resort: the wakeup city hosts again
            if (build.cap_room(wakeup)
                    and _day_minutes(instance, full, {wakeup}) <= t_max):
                meetings = {wakeup}
            else:
                raise ConstructionError(f"day {t}: no meeting can be held")

    if _day_minutes(instance, full, meetings) > t_max:
        raise ConstructionError(f"day {t}: even the bare route overflows the day")
    return full, meetings


def escc(instance: Instance, scenario: ScenarioConfig,
         config: Optional[ConstructorConfig] = None) -> Schedule:
    """Deterministic constructor.

    Each day, the highest-reward eligible cities join the wakeup city in a
    small candidate set; every ordering is costed, the cheapest tour is
    cropped from its right end until it fits the day, and the last city
    standing becomes tomorrow's wakeup. All candidates left on the tour
    host meetings; the wakeup city never does, having hosted the evening
    before.
    """
    if config is None:
        config = ConstructorConfig()
    _require_supply(instance, scenario)
    params = instance.params
    big = set(instance.big_city_ids())
    build = _Build(instance, scenario)
    ids = sorted(c.id for c in instance.cities)
    guard_future = scenario.require_daily_meeting

    wakeup = params.capital_id
    for t in range(1, params.days + 1):
        must_close = build.must_end_at_capital(t)
        full, meetings = _escc_day(instance, build, config, wakeup, t,
                                   must_close, ids, big)
        if (guard_future and t < params.days
                and not _viable_next_day(build, full[-1], meetings,
                                         build.forces_return_after(t, full[-1]))):
            # ending the day there leaves tomorrow without any meeting;
            # rebuild the day so it closes back at the capital
            retry = None
            if not must_close:
                retry = _escc_day(instance, build, config, wakeup, t, True,
                                  ids, big)
            if retry is not None and _viable_next_day(
                    build, retry[0][-1], retry[1],
                    build.forces_return_after(t, retry[0][-1])):
                full, meetings = retry
            else:
                raise ConstructionError(f"day {t}: tomorrow is a dead end")
        for c in sorted(meetings):
            build.record(c, t)
        build.close_day(full, meetings)
        wakeup = full[-1]

    return build.finish()
