"""Multi-day schedules and the feasibility rules they must obey.

A schedule holds one DayTour per campaign day. The route is the ordered
list of cities the politician drives through that day, starting at the
wakeup city; the meetings tuple lists the cities whose meeting is
attributed to that day. A terminal city may carry its meeting either on
the arrival day or the next morning (it wakes up there), so the wakeup
city can legitimately appear in the day's meeting list.

Day tours come in three shapes:

  type 1  closed: ends where it started (route[0] == route[-1], length > 1)
  type 2  single city: route [i], the whole day spent in place
  type 3  open: ends in a different city, the next day starts there
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .model import Instance
from .scenarios import ScenarioConfig


class ScheduleFormatError(ValueError):
    """Raised when a solution document cannot be decoded."""


@dataclass(frozen=True)
class DayTour:
    route: Tuple[int, ...]
    meetings: Tuple[int, ...]  # sorted; duplicates representable for checking

    @staticmethod
    def of(route: Iterable[int], meetings: Iterable[int] = ()) -> "DayTour":
        return DayTour(route=tuple(route), meetings=tuple(sorted(meetings)))

    @property
    def wakeup(self) -> int:
        return self.route[0]

    @property
    def terminal(self) -> int:
        return self.route[-1]

    def meeting_set(self) -> frozenset:
        return frozenset(self.meetings)

    def distinct_cities(self) -> frozenset:
        return frozenset(self.route)


@dataclass(frozen=True)
class Schedule:
    days: Tuple[DayTour, ...]

    @staticmethod
    def of(day_tours: Iterable[DayTour]) -> "Schedule":
        return Schedule(days=tuple(day_tours))

    @property
    def m(self) -> int:
        return len(self.days)

    def day(self, t: int) -> DayTour:
        """1-based day access, matching how days are numbered everywhere."""
        return self.days[t - 1]

    def replace_days(self, patch: Dict[int, DayTour]) -> "Schedule":
        days = list(self.days)
        for t, tour in patch.items():
            days[t - 1] = tour
        return Schedule(days=tuple(days))

    def encoding(self) -> tuple:
        """Canonical nested-tuple form, used for deterministic tie-breaks."""
        return tuple((d.route, d.meetings) for d in self.days)


def tour_type(tour: DayTour) -> int:
    if len(tour.route) == 1:
        return 2
    if tour.route[0] == tour.route[-1]:
        return 1
    return 3


def tour_duration_minutes(tour: DayTour, instance: Instance) -> float:
    """Meeting time of the day's attributed meetings plus the travel time
    along the route. Single-city days have no travel."""
    total = 0.0
    seen = set()
    for city_id in tour.meetings:
        if city_id in seen:
            continue  # duplicate entries are a violation, not extra time
        seen.add(city_id)
        total += instance.city(city_id).meeting_minutes
    for a, b in zip(tour.route, tour.route[1:]):
        total += instance.minutes(a, b)
    return total


class ViolationKind(enum.Enum):
    # the seven campaign rules
    CHAIN = "chain"
    DURATION = "duration"
    KAPPA_RETURN = "kappa_return"
    CLASS_CAP = "class_cap"
    DAILY_REPEAT = "daily_repeat"
    BIG_DAY_CLASH = "big_day_clash"
    DAY_MEETING_CAP = "day_meeting_cap"
    # scenario flags
    DAILY_MEETING_REQUIRED = "daily_meeting_required"
    END_AT_CAPITAL = "end_at_capital"
    CLOSED_AT_CAPITAL = "closed_at_capital"
    # structural
    HORIZON_MISMATCH = "horizon_mismatch"
    EMPTY_ROUTE = "empty_route"
    UNKNOWN_CITY = "unknown_city"
    CONSECUTIVE_DUPLICATE = "consecutive_duplicate"
    REVISIT_IN_DAY = "revisit_in_day"
    ROUTE_LENGTH = "route_length"
    MEETING_NOT_VISITED = "meeting_not_visited"


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    day: Optional[int]
    cities: Tuple[int, ...]
    detail: str

    def __str__(self):
        where = f"day {self.day}" if self.day is not None else "schedule"
        return f"{self.kind.value} @ {where}: {self.detail}"


def _structural_violations(schedule: Schedule, instance: Instance,
                           scenario: ScenarioConfig) -> List[Violation]:
    out = []
    alpha = instance.params.max_meetings_per_day
    if schedule.m != instance.params.days:
        out.append(Violation(ViolationKind.HORIZON_MISMATCH, None, (),
                             f"schedule has {schedule.m} days, instance wants "
                             f"{instance.params.days}"))
    for t, tour in enumerate(schedule.days, start=1):
        if not tour.route:
            out.append(Violation(ViolationKind.EMPTY_ROUTE, t, (),
                                 "the politician has to be somewhere"))
            continue
        for city_id in tour.route + tour.meetings:
            if not instance.has_city(city_id):
                out.append(Violation(ViolationKind.UNKNOWN_CITY, t, (city_id,),
                                     f"city {city_id} is not in the instance"))
        for a, b in zip(tour.route, tour.route[1:]):
            if a == b:
                out.append(Violation(ViolationKind.CONSECUTIVE_DUPLICATE, t, (a,),
                                     f"route repeats city {a} back to back"))
        # within a day each city is driven through once; the only repeat
        # allowed is the closing return to the wakeup city
        interior = tour.route[:-1] if tour.route[0] == tour.route[-1] and len(tour.route) > 1 \
            else tour.route
        seen = set()
        for city_id in interior:
            if city_id in seen:
                out.append(Violation(ViolationKind.REVISIT_IN_DAY, t, (city_id,),
                                     f"route visits city {city_id} twice"))
            seen.add(city_id)
        distinct = len(tour.distinct_cities())
        if distinct > alpha + 1:
            out.append(Violation(ViolationKind.ROUTE_LENGTH, t,
                                 tuple(sorted(tour.distinct_cities())),
                                 f"{distinct} distinct cities in one day, cap is "
                                 f"{alpha + 1}"))
        present = set(tour.route)
        for city_id in tour.meeting_set():
            if city_id not in present:
                out.append(Violation(ViolationKind.MEETING_NOT_VISITED, t, (city_id,),
                                     f"meeting in city {city_id} but the route never "
                                     f"goes there"))
    return out


def check_feasibility(schedule: Schedule, instance: Instance,
                      scenario: ScenarioConfig) -> List[Violation]:
    """All violations of the campaign rules, structural problems included.

    An empty list means the schedule can be lived as written. Checks do not
    stop at the first finding; mutating one aspect of a feasible schedule
    yields exactly the matching kind.
    """
    out = _structural_violations(schedule, instance, scenario)
    if any(v.kind in (ViolationKind.EMPTY_ROUTE, ViolationKind.UNKNOWN_CITY,
                      ViolationKind.HORIZON_MISMATCH) for v in out):
        return out  # remaining checks would chase ghosts

    params = instance.params
    capital = params.capital_id
    alpha = params.max_meetings_per_day

    # (i) the day chain: wake where you slept, start the campaign at home
    if schedule.days[0].wakeup != capital:
        out.append(Violation(ViolationKind.CHAIN, 1, (schedule.days[0].wakeup,),
                             f"day 1 wakes in {schedule.days[0].wakeup}, campaign "
                             f"starts at the capital {capital}"))
    for t in range(1, schedule.m):
        prev, cur = schedule.days[t - 1], schedule.days[t]
        if cur.wakeup != prev.terminal:
            out.append(Violation(ViolationKind.CHAIN, t + 1, (prev.terminal, cur.wakeup),
                                 f"day {t + 1} wakes in {cur.wakeup} but day {t} "
                                 f"ended in {prev.terminal}"))

    # (ii) daily duration
    for t, tour in enumerate(schedule.days, start=1):
        used = tour_duration_minutes(tour, instance)
        if used > params.max_tour_minutes + 1e-9:
            out.append(Violation(ViolationKind.DURATION, t, tuple(tour.route),
                                 f"{used:g} min used, limit {params.max_tour_minutes}"))

    # (iii) periodic capital return, judged on overnight cities
    if scenario.kappa_enabled:
        kappa = params.kappa
        overnights = [tour.terminal for tour in schedule.days]
        for start in range(0, schedule.m - kappa):
            window = overnights[start:start + kappa + 1]
            if capital not in window:
                out.append(Violation(
                    ViolationKind.KAPPA_RETURN, start + 1, (),
                    f"days {start + 1}..{start + 1 + kappa} never sleep at the "
                    f"capital (kappa={kappa})"))

    # (iv) horizon meeting caps per size class
    totals: Dict[int, int] = {}
    for tour in schedule.days:
        for city_id in tour.meeting_set():
            totals[city_id] = totals.get(city_id, 0) + 1
    for city_id in sorted(totals):
        cap = scenario.cap_for(instance.city(city_id).size_class)
        if totals[city_id] > cap:
            out.append(Violation(ViolationKind.CLASS_CAP, None, (city_id,),
                                 f"city {city_id} holds {totals[city_id]} meetings, "
                                 f"cap for {instance.city(city_id).size_class} is {cap}"))

    # (v) at most one meeting per city per day
    for t, tour in enumerate(schedule.days, start=1):
        seen = set()
        for city_id in tour.meetings:
            if city_id in seen:
                out.append(Violation(ViolationKind.DAILY_REPEAT, t, (city_id,),
                                     f"city {city_id} meets twice on day {t}"))
            seen.add(city_id)

    # (vi) big cities do not share a day
    big = set(instance.big_city_ids())
    for t, tour in enumerate(schedule.days, start=1):
        big_today = sorted(tour.meeting_set() & big)
        if len(big_today) > 1:
            out.append(Violation(ViolationKind.BIG_DAY_CLASH, t, tuple(big_today),
                                 f"{len(big_today)} big-city meetings on day {t}"))

    # (vii) daily meeting count
    for t, tour in enumerate(schedule.days, start=1):
        count = len(tour.meeting_set())
        if count > alpha:
            out.append(Violation(ViolationKind.DAY_MEETING_CAP, t,
                                 tuple(sorted(tour.meeting_set())),
                                 f"{count} meetings on day {t}, cap is {alpha}"))

    # scenario flags
    if scenario.require_daily_meeting:
        for t, tour in enumerate(schedule.days, start=1):
            if not tour.meeting_set():
                out.append(Violation(ViolationKind.DAILY_MEETING_REQUIRED, t, (),
                                     f"day {t} holds no meeting"))
    if scenario.end_at_capital and schedule.days:
        if schedule.days[-1].terminal != capital:
            out.append(Violation(ViolationKind.END_AT_CAPITAL, schedule.m,
                                 (schedule.days[-1].terminal,),
                                 "campaign must finish at the capital"))
    if scenario.force_closed_at_capital:
        for t, tour in enumerate(schedule.days, start=1):
            if tour.wakeup != capital or tour.terminal != capital:
                out.append(Violation(ViolationKind.CLOSED_AT_CAPITAL, t,
                                     (tour.wakeup, tour.terminal),
                                     f"day {t} must start and end at the capital"))
    return out


def is_feasible(schedule: Schedule, instance: Instance,
                scenario: ScenarioConfig) -> bool:
    return not check_feasibility(schedule, instance, scenario)


# ---------------------------------------------------------------------------
# solution files


def encode(schedule: Schedule, *, instance_name: str = "",
           objective: Optional[float] = None,
           params_echo: Optional[dict] = None) -> str:
    doc = {
        "instance": instance_name,
        "days": [
            {"route": list(tour.route), "meetings": list(tour.meetings)}
            for tour in schedule.days
        ],
        "objective": objective,
        "params_echo": params_echo or {},
    }
    return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"


def _decode_day(raw, t: int) -> DayTour:
    if not isinstance(raw, dict):
        raise ScheduleFormatError(f"days[{t}]: expected an object")
    unknown = set(raw) - {"route", "meetings"}
    if unknown:
        raise ScheduleFormatError(f"days[{t}]: unknown keys {sorted(unknown)}")
    route = raw.get("route")
    meetings = raw.get("meetings", [])
    if not isinstance(route, list) or not route:
        raise ScheduleFormatError(f"days[{t}].route: expected a non-empty list")
    if not all(isinstance(v, int) and not isinstance(v, bool) for v in route):
        raise ScheduleFormatError(f"days[{t}].route: city ids must be integers")
    if not isinstance(meetings, list) or \
            not all(isinstance(v, int) and not isinstance(v, bool) for v in meetings):
        raise ScheduleFormatError(f"days[{t}].meetings: expected a list of city ids")
    present = set(route)
    seen = set()
    for city_id in meetings:
        if city_id not in present:
            raise ScheduleFormatError(
                f"days[{t}].meetings: city {city_id} is not visited that day")
        if city_id in seen:
            raise ScheduleFormatError(
                f"days[{t}].meetings: city {city_id} listed twice")
        seen.add(city_id)
    return DayTour.of(route, meetings)


def decode(text: str) -> Schedule:
    schedule, _ = decode_solution(text)
    return schedule


def decode_solution(text: str) -> Tuple[Schedule, dict]:
    """Parse a solution document; returns the schedule and its metadata."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScheduleFormatError(
            f"not valid JSON at line {exc.lineno}, column {exc.colno}")
    if not isinstance(doc, dict):
        raise ScheduleFormatError("solution document must be a JSON object")
    days = doc.get("days")
    if not isinstance(days, list) or not days:
        raise ScheduleFormatError("days: expected a non-empty list")
    schedule = Schedule.of(_decode_day(raw, t) for t, raw in enumerate(days))
    meta = {
        "instance": doc.get("instance", ""),
        "objective": doc.get("objective"),
        "params_echo": doc.get("params_echo", {}),
    }
    return schedule, meta
