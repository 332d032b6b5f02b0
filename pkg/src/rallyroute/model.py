"""Problem instances for multi-day campaign tour planning.

An instance is a set of cities (index 1..n, plus a fictitious city 0 used by
single-city days in the arc model), campaign parameters, and a pair of
(n+1) x (n+1) travel matrices (cost and minutes). City 0's row and column are
zero: staying put costs nothing.

Base rewards follow the population/criticality recipe: a city worth
``cf * (100 + round(pop / min_pop) * multiplier)`` where the multiplier is
2.0 for the most populated city, 3.0 for ranks two through seven and 5.0
for everybody else. Town rows inherit their parent province's rank, reward
and multiplier.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

CRITICALITY_FACTORS = {
    "noncritical": 2,
    "negative_critical": 3,
    "positive_critical": 4,
    "pos_neg_critical": 5,
}

SIZE_CLASSES = ("big", "midsize", "small")

MINUTES_BY_CLASS = {"big": 120, "midsize": 90, "small": 60}

ALLOWED_MEETING_MINUTES = (60, 90, 120)

REWARD_DIRECTIONS = ("front_loaded", "back_loaded")

_PARAM_KEYS = (
    "days",
    "capital_id",
    "max_tour_minutes",
    "max_meetings_per_day",
    "kappa",
    "repeat_depreciation_K",
    "cost_normalizer_Kbar",
    "min_population",
    "reward_direction",
    "require_daily_meeting",
    "end_at_capital",
)

_CITY_KEYS = (
    "id",
    "name",
    "population",
    "criticality",
    "size_class",
    "meeting_minutes",
    "parent_id",
    "base_reward",
)


class InstanceError(ValueError):
    """Raised when an instance file or object cannot be used."""

    def __init__(self, message, issues=None):
        super().__init__(message)
        self.issues = list(issues or [])


@dataclass(frozen=True)
class InstanceIssue:
    """One validation finding: which rule, where, and what was seen."""

    rule: str
    location: str
    message: str

    def __str__(self):
        return f"[{self.rule}@{self.location}] {self.message}"


@dataclass(frozen=True)
class City:
    id: int
    name: str
    population: int
    criticality: str  # key into CRITICALITY_FACTORS
    size_class: str  # "big" | "midsize" | "small"
    meeting_minutes: int
    parent_id: Optional[int] = None  # province this town belongs to
    base_reward: Optional[float] = None  # filled by the loader if absent

    @property
    def criticality_factor(self) -> int:
        return CRITICALITY_FACTORS[self.criticality]

    @property
    def is_town(self) -> bool:
        return self.parent_id is not None


@dataclass(frozen=True)
class CampaignParams:
    days: int
    capital_id: int = 1
    max_tour_minutes: int = 840
    max_meetings_per_day: int = 4
    kappa: int = 5
    repeat_depreciation: float = 2.0  # K, >= 1
    cost_normalizer: float = 1.0  # Kbar, >= 0
    min_population: int = 78550
    reward_direction: str = "front_loaded"
    require_daily_meeting: bool = True
    end_at_capital: bool = False


@dataclass(frozen=True)
class TravelMatrices:
    """Square (n+1) x (n+1) integer-ish matrices, index 0 fictitious."""

    cost: Tuple[Tuple[float, ...], ...]
    minutes: Tuple[Tuple[float, ...], ...]


def _freeze_matrix(rows) -> Tuple[Tuple[float, ...], ...]:
    return tuple(tuple(row) for row in rows)


@dataclass(frozen=True)
class Instance:
    name: str
    params: CampaignParams
    cities: Tuple[City, ...]
    travel: TravelMatrices

    def __post_init__(self):
        object.__setattr__(self, "_by_id", {c.id: c for c in self.cities})

    # -- lookups ---------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.cities)

    def city(self, city_id: int) -> City:
        return self._by_id[city_id]

    def has_city(self, city_id: int) -> bool:
        return city_id in self._by_id

    @property
    def capital(self) -> City:
        return self._by_id[self.params.capital_id]

    def minutes(self, i: int, j: int) -> float:
        return self.travel.minutes[i][j]

    def cost(self, i: int, j: int) -> float:
        return self.travel.cost[i][j]

    def big_city_ids(self) -> Tuple[int, ...]:
        return tuple(c.id for c in self.cities if c.size_class == "big")

    def provinces(self) -> Tuple[City, ...]:
        return tuple(c for c in self.cities if not c.is_town)


# ---------------------------------------------------------------------------
# reward derivation


def _round_half_away(numerator: int, denominator: int) -> int:
    # exact round-half-away-from-zero for positive integer ratio
    return (2 * numerator + denominator) // (2 * denominator)


def population_ranks(cities: Sequence[City]) -> Dict[int, int]:
    """Rank cities by descending population; towns take their parent's rank.

    Only province rows compete for ranks. Ties break on the lower id so the
    ranking is total and reproducible.
    """
    provinces = sorted(
        (c for c in cities if not c.is_town),
        key=lambda c: (-c.population, c.id),
    )
    ranks = {c.id: i + 1 for i, c in enumerate(provinces)}
    for c in cities:
        if c.is_town:
            if c.parent_id in ranks:
                ranks[c.id] = ranks[c.parent_id]
    return ranks


def derive_multiplier(rank: int) -> float:
    """Population-rank multiplier: 2.0 for the top city, 3.0 for ranks 2..7,
    5.0 otherwise."""
    if rank < 1:
        raise InstanceError(f"population rank must be >= 1, got {rank}")
    if rank == 1:
        return 2.0
    if rank <= 7:
        return 3.0
    return 5.0


def derive_base_reward(population: int, criticality_factor: int,
                       multiplier: float, min_pop: int) -> float:
    """criticality_factor * (100 + round(population / min_pop) * multiplier).

    The rounding is half-away-from-zero and computed on exact integers, so
    the result is exact whenever the inputs are integers.
    """
    if min_pop <= 0:
        raise InstanceError(f"min_pop must be positive, got {min_pop}")
    if population < 0:
        raise InstanceError(f"population must be >= 0, got {population}")
    steps = _round_half_away(population, min_pop)
    return criticality_factor * (100 + steps * multiplier)


def fill_base_rewards(cities: Sequence[City], min_pop: int) -> List[City]:
    """Return cities with base_reward populated.

    Provinces get the derived value unless one was stored explicitly. Towns
    inherit the parent's reward, again unless overridden (needed when the
    parent province is not part of the instance).
    """
    ranks = population_ranks(cities)
    by_id = {c.id: c for c in cities}
    out = []
    for c in cities:
        if c.base_reward is not None:
            out.append(c)
            continue
        if c.is_town:
            parent = by_id.get(c.parent_id)
            if parent is None:
                raise InstanceError(
                    f"town {c.id} ({c.name}) has no parent row and no explicit base_reward")
            reward = parent.base_reward
            if reward is None:
                reward = derive_base_reward(
                    parent.population, parent.criticality_factor,
                    derive_multiplier(ranks[parent.id]), min_pop)
        else:
            reward = derive_base_reward(
                c.population, c.criticality_factor,
                derive_multiplier(ranks[c.id]), min_pop)
        out.append(replace(c, base_reward=float(reward)))
    return out


# ---------------------------------------------------------------------------
# validation


def validate(instance: Instance) -> List[InstanceIssue]:
    """Structural checks. Returns an issue list; empty means usable."""
    issues = []
    add = issues.append
    p = instance.params
    cities = instance.cities
    n = len(cities)

    ids = sorted(c.id for c in cities)
    if ids != list(range(1, n + 1)):
        add(InstanceIssue("CityIdContiguous", "cities",
                          f"ids must be exactly 1..{n}, got {ids[:8]}..."))
    by_id = {c.id: c for c in cities}
    if p.capital_id not in by_id:
        add(InstanceIssue("CapitalExists", "params.capital_id",
                          f"capital_id {p.capital_id} is not a city"))

    if p.days < 1:
        add(InstanceIssue("HorizonRange", "params.days", f"days must be >= 1, got {p.days}"))
    if p.max_tour_minutes <= 0:
        add(InstanceIssue("TourMinutesRange", "params.max_tour_minutes",
                          f"must be positive, got {p.max_tour_minutes}"))
    if p.max_meetings_per_day < 1:
        add(InstanceIssue("MeetingsPerDayRange", "params.max_meetings_per_day",
                          f"must be >= 1, got {p.max_meetings_per_day}"))
    if p.kappa < 1:
        add(InstanceIssue("KappaRange", "params.kappa", f"must be >= 1, got {p.kappa}"))
    if p.repeat_depreciation < 1:
        add(InstanceIssue("RepeatDepreciationRange", "params.repeat_depreciation_K",
                          f"K must be >= 1, got {p.repeat_depreciation}"))
    if p.cost_normalizer < 0:
        add(InstanceIssue("CostNormalizerRange", "params.cost_normalizer_Kbar",
                          f"Kbar must be >= 0, got {p.cost_normalizer}"))
    if p.min_population <= 0:
        add(InstanceIssue("MinPopulationRange", "params.min_population",
                          f"must be positive, got {p.min_population}"))
    if p.reward_direction not in REWARD_DIRECTIONS:
        add(InstanceIssue("RewardDirection", "params.reward_direction",
                          f"unknown direction {p.reward_direction!r}"))

    for c in cities:
        loc = f"cities[{c.id}]"
        if c.criticality not in CRITICALITY_FACTORS:
            add(InstanceIssue("CriticalityValue", loc,
                              f"unknown criticality {c.criticality!r}"))
        if c.size_class not in SIZE_CLASSES:
            add(InstanceIssue("SizeClassValue", loc,
                              f"unknown size_class {c.size_class!r}"))
        if c.population < 0:
            add(InstanceIssue("PopulationRange", loc, "population must be >= 0"))
        if c.meeting_minutes not in ALLOWED_MEETING_MINUTES:
            add(InstanceIssue("MeetingMinutesRange", loc,
                              f"meeting_minutes must be one of {ALLOWED_MEETING_MINUTES}, "
                              f"got {c.meeting_minutes}"))
        if c.base_reward is not None and c.base_reward <= 0:
            add(InstanceIssue("BaseRewardPositive", loc,
                              f"base_reward must be positive, got {c.base_reward}"))
        if c.parent_id is not None:
            parent = by_id.get(c.parent_id)
            if parent is None:
                add(InstanceIssue("ParentExists", loc,
                                  f"parent_id {c.parent_id} is not a city"))
            elif parent.is_town:
                add(InstanceIssue("ParentIsProvince", loc,
                                  f"parent {parent.id} is itself a town"))
            elif (c.base_reward is not None and parent.base_reward is not None
                  and c.base_reward != parent.base_reward):
                add(InstanceIssue("ParentReward", loc,
                                  f"town reward {c.base_reward} != parent reward "
                                  f"{parent.base_reward}"))

    for label, matrix in (("travel_cost", instance.travel.cost),
                          ("travel_minutes", instance.travel.minutes)):
        if len(matrix) != n + 1 or any(len(row) != n + 1 for row in matrix):
            add(InstanceIssue("MatrixDimension", label,
                              f"must be ({n + 1})x({n + 1})"))
            continue
        for i, row in enumerate(matrix):
            for j, v in enumerate(row):
                if not isinstance(v, (int, float)) or math.isnan(v) or v < 0:
                    add(InstanceIssue("NonNegativeMatrix", f"{label}({i},{j})",
                                      f"entries must be >= 0, got {v!r}"))
                elif i == j and v != 0:
                    add(InstanceIssue("ZeroDiagonal", f"{label}({i},{j})",
                                      f"diagonal must be 0, got {v!r}"))
                elif (i == 0 or j == 0) and v != 0:
                    add(InstanceIssue("FictitiousRowZero", f"{label}({i},{j})",
                                      "city-0 arcs must be free"))
    return issues


# ---------------------------------------------------------------------------
# JSON round trip


def _params_from_dict(raw: dict) -> CampaignParams:
    unknown = set(raw) - set(_PARAM_KEYS)
    if unknown:
        raise InstanceError(f"unknown params keys: {sorted(unknown)}")
    missing = [k for k in ("days",) if k not in raw]
    if missing:
        raise InstanceError(f"params missing required keys: {missing}")
    defaults = CampaignParams(days=raw["days"])
    return CampaignParams(
        days=int(raw["days"]),
        capital_id=int(raw.get("capital_id", defaults.capital_id)),
        max_tour_minutes=int(raw.get("max_tour_minutes", defaults.max_tour_minutes)),
        max_meetings_per_day=int(raw.get("max_meetings_per_day", defaults.max_meetings_per_day)),
        kappa=int(raw.get("kappa", defaults.kappa)),
        repeat_depreciation=float(raw.get("repeat_depreciation_K", defaults.repeat_depreciation)),
        cost_normalizer=float(raw.get("cost_normalizer_Kbar", defaults.cost_normalizer)),
        min_population=int(raw.get("min_population", defaults.min_population)),
        reward_direction=str(raw.get("reward_direction", defaults.reward_direction)),
        require_daily_meeting=bool(raw.get("require_daily_meeting", defaults.require_daily_meeting)),
        end_at_capital=bool(raw.get("end_at_capital", defaults.end_at_capital)),
    )


def _params_to_dict(p: CampaignParams) -> dict:
    return {
        "days": p.days,
        "capital_id": p.capital_id,
        "max_tour_minutes": p.max_tour_minutes,
        "max_meetings_per_day": p.max_meetings_per_day,
        "kappa": p.kappa,
        "repeat_depreciation_K": p.repeat_depreciation,
        "cost_normalizer_Kbar": p.cost_normalizer,
        "min_population": p.min_population,
        "reward_direction": p.reward_direction,
        "require_daily_meeting": p.require_daily_meeting,
        "end_at_capital": p.end_at_capital,
    }


def _city_from_dict(raw: dict) -> City:
    unknown = set(raw) - set(_CITY_KEYS)
    if unknown:
        raise InstanceError(f"unknown city keys: {sorted(unknown)}")
    missing = [k for k in _CITY_KEYS[:6] if k not in raw]
    if missing:
        raise InstanceError(f"city missing required keys: {missing}")
    reward = raw.get("base_reward")
    return City(
        id=int(raw["id"]),
        name=str(raw["name"]),
        population=int(raw["population"]),
        criticality=str(raw["criticality"]),
        size_class=str(raw["size_class"]),
        meeting_minutes=int(raw["meeting_minutes"]),
        parent_id=None if raw.get("parent_id") is None else int(raw["parent_id"]),
        base_reward=None if reward is None else float(reward),
    )


def instance_from_dict(raw: dict, name_hint: str = "") -> Instance:
    if not isinstance(raw, dict):
        raise InstanceError("instance document must be a JSON object")
    unknown = set(raw) - {"name", "params", "cities", "travel_cost", "travel_minutes"}
    if unknown:
        raise InstanceError(f"unknown top-level keys: {sorted(unknown)}")
    for key in ("params", "cities", "travel_cost", "travel_minutes"):
        if key not in raw:
            raise InstanceError(f"missing top-level key {key!r}")
    params = _params_from_dict(raw["params"])
    cities = [_city_from_dict(c) for c in raw["cities"]]
    cities = fill_base_rewards(cities, params.min_population)
    inst = Instance(
        name=str(raw.get("name", name_hint)),
        params=params,
        cities=tuple(cities),
        travel=TravelMatrices(
            cost=_freeze_matrix(raw["travel_cost"]),
            minutes=_freeze_matrix(raw["travel_minutes"]),
        ),
    )
    issues = validate(inst)
    if issues:
        raise InstanceError(
            "instance failed validation: " + "; ".join(str(i) for i in issues[:6]),
            issues=issues)
    return inst


def instance_to_dict(instance: Instance) -> dict:
    return {
        "name": instance.name,
        "params": _params_to_dict(instance.params),
        "cities": [
            {
                "id": c.id,
                "name": c.name,
                "population": c.population,
                "criticality": c.criticality,
                "size_class": c.size_class,
                "meeting_minutes": c.meeting_minutes,
                "parent_id": c.parent_id,
                "base_reward": c.base_reward,
            }
            for c in instance.cities
        ],
        "travel_cost": [list(row) for row in instance.travel.cost],
        "travel_minutes": [list(row) for row in instance.travel.minutes],
    }


def load_instance(path) -> Instance:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: not valid JSON at line {exc.lineno}, column {exc.colno}")
    return instance_from_dict(raw, name_hint=path.stem)


def save_instance(instance: Instance, path) -> None:
    path = Path(path)
    text = json.dumps(instance_to_dict(instance), ensure_ascii=False, indent=2)
    path.write_text(text + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# synthetic instances


def generate_instance(n: int, m: int, seed: int, *,
                      span_km: float = 600.0,
                      max_tour_minutes: int = 840,
                      max_meetings_per_day: int = 4,
                      kappa: int = 5,
                      repeat_depreciation: float = 2.0,
                      cost_normalizer: float = 1.0,
                      reward_direction: str = "front_loaded",
                      require_daily_meeting: bool = True,
                      end_at_capital: bool = False,
                      name: Optional[str] = None) -> Instance:
    """Deterministic synthetic instance on a [0, span_km]^2 plane.

    City 1 is the capital and sits at the centre of the map, so with the
    default span and day length any single city is reachable within a day
    and even a round trip from the capital always fits; tight days only
    arise from stacking several meetings. The first three cities cover the
    three size classes so every cap is exercised; the rest draw
    small-heavy, roughly like a national map. Travel minutes assume
    80 km/h on a straight line, cost is proportional to distance, both
    rounded to integers.

    Args:
        n: number of real cities, at least 3.
        m: horizon in days.
        seed: RNG seed; equal seeds give equal instances.

    Returns:
        A validated Instance named gen_<n>c_<m>d_s<seed> unless overridden.
    """
    if n < 3:
        raise InstanceError(f"need at least 3 cities, got {n}")
    if m < 1:
        raise InstanceError(f"need at least 1 day, got {m}")
    rng = random.Random(seed)

    pts = [(span_km / 2.0, span_km / 2.0)]
    pts += [(rng.uniform(0.0, span_km), rng.uniform(0.0, span_km))
            for _ in range(n - 1)]

    classes = ["big", "midsize", "small"]
    while len(classes) < n:
        r = rng.random()
        classes.append("big" if r < 0.05 else "midsize" if r < 0.40 else "small")

    pop_range = {"big": (3_000_000, 15_000_000),
                 "midsize": (1_000_000, 2_900_000),
                 "small": (120_000, 990_000)}
    crit_names = list(CRITICALITY_FACTORS)
    crit_weights = (42, 19, 11, 9)  # national proportions, small-heavy

    cities = []
    for i in range(n):
        lo, hi = pop_range[classes[i]]
        population = rng.randrange(lo, hi)
        criticality = rng.choices(crit_names, weights=crit_weights, k=1)[0]
        cities.append(City(
            id=i + 1,
            name=f"C{i + 1:02d}",
            population=population,
            criticality=criticality,
            size_class=classes[i],
            meeting_minutes=MINUTES_BY_CLASS[classes[i]],
        ))

    min_pop = min(c.population for c in cities)
    cities = fill_base_rewards(cities, min_pop)

    size = n + 1
    minutes = [[0.0] * size for _ in range(size)]
    cost = [[0.0] * size for _ in range(size)]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            km = math.dist(pts[i], pts[j])
            minutes[i + 1][j + 1] = float(round(km * 60.0 / 80.0))
            cost[i + 1][j + 1] = float(round(km))

    params = CampaignParams(
        days=m,
        capital_id=1,
        max_tour_minutes=max_tour_minutes,
        max_meetings_per_day=max_meetings_per_day,
        kappa=kappa,
        repeat_depreciation=repeat_depreciation,
        cost_normalizer=cost_normalizer,
        min_population=min_pop,
        reward_direction=reward_direction,
        require_daily_meeting=require_daily_meeting,
        end_at_capital=end_at_capital,
    )
    inst = Instance(
        name=name or f"gen_{n}c_{m}d_s{seed}",
        params=params,
        cities=tuple(cities),
        travel=TravelMatrices(cost=_freeze_matrix(cost), minutes=_freeze_matrix(minutes)),
    )
    issues = validate(inst)
    if issues:  # would be a generator bug, not user error
        raise InstanceError("generated instance failed validation",
                            issues=issues)
    return inst
