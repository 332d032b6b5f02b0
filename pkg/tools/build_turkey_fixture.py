#!/usr/bin/env python3
"""Regenerate the bundled 40-city, 10-day Turkey fixture.

City characteristics (population, base reward, meeting duration,
criticality) are the published 2015 campaign data, stored verbatim. The
original travel matrices are not distributed with the package, so this
script synthesises deterministic stand-ins from approximate city
coordinates: great-circle distance, road legs at 80 km/h with a 1.25
winding factor, and a flight option (120 min overhead, 700 km/h) on legs
over 400 km. Costs are proportional to distance with a flight premium.

The reference 10-day tour plan is written alongside the instance and the
script refuses to emit anything if that plan is infeasible under the
synthetic matrices, so the two files can never drift apart.

Usage: python tools/build_turkey_fixture.py [--out-dir src/rallyroute/data]
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from rallyroute.model import instance_from_dict  # noqa: E402
from rallyroute.rewards import RewardModel, net_benefit  # noqa: E402
from rallyroute.schedule import DayTour, Schedule, check_feasibility, encode  # noqa: E402
from rallyroute.scenarios import apply_scenario  # noqa: E402

# name, population, base reward (null = derive), duration minutes,
# criticality, parent name (towns), latitude, longitude
CITY_ROWS = [
    ("İstanbul", 14657434, None, 120, "pos_neg_critical", None, 41.01, 28.96),
    ("Ankara", 5270575, None, 120, "pos_neg_critical", None, 39.93, 32.86),
    ("İzmir", 4168415, None, 120, "pos_neg_critical", None, 38.42, 27.14),
    ("Bursa", 2842547, None, 90, "pos_neg_critical", None, 40.19, 29.06),
    ("Hatay", 1533507, None, 90, "pos_neg_critical", None, 36.20, 36.16),
    ("İskenderun", 247220, None, 60, "pos_neg_critical", "Hatay", 36.58, 36.17),
    ("Antalya", 2288456, None, 90, "pos_neg_critical", None, 36.90, 30.70),
    ("Alanya", 134396, None, 60, "pos_neg_critical", "Antalya", 36.54, 32.00),
    ("Adana", 2183167, None, 90, "positive_critical", None, 37.00, 35.32),
    ("Kahramanmaraş", 1096610, None, 90, "positive_critical", None, 37.58, 36.93),
    ("Gaziantep", 1931836, None, 90, "negative_critical", None, 37.07, 37.38),
    ("Denizli", 993442, None, 60, "positive_critical", None, 37.78, 29.09),
    ("Aydın", 1053506, None, 90, "positive_critical", None, 37.85, 27.84),
    ("Kocaeli", 1780055, None, 90, "negative_critical", None, 40.77, 29.92),
    ("Gebze", 357743, None, 60, "negative_critical", "Kocaeli", 40.80, 29.43),
    ("Muğla", 908877, None, 60, "positive_critical", None, 37.22, 28.36),
    # Çorlu's province is not one of the 40 cities, hence the pinned reward
    ("Çorlu", 273362, 640, 60, "positive_critical", None, 41.16, 27.80),
    ("Mersin", 1745221, None, 90, "negative_critical", None, 36.80, 34.63),
    ("Ordu", 728949, None, 90, "positive_critical", None, 40.98, 37.88),
    # Manisa's published reward is one criticality step below its listed factor
    ("Manisa", 1380366, 570, 60, "positive_critical", None, 38.61, 27.43),
    ("Balıkesir", 1186688, None, 90, "negative_critical", None, 39.65, 27.89),
    ("Kastamonu", 372633, None, 60, "positive_critical", None, 41.38, 33.78),
    ("Edirne", 402537, None, 60, "positive_critical", None, 41.68, 26.56),
    ("Kars", 292660, None, 60, "positive_critical", None, 40.60, 43.10),
    ("Eskişehir", 826716, None, 60, "negative_critical", None, 39.78, 30.52),
    ("Erzincan", 222918, None, 60, "positive_critical", None, 39.75, 39.49),
    ("Afyon", 709015, None, 60, "negative_critical", None, 38.76, 30.54),
    # Adıyaman's published reward is one criticality step above its listed factor
    ("Adıyaman", 602774, 420, 60, "noncritical", None, 37.76, 38.28),
    ("Diyarbakır", 1654196, None, 90, "noncritical", None, 37.91, 40.24),
    ("Çanakkale", 513341, None, 60, "negative_critical", None, 40.15, 26.41),
    ("İsparta", 421766, None, 60, "negative_critical", None, 37.76, 30.56),
    ("Giresun", 426686, None, 60, "negative_critical", None, 40.91, 38.39),
    ("Kayseri", 1341056, None, 90, "noncritical", None, 38.73, 35.49),
    ("Konya", 2130544, None, 90, "noncritical", None, 37.87, 32.49),
    ("Amasya", 322167, None, 60, "negative_critical", None, 40.65, 35.83),
    ("Bolu", 291095, None, 60, "negative_critical", None, 40.74, 31.61),
    ("Niğde", 346114, None, 60, "negative_critical", None, 37.97, 34.68),
    ("Bartın", 190708, None, 60, "negative_critical", None, 41.64, 32.34),
    ("Malatya", 772904, None, 60, "noncritical", None, 38.35, 38.31),
    ("Kırşehir", 225562, None, 60, "noncritical", None, 39.15, 34.16),
]

# the published 10-day plan: (route city names, meeting city names)
TOUR_ROWS = [
    (["Ankara", "Hatay", "İskenderun"], ["Ankara", "Hatay", "İskenderun"]),
    (["İskenderun", "Adana", "İstanbul"], ["Adana", "İstanbul"]),
    (["İstanbul", "Kocaeli", "Bursa", "Balıkesir"], ["Kocaeli", "Bursa", "Balıkesir"]),
    (["Balıkesir", "Manisa", "İzmir", "Aydın", "Muğla"], ["Manisa", "İzmir", "Aydın"]),
    (["Muğla", "Denizli", "Antalya", "İsparta"], ["Muğla", "Denizli", "Antalya"]),
    (["İsparta", "Afyon", "Eskişehir", "Ankara"], ["İsparta", "Afyon", "Eskişehir"]),
    (["Ankara", "Gebze", "İstanbul"], ["Ankara", "Gebze"]),
    (["İstanbul", "Gaziantep", "Kahramanmaraş"], ["İstanbul", "Gaziantep", "Kahramanmaraş"]),
    (["Kahramanmaraş", "Hatay", "Adana", "Mersin"], ["Hatay", "Adana"]),
    (["Mersin"], ["Mersin"]),
]

ROAD_KMH = 80.0
ROAD_WINDING = 1.25
FLIGHT_KMH = 700.0
FLIGHT_OVERHEAD_MIN = 120.0
FLIGHT_THRESHOLD_KM = 400.0
ROAD_COST_PER_KM = 1.25
FLIGHT_COST_BASE = 120.0
FLIGHT_COST_PER_KM = 0.55

EARTH_RADIUS_KM = 6371.0


def haversine_km(a, b):
    lat1, lon1, lat2, lon2 = map(math.radians, (a[0], a[1], b[0], b[1]))
    h = (math.sin((lat2 - lat1) / 2) ** 2
         + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2)
    return 2 * EARTH_RADIUS_KM * math.asin(math.sqrt(h))


def leg(a, b):
    """(minutes, cost) of the fastest trip between two coordinate pairs."""
    km = haversine_km(a, b)
    road_min = km * ROAD_WINDING / ROAD_KMH * 60.0
    road_cost = km * ROAD_COST_PER_KM
    if km > FLIGHT_THRESHOLD_KM:
        air_min = FLIGHT_OVERHEAD_MIN + km / FLIGHT_KMH * 60.0
        if air_min < road_min:
            return round(air_min), round(FLIGHT_COST_BASE + km * FLIGHT_COST_PER_KM)
    return round(road_min), round(road_cost)


def build_document():
    names = [row[0] for row in CITY_ROWS]
    ids = {name: i + 1 for i, name in enumerate(names)}
    size_by_minutes = {120: "big", 90: "midsize", 60: "small"}

    cities = []
    for i, (name, pop, reward, minutes, crit, parent, _lat, _lon) in enumerate(CITY_ROWS):
        cities.append({
            "id": i + 1,
            "name": name,
            "population": pop,
            "criticality": crit,
            "size_class": size_by_minutes[minutes],
            "meeting_minutes": minutes,
            "parent_id": ids[parent] if parent else None,
            "base_reward": float(reward) if reward is not None else None,
        })

    n = len(CITY_ROWS)
    minutes = [[0] * (n + 1) for _ in range(n + 1)]
    cost = [[0] * (n + 1) for _ in range(n + 1)]
    for i, row_i in enumerate(CITY_ROWS):
        for j, row_j in enumerate(CITY_ROWS):
            if i == j:
                continue
            t, c = leg((row_i[6], row_i[7]), (row_j[6], row_j[7]))
            minutes[i + 1][j + 1] = t
            cost[i + 1][j + 1] = c

    doc = {
        "name": "pe1_40c_10d",
        "params": {
            "days": 10,
            "capital_id": ids["Ankara"],
            "max_tour_minutes": 840,
            "max_meetings_per_day": 4,
            "kappa": 5,
            "repeat_depreciation_K": 2.0,
            "cost_normalizer_Kbar": 1.0,
            "min_population": 78550,
            "reward_direction": "front_loaded",
            "require_daily_meeting": True,
            "end_at_capital": False,
        },
        "cities": cities,
        "travel_cost": cost,
        "travel_minutes": minutes,
    }
    tours = Schedule.of(
        DayTour.of([ids[name] for name in route], [ids[name] for name in meet])
        for route, meet in TOUR_ROWS
    )
    return doc, tours


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default=None,
                        help="where to write the fixture (default: the package data dir)")
    args = parser.parse_args(argv)
    out_dir = Path(args.out_dir) if args.out_dir else \
        Path(__file__).resolve().parents[1] / "src" / "rallyroute" / "data"
    out_dir.mkdir(parents=True, exist_ok=True)

    doc, tours = build_document()
    instance = instance_from_dict(doc)
    scenario = apply_scenario(instance.params, "base")
    violations = check_feasibility(tours, instance, scenario)
    if violations:
        for v in violations:
            print(f"  {v}", file=sys.stderr)
        raise SystemExit("reference tour plan is infeasible; fixture not written")
    objective = net_benefit(tours, RewardModel.for_scenario(instance, scenario))

    instance_path = out_dir / "pe1_40c_10d.json"
    instance_path.write_text(
        json.dumps(doc, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    tours_path = out_dir / "pe1_40c_10d_tours.json"
    tours_path.write_text(
        encode(tours, instance_name=instance.name, objective=objective,
               params_echo={"scenario": "base",
                            "repeat_depreciation_K": 2.0,
                            "cost_normalizer_Kbar": 1.0}),
        encoding="utf-8")
    print(f"wrote {instance_path}")
    print(f"wrote {tours_path} (objective {objective:.3f})")


if __name__ == "__main__":
    main()
