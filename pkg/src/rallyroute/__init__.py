"""Campaign tour planning: multi-day meeting schedules under travel limits.

The package models a campaign over a fixed horizon: every day the
candidate leaves the city they woke up in, visits cities, holds meetings
worth time-decaying rewards, and either returns to the capital or sleeps
where the day ended. Construction heuristics build feasible schedules,
a local-search layer improves them, and tiny instances can be solved to
proven optimality.
"""

from .model import (CampaignParams, City, Instance, InstanceError,
                    derive_base_reward, fill_base_rewards, generate_instance,
                    instance_from_dict, instance_to_dict, load_instance,
                    save_instance)
from .scenarios import SCENARIO_IDS, ScenarioConfig, apply_scenario
from .rewards import (MeetingLedger, RewardModel, chain_reward,
                      day_travel_cost, first_meeting_reward, net_benefit,
                      repeat_meeting_reward, reward_at)
from .schedule import (DayTour, Schedule, ScheduleFormatError, Violation,
                       ViolationKind, check_feasibility, decode,
                       decode_solution, encode, is_feasible, tour_type,
                       tour_duration_minutes)
from .construct import ConstructionError, ConstructorConfig, escc, shrc
from .search import (MoveCandidate, SearchConfig, SearchTrace,
                     granular_admissible, ms_ivnd, neighborhood, perturb, vnd)

__version__ = "0.1.0"

__all__ = [
    "CampaignParams", "City", "Instance", "InstanceError",
    "derive_base_reward", "fill_base_rewards", "generate_instance",
    "instance_from_dict", "instance_to_dict", "load_instance",
    "save_instance",
    "SCENARIO_IDS", "ScenarioConfig", "apply_scenario",
    "MeetingLedger", "RewardModel", "chain_reward", "day_travel_cost",
    "first_meeting_reward", "net_benefit", "repeat_meeting_reward",
    "reward_at",
    "DayTour", "Schedule", "ScheduleFormatError", "Violation",
    "ViolationKind", "check_feasibility", "decode", "decode_solution",
    "encode", "is_feasible", "tour_type", "tour_duration_minutes",
    "ConstructionError", "ConstructorConfig", "escc", "shrc",
    "MoveCandidate", "SearchConfig", "SearchTrace", "granular_admissible",
    "ms_ivnd", "neighborhood", "perturb", "vnd",
    "__version__",
]
