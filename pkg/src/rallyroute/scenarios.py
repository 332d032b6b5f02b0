"""Scenario grid: pure parameter presets, no special-cased search code.

Every solver component reads its knobs from a ScenarioConfig. The four
presets differ only in configuration:

  base        full reward structure, travel cost on, kappa returns on,
              class caps 3/2/1
  full_1meet  one meeting per city over the whole horizon (caps 1/1/1,
              repeat rewards structurally absent)
  rew_only    reward collection only: travel cost weight 0 and no periodic
              capital return
  alt_1depot  every day is a closed tour anchored at the capital
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from .model import CampaignParams

SCENARIO_IDS = ("base", "full_1meet", "rew_only", "alt_1depot")


@dataclass(frozen=True)
class ScenarioConfig:
    id: str
    cap_big: int
    cap_midsize: int
    cap_small: int
    travel_cost_weight: float
    kappa_enabled: bool
    force_closed_at_capital: bool
    repeat_rewards_enabled: bool
    reward_direction: str
    require_daily_meeting: bool
    end_at_capital: bool

    def cap_for(self, size_class: str) -> int:
        if size_class == "big":
            return self.cap_big
        if size_class == "midsize":
            return self.cap_midsize
        return self.cap_small


def apply_scenario(params: CampaignParams, scenario_id: str = "base") -> ScenarioConfig:
    """Build the configuration for one of the named scenarios."""
    if scenario_id not in SCENARIO_IDS:
        raise ValueError(f"unknown scenario {scenario_id!r}, expected one of {SCENARIO_IDS}")
    caps = (3, 2, 1)
    travel_cost_weight = 1.0
    kappa_enabled = True
    force_closed = False
    repeats = True
    if scenario_id == "full_1meet":
        caps = (1, 1, 1)
        repeats = False
    elif scenario_id == "rew_only":
        travel_cost_weight = 0.0
        kappa_enabled = False
    elif scenario_id == "alt_1depot":
        force_closed = True
    return ScenarioConfig(
        id=scenario_id,
        cap_big=caps[0],
        cap_midsize=caps[1],
        cap_small=caps[2],
        travel_cost_weight=travel_cost_weight,
        kappa_enabled=kappa_enabled,
        force_closed_at_capital=force_closed,
        repeat_rewards_enabled=repeats,
        reward_direction=params.reward_direction,
        require_daily_meeting=params.require_daily_meeting,
        end_at_capital=params.end_at_capital,
    )
