"""Per-player payoffs for a fixed participant set and uniform reward.

A participating vehicle earns its usage utility minus sensing cost plus the
reward; a vehicle outside the set earns nothing and pays nothing. The
marginal cost m_i is the reward that makes vehicle i exactly indifferent
about joining: m_i(S) = cost_i - U_i(S with i joined). The company pays the
reward to every participant and internalizes map age at company_weight.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable

from .aoi import scenario_index
from .scenario import Scenario, ValidationError


@dataclass(frozen=True)
class PayoffBreakdown:
    usage_utility: float
    cost: float
    reward: float
    total: float

    def to_document(self) -> dict[str, Any]:
        return {
            "usage_utility": float(self.usage_utility),
            "cost": float(self.cost),
            "reward": float(self.reward),
            "total": float(self.total),
        }


def _vehicle_pos(s: Scenario, vehicle_id: str) -> int:
    idx = scenario_index(s)
    pos = idx.vehicle_pos.get(vehicle_id)
    if pos is None:
        raise ValidationError(f"unknown vehicle id '{vehicle_id}'")
    return pos


def usage_utility(s: Scenario, participants: Iterable[str], vehicle_id: str) -> float:
    """U_i = value_i * freshness(trajectory age), at the set exactly as given."""
    idx = scenario_index(s)
    pos = _vehicle_pos(s, vehicle_id)
    return float(idx.usage_utilities(idx.member_mask(participants))[pos])


def marginal_cost(s: Scenario, participants: Iterable[str], vehicle_id: str) -> float:
    idx = scenario_index(s)
    pos = _vehicle_pos(s, vehicle_id)
    return float(idx.marginal_costs(idx.member_mask(participants))[pos])


def vehicle_payoff(
    s: Scenario, participants: Iterable[str], vehicle_id: str, reward: float
) -> PayoffBreakdown:
    idx = scenario_index(s)
    pos = _vehicle_pos(s, vehicle_id)
    mask = idx.member_mask(participants)
    if not mask[pos]:
        return PayoffBreakdown(0.0, 0.0, 0.0, 0.0)
    utility = float(idx.usage_utilities(mask)[pos])
    cost = float(idx.cost[pos])
    return PayoffBreakdown(utility, cost, float(reward), utility - cost + float(reward))


def company_payoff(s: Scenario, participants: Iterable[str], reward: float) -> float:
    idx = scenario_index(s)
    return idx.company_payoff(idx.member_mask(participants), float(reward))
