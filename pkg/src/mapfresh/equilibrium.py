"""Participation equilibria under a fixed uniform reward.

A set S is a Nash equilibrium exactly when S equals its best-response set
B(S) = {i : m_i(S with i joined) <= r}: every member is willing to stay
(m_i <= r, indifference keeps them in) and every outsider strictly prefers
to stay out (m_i > r). Participation helps everyone (more participants mean
fresher segments, weakly lower marginal costs), so B is monotone and the
equilibria form a lattice with unique largest and smallest elements:

  largest:  start from the full fleet and repeatedly drop everyone whose
            marginal cost exceeds r, until the set is stable;
  smallest: start from the empty set and repeatedly admit everyone whose
            marginal cost is already covered, until stable.

Both loops remove or admit whole batches per round, so they finish in at
most n rounds. enumerate_equilibria checks all 2^n sets (capped at n = 20)
and is the brute-force oracle for the two fixed points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable

import numpy as np

from .aoi import ScenarioIndex, scenario_index
from .payoff import PayoffBreakdown
from .scenario import LARGEST, SMALLEST, Scenario, ValidationError

ENUMERATION_LIMIT = 20
_CHUNK = 2048


class CapacityError(RuntimeError):
    """The request exceeds a documented size limit."""


@dataclass(frozen=True)
class EquilibriumOutcome:
    reward: float
    members: frozenset[str]
    per_vehicle: dict[str, PayoffBreakdown]
    certified: bool

    def to_document(self) -> dict[str, Any]:
        return {
            "reward": float(self.reward),
            "members": sorted(self.members),
            "per_vehicle": {k: v.to_document() for k, v in self.per_vehicle.items()},
            "certified": bool(self.certified),
        }


def _nash_mask(idx: ScenarioIndex, mask: np.ndarray, reward: float) -> bool:
    return bool(np.all((idx.marginal_costs(mask) <= reward) == mask))


def _largest_mask(idx: ScenarioIndex, reward: float) -> np.ndarray:
    mask = np.ones(idx.n_vehicles, dtype=bool)
    while True:
        stay = idx.marginal_costs(mask) <= reward
        new = mask & stay
        if np.array_equal(new, mask):
            return mask
        mask = new


def _smallest_mask(idx: ScenarioIndex, reward: float) -> np.ndarray:
    mask = np.zeros(idx.n_vehicles, dtype=bool)
    while True:
        willing = idx.marginal_costs(mask) <= reward
        new = mask | willing
        if np.array_equal(new, mask):
            return mask
        mask = new


def _selected_mask(idx: ScenarioIndex, reward: float, selection: str) -> np.ndarray:
    if selection == LARGEST:
        return _largest_mask(idx, reward)
    if selection == SMALLEST:
        return _smallest_mask(idx, reward)
    raise ValidationError(f"unknown equilibrium selection {selection!r}")


def _outcome(idx: ScenarioIndex, mask: np.ndarray, reward: float) -> EquilibriumOutcome:
    utilities = idx.usage_utilities(mask)
    per_vehicle = {}
    for pos, vid in enumerate(idx.vehicle_ids):
        if mask[pos]:
            u = float(utilities[pos])
            c = float(idx.cost[pos])
            per_vehicle[vid] = PayoffBreakdown(u, c, float(reward), u - c + float(reward))
        else:
            per_vehicle[vid] = PayoffBreakdown(0.0, 0.0, 0.0, 0.0)
    return EquilibriumOutcome(
        reward=float(reward),
        members=idx.members(mask),
        per_vehicle=per_vehicle,
        certified=_nash_mask(idx, mask, reward),
    )


def largest_equilibrium(s: Scenario, reward: float) -> EquilibriumOutcome:
    """Maximal Nash set: batched removal from the full fleet."""
    idx = scenario_index(s)
    if idx.n_vehicles == 0:
        raise ValidationError("scenario has no vehicles")
    return _outcome(idx, _largest_mask(idx, reward), reward)


def smallest_equilibrium(s: Scenario, reward: float) -> EquilibriumOutcome:
    """Minimal Nash set: batched accretion from the empty set."""
    idx = scenario_index(s)
    if idx.n_vehicles == 0:
        raise ValidationError("scenario has no vehicles")
    return _outcome(idx, _smallest_mask(idx, reward), reward)


def selected_equilibrium(s: Scenario, reward: float) -> EquilibriumOutcome:
    """The extremal equilibrium named by the scenario's selection rule."""
    idx = scenario_index(s)
    if idx.n_vehicles == 0:
        raise ValidationError("scenario has no vehicles")
    return _outcome(idx, _selected_mask(idx, reward, s.equilibrium_selection), reward)


def is_nash(s: Scenario, participants: Iterable[str], reward: float) -> bool:
    idx = scenario_index(s)
    return _nash_mask(idx, idx.member_mask(participants), reward)


def enumerate_equilibria(s: Scenario, reward: float) -> list[frozenset[str]]:
    """All Nash sets, ordered by cardinality then sorted member ids.

    Scans every subset of the fleet, vectorized in chunks, so fleets are
    capped at ENUMERATION_LIMIT vehicles.
    """
    idx = scenario_index(s)
    n = idx.n_vehicles
    if n == 0:
        raise ValidationError("scenario has no vehicles")
    if n > ENUMERATION_LIMIT:
        raise CapacityError(
            f"enumeration supports at most {ENUMERATION_LIMIT} vehicles, got {n}"
        )
    bits = 1 << np.arange(n, dtype=np.int64)
    found: list[frozenset[str]] = []
    for base in range(0, 1 << n, _CHUNK):
        codes = np.arange(base, min(base + _CHUNK, 1 << n), dtype=np.int64)
        masks = (codes[:, None] & bits[None, :]) != 0
        m = idx.marginal_costs_batch(masks)
        ok = np.all((m <= reward) == masks, axis=1)
        for row in np.flatnonzero(ok):
            found.append(idx.members(masks[row]))
    found.sort(key=lambda s_: (len(s_), tuple(sorted(s_))))
    return found
