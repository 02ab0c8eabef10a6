"""Company-side reward optimization over the participation game.

The company payoff -company_weight * map_aoi(S(r)) - r * |S(r)| is piecewise
linear in r: the selected equilibrium S(r) is a step function that changes
only where some vehicle's marginal cost crosses r, and with a fixed set the
payoff strictly falls as r rises. The optimum is therefore attained at the
left endpoint of one of the pieces, or at the opt-out baseline (no program,
empty set, reported with r = 0).

optimal_reward_sweep walks those left endpoints exactly, descending. With S
the current surviving set, r_S = max over S of m_i(S) is the cheapest reward
keeping all of S, and it is the left endpoint of S's piece. Shrinking then
removes every member with m_i(S) >= r_S and cascades (removals raise the
survivors' marginal costs) until the survivors all have m_i < r_S; their
next breakpoint is strictly lower, so the sweep visits each piece once and
terminates after at most n candidates. The cascade mirrors lowering r just
below r_S without any epsilon arithmetic.

That argument needs the largest-equilibrium map; under smallest selection
the solver falls back to the grid silently. optimal_reward_grid is also the
independent oracle: it scans {r_lo, r_lo+step, ...} plus both exact bounds,
keeps the first grid point of each distinct equilibrium set, and applies the
same tie-breaking (higher payoff, then smaller r, smaller set, lexicographic
member ids).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .aoi import ScenarioIndex, scenario_index
from .equilibrium import _largest_mask, _nash_mask
from .scenario import SMALLEST, Scenario, ValidationError

_GRID_CHUNK = 2048
DEFAULT_GRID_STEP = 1e-4


@dataclass(frozen=True)
class CandidateRecord:
    reward: float
    members: tuple[str, ...]
    company_payoff: float
    certified: bool
    baseline: bool = False

    def to_document(self) -> dict[str, Any]:
        return {
            "reward": float(self.reward),
            "members": list(self.members),
            "company_payoff": float(self.company_payoff),
            "certified": bool(self.certified),
            "baseline": bool(self.baseline),
        }


@dataclass(frozen=True)
class StackelbergSolution:
    r_star: float
    set_star: tuple[str, ...]
    company_payoff: float
    method: str
    reward_lo: float
    reward_hi: float
    candidates: tuple[CandidateRecord, ...]

    def to_document(self) -> dict[str, Any]:
        return {
            "r_star": float(self.r_star),
            "set_star": list(self.set_star),
            "company_payoff": float(self.company_payoff),
            "method": self.method,
            "bounds": {"r_lo": float(self.reward_lo), "r_hi": float(self.reward_hi)},
            "candidates": [c.to_document() for c in self.candidates],
        }


def reward_bounds(s: Scenario) -> tuple[float, float]:
    """Search interval for the reward.

    At r_hi = max cost even a vehicle on an otherwise dead map is willing (its
    marginal cost never exceeds its cost), so the full fleet is sustainable.
    Below r_lo = min(cost - value) nobody joins even at perfect freshness,
    since usage utility never exceeds value.
    """
    idx = scenario_index(s)
    if idx.n_vehicles == 0:
        raise ValidationError("scenario has no vehicles")
    return float(np.min(idx.cost - idx.value)), float(np.max(idx.cost))


def _baseline_record(idx: ScenarioIndex) -> CandidateRecord:
    """Opt-out option: no program, nobody paid, every segment at the cap.

    The empty set need not be an equilibrium at r = 0 (a vehicle whose lone
    value covers its cost would join unpaid), so this record is exempt from
    the certification invariant and flagged accordingly.
    """
    empty = np.zeros(idx.n_vehicles, dtype=bool)
    return CandidateRecord(
        reward=0.0,
        members=(),
        company_payoff=idx.company_payoff(empty, 0.0),
        certified=_nash_mask(idx, empty, 0.0),
        baseline=True,
    )


def _best(candidates: list[CandidateRecord]) -> CandidateRecord:
    return min(
        candidates,
        key=lambda c: (-c.company_payoff, c.reward, len(c.members), c.members),
    )


def _solution(
    idx: ScenarioIndex,
    candidates: list[CandidateRecord],
    method: str,
    bounds: tuple[float, float],
) -> StackelbergSolution:
    best = _best(candidates)
    return StackelbergSolution(
        r_star=best.reward,
        set_star=best.members,
        company_payoff=best.company_payoff,
        method=method,
        reward_lo=bounds[0],
        reward_hi=bounds[1],
        candidates=tuple(candidates),
    )


def optimal_reward_sweep(s: Scenario) -> StackelbergSolution:
    """Exact optimum via the descending breakpoint sweep."""
    if s.equilibrium_selection == SMALLEST:
        return optimal_reward_grid(s, DEFAULT_GRID_STEP)
    idx = scenario_index(s)
    bounds = reward_bounds(s)

    candidates: list[CandidateRecord] = []
    mask = np.ones(idx.n_vehicles, dtype=bool)
    while mask.any():
        m = idx.marginal_costs(mask)
        r_s = float(np.max(np.where(mask, m, -np.inf)))
        eq_mask = _largest_mask(idx, r_s)
        candidates.append(
            CandidateRecord(
                reward=r_s,
                members=tuple(sorted(idx.members(eq_mask))),
                company_payoff=idx.company_payoff(eq_mask, r_s),
                certified=_nash_mask(idx, eq_mask, r_s),
            )
        )
        # lower r just below r_s: drop everyone no longer covered, cascading
        while True:
            drop = mask & (idx.marginal_costs(mask) >= r_s)
            if not drop.any():
                break
            mask &= ~drop
    candidates.append(_baseline_record(idx))
    return _solution(idx, candidates, "sweep", bounds)


def _selection_masks_batch(idx: ScenarioIndex, rewards: np.ndarray, selection: str) -> np.ndarray:
    """Configured equilibrium mask for each reward in a batch, [R, N]."""
    rows = rewards.shape[0]
    if selection == SMALLEST:
        masks = np.zeros((rows, idx.n_vehicles), dtype=bool)
    else:
        masks = np.ones((rows, idx.n_vehicles), dtype=bool)
    while True:
        willing = idx.marginal_costs_batch(masks) <= rewards[:, None]
        new = masks & willing if selection != SMALLEST else masks | willing
        if np.array_equal(new, masks):
            return masks
        masks = new


def optimal_reward_grid(s: Scenario, step: float = DEFAULT_GRID_STEP) -> StackelbergSolution:
    """Grid-search oracle over {r_lo, r_lo+step, ...} plus both exact bounds.

    The candidate trace keeps one record per distinct equilibrium set (the
    first grid point where it appears), so it lists the same piece left
    endpoints the sweep targets, up to discretization.
    """
    if not step > 0.0:
        raise ValidationError("step must be > 0")
    idx = scenario_index(s)
    bounds = reward_bounds(s)
    r_lo, r_hi = bounds
    count = max(0, int(np.ceil((r_hi - r_lo) / step)))
    points = r_lo + step * np.arange(count, dtype=np.float64)
    points = points[points < r_hi]
    points = np.append(points, r_hi)

    selection = s.equilibrium_selection
    candidates: list[CandidateRecord] = []
    prev_row: np.ndarray | None = None
    for base in range(0, points.shape[0], _GRID_CHUNK):
        chunk = points[base : base + _GRID_CHUNK]
        masks = _selection_masks_batch(idx, chunk, selection)
        for k in range(chunk.shape[0]):
            row = masks[k]
            if prev_row is not None and np.array_equal(row, prev_row):
                continue
            prev_row = row.copy()
            r = float(chunk[k])
            candidates.append(
                CandidateRecord(
                    reward=r,
                    members=tuple(sorted(idx.members(row))),
                    company_payoff=idx.company_payoff(row, r),
                    certified=_nash_mask(idx, row, r),
                )
            )
    candidates.append(_baseline_record(idx))
    return _solution(idx, candidates, "grid", bounds)
