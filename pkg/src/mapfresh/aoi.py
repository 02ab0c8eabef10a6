"""Age-of-information model: closed form and Monte Carlo.

Each participating vehicle refreshes every distinct segment on its route
once per trip, and trips arrive as a Poisson process with the vehicle's
trip_rate. Segment updates are therefore Poisson with rate Lambda equal to
the sum of participant trip rates over vehicles that visit the segment
(visiting a segment several times within one route does not multiply its
rate). By renewal theory the long-run time-averaged age of a Poisson-updated
segment is 1/Lambda; the closed-form model caps it at aoi_cap, so

    expected_segment_aoi = aoi_cap            if Lambda == 0
                           min(1/Lambda, aoi_cap) otherwise.

Trajectory age is the dwell-weighted mean of segment ages along a route, and
map age is the importance-weighted mean over all segments. simulate_aoi runs
the matching discrete-event simulation (uncapped ages) so the 1/Lambda law
can be checked empirically.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Iterable

import numpy as np

from .rng import substream
from .scenario import (
    HYPERBOLIC,
    LINEAR,
    Scenario,
    ValidationError,
    validate_scenario,
)

__all__ = [
    "ScenarioIndex",
    "scenario_index",
    "segment_update_rate",
    "expected_segment_aoi",
    "trajectory_aoi",
    "map_aoi",
    "AoiReport",
    "aoi_report",
    "SimResult",
    "simulate_aoi",
]


def expected_segment_aoi(total_rate: float, aoi_cap: float) -> float:
    """Closed-form expected age of one segment given its update rate."""
    if total_rate <= 0.0:
        return aoi_cap
    return min(1.0 / total_rate, aoi_cap)


class ScenarioIndex:
    """Vectorized view of a validated scenario.

    Vehicles and segments get dense integer indices (document order). The
    route structure is flattened into parallel "pair" arrays over distinct
    (vehicle, segment) incidences, sorted by vehicle, so per-vehicle
    reductions are contiguous reduceat slices.
    """

    def __init__(self, s: Scenario):
        validate_scenario(s)
        self.scenario = s
        self.segment_ids = tuple(seg.id for seg in s.road_map.segments)
        self.vehicle_ids = tuple(v.id for v in s.vehicles)
        self.segment_pos = {sid: k for k, sid in enumerate(self.segment_ids)}
        self.vehicle_pos = {vid: k for k, vid in enumerate(self.vehicle_ids)}
        self.n_vehicles = len(self.vehicle_ids)
        self.n_segments = len(self.segment_ids)
        self.aoi_cap = float(s.aoi_cap)
        self.company_weight = float(s.company_weight)
        self.utility = s.utility

        imp = np.array([seg.importance for seg in s.road_map.segments], dtype=np.float64)
        self.importance = imp
        self.importance_share = imp / imp.sum()
        self.cost = np.array([v.cost for v in s.vehicles], dtype=np.float64)
        self.value = np.array([v.value for v in s.vehicles], dtype=np.float64)
        self.rate = np.array([v.trip_rate for v in s.vehicles], dtype=np.float64)

        # incidence[i, j] = 1 when vehicle i visits segment j at least once
        incidence = np.zeros((self.n_vehicles, self.n_segments), dtype=np.float64)
        pair_vehicle: list[int] = []
        pair_segment: list[int] = []
        pair_share: list[float] = []
        indptr = [0]
        visited: list[np.ndarray] = []
        for i, v in enumerate(s.vehicles):
            dwell: dict[int, float] = {}
            for visit in v.trajectory:
                j = self.segment_pos[visit.segment]
                dwell[j] = dwell.get(j, 0.0) + visit.dwell
            total = sum(dwell.values())
            segs = sorted(dwell)
            for j in segs:
                incidence[i, j] = 1.0
                pair_vehicle.append(i)
                pair_segment.append(j)
                pair_share.append(dwell[j] / total)
            indptr.append(len(pair_vehicle))
            visited.append(np.array(segs, dtype=np.int64))
        self.incidence = incidence
        self.pair_vehicle = np.array(pair_vehicle, dtype=np.int64)
        self.pair_segment = np.array(pair_segment, dtype=np.int64)
        self.pair_share = np.array(pair_share, dtype=np.float64)
        self.pair_indptr = np.array(indptr, dtype=np.int64)
        self.visited = visited

    # -- participant handling ------------------------------------------------

    def member_mask(self, participants: Iterable[str]) -> np.ndarray:
        mask = np.zeros(self.n_vehicles, dtype=bool)
        for vid in participants:
            pos = self.vehicle_pos.get(vid)
            if pos is None:
                raise ValidationError(f"unknown vehicle id '{vid}'")
            mask[pos] = True
        return mask

    def members(self, mask: np.ndarray) -> frozenset[str]:
        return frozenset(self.vehicle_ids[i] for i in np.flatnonzero(mask))

    # -- closed-form ages ----------------------------------------------------

    def update_rates(self, mask: np.ndarray) -> np.ndarray:
        """Per-segment total update rate under participant set `mask`."""
        lam = np.where(mask, self.rate, 0.0)
        return np.bincount(
            self.pair_segment, weights=lam[self.pair_vehicle], minlength=self.n_segments
        )

    def segment_ages(self, rates: np.ndarray) -> np.ndarray:
        inv = np.where(rates > 0.0, 1.0 / np.maximum(rates, np.finfo(float).tiny), np.inf)
        return np.minimum(inv, self.aoi_cap)

    def trajectory_ages(self, mask: np.ndarray) -> np.ndarray:
        """Dwell-weighted mean segment age along each vehicle's route."""
        ages = self.segment_ages(self.update_rates(mask))
        weighted = self.pair_share * ages[self.pair_segment]
        return np.add.reduceat(weighted, self.pair_indptr[:-1])

    def freshness(self, ages: np.ndarray) -> np.ndarray:
        if self.utility.family == LINEAR:
            return np.maximum(0.0, 1.0 - ages / self.aoi_cap)
        a0 = self.utility.a0
        return a0 / (a0 + ages)

    def map_aoi(self, mask: np.ndarray) -> float:
        ages = self.segment_ages(self.update_rates(mask))
        return float(self.importance_share @ ages)

    def company_payoff(self, mask: np.ndarray, reward: float) -> float:
        return float(-self.company_weight * self.map_aoi(mask) - reward * int(mask.sum()))

    def usage_utilities(self, mask: np.ndarray) -> np.ndarray:
        """U_i for every vehicle, evaluated at the set exactly as given."""
        return self.value * self.freshness(self.trajectory_ages(mask))

    def marginal_costs(self, mask: np.ndarray) -> np.ndarray:
        """m_i = c_i - U_i(S with i joined) for every vehicle at once.

        Joining is idempotent, so for members this equals c_i - U_i(S); for
        non-members the vehicle's own rate is added to its route segments
        before ages are read.
        """
        rates = self.update_rates(mask)
        adjusted = rates[self.pair_segment] + np.where(
            mask[self.pair_vehicle], 0.0, self.rate[self.pair_vehicle]
        )
        ages = np.minimum(1.0 / adjusted, self.aoi_cap)
        traj = np.add.reduceat(self.pair_share * ages, self.pair_indptr[:-1])
        return self.cost - self.value * self.freshness(traj)

    def marginal_costs_batch(self, masks: np.ndarray) -> np.ndarray:
        """marginal_costs for a [R, N] boolean batch; returns [R, N]."""
        lam = np.where(masks, self.rate, 0.0)
        rates = lam @ self.incidence
        adjusted = rates[:, self.pair_segment] + np.where(
            masks[:, self.pair_vehicle], 0.0, self.rate[self.pair_vehicle]
        )
        ages = np.minimum(1.0 / adjusted, self.aoi_cap)
        traj = np.add.reduceat(self.pair_share * ages, self.pair_indptr[:-1], axis=1)
        return self.cost - self.value * self.freshness(traj)


@lru_cache(maxsize=256)
def scenario_index(s: Scenario) -> ScenarioIndex:
    return ScenarioIndex(s)


# ---------------------------------------------------------------------------
# Public closed-form operations (string ids in, floats out)

def segment_update_rate(s: Scenario, segment_id: str, participants: Iterable[str]) -> float:
    idx = scenario_index(s)
    if segment_id not in idx.segment_pos:
        raise ValidationError(f"unknown segment id '{segment_id}'")
    rates = idx.update_rates(idx.member_mask(participants))
    return float(rates[idx.segment_pos[segment_id]])


def trajectory_aoi(s: Scenario, vehicle_id: str, participants: Iterable[str]) -> float:
    idx = scenario_index(s)
    pos = idx.vehicle_pos.get(vehicle_id)
    if pos is None:
        raise ValidationError(f"unknown vehicle id '{vehicle_id}'")
    return float(idx.trajectory_ages(idx.member_mask(participants))[pos])


def map_aoi(s: Scenario, participants: Iterable[str]) -> float:
    idx = scenario_index(s)
    return idx.map_aoi(idx.member_mask(participants))


@dataclass(frozen=True)
class AoiReport:
    per_segment: dict[str, float]
    map_aoi: float
    per_vehicle_trajectory_aoi: dict[str, float]

    def to_document(self) -> dict[str, Any]:
        return {
            "per_segment": {k: float(v) for k, v in self.per_segment.items()},
            "map_aoi": float(self.map_aoi),
            "per_vehicle_trajectory_aoi": {
                k: float(v) for k, v in self.per_vehicle_trajectory_aoi.items()
            },
        }


def aoi_report(s: Scenario, participants: Iterable[str]) -> AoiReport:
    idx = scenario_index(s)
    mask = idx.member_mask(participants)
    seg_ages = idx.segment_ages(idx.update_rates(mask))
    traj_ages = idx.trajectory_ages(mask)
    return AoiReport(
        per_segment={sid: float(a) for sid, a in zip(idx.segment_ids, seg_ages)},
        map_aoi=float(idx.importance_share @ seg_ages),
        per_vehicle_trajectory_aoi={vid: float(a) for vid, a in zip(idx.vehicle_ids, traj_ages)},
    )


# ---------------------------------------------------------------------------
# Monte Carlo simulation

@dataclass(frozen=True)
class SimResult:
    per_segment_empirical_age: dict[str, float]
    horizon: float
    warmup: float
    seed: int

    def to_document(self) -> dict[str, Any]:
        return {
            "per_segment_empirical_age": {
                k: float(v) for k, v in self.per_segment_empirical_age.items()
            },
            "horizon": float(self.horizon),
            "warmup": float(self.warmup),
            "seed": int(self.seed),
        }


def _mean_age_over_window(resets: np.ndarray, start: float, horizon: float) -> float:
    """Time-averaged age over [start, horizon] for reset epochs in [0, horizon].

    Age grows linearly from each reset (and from time 0). Between consecutive
    boundaries the age is a line, so each piece integrates in closed form.
    """
    resets = resets[resets < horizon]
    anchors = np.concatenate(([0.0], resets))
    ends = np.concatenate((anchors[1:], [horizon]))
    keep = ends > start
    anchors, ends = anchors[keep], ends[keep]
    lo = np.maximum(anchors, start)
    area = ((ends - anchors) ** 2 - (lo - anchors) ** 2) / 2.0
    return float(area.sum() / (horizon - start))


def simulate_aoi(
    s: Scenario,
    participants: Iterable[str],
    horizon: float,
    seed: int,
    warmup_fraction: float = 0.1,
) -> SimResult:
    """Discrete-event estimate of per-segment time-averaged age (uncapped).

    Each participant's trips are a Poisson process built from exponential
    gaps on its own child stream (substream(seed, vehicle position)), and a
    trip resets every distinct segment on the vehicle's route. Ages start at
    0 at time 0 and the average excludes the warmup prefix.
    """
    idx = scenario_index(s)
    if horizon <= 0:
        raise ValidationError("horizon must be > 0")
    if not 0.0 <= warmup_fraction < 1.0:
        raise ValidationError("warmup_fraction must be in [0, 1)")
    mask = idx.member_mask(participants)
    start = warmup_fraction * horizon

    per_segment_resets: list[list[np.ndarray]] = [[] for _ in range(idx.n_segments)]
    for i in np.flatnonzero(mask):
        stream = substream(seed, int(i))
        rate = float(idx.rate[i])
        # over-draw in blocks until the partial sums pass the horizon
        gaps: list[float] = []
        total = 0.0
        while total < horizon:
            block = [stream.next_exponential(rate) for _ in range(256)]
            gaps.extend(block)
            total += sum(block)
        epochs = np.cumsum(np.array(gaps))
        epochs = epochs[epochs <= horizon]
        for j in idx.visited[i]:
            per_segment_resets[j].append(epochs)

    per_segment: dict[str, float] = {}
    for j, sid in enumerate(idx.segment_ids):
        if per_segment_resets[j]:
            resets = np.sort(np.concatenate(per_segment_resets[j]))
        else:
            resets = np.empty(0, dtype=np.float64)
        per_segment[sid] = _mean_age_over_window(resets, start, horizon)
    return SimResult(
        per_segment_empirical_age=per_segment,
        horizon=float(horizon),
        warmup=float(start),
        seed=int(seed),
    )
