"""Scenario model: weighted road segments, a vehicle fleet, and generation.

A scenario is the full immutable input to every solver in this package. Its
JSON form uses a fixed top-level key order:

    "segments":  [{"id", "importance"}]
    "vehicles":  [{"id", "cost", "value", "trip_rate",
                   "trajectory": [{"segment", "dwell"}]}]
    "aoi_cap":   positive number (age of a never-updated segment)
    "company_weight": non-negative number (money per unit of map age)
    "utility":   {"family": "linear" | "hyperbolic", "a0"?}
    "equilibrium_selection": "largest" | "smallest"

Numbers are serialized as their shortest round-trippable decimal (Python
float repr), and key order is fixed, so saving the same scenario always
produces the same bytes.

Generated scenarios are fully determined by a GenConfig: segments are the
cells of a g x g grid (importance 1), each vehicle walks a nearest-neighbor
random walk over the 4-connected grid, and costs, values, and trip rates are
drawn uniformly from the configured ranges. Per-vehicle draws come from
SplitMix64 child streams (see rng.substream), in the documented order:
cost, value, trip_rate, start cell (u64 mod g^2), then one u64 per remaining
walk step (consumed even when the grid has a single cell; the step moves to
neighbors[u64 mod len] with candidate neighbors enumerated up, down, left,
right). The child-stream rule makes populations prefix-stable across sizes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Iterator, NamedTuple

from .rng import SplitMix64

LINEAR = "linear"
HYPERBOLIC = "hyperbolic"
LARGEST = "largest"
SMALLEST = "smallest"

_UTILITY_FAMILIES = (LINEAR, HYPERBOLIC)
_SELECTIONS = (LARGEST, SMALLEST)


class ValidationError(ValueError):
    """A scenario, config, or argument violates a documented model rule."""


class ParseError(ValueError):
    """Scenario JSON could not be parsed. Carries the byte offset."""

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset


class Visit(NamedTuple):
    segment: str
    dwell: float


@dataclass(frozen=True)
class Segment:
    id: str
    importance: float


@dataclass(frozen=True)
class RoadMap:
    segments: tuple[Segment, ...]

    def ids(self) -> Iterator[str]:
        return (seg.id for seg in self.segments)


@dataclass(frozen=True)
class Vehicle:
    """One strategic player: sensing cost, service value, trip rate, route.

    `trajectory` is the fixed ordered route: (segment id, dwell weight)
    visits. Repeated segment ids are permitted and their dwell weights
    accumulate; a repeat does not multiply the segment's update rate, since
    one trip refreshes each visited segment once.
    """

    id: str
    cost: float
    value: float
    trip_rate: float
    trajectory: tuple[Visit, ...]


@dataclass(frozen=True)
class UtilityFamily:
    """Freshness discount f(age): f(0) = 1 and f non-increasing.

    linear:      f(a) = max(0, 1 - a / aoi_cap)
    hyperbolic:  f(a) = a0 / (a0 + a)
    """

    family: str = LINEAR
    a0: float | None = None

    def freshness(self, age: float, aoi_cap: float) -> float:
        if self.family == LINEAR:
            return max(0.0, 1.0 - age / aoi_cap)
        return self.a0 / (self.a0 + age)


@dataclass(frozen=True)
class Scenario:
    """Immutable game instance.

    The participation tie policy is fixed, not configurable: an indifferent
    vehicle (payoff exactly zero) participates. `equilibrium_selection`
    chooses which extremal Nash equilibrium Stage II reports.
    """

    road_map: RoadMap
    vehicles: tuple[Vehicle, ...]
    aoi_cap: float
    company_weight: float
    utility: UtilityFamily = UtilityFamily()
    equilibrium_selection: str = LARGEST


@dataclass(frozen=True)
class GenConfig:
    """Inputs of the deterministic scenario generator."""

    grid_side: int
    n_vehicles: int
    walk_length: int
    cost_range: tuple[float, float]
    value_range: tuple[float, float]
    rate_range: tuple[float, float]
    seed: int
    aoi_cap: float = 10.0
    company_weight: float = 1.0
    utility: UtilityFamily = UtilityFamily()
    equilibrium_selection: str = LARGEST


def _is_number(x: Any) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _check_number(value: Any, what: str) -> float:
    if not _is_number(value):
        raise ValidationError(f"{what} must be a number")
    value = float(value)
    if value != value or value in (float("inf"), float("-inf")):
        raise ValidationError(f"{what} must be finite")
    return value


def _validate_utility(utility: UtilityFamily) -> None:
    if utility.family not in _UTILITY_FAMILIES:
        raise ValidationError(
            f"utility family must be one of {_UTILITY_FAMILIES}, got {utility.family!r}"
        )
    if utility.family == HYPERBOLIC:
        if utility.a0 is None or not _is_number(utility.a0) or utility.a0 <= 0:
            raise ValidationError("hyperbolic utility requires a0 > 0")
    elif utility.a0 is not None:
        raise ValidationError("a0 applies only to the hyperbolic utility family")


def validate_scenario(s: Scenario) -> None:
    """Check every documented invariant; raise ValidationError on the first."""
    if not s.road_map.segments:
        raise ValidationError("road map must contain at least one segment")
    seen: set[str] = set()
    for seg in s.road_map.segments:
        if not isinstance(seg.id, str) or not seg.id:
            raise ValidationError("segment ids must be non-empty strings")
        if seg.id in seen:
            raise ValidationError(f"duplicate segment id '{seg.id}'")
        seen.add(seg.id)
        if _check_number(seg.importance, f"segment {seg.id}: importance") <= 0:
            raise ValidationError(f"segment {seg.id}: importance must be > 0")

    vehicle_ids: set[str] = set()
    for v in s.vehicles:
        if not isinstance(v.id, str) or not v.id:
            raise ValidationError("vehicle ids must be non-empty strings")
        if v.id in vehicle_ids:
            raise ValidationError(f"duplicate vehicle id '{v.id}'")
        vehicle_ids.add(v.id)
        if _check_number(v.cost, f"vehicle {v.id}: cost") < 0:
            raise ValidationError(f"vehicle {v.id}: cost must be >= 0")
        if _check_number(v.value, f"vehicle {v.id}: value") < 0:
            raise ValidationError(f"vehicle {v.id}: value must be >= 0")
        if _check_number(v.trip_rate, f"vehicle {v.id}: trip_rate") <= 0:
            raise ValidationError(f"vehicle {v.id}: trip_rate must be > 0")
        if not v.trajectory:
            raise ValidationError(f"vehicle {v.id}: trajectory must be non-empty")
        for visit in v.trajectory:
            if visit.segment not in seen:
                raise ValidationError(
                    f"vehicle {v.id}: trajectory visits unknown segment '{visit.segment}'"
                )
            if _check_number(visit.dwell, f"vehicle {v.id}: dwell") <= 0:
                raise ValidationError(f"vehicle {v.id}: dwell weights must be > 0")

    if _check_number(s.aoi_cap, "aoi_cap") <= 0:
        raise ValidationError("aoi_cap must be > 0")
    if _check_number(s.company_weight, "company_weight") < 0:
        raise ValidationError("company_weight must be >= 0")
    _validate_utility(s.utility)
    if s.equilibrium_selection not in _SELECTIONS:
        raise ValidationError(
            f"equilibrium_selection must be one of {_SELECTIONS}, got {s.equilibrium_selection!r}"
        )


# ---------------------------------------------------------------------------
# JSON (canonical form)

def canonical_json(document: Any) -> str:
    """Serialize a document with fixed key order and shortest float repr."""
    return json.dumps(document, indent=2, ensure_ascii=False) + "\n"


def scenario_to_document(s: Scenario) -> dict[str, Any]:
    utility: dict[str, Any] = {"family": s.utility.family}
    if s.utility.family == HYPERBOLIC:
        utility["a0"] = float(s.utility.a0)
    return {
        "segments": [
            {"id": seg.id, "importance": float(seg.importance)}
            for seg in s.road_map.segments
        ],
        "vehicles": [
            {
                "id": v.id,
                "cost": float(v.cost),
                "value": float(v.value),
                "trip_rate": float(v.trip_rate),
                "trajectory": [
                    {"segment": visit.segment, "dwell": float(visit.dwell)}
                    for visit in v.trajectory
                ],
            }
            for v in s.vehicles
        ],
        "aoi_cap": float(s.aoi_cap),
        "company_weight": float(s.company_weight),
        "utility": utility,
        "equilibrium_selection": s.equilibrium_selection,
    }


def scenario_json(s: Scenario) -> str:
    validate_scenario(s)
    return canonical_json(scenario_to_document(s))


def save_scenario(s: Scenario, path: str) -> None:
    text = scenario_json(s)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _field(obj: Any, key: str, context: str) -> Any:
    if not isinstance(obj, dict):
        raise ValidationError(f"{context} must be a JSON object")
    if key not in obj:
        raise ValidationError(f"{context}: missing required field '{key}'")
    return obj[key]


def _string_field(obj: Any, key: str, context: str) -> str:
    value = _field(obj, key, context)
    if not isinstance(value, str):
        raise ValidationError(f"{context}: '{key}' must be a string")
    return value


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a scenario JSON document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"malformed JSON at byte offset {exc.pos}: {exc.msg}", offset=exc.pos
        ) from exc
    if not isinstance(doc, dict):
        raise ValidationError("scenario document must be a JSON object")

    raw_segments = _field(doc, "segments", "scenario")
    if not isinstance(raw_segments, list) or not raw_segments:
        raise ValidationError("'segments' must be a non-empty array")
    segments = tuple(
        Segment(
            id=_string_field(raw, "id", f"segment #{k}"),
            importance=_check_number(
                _field(raw, "importance", f"segment #{k}"), f"segment #{k}: importance"
            ),
        )
        for k, raw in enumerate(raw_segments)
    )

    raw_vehicles = _field(doc, "vehicles", "scenario")
    if not isinstance(raw_vehicles, list):
        raise ValidationError("'vehicles' must be an array")
    vehicles = []
    for k, raw in enumerate(raw_vehicles):
        vid = _string_field(raw, "id", f"vehicle #{k}")
        raw_traj = _field(raw, "trajectory", f"vehicle {vid}")
        if not isinstance(raw_traj, list):
            raise ValidationError(f"vehicle {vid}: 'trajectory' must be an array")
        visits = tuple(
            Visit(
                segment=_string_field(item, "segment", f"vehicle {vid} visit #{j}"),
                dwell=_check_number(
                    _field(item, "dwell", f"vehicle {vid} visit #{j}"),
                    f"vehicle {vid}: dwell",
                ),
            )
            for j, item in enumerate(raw_traj)
        )
        vehicles.append(
            Vehicle(
                id=vid,
                cost=_check_number(_field(raw, "cost", f"vehicle {vid}"), f"vehicle {vid}: cost"),
                value=_check_number(_field(raw, "value", f"vehicle {vid}"), f"vehicle {vid}: value"),
                trip_rate=_check_number(
                    _field(raw, "trip_rate", f"vehicle {vid}"), f"vehicle {vid}: trip_rate"
                ),
                trajectory=visits,
            )
        )

    raw_utility = _field(doc, "utility", "scenario")
    family = _string_field(raw_utility, "family", "utility")
    a0 = raw_utility.get("a0") if isinstance(raw_utility, dict) else None
    if a0 is not None:
        a0 = _check_number(a0, "utility: a0")
    utility = UtilityFamily(family=family, a0=a0)

    scenario = Scenario(
        road_map=RoadMap(segments=segments),
        vehicles=tuple(vehicles),
        aoi_cap=_check_number(_field(doc, "aoi_cap", "scenario"), "aoi_cap"),
        company_weight=_check_number(_field(doc, "company_weight", "scenario"), "company_weight"),
        utility=utility,
        equilibrium_selection=_field(doc, "equilibrium_selection", "scenario"),
    )
    validate_scenario(scenario)
    return scenario


def load_scenario(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())


# ---------------------------------------------------------------------------
# Generation

_STEP_OFFSETS = ((-1, 0), (1, 0), (0, -1), (0, 1))  # up, down, left, right


def _validate_config(cfg: GenConfig) -> None:
    if cfg.grid_side < 1:
        raise ValidationError("grid_side must be >= 1")
    if cfg.n_vehicles < 1:
        raise ValidationError("n_vehicles must be >= 1")
    if cfg.walk_length < 1:
        raise ValidationError("walk_length must be >= 1")
    for name, (lo, hi) in (
        ("cost_range", cfg.cost_range),
        ("value_range", cfg.value_range),
        ("rate_range", cfg.rate_range),
    ):
        _check_number(lo, f"{name} lower bound")
        _check_number(hi, f"{name} upper bound")
        if lo > hi:
            raise ValidationError(f"{name} lower bound must be <= upper bound")
    if cfg.cost_range[0] < 0:
        raise ValidationError("cost_range lower bound must be >= 0")
    if cfg.value_range[0] < 0:
        raise ValidationError("value_range lower bound must be >= 0")
    if cfg.rate_range[0] <= 0:
        raise ValidationError("rate_range lower bound must be > 0")
    if cfg.seed < 0:
        raise ValidationError("seed must be a non-negative integer")
    if _check_number(cfg.aoi_cap, "aoi_cap") <= 0:
        raise ValidationError("aoi_cap must be > 0")
    if _check_number(cfg.company_weight, "company_weight") < 0:
        raise ValidationError("company_weight must be >= 0")
    _validate_utility(cfg.utility)
    if cfg.equilibrium_selection not in _SELECTIONS:
        raise ValidationError(
            f"equilibrium_selection must be one of {_SELECTIONS}, got {cfg.equilibrium_selection!r}"
        )


def generate_scenario(cfg: GenConfig) -> Scenario:
    """Deterministically expand a GenConfig into a Scenario.

    Draw order per vehicle (one SplitMix64 child stream per vehicle index):
    cost, value, trip_rate, start cell, then one u64 per remaining step.
    """
    _validate_config(cfg)
    g = cfg.grid_side
    segments = tuple(Segment(f"s{k}", 1.0) for k in range(g * g))

    master = SplitMix64(cfg.seed)
    vehicles = []
    for i in range(cfg.n_vehicles):
        stream = SplitMix64(master.next_u64())
        cost = stream.next_uniform(*cfg.cost_range)
        value = stream.next_uniform(*cfg.value_range)
        rate = stream.next_uniform(*cfg.rate_range)
        cell = stream.next_index(g * g)
        visits = [Visit(f"s{cell}", 1.0)]
        for _ in range(cfg.walk_length - 1):
            draw = stream.next_u64()
            row, col = divmod(cell, g)
            neighbors = [
                nr * g + nc
                for dr, dc in _STEP_OFFSETS
                for nr, nc in ((row + dr, col + dc),)
                if 0 <= nr < g and 0 <= nc < g
            ]
            if neighbors:
                cell = neighbors[draw % len(neighbors)]
            visits.append(Visit(f"s{cell}", 1.0))
        vehicles.append(Vehicle(f"v{i}", cost, value, rate, tuple(visits)))

    scenario = Scenario(
        road_map=RoadMap(segments=segments),
        vehicles=tuple(vehicles),
        aoi_cap=float(cfg.aoi_cap),
        company_weight=float(cfg.company_weight),
        utility=cfg.utility,
        equilibrium_selection=cfg.equilibrium_selection,
    )
    validate_scenario(scenario)
    return scenario
