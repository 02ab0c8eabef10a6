import pytest

from mapfresh import RoadMap, Scenario, Segment, UtilityFamily, Vehicle, Visit


def make_scenario(segments, vehicles, aoi_cap=10.0, company_weight=1.0,
                  utility=None, selection="largest"):
    """segments: [(id, importance)]; vehicles: [(id, c, v, lam, [(seg, dwell)])]."""
    return Scenario(
        road_map=RoadMap(tuple(Segment(sid, imp) for sid, imp in segments)),
        vehicles=tuple(
            Vehicle(vid, c, v, lam, tuple(Visit(s, d) for s, d in traj))
            for vid, c, v, lam, traj in vehicles
        ),
        aoi_cap=aoi_cap,
        company_weight=company_weight,
        utility=utility or UtilityFamily(),
        equilibrium_selection=selection,
    )


@pytest.fixture
def symmetric_pair():
    """Two identical vehicles sharing one segment; c=0.9, v=1, lam=1."""
    return make_scenario(
        [("s0", 1.0)],
        [
            ("1", 0.9, 1.0, 1.0, [("s0", 1.0)]),
            ("2", 0.9, 1.0, 1.0, [("s0", 1.0)]),
        ],
    )


@pytest.fixture
def single_vehicle():
    """One vehicle whose cost exceeds its value; c=1.2, v=1, lam=1."""
    return make_scenario([("s0", 1.0)], [("1", 1.2, 1.0, 1.0, [("s0", 1.0)])])
