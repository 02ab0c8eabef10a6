"""Population sweep harness and trend analysis."""

import csv
import io
from dataclasses import replace

import pytest

from mapfresh.aoi import map_aoi
from mapfresh.experiments import (
    COST_EXCEEDS_VALUE,
    CSV_COLUMNS,
    DEFAULT_SEEDS,
    DEFAULT_SIZES,
    FAMILY_LABELS,
    NARROW_COST_COVERED,
    NON_DECREASING,
    NON_INCREASING,
    WIDE_COST,
    FamilyConfig,
    SweepRecord,
    check_monotone,
    default_families,
    default_family,
    observation_report,
    population_sweep,
    records_csv,
    validate_family,
)
from mapfresh.scenario import GenConfig, ValidationError, generate_scenario
from mapfresh.stackelberg import optimal_reward_sweep


def small_family(label, sizes=(2, 4, 8), seeds=(0, 1)):
    return replace(default_family(label), sizes=sizes, seeds=seeds)


def test_default_families_valid():
    families = default_families()
    assert tuple(f.label for f in families) == FAMILY_LABELS
    for f in families:
        validate_family(f)
        assert f.sizes == DEFAULT_SIZES
        assert f.seeds == DEFAULT_SEEDS


def test_family_hypotheses_encoded_in_templates():
    narrow = default_family(NARROW_COST_COVERED).template
    c_lo, c_hi = narrow.cost_range
    assert c_hi - c_lo <= 0.1 * (c_lo + c_hi) / 2.0
    cev = default_family(COST_EXCEEDS_VALUE).template
    assert cev.cost_range[0] > cev.value_range[1]


@pytest.mark.parametrize(
    "mutate, fragment",
    [
        (lambda f: replace(f, label="Fancy"), "family label"),
        (lambda f: replace(f, sizes=()), "sizes"),
        (lambda f: replace(f, sizes=(5, 2)), "strictly increasing"),
        (lambda f: replace(f, sizes=(2, 2, 5)), "strictly increasing"),
        (lambda f: replace(f, seeds=()), "seed"),
        (
            lambda f: replace(f, template=replace(f.template, cost_range=(0.5, 1.5))),
            "width",
        ),
    ],
)
def test_validate_family_rejections(mutate, fragment):
    f = mutate(default_family(NARROW_COST_COVERED))
    with pytest.raises(ValidationError, match=fragment):
        validate_family(f)


def test_cev_requires_gap():
    f = default_family(COST_EXCEEDS_VALUE)
    bad = replace(f, template=replace(f.template, value_range=(1.08, 1.40)))
    with pytest.raises(ValidationError, match="lower bound > value_range"):
        validate_family(bad)


def test_population_sweep_record_contents():
    f = small_family(WIDE_COST, sizes=(2, 4), seeds=(0, 1))
    records = population_sweep(f)
    assert [(r.seed, r.n_vehicles) for r in records] == [
        (0, 2),
        (0, 4),
        (1, 2),
        (1, 4),
    ]
    for rec in records:
        assert rec.family == WIDE_COST
        assert rec.participation_fraction == rec.set_size / rec.n_vehicles
        assert 0.0 <= rec.participation_fraction <= 1.0
        scenario = generate_scenario(
            replace(f.template, n_vehicles=rec.n_vehicles, seed=rec.seed)
        )
        solution = optimal_reward_sweep(scenario)
        assert rec.r_star == solution.r_star
        assert rec.set_size == len(solution.set_star)
        assert rec.company_payoff == solution.company_payoff
        assert rec.map_aoi_at_optimum == map_aoi(scenario, solution.set_star)


def test_population_sweep_error_context():
    f = default_family(WIDE_COST)
    broken = replace(
        f, template=replace(f.template, rate_range=(0.0, 1.0)), sizes=(2,), seeds=(3,)
    )
    with pytest.raises(RuntimeError, match=r"family WideCost, seed 3, n=2"):
        population_sweep(broken)


def test_check_monotone_directions():
    assert check_monotone([3.0, 2.0, 2.0, 1.5], NON_INCREASING, 0.0).ok
    assert check_monotone([1.0, 1.0, 2.0], NON_DECREASING, 0.0).ok
    v = check_monotone([3.0, 2.0, 2.5, 1.0], NON_INCREASING, 0.0)
    assert not v.ok
    assert v.first_violation == 2
    assert v.magnitude == 0.5
    v2 = check_monotone([1.0, 0.4], NON_DECREASING, 0.0)
    assert not v2.ok and v2.first_violation == 1 and v2.magnitude == 0.6


def test_check_monotone_tolerance_absorbs_noise():
    assert check_monotone([1.0, 1.0 + 5e-10], NON_INCREASING, 1e-9).ok
    assert not check_monotone([1.0, 1.0 + 5e-9], NON_INCREASING, 1e-9).ok


def test_check_monotone_validation():
    with pytest.raises(ValidationError, match="direction"):
        check_monotone([1.0], "Sideways", 0.0)
    with pytest.raises(ValidationError, match="tolerance"):
        check_monotone([1.0], NON_INCREASING, -1.0)
    with pytest.raises(ValidationError, match="non-empty"):
        check_monotone([], NON_INCREASING, 0.0)


def _synthetic_report(fractions, r_series, payoffs=None):
    f = replace(default_family(WIDE_COST), sizes=(2, 5, 10), seeds=(0,))
    payoffs = payoffs or [0.0] * len(fractions)
    records = [
        SweepRecord(
            family=WIDE_COST,
            seed=0,
            n_vehicles=n,
            r_star=r_series[k],
            set_size=int(round(fractions[k] * n)),
            participation_fraction=fractions[k],
            company_payoff=payoffs[k],
            map_aoi_at_optimum=1.0,
        )
        for k, n in enumerate((2, 5, 10))
    ]
    return observation_report(f, records=records)


def test_observation_report_trend_semantics():
    # Clean decline in both reward and participation.
    rep = _synthetic_report([1.0, 0.6, 0.4], [0.5, 0.3, 0.2])
    entry = rep["per_seed"][0]
    assert entry["obs1_reward_non_increasing"]["ok"]
    assert entry["obs2_participation_declines"]["ok"]
    assert entry["obs2_participation_declines"]["fraction_peak_index"] == 0

    # The reward may rise while participation still climbs; only the tail
    # after the fraction's last peak must fall.
    rep = _synthetic_report([0.5, 1.0, 0.8], [0.5, 0.6, 0.4])
    entry = rep["per_seed"][0]
    assert not entry["obs1_reward_non_increasing"]["ok"]
    assert entry["obs1_reward_non_increasing"]["first_violation"] == 1
    assert entry["obs2_participation_declines"]["ok"]
    assert entry["obs2_participation_declines"]["fraction_peak_index"] == 1

    # No decline when the fraction ends at its maximum.
    rep = _synthetic_report([0.5, 1.0, 1.0], [0.5, 0.4, 0.3])
    assert not rep["per_seed"][0]["obs2_participation_declines"]["ok"]


def test_observation_report_structure_and_reuse():
    f = small_family(COST_EXCEEDS_VALUE, sizes=(2, 4), seeds=(0, 1))
    records = population_sweep(f)
    rep = observation_report(f, records=records)
    fresh = observation_report(f)
    assert rep == fresh
    assert rep["family"] == COST_EXCEEDS_VALUE
    assert rep["sizes"] == [2, 4]
    assert rep["seeds"] == [0, 1]
    assert len(rep["per_seed"]) == 2
    agg = rep["aggregate"]
    assert {"n_seeds", "obs1_pass_count", "obs2_pass_count"} <= set(agg)
    assert "obs3_positive_count" in agg and "obs3_payoff_decline_count" in agg
    assert "cost_covered_count" not in agg
    for entry in rep["per_seed"]:
        assert entry["obs3_reward_positive"] in (True, False)
        assert all(r > 0.0 for r in entry["r_star"]) == entry["obs3_reward_positive"]
    assert len(rep["records"]) == len(records)


def test_observation_report_narrow_reports_cost_coverage():
    f = small_family(NARROW_COST_COVERED, sizes=(2, 4), seeds=(0,))
    rep = observation_report(f)
    assert "cost_covered_at_max_size" in rep["per_seed"][0]
    assert "cost_covered_count" in rep["aggregate"]
    assert "obs3_reward_positive" not in rep["per_seed"][0]


def test_records_csv_round_trip():
    f = small_family(WIDE_COST, sizes=(2, 4), seeds=(0,))
    records = population_sweep(f)
    text = records_csv(records)
    assert text.endswith("\n")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert list(rows[0]) == list(CSV_COLUMNS)
    assert len(rows) == len(records)
    for row, rec in zip(rows, records):
        assert row["family"] == rec.family
        assert int(row["seed"]) == rec.seed
        assert int(row["n_vehicles"]) == rec.n_vehicles
        # Shortest-repr floats parse back to the exact same doubles.
        assert float(row["r_star"]) == rec.r_star
        assert float(row["participation_fraction"]) == rec.participation_fraction
        assert float(row["company_payoff"]) == rec.company_payoff
        assert float(row["map_aoi_at_optimum"]) == rec.map_aoi_at_optimum


def test_records_csv_deterministic():
    f = small_family(NARROW_COST_COVERED, sizes=(2, 3), seeds=(0,))
    assert records_csv(population_sweep(f)) == records_csv(population_sweep(f))
