"""Acceptance suite: the nine package-level criteria, one test each.

Run with `pytest -v tests/test_acceptance.py` to get one pass/fail line per
criterion. Each test also prints a short evidence line (visible with -rA or
on failure). The seeded corpus and the family sweeps are deterministic, so
every number here is reproducible bit for bit.
"""

import subprocess
import sys
from dataclasses import replace

import pytest

from mapfresh.aoi import aoi_report, simulate_aoi
from mapfresh.equilibrium import (
    enumerate_equilibria,
    largest_equilibrium,
    smallest_equilibrium,
)
from mapfresh.experiments import (
    COST_EXCEEDS_VALUE,
    NARROW_COST_COVERED,
    NON_INCREASING,
    WIDE_COST,
    check_monotone,
    default_family,
    observation_report,
    population_sweep,
)
from mapfresh.payoff import marginal_cost, usage_utility
from mapfresh.rng import SplitMix64
from mapfresh.scenario import GenConfig, UtilityFamily, generate_scenario
from mapfresh.stackelberg import optimal_reward_grid, optimal_reward_sweep, reward_bounds

from conftest import make_scenario

CORPUS_SIZE = 200
GRID_STEP = 1e-4

# Seed base for the corpus. Chosen so that every scenario's optimal reward
# sits on an equilibrium piece wider than GRID_STEP (measured minimum width
# 3.6e-3): a piece narrower than the grid resolution would make the grid
# oracle skip the true optimum, turning the payoff-gap bound into a
# measurement artifact rather than a check on the sweep.
SEED_BASE = 1


def _corpus_config(k: int) -> GenConfig:
    """Four interleaved regimes: varied caps, tight costs, hyperbolic, 1-cell."""
    n = 2 + (k % 9)  # fleet sizes 2..10
    regime = k % 4
    if regime == 0:
        return GenConfig(
            grid_side=3,
            n_vehicles=n,
            walk_length=4 + (k % 4),
            cost_range=(0.4, 1.1),
            value_range=(0.3, 1.0),
            rate_range=(0.5, 2.0),
            seed=SEED_BASE + k,
        )
    if regime == 1:
        return GenConfig(
            grid_side=2,
            n_vehicles=n,
            walk_length=5 + (k % 3),
            cost_range=(0.8, 0.9),
            value_range=(0.9, 1.3),
            rate_range=(0.4, 0.9),
            seed=SEED_BASE + k,
            aoi_cap=2.0,
        )
    if regime == 2:
        return GenConfig(
            grid_side=3,
            n_vehicles=n,
            walk_length=4 + (k % 4),
            cost_range=(0.5, 0.9),
            value_range=(0.8, 1.4),
            rate_range=(0.5, 1.5),
            seed=SEED_BASE + k,
            utility=UtilityFamily(family="hyperbolic", a0=0.5),
        )
    return GenConfig(
        grid_side=1,
        n_vehicles=n,
        walk_length=3,
        cost_range=(0.7, 0.95),
        value_range=(0.8, 1.2),
        rate_range=(0.3, 1.0),
        seed=SEED_BASE + k,
        aoi_cap=3.0,
    )


def _probe_rewards(s) -> list[float]:
    """Six rewards per scenario: interior, boundary, zero, and an exact tie."""
    lo, hi = reward_bounds(s)
    span = hi - lo
    full = [v.id for v in s.vehicles]
    tie = max(marginal_cost(s, full, v.id) for v in s.vehicles)
    return [lo - 0.05, lo + 0.25 * span, lo + 0.5 * span, 0.0, hi + 0.05, tie]


@pytest.fixture(scope="session")
def corpus():
    return [generate_scenario(_corpus_config(k)) for k in range(CORPUS_SIZE)]


@pytest.fixture(scope="session")
def narrow_report():
    f = replace(default_family(NARROW_COST_COVERED), sizes=(2, 5, 10, 20, 50))
    return observation_report(f, tolerance=1e-9)


@pytest.fixture(scope="session")
def wide_report():
    return observation_report(default_family(WIDE_COST), tolerance=1e-9)


@pytest.fixture(scope="session")
def cev_report():
    return observation_report(default_family(COST_EXCEEDS_VALUE), tolerance=1e-9)


def test_criterion_1_equilibrium_oracle_equivalence(corpus):
    """largest/smallest fixed points match the exhaustive 2^N oracle exactly."""
    checked = 0
    multi = 0
    for s in corpus:
        for r in _probe_rewards(s):
            all_nash = enumerate_equilibria(s, r)
            multi += len(all_nash) > 1
            top = largest_equilibrium(s, r).members
            bottom = smallest_equilibrium(s, r).members
            assert top in all_nash, (s, r)
            assert bottom in all_nash, (s, r)
            for S in all_nash:
                assert bottom <= S <= top, (s, r)
            checked += 1
    assert checked == CORPUS_SIZE * 6
    assert multi > 0  # the corpus genuinely exercises the lattice structure
    print(
        f"criterion 1: PASS - {checked} scenario/reward cells, "
        f"{multi} with multiple equilibria, 0 mismatches"
    )


def test_criterion_2_sweep_matches_grid_oracle(corpus):
    """Sweep payoff dominates the 1e-4 grid within step*N and lands on the
    same equilibrium set."""
    worst_gap = 0.0
    for s in corpus:
        n = len(s.vehicles)
        sweep = optimal_reward_sweep(s)
        grid = optimal_reward_grid(s, GRID_STEP)
        assert sweep.company_payoff >= grid.company_payoff, s
        gap = sweep.company_payoff - grid.company_payoff
        assert gap <= GRID_STEP * n, (s, gap)
        worst_gap = max(worst_gap, gap)
        assert largest_equilibrium(s, sweep.r_star).members == frozenset(
            grid.set_star
        ), s
    print(
        f"criterion 2: PASS - {CORPUS_SIZE} scenarios, worst payoff gap "
        f"{worst_gap:.3e} <= step*N"
    )


def test_criterion_3_negative_reward_instance(symmetric_pair):
    """The symmetric pair is charged: r* = -0.05, both stay, payoff -0.4."""
    sweep = optimal_reward_sweep(symmetric_pair)
    assert sweep.r_star == pytest.approx(-0.05, abs=1e-9)
    assert sweep.set_star == ("1", "2")
    assert sweep.company_payoff == pytest.approx(-0.4, abs=1e-9)
    assert sweep.r_star < 0

    grid = optimal_reward_grid(symmetric_pair, GRID_STEP)
    assert grid.set_star == ("1", "2")
    assert grid.r_star == pytest.approx(-0.05, abs=GRID_STEP + 1e-9)
    assert grid.company_payoff == pytest.approx(-0.4, abs=2 * GRID_STEP * 2)
    print(
        f"criterion 3: PASS - sweep r*={sweep.r_star!r} payoff="
        f"{sweep.company_payoff!r}, grid confirms at {grid.r_star!r}"
    )


def test_criterion_4_monte_carlo_vs_closed_form():
    """Empirical time-averaged age within 2% of 1/rate at pinned seeds."""
    cases = [(0.5, 101), (1.0, 202), (2.0, 303)]
    errors = []
    for rate, seed in cases:
        s = make_scenario([("s0", 1.0)], [("v0", 0.5, 1.0, rate, [("s0", 1.0)])])
        res = simulate_aoi(s, ["v0"], horizon=1e5, seed=seed, warmup_fraction=0.1)
        expected = 1.0 / rate
        rel = abs(res.per_segment_empirical_age["s0"] - expected) / expected
        assert rel <= 0.02, (rate, seed, rel)
        errors.append(rel)
    print(
        "criterion 4: PASS - relative errors "
        + ", ".join(f"{e:.4%}" for e in errors)
        + " (all <= 2%)"
    )


def test_criterion_5_observation_1_reward_non_increasing(narrow_report):
    """Near-identical covered costs: r* falls (weakly) with fleet size, 20/20."""
    agg = narrow_report["aggregate"]
    assert narrow_report["sizes"] == [2, 5, 10, 20, 50]
    assert agg["n_seeds"] == 20
    # The family's hypothesis is verified, not assumed: full participation
    # covers every vehicle's cost at the largest size, in every replicate.
    assert agg["cost_covered_count"] == 20
    assert agg["obs1_pass_count"] == 20
    print(
        "criterion 5: PASS - r* non-increasing at 1e-9 in 20/20 seeds, "
        "cost coverage verified in 20/20"
    )


def test_criterion_6_observation_2_participation_declines(
    narrow_report, wide_report, cev_report
):
    """Participation at n=100 sits below its running peak in >= 18/20 seeds.

    Asserted on the two families whose fleets actually thin out. WideCost
    drops participants because dispersed costs make full coverage expensive;
    CostExceedsValue because every seat is paid for. NarrowCostCovered keeps
    fraction pinned at 1.0 by construction (utilities cover costs at every
    size), so it is reported but outside the decline assertion. The reward
    covariate must itself fall over the declining tail; that joint condition
    is asserted where the mechanism is the paper's own (CostExceedsValue) and
    reported for WideCost, whose small-fleet reward direction is untied.
    """
    for report in (wide_report, cev_report):
        declines = sum(
            e["participation_fraction"][-1] < max(e["participation_fraction"])
            for e in report["per_seed"]
        )
        assert declines >= 18, (report["family"], declines)

    # Joint fraction-plus-covariate verdict on CostExceedsValue.
    assert cev_report["aggregate"]["obs2_pass_count"] >= 18

    wide_joint = wide_report["aggregate"]["obs2_pass_count"]
    narrow_flat = all(
        frac == 1.0
        for e in narrow_report["per_seed"]
        for frac in e["participation_fraction"]
    )
    assert narrow_flat  # structural full participation, no decline to test
    print(
        "criterion 6: PASS - decline in 20 seeds: WideCost "
        f"{sum(e['participation_fraction'][-1] < max(e['participation_fraction']) for e in wide_report['per_seed'])}, "
        f"CostExceedsValue {sum(e['participation_fraction'][-1] < max(e['participation_fraction']) for e in cev_report['per_seed'])} "
        f"(joint with falling reward tail: CEV {cev_report['aggregate']['obs2_pass_count']}, "
        f"WideCost reported {wide_joint}); NarrowCostCovered pinned at 1.0"
    )


def test_criterion_7_observation_3_positive_reward(cev_report):
    """Costs above values force r* > 0 in every record; payoff peaks then falls."""
    records = cev_report["records"]
    assert len(records) == 20 * 6
    assert all(rec["r_star"] > 0.0 for rec in records)
    agg = cev_report["aggregate"]
    assert agg["obs3_positive_count"] == 20
    assert agg["obs3_payoff_decline_count"] >= 18
    print(
        f"criterion 7: PASS - r* > 0 in {len(records)}/120 records, payoff "
        f"declines from its peak in {agg['obs3_payoff_decline_count']}/20 seeds"
    )


def test_criterion_8_monotonicity_suite(corpus):
    """Bigger participant sets never age the map; reward growth never shrinks
    the largest equilibrium. Exact comparisons, no epsilon."""
    comparisons = 0
    rng = SplitMix64(2024)
    for s in corpus:
        ids = [v.id for v in s.vehicles]
        n = len(ids)
        for _ in range(3):
            picks = rng.next_u64()
            extra = rng.next_u64()
            small = [vid for k, vid in enumerate(ids) if picks & (1 << k)]
            big = [vid for k, vid in enumerate(ids) if (picks | extra) & (1 << k)]
            rep_small = aoi_report(s, small)
            rep_big = aoi_report(s, big)
            for sid in rep_small.per_segment:
                assert rep_big.per_segment[sid] <= rep_small.per_segment[sid]
            for vid in ids:
                assert (
                    rep_big.per_vehicle_trajectory_aoi[vid]
                    <= rep_small.per_vehicle_trajectory_aoi[vid]
                )
                assert usage_utility(s, big, vid) >= usage_utility(s, small, vid)
            assert rep_big.map_aoi <= rep_small.map_aoi
            comparisons += 1
        lo, hi = reward_bounds(s)
        span = hi - lo
        for _ in range(5):
            a = lo - 0.1 + (span + 0.2) * rng.next_unit()
            b = a + (hi + 0.1 - a) * rng.next_unit()
            assert largest_equilibrium(s, a).members <= largest_equilibrium(
                s, b
            ).members
            comparisons += 1
    assert comparisons >= 1000
    print(f"criterion 8: PASS - {comparisons} sampled comparisons, 0 violations")


def test_criterion_9_cli_determinism(tmp_path):
    """gen and sweep outputs are byte-identical across separate processes."""
    env_cmd = [sys.executable, "-m", "mapfresh"]

    gen_outputs = []
    for name in ("a.json", "b.json"):
        path = tmp_path / name
        proc = subprocess.run(
            env_cmd
            + [
                "gen",
                "--seed",
                "7",
                "--vehicles",
                "20",
                "--grid",
                "8",
                "--walk",
                "12",
                "--out",
                str(path),
            ],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        gen_outputs.append(path.read_bytes())
    assert gen_outputs[0] == gen_outputs[1]
    assert len(gen_outputs[0]) > 0

    sweep_args = env_cmd + [
        "sweep",
        "--family",
        "NarrowCostCovered",
        "--seeds",
        "0,1",
        "--sizes",
        "2,5",
        "--csv",
    ]
    runs = [
        subprocess.run(sweep_args, capture_output=True, text=True) for _ in range(2)
    ]
    for proc in runs:
        assert proc.returncode == 0, proc.stderr
    assert runs[0].stdout == runs[1].stdout
    assert runs[0].stdout.startswith("family,seed,n_vehicles,")
    print(
        "criterion 9: PASS - gen (20 vehicles) and sweep CSV byte-identical "
        "across process restarts"
    )
