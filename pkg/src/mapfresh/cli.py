"""Command-line entry point.

Subcommands: gen (deterministic scenario generation), solve (optimal reward),
equilibrium (participation set at a fixed reward), simulate (Monte Carlo ages
with a closed-form comparison), sweep (population-size experiment families).

Machine-readable output (canonical JSON, or CSV for sweep) goes to stdout or
`--out`; diagnostics go to stderr only, and nothing is written to stdout on a
failure. Exit status: 0 success, 1 solver capacity or internal failure,
2 usage or input-validation errors.
"""

from __future__ import annotations

import argparse
import sys
from typing import Any

from .aoi import scenario_index, simulate_aoi
from .equilibrium import CapacityError, selected_equilibrium
from .experiments import (
    FAMILY_LABELS,
    FamilyConfig,
    default_family,
    observation_report,
    population_sweep,
    records_csv,
)
from .scenario import (
    HYPERBOLIC,
    LARGEST,
    LINEAR,
    SMALLEST,
    GenConfig,
    ParseError,
    UtilityFamily,
    ValidationError,
    canonical_json,
    generate_scenario,
    load_scenario,
    scenario_json,
)
from .stackelberg import DEFAULT_GRID_STEP, optimal_reward_grid, optimal_reward_sweep


def _write(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit(document: dict[str, Any], out_path: str | None) -> None:
    _write(canonical_json(document), out_path)


def _cmd_gen(args: argparse.Namespace) -> int:
    if args.utility == HYPERBOLIC:
        utility = UtilityFamily(family=HYPERBOLIC, a0=args.a0 if args.a0 is not None else 1.0)
    else:
        if args.a0 is not None:
            raise ValidationError("a0 applies only to the hyperbolic utility family")
        utility = UtilityFamily()
    cfg = GenConfig(
        grid_side=args.grid,
        n_vehicles=args.vehicles,
        walk_length=args.walk,
        cost_range=tuple(args.cost_range),
        value_range=tuple(args.value_range),
        rate_range=tuple(args.rate_range),
        seed=args.seed,
        aoi_cap=args.aoi_cap,
        company_weight=args.company_weight,
        utility=utility,
        equilibrium_selection=args.selection,
    )
    _write(scenario_json(generate_scenario(cfg)), args.out)
    return 0


def _cmd_solve(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    if args.method == "grid":
        solution = optimal_reward_grid(scenario, args.step)
    else:
        solution = optimal_reward_sweep(scenario)
    _emit(solution.to_document(), args.out)
    return 0


def _cmd_equilibrium(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    outcome = selected_equilibrium(scenario, args.reward)
    _emit(outcome.to_document(), args.out)
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    if (args.reward is None) == (args.reward_set is None):
        raise ValidationError("exactly one of --reward and --reward-set is required")
    if args.reward is not None:
        participants = sorted(selected_equilibrium(scenario, args.reward).members)
    else:
        participants = [v for v in args.reward_set.split(",") if v]
    result = simulate_aoi(
        scenario,
        participants,
        horizon=args.horizon,
        seed=args.seed,
        warmup_fraction=args.warmup_fraction,
    )
    idx = scenario_index(scenario)
    rates = idx.update_rates(idx.member_mask(participants))
    comparison = []
    for sid, rate in zip(idx.segment_ids, rates):
        empirical = result.per_segment_empirical_age[sid]
        if rate > 0.0:
            expected = 1.0 / float(rate)
            relative = (empirical - expected) / expected
        else:
            expected = None
            relative = None
        comparison.append(
            {
                "segment": sid,
                "empirical_age": float(empirical),
                "expected_age": None if expected is None else float(expected),
                "relative_error": None if relative is None else float(relative),
            }
        )
    _emit({"result": result.to_document(), "comparison": comparison}, args.out)
    return 0


def _parse_int_list(text: str, what: str) -> tuple[int, ...]:
    try:
        return tuple(int(item) for item in text.split(",") if item)
    except ValueError:
        raise ValidationError(f"{what} must be a comma-separated list of integers") from None


def _cmd_sweep(args: argparse.Namespace) -> int:
    family = default_family(args.family)
    if args.seeds is not None:
        family = FamilyConfig(
            label=family.label,
            template=family.template,
            sizes=family.sizes,
            seeds=_parse_int_list(args.seeds, "--seeds"),
        )
    if args.sizes is not None:
        family = FamilyConfig(
            label=family.label,
            template=family.template,
            sizes=_parse_int_list(args.sizes, "--sizes"),
            seeds=family.seeds,
        )
    records = population_sweep(family)
    if args.csv:
        _write(records_csv(records), args.out)
    else:
        _emit(observation_report(family, records=records), args.out)
    if args.figures:
        from .figures import render_sweep_figures

        render_sweep_figures(records, args.figures)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mapfresh",
        description="Reward optimization and age-of-information tools for crowd-sensed maps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a scenario deterministically from a seed")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--vehicles", type=int, required=True)
    gen.add_argument("--grid", type=int, required=True, help="grid side length")
    gen.add_argument("--walk", type=int, required=True, help="trajectory length in cells")
    gen.add_argument("--cost-range", type=float, nargs=2, default=(0.5, 1.5), metavar=("LO", "HI"))
    gen.add_argument("--value-range", type=float, nargs=2, default=(0.8, 1.6), metavar=("LO", "HI"))
    gen.add_argument("--rate-range", type=float, nargs=2, default=(0.5, 2.0), metavar=("LO", "HI"))
    gen.add_argument("--aoi-cap", type=float, default=10.0)
    gen.add_argument("--company-weight", type=float, default=1.0)
    gen.add_argument("--utility", choices=(LINEAR, HYPERBOLIC), default=LINEAR)
    gen.add_argument("--a0", type=float, default=None, help="hyperbolic half-age parameter")
    gen.add_argument("--selection", choices=(LARGEST, SMALLEST), default=LARGEST)
    gen.add_argument("--out", default=None)
    gen.set_defaults(handler=_cmd_gen)

    solve = sub.add_parser("solve", help="optimal uniform reward for a scenario")
    solve.add_argument("scenario")
    solve.add_argument("--method", choices=("sweep", "grid"), default="sweep")
    solve.add_argument("--step", type=float, default=DEFAULT_GRID_STEP, help="grid spacing")
    solve.add_argument("--out", default=None)
    solve.set_defaults(handler=_cmd_solve)

    eq = sub.add_parser("equilibrium", help="participation equilibrium at a fixed reward")
    eq.add_argument("scenario")
    eq.add_argument("--reward", type=float, required=True)
    eq.add_argument("--out", default=None)
    eq.set_defaults(handler=_cmd_equilibrium)

    sim = sub.add_parser("simulate", help="Monte Carlo ages vs the closed form")
    sim.add_argument("scenario")
    sim.add_argument("--reward", type=float, default=None, help="simulate the equilibrium at this reward")
    sim.add_argument("--reward-set", default=None, metavar="IDS", help="comma-separated participant ids")
    sim.add_argument("--horizon", type=float, required=True)
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--warmup-fraction", type=float, default=0.1)
    sim.add_argument("--out", default=None)
    sim.set_defaults(handler=_cmd_simulate)

    sweep = sub.add_parser("sweep", help="population-size sweep over a scenario family")
    sweep.add_argument("--family", choices=FAMILY_LABELS, required=True)
    sweep.add_argument("--seeds", default=None, help="comma-separated seed list")
    sweep.add_argument("--sizes", default=None, help="comma-separated population sizes")
    sweep.add_argument("--csv", action="store_true", help="emit the records CSV instead of the JSON report")
    sweep.add_argument("--figures", default=None, metavar="DIR", help="also render PNG figures into DIR")
    sweep.add_argument("--out", default=None)
    sweep.set_defaults(handler=_cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.handler(args)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
