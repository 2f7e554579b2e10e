"""Command-line front end: plan / rates / sweep.

    qcpon plan  --config cfg.json [--plan both] [--oracle] [--hungarian]
    qcpon rates --config cfg.json [--plan both] [--out dir] [--seed 7]
    qcpon sweep --config cfg.json --out dir [--plan both] [--seed 7]

``plan`` prints wavelength assignments, objectives and search-space sizes;
``rates`` evaluates one operating point; ``sweep`` runs the configured
study and writes results.csv plus a scenario.json sidecar.  ``--seed``
reports Monte-Carlo-sampled (instead of exact-mean) observables at the
optimized parameters.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from ._accel import BACKEND
from .assignment import (conventional_assignment, count_cases, exhaustive_assignment,
                         pair_users, raman_objective, seven_band_assignment)
from .config import ResolvedConfig, SweepSpec, parse_config
from .errors import SearchTooLargeError
from .raman import build_crosstalk_matrix
from .sweep import emit_results, run_sweep


def _load_config(path: str) -> ResolvedConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def _print_plan(name: str, plan, objective, cases=None) -> None:
    print(f"\n{name}: objective = {objective:.6e}"
          + (f", cases examined = {cases}" if cases is not None else ""))
    for i in range(len(plan.q)):
        lam_q = plan.grid.wavelength_nm(plan.q[i])
        lam_d = plan.grid.wavelength_nm(plan.c[i]) if i < len(plan.c) else float("nan")
        print(f"  user {i:2d}: quantum {lam_q:9.2f} nm   classical {lam_d:9.2f} nm")


def cmd_plan(args) -> int:
    resolved = _load_config(args.config)
    scenario = resolved.scenario
    grid = scenario.grid
    users = scenario.users
    matrix = build_crosstalk_matrix(grid, scenario.spectrum)
    print(f"grid: {grid.count} channels, {grid.lambda_start_nm} nm + k*{grid.delta_nm} nm")
    print(f"users: {users}   backend: {BACKEND}")
    print(f"kappa1 (seven-band layouts) = {count_cases('seven_band', grid.count, users)}")
    print(f"kappa2 (exhaustive, binomial(D, P)) = {count_cases('exhaustive', grid.count, users)}")

    if args.plan in ("conventional", "both"):
        plan = conventional_assignment(grid, users)
        _print_plan("conventional", plan, raman_objective(matrix, plan))
    if args.plan in ("seven-band", "both"):
        res = seven_band_assignment(matrix, users, users)
        plan = res.plan
        if args.hungarian:
            plan = pair_users(matrix, plan)
        _print_plan("seven-band", plan, res.objective, res.cases_examined)
        s = res.split
        print(f"  bands X=({s.x1},{s.x2},{s.x3}) V=({s.v1},{s.v2},{s.v3}) gap=A{s.gap}")
    if args.oracle:
        try:
            res = exhaustive_assignment(matrix, users, users)
            _print_plan("exhaustive oracle", res.plan, res.objective, res.cases_examined)
        except SearchTooLargeError as exc:
            print(f"\nexhaustive oracle skipped: {exc}")
    return 0


def _rates_sweep_spec(resolved: ResolvedConfig, plan_choice: str) -> ResolvedConfig:
    """Degenerate one-point sweep at the configured operating point."""
    plans = {"conventional": "conventional", "seven-band": "seven_band",
             "both": "both"}[plan_choice]
    spec = SweepSpec(variable="launch_power",
                     values=(resolved.scenario.launch_power_dbm,),
                     plans=plans, outputs=("finite",))
    return replace(resolved, sweep=spec)


def cmd_rates(args) -> int:
    resolved = _rates_sweep_spec(_load_config(args.config), args.plan)
    result = run_sweep(resolved, seed=args.seed)
    scenario = resolved.scenario
    duration_s = scenario.block_size / (scenario.devices.pulse_rate_ghz * 1e9)
    print(f"block size N = {scenario.block_size:.3e} "
          f"({duration_s:.1f} s at {scenario.devices.pulse_rate_ghz} GHz)")
    print(f"{'plan':<24} {'user':>6} {'rate_per_pulse':>15} {'feasible':>9}")
    for row in result.rows:
        rate = row["rate_per_pulse"]
        if rate:
            rate = f"{float(rate):.6e}"
        print(f"{row['plan']:<24} {row['user']:>6} {rate:>15} {row['feasible']:>9}")
    if args.out:
        csv_path, json_path = emit_results(result, args.out)
        print(f"\nwrote {csv_path} and {json_path}")
    return 0


def cmd_sweep(args) -> int:
    resolved = _load_config(args.config)
    if resolved.sweep is None:
        print("config has no sweep section", file=sys.stderr)
        return 2
    if args.plan != "both":
        plans = {"conventional": "conventional", "seven-band": "seven_band"}[args.plan]
        resolved = replace(resolved, sweep=replace(resolved.sweep, plans=plans))
    result = run_sweep(resolved, seed=args.seed)
    csv_path, json_path = emit_results(result, args.out)
    print(f"wrote {csv_path} ({len(result.rows)} rows) and {json_path}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qcpon",
        description="Wavelength planning and finite-key BB84 rates for "
                    "quantum-classical DWDM access networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON configuration file")
    common.add_argument("--plan", default="both",
                        choices=("conventional", "seven-band", "both"))
    common.add_argument("--seed", type=int, default=None,
                        help="sample observables Monte-Carlo style with this seed")

    p_plan = sub.add_parser("plan", parents=[common],
                            help="wavelength assignment only")
    p_plan.add_argument("--oracle", action="store_true",
                        help="cross-check against the exhaustive search (small instances)")
    p_plan.add_argument("--hungarian", action="store_true",
                        help="re-pair users with the optimal matching step")
    p_plan.set_defaults(func=cmd_plan)

    p_rates = sub.add_parser("rates", parents=[common],
                             help="per-user key rates at the configured point")
    p_rates.add_argument("--out", default=None, help="also write CSV/sidecar here")
    p_rates.set_defaults(func=cmd_rates)

    p_sweep = sub.add_parser("sweep", parents=[common], help="run the configured sweep")
    p_sweep.add_argument("--out", required=True, help="output directory")
    p_sweep.set_defaults(func=cmd_sweep)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
