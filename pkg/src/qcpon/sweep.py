"""Scenario sweeps and result persistence.

``run_sweep`` walks a sweep axis, optimizes every user under every
requested plan and collects one CSV row per (value, plan, user) plus
R_avg / R_min summary rows per plan and a Gamma row comparing the two
plans.  Asymptotic-limit curves, when requested, appear under plan labels
suffixed ``_asymptotic`` (their Gamma row under ``both_asymptotic``).

Output is fully deterministic: fixed row order, ``str`` float formatting,
and a JSON sidecar with the resolved configuration (every defaulted field
named) and the failure-probability bookkeeping.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .assignment import conventional_assignment, seven_band_assignment
from .config import ResolvedConfig, SweepSpec
from .errors import UndefinedGainError
from .finite_key import secret_key_length
from .grid import ChannelPlan, plan_wavelengths
from .link import Scenario, channel_budget, sample_observables
from .optimize import (NetworkRates, network_rates, optimize_params_asymptotic,
                       rate_gain)
from .raman import build_crosstalk_matrix

CSV_COLUMNS = ("sweep_var", "value", "plan", "user", "lambda_q_nm", "lambda_d_nm",
               "rate_per_pulse", "key_length", "mu", "nu", "qs", "qw", "PZ", "feasible")


@dataclass
class SweepResult:
    rows: list[dict]
    sweep: SweepSpec
    resolved: ResolvedConfig
    eps_invocations_final: int = 0
    eps_invocations_total: int = 0
    seed: int | None = None


def _apply_value(scenario: Scenario, variable: str, value: float) -> Scenario:
    if variable == "block_size":
        return scenario.with_(block_size=float(value))
    if variable == "launch_power":
        return scenario.with_(launch_power_dbm=float(value))
    if variable == "users":
        return scenario.with_(users=int(value))
    if variable == "coupling_loss":
        return scenario.with_(coupling_loss_db=float(value))
    raise ValueError(f"unknown sweep variable {variable!r}")


def build_plan(scenario: Scenario, kind: str) -> ChannelPlan:
    """Channel plan of the requested kind for the scenario's user count."""
    if kind == "conventional":
        return conventional_assignment(scenario.grid, scenario.users)
    if kind == "seven_band":
        matrix = build_crosstalk_matrix(scenario.grid, scenario.spectrum)
        return seven_band_assignment(matrix, scenario.users, scenario.users).plan
    raise ValueError(f"unknown plan kind {kind!r}")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float) and not np.isfinite(x):
        return "inf" if x > 0 else "-inf"
    return str(x)


def _row(sweep_var, value, plan, user, **cells) -> dict:
    row = {c: "" for c in CSV_COLUMNS}
    row["sweep_var"] = sweep_var
    row["value"] = _fmt(value)
    row["plan"] = plan
    row["user"] = _fmt(user)
    for key, v in cells.items():
        row[key] = _fmt(v)
    return row


def _user_rows(result: SweepResult, variable, value, label, plan, scenario, net,
               rng) -> float:
    """Append per-user and R_avg/R_min rows; returns the reported average."""
    shown_rates = []
    for user, opt in enumerate(net.per_user):
        lam_q, lam_d = plan_wavelengths(plan, user)
        rate, key = opt.rate, opt.key_length
        if rng is not None and opt.feasible:
            # Monte-Carlo validation: re-evaluate the optimized params on
            # Poisson-sampled observables
            budget = channel_budget(scenario, plan, user)
            obs = sample_observables(budget, opt.params, scenario.block_size, rng)
            kr = secret_key_length(obs, opt.params,
                                   scenario.devices.failure_probability,
                                   scenario.devices.error_correction_inefficiency)
            rate, key = kr.rate_per_pulse(scenario.block_size), kr.key_total
        shown_rates.append(rate)
        result.rows.append(_row(
            variable, value, label, user,
            lambda_q_nm=lam_q, lambda_d_nm=lam_d,
            rate_per_pulse=rate, key_length=key,
            mu=opt.params.mu, nu=opt.params.nu, qs=opt.params.qs,
            qw=opt.params.qw, PZ=opt.params.pz, feasible=opt.feasible,
        ))
    r_avg = sum(shown_rates) / len(shown_rates)
    r_min = min(shown_rates)
    result.rows.append(_row(variable, value, label, "R_avg", rate_per_pulse=r_avg,
                            feasible=net.all_positive))
    result.rows.append(_row(variable, value, label, "R_min", rate_per_pulse=r_min,
                            feasible=net.all_positive))
    return r_avg


def _gamma_row(result, variable, value, label, avgs) -> None:
    try:
        gamma = rate_gain(avgs["seven_band"], avgs["conventional"])
    except (UndefinedGainError, KeyError):
        gamma = None
    result.rows.append(_row(variable, value, label, "Gamma", rate_per_pulse=gamma))


def run_sweep(resolved: ResolvedConfig, seed: int | None = None) -> SweepResult:
    """Execute the configured sweep and return the result table."""
    sweep = resolved.sweep
    if sweep is None:
        raise ValueError("configuration has no sweep section")
    base = resolved.scenario
    result = SweepResult([], sweep, resolved, seed=seed)
    rng = np.random.default_rng(seed) if seed is not None else None

    plan_cache: dict[tuple[str, int], ChannelPlan] = {}
    prev_params: dict[tuple[str, int], tuple] = {}

    for value in sweep.values:
        scenario = _apply_value(base, sweep.variable, value)
        capacity_ok = 2 * scenario.users <= scenario.grid.count
        finite_avgs: dict[str, float] = {}
        asym_avgs: dict[str, float] = {}

        for kind in sweep.plan_list:
            if not capacity_ok:
                for user in range(scenario.users):
                    result.rows.append(_row(sweep.variable, value, kind, user,
                                            feasible=False))
                result.rows.append(_row(sweep.variable, value, kind, "R_avg",
                                        feasible=False))
                result.rows.append(_row(sweep.variable, value, kind, "R_min",
                                        feasible=False))
                continue
            key = (kind, scenario.users)
            if key not in plan_cache:
                plan_cache[key] = build_plan(scenario, kind)
            plan = plan_cache[key]

            if "finite" in sweep.outputs:
                seeds = None
                if sweep.variable == "block_size":
                    seeds = [[prev_params[(kind, u)]] if (kind, u) in prev_params else []
                             for u in range(scenario.users)]
                net = network_rates(plan, scenario, scenario.block_size,
                                    per_user_extra_seeds=seeds)
                if sweep.variable == "block_size":
                    for u, opt in enumerate(net.per_user):
                        prev_params[(kind, u)] = opt.params.as_vector()
                result.eps_invocations_final += net.eps_invocations_final
                result.eps_invocations_total += net.eps_invocations
                finite_avgs[kind] = _user_rows(result, sweep.variable, value, kind,
                                               plan, scenario, net, rng)

            if "asymptotic" in sweep.outputs:
                per_user = tuple(
                    optimize_params_asymptotic(channel_budget(scenario, plan, u))
                    for u in range(scenario.users)
                )
                rates = [r.rate for r in per_user]
                net_a = NetworkRates(per_user, sum(rates) / len(rates), min(rates),
                                     min(rates) > 0.0)
                asym_avgs[kind] = net_a.r_avg
                _user_rows(result, sweep.variable, value, kind + "_asymptotic",
                           plan, scenario, net_a, None)

        if sweep.plans == "both" and capacity_ok:
            if "finite" in sweep.outputs:
                _gamma_row(result, sweep.variable, value, "both", finite_avgs)
            if "asymptotic" in sweep.outputs:
                _gamma_row(result, sweep.variable, value, "both_asymptotic", asym_avgs)

    return result


def render_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in result.rows:
        writer.writerow(row)
    return buf.getvalue()


def emit_results(result: SweepResult, out_dir) -> tuple[Path, Path]:
    """Write results.csv and the scenario.json sidecar; returns both paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "results.csv"
    csv_path.write_text(render_csv(result), encoding="utf-8")
    sidecar = {
        "resolved_config": result.resolved.raw,
        "defaulted_fields": list(result.resolved.defaulted_fields),
        "eps_per_invocation": result.resolved.scenario.devices.failure_probability,
        "eps_invocations_final_evaluations": result.eps_invocations_final,
        "eps_invocations_including_optimizer_probes": result.eps_invocations_total,
        "monte_carlo_seed": result.seed,
    }
    json_path = out / "scenario.json"
    json_path.write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n",
                         encoding="utf-8")
    return csv_path, json_path
