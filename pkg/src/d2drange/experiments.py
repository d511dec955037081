"""Experiment drivers: model validation, range sweeps, per-class
optimization, and the selective-vs-common strategy comparison.

Every driver returns plain row dictionaries (and writes schema-stable CSV
through ``write_csv``), so outputs are reproducible byte for byte for a
fixed scenario and seed.
"""

from __future__ import annotations

import csv
import os
from typing import Optional, Sequence

import numpy as np

from .analytic import EvalContext
from .optimizer import (
    BudgetRangeError,
    EnergyCurves,
    aggregate_breakdown,
    analytic_curves,
    optimal_common_rmax,
    optimal_rmax,
    rmax_for_d2d_budget,
    tabulated_curves,
)
from .scenario import Scenario, ScenarioError
from .sim import simulate_class

VALIDATION_THRESHOLD = 0.05
DEFAULT_VALIDATE_GRID = (10.0, 20.0, 30.0, 50.0, 80.0, 120.0)

VALIDATE_COLUMNS = [
    "class_id",
    "r_max_m",
    "analytic_e_total_j",
    "sim_e_total_j",
    "sim_stderr_total_j",
    "rel_diff",
    "within_threshold",
]
SWEEP_COLUMNS = [
    "class_id",
    "r_max_m",
    "source",
    "e_d2d_j",
    "e_i2d_j",
    "e_total_j",
    "offload_fraction",
    "e_d2d_stderr_j",
    "e_i2d_stderr_j",
    "e_total_stderr_j",
]
SWEEP_ARGMIN_COLUMNS = ["class_id", "source", "r_best_m", "e_total_j"]
OPTIMIZE_COLUMNS = [
    "class_id",
    "method",
    "w",
    "r_hat_m",
    "cost_j",
    "e_d2d_j",
    "e_i2d_j",
    "e_total_j",
    "offload_fraction",
]
COMPARE_SUMMARY_COLUMNS = [
    "w",
    "selective_e_d2d_j",
    "selective_e_i2d_j",
    "selective_cost_j",
    "common_r_m",
    "common_e_d2d_j",
    "common_e_i2d_j",
    "common_cost_j",
    "budget_feasible",
    "budget_r_m",
    "budget_e_d2d_j",
    "budget_e_i2d_j",
    "savings_vs_budget_pct",
    "savings_vs_common_pct",
]
COMPARE_CLASS_COLUMNS = ["w", "class_id", "method", "r_hat_m", "e_d2d_j", "e_i2d_j"]


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def write_csv(path, columns: Sequence[str], rows: Sequence[dict]):
    """Write rows with a fixed column set; float formatting is canonical so
    identical inputs give byte-identical files."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])


def _context(scenario: Scenario) -> EvalContext:
    return EvalContext(
        layout=scenario.layout,
        radio=scenario.radio,
        channel=scenario.channel,
        quad=scenario.quad,
    )


def _simulate(scenario: Scenario, cls, r_max):
    return simulate_class(
        cls,
        r_max,
        scenario.n_realizations,
        scenario.layout,
        scenario.radio,
        scenario.channel,
        scenario.base_seed,
    )


def cmd_validate(scenario: Scenario, r_values: Optional[Sequence[float]] = None):
    """Analytic vs simulated total energy for every timeout-0 class on an
    r_max grid; flags grid points outside the 5% band."""
    r_values = tuple(r_values) if r_values else DEFAULT_VALIDATE_GRID
    _check_r_values(r_values)
    ctx = _context(scenario)
    targets = [spec for spec in scenario.classes if spec.content.timeout_s == 0.0]
    if not targets:
        raise ScenarioError("validation needs at least one class with timeout_s = 0")
    rows = []
    for spec in targets:
        for r in sorted(r_values):
            analytic = ctx.breakdown(r, spec.content)
            sim = _simulate(scenario, spec.content, r)
            rel = abs(sim.breakdown.e_total_j - analytic.e_total_j) / analytic.e_total_j
            rows.append(
                {
                    "class_id": spec.class_id,
                    "r_max_m": r,
                    "analytic_e_total_j": analytic.e_total_j,
                    "sim_e_total_j": sim.breakdown.e_total_j,
                    "sim_stderr_total_j": sim.stderr_total_j,
                    "rel_diff": rel,
                    "within_threshold": rel <= VALIDATION_THRESHOLD,
                }
            )
    rows.sort(key=lambda row: (row["class_id"], row["r_max_m"]))
    all_pass = all(row["within_threshold"] for row in rows)
    return rows, all_pass


def _check_r_values(r_values):
    if not r_values:
        raise ScenarioError("at least one r_max value is required")
    if any(r < 0 for r in r_values):
        raise ScenarioError("r_max values must be nonnegative")


def cmd_sweep(scenario: Scenario, r_values: Sequence[float]):
    """Energy breakdown per class and r_max: analytic rows for timeout-0
    classes, simulated rows for every class."""
    _check_r_values(r_values)
    ctx = _context(scenario)
    rows = []
    for spec in scenario.classes:
        for r in sorted(set(float(v) for v in r_values)):
            if spec.content.timeout_s == 0.0:
                br = ctx.breakdown(r, spec.content)
                rows.append(
                    {
                        "class_id": spec.class_id,
                        "r_max_m": r,
                        "source": "analytic",
                        "e_d2d_j": br.e_d2d_j,
                        "e_i2d_j": br.e_i2d_j,
                        "e_total_j": br.e_total_j,
                        "offload_fraction": br.offload_fraction,
                        "e_d2d_stderr_j": 0.0,
                        "e_i2d_stderr_j": 0.0,
                        "e_total_stderr_j": 0.0,
                    }
                )
            sim = _simulate(scenario, spec.content, r)
            rows.append(
                {
                    "class_id": spec.class_id,
                    "r_max_m": r,
                    "source": "simulated",
                    "e_d2d_j": sim.breakdown.e_d2d_j,
                    "e_i2d_j": sim.breakdown.e_i2d_j,
                    "e_total_j": sim.breakdown.e_total_j,
                    "offload_fraction": sim.breakdown.offload_fraction,
                    "e_d2d_stderr_j": sim.stderr_d2d_j,
                    "e_i2d_stderr_j": sim.stderr_i2d_j,
                    "e_total_stderr_j": sim.stderr_total_j,
                }
            )
    rows.sort(key=lambda row: (row["class_id"], row["r_max_m"], row["source"]))

    argmin_rows = []
    for class_id in sorted({r["class_id"] for r in rows}):
        for source in ("analytic", "simulated"):
            group = [
                r for r in rows if r["class_id"] == class_id and r["source"] == source
            ]
            if not group:
                continue
            best = min(group, key=lambda row: (row["e_total_j"], row["r_max_m"]))
            argmin_rows.append(
                {
                    "class_id": class_id,
                    "source": source,
                    "r_best_m": best["r_max_m"],
                    "e_total_j": best["e_total_j"],
                }
            )
    return rows, argmin_rows


def _sim_grid(scenario: Scenario) -> np.ndarray:
    opt = scenario.optimizer
    return np.arange(0.0, opt.r_grid_max_m + 0.5 * opt.sim_grid_step_m, opt.sim_grid_step_m)


def simulated_curves(scenario: Scenario, cls) -> EnergyCurves:
    """Tabulated energy curves for one class from the simulator, sampled on
    the scenario's simulation grid."""
    grid = _sim_grid(scenario)
    results = [_simulate(scenario, cls, float(r)) for r in grid]
    return tabulated_curves(
        grid,
        [res.breakdown.e_d2d_j for res in results],
        [res.breakdown.e_i2d_j for res in results],
        [res.breakdown.offload_fraction for res in results],
    )


def cmd_optimize(scenario: Scenario, w: float):
    """Cost-minimizing r_max per class: closed-form for timeout-0 classes,
    grid argmin over simulated curves otherwise."""
    if not 0.0 <= w <= 1.0:
        raise ScenarioError("w must be in [0, 1]")
    ctx = _context(scenario)
    rows = []
    for spec in scenario.classes:
        if spec.content.timeout_s == 0.0:
            res = optimal_rmax(spec.content, w, ctx, scenario.optimizer)
            rows.append(
                {
                    "class_id": spec.class_id,
                    "method": "analytic",
                    "w": w,
                    "r_hat_m": res.r_hat_m,
                    "cost_j": res.cost_value,
                    "e_d2d_j": res.breakdown.e_d2d_j,
                    "e_i2d_j": res.breakdown.e_i2d_j,
                    "e_total_j": res.breakdown.e_total_j,
                    "offload_fraction": res.breakdown.offload_fraction,
                }
            )
        else:
            grid = _sim_grid(scenario)
            sims = [_simulate(scenario, spec.content, float(r)) for r in grid]
            costs = [
                w * s.breakdown.e_d2d_j + (1.0 - w) * s.breakdown.e_i2d_j for s in sims
            ]
            i = int(np.argmin(costs))
            best = sims[i].breakdown
            rows.append(
                {
                    "class_id": spec.class_id,
                    "method": "simulated",
                    "w": w,
                    "r_hat_m": float(grid[i]),
                    "cost_j": costs[i],
                    "e_d2d_j": best.e_d2d_j,
                    "e_i2d_j": best.e_i2d_j,
                    "e_total_j": best.e_total_j,
                    "offload_fraction": best.offload_fraction,
                }
            )
    return rows


def _class_curves(scenario: Scenario, ctx: EvalContext):
    """Energy curves for every class of the mix (analytic where valid,
    simulated otherwise). Curves do not depend on the cost weight, so they
    are built once per scenario."""
    out = []
    for spec in scenario.classes:
        if spec.content.timeout_s == 0.0:
            out.append((spec, analytic_curves(spec.content, ctx), "analytic"))
        else:
            out.append((spec, simulated_curves(scenario, spec.content), "simulated"))
    return out


def _selective_optimum(spec, curves: EnergyCurves, w, ctx, scenario):
    """Per-class cost-optimal range: full refinement on exact curves, grid
    argmin on tabulated ones."""
    if curves.exact:
        res = optimal_rmax(spec.content, w, ctx, scenario.optimizer)
        return res.r_hat_m, res.breakdown.e_d2d_j, res.breakdown.e_i2d_j
    grid = _sim_grid(scenario)
    costs = [curves.cost(float(r), w) for r in grid]
    i = int(np.argmin(costs))
    r = float(grid[i])
    return r, curves.e_d2d(r), curves.e_i2d(r)


def cmd_compare(scenario: Scenario, w_values: Sequence[float]):
    """Selective per-class range selection vs the common-range benchmark.

    For each weight: the selective strategy optimizes each class separately;
    the benchmark uses one common range, reported both at its own cost
    optimum and matched to the selective strategy's aggregate D2D budget.
    Savings are the relative I2D energy reduction of selective vs the
    budget-matched benchmark.
    """
    if not w_values:
        raise ScenarioError("at least one w value is required")
    if any(not 0.0 <= w <= 1.0 for w in w_values):
        raise ScenarioError("w values must lie in [0, 1]")
    ctx = _context(scenario)
    mix = scenario.mix
    with_curves = _class_curves(scenario, ctx)
    curve_list = [curves for _, curves, _ in with_curves]
    shares = np.array([spec.load_share * spec.content.popularity for spec, _, _ in with_curves])
    weights = shares / shares.sum()

    summary_rows, class_rows = [], []
    for w in sorted(set(float(v) for v in w_values)):
        sel_d2d = sel_i2d = 0.0
        for (spec, curves, method), u in zip(with_curves, weights):
            r_hat, e_d2d, e_i2d = _selective_optimum(spec, curves, w, ctx, scenario)
            sel_d2d += u * e_d2d
            sel_i2d += u * e_i2d
            class_rows.append(
                {
                    "w": w,
                    "class_id": spec.class_id,
                    "method": method,
                    "r_hat_m": r_hat,
                    "e_d2d_j": e_d2d,
                    "e_i2d_j": e_i2d,
                }
            )
        common = optimal_common_rmax(mix, w, ctx, scenario.optimizer, curves=curve_list)
        try:
            r_budget = rmax_for_d2d_budget(
                mix, sel_d2d, ctx, scenario.optimizer, curves=curve_list
            )
            budget_br = aggregate_breakdown(r_budget, mix, curve_list)
            feasible = True
        except BudgetRangeError:
            r_budget, budget_br, feasible = float("nan"), None, False
        summary_rows.append(
            {
                "w": w,
                "selective_e_d2d_j": sel_d2d,
                "selective_e_i2d_j": sel_i2d,
                "selective_cost_j": w * sel_d2d + (1.0 - w) * sel_i2d,
                "common_r_m": common.r_hat_m,
                "common_e_d2d_j": common.breakdown.e_d2d_j,
                "common_e_i2d_j": common.breakdown.e_i2d_j,
                "common_cost_j": common.cost_value,
                "budget_feasible": feasible,
                "budget_r_m": r_budget,
                "budget_e_d2d_j": budget_br.e_d2d_j if feasible else float("nan"),
                "budget_e_i2d_j": budget_br.e_i2d_j if feasible else float("nan"),
                "savings_vs_budget_pct": (
                    100.0 * (1.0 - sel_i2d / budget_br.e_i2d_j) if feasible else float("nan")
                ),
                "savings_vs_common_pct": 100.0 * (1.0 - sel_i2d / common.breakdown.e_i2d_j),
            }
        )
    return summary_rows, class_rows
