"""Scalar minimization of the delivery cost over the D2D range, plus the
common-range benchmark and D2D-budget matching used for strategy comparisons.

The per-class cost is the sum of an increasing (D2D) and a decreasing (I2D)
term, so it has a global minimum; a coarse grid brackets it and a
golden-section pass (with a short parabolic polish) refines it. Aggregate
quantities over a traffic mix are per-delivery averages, weighting each
class by load share times popularity (delivered volume scales with
popularity).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .analytic import EnergyBreakdown, EvalContext
from .traffic import ContentClass, TrafficMix

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

BUDGET_BISECT_WIDTH_M = 1e-4  # fixed bisection resolution, keeps r(budget) monotone


class BudgetRangeError(ValueError):
    """Requested D2D budget lies outside the reachable energy range."""


@dataclass(frozen=True)
class OptimizerSettings:
    r_grid_max_m: float = 300.0
    grid_step_m: float = 2.0
    golden_tol_m: float = 0.1
    sim_grid_step_m: float = 10.0  # grid for simulated (noisy) energy curves

    def __post_init__(self):
        if self.r_grid_max_m <= 0 or self.grid_step_m <= 0:
            raise ValueError("grid extents must be positive")
        if self.golden_tol_m <= 0:
            raise ValueError("golden_tol_m must be positive")
        if self.sim_grid_step_m <= 0:
            raise ValueError("sim_grid_step_m must be positive")


@dataclass(frozen=True)
class OptimizationResult:
    r_hat_m: float
    cost_value: float
    breakdown: EnergyBreakdown
    weight: float


@dataclass(frozen=True)
class EnergyCurves:
    """Per-class energy components as functions of the D2D range.

    ``exact`` marks noise-free (analytic) curves, which are safe to refine
    with golden-section; tabulated simulated curves are grid-argmin only.
    """

    e_d2d: Callable[[float], float]
    e_i2d: Callable[[float], float]
    offload: Callable[[float], float]
    exact: bool = True

    def cost(self, r: float, w: float) -> float:
        return w * self.e_d2d(r) + (1.0 - w) * self.e_i2d(r)


def analytic_curves(cls: ContentClass, ctx: EvalContext) -> EnergyCurves:
    """Noise-free curves from the closed-form model (timeout 0 only)."""
    return EnergyCurves(
        e_d2d=lambda r: ctx.breakdown(r, cls).e_d2d_j,
        e_i2d=lambda r: ctx.breakdown(r, cls).e_i2d_j,
        offload=lambda r: ctx.breakdown(r, cls).offload_fraction,
        exact=True,
    )


def tabulated_curves(r_grid, e_d2d, e_i2d, offload) -> EnergyCurves:
    """Piecewise-linear curves from sampled (typically simulated) values.

    The D2D component is forced nondecreasing with a running maximum so that
    budget bisection stays well posed; sampling noise is the only thing the
    running maximum can remove.
    """
    r_grid = np.asarray(r_grid, dtype=float)
    d2d_mono = np.maximum.accumulate(np.asarray(e_d2d, dtype=float))
    e_i2d = np.asarray(e_i2d, dtype=float)
    offload = np.asarray(offload, dtype=float)
    return EnergyCurves(
        e_d2d=lambda r: float(np.interp(r, r_grid, d2d_mono)),
        e_i2d=lambda r: float(np.interp(r, r_grid, e_i2d)),
        offload=lambda r: float(np.interp(r, r_grid, offload)),
        exact=False,
    )


def _golden_section(f, a: float, b: float, tol: float):
    """Golden-section search for the minimum of unimodal ``f`` on [a, b];
    returns the best evaluated (x, f(x))."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    best = min((fc, c), (fd, d))
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
            best = min(best, (fc, c))
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
            best = min(best, (fd, d))
    return best[1], best[0]


def _parabolic_polish(f, x: float, fx: float, lo: float, hi: float, h: float):
    """A few successive parabolic steps around ``x`` to sharpen the minimum
    well below the golden-section tolerance."""
    for _ in range(5):
        x1, x2 = max(lo, x - h), min(hi, x + h)
        if x2 - x1 <= 0:
            break
        f1, f2 = f(x1), f(x2)
        denom = (x - x1) * (fx - f2) - (x - x2) * (fx - f1)
        if denom == 0:
            break
        num = (x - x1) ** 2 * (fx - f2) - (x - x2) ** 2 * (fx - f1)
        cand = x - 0.5 * num / denom
        cand = min(max(cand, lo), hi)
        fcand = f(cand)
        pts = sorted([(fx, x), (f1, x1), (f2, x2), (fcand, cand)])
        fx, x = pts[0]
        h *= 0.25
        if h < 1e-7:
            break
    return x, fx


def _minimize_scalar(f, settings: OptimizerSettings, refine: bool = True):
    """Coarse grid scan, then golden-section refinement of the bracketing
    interval. Ties go to the smallest range. Refinement never degrades the
    grid minimum (best evaluated point wins)."""
    grid = np.arange(0.0, settings.r_grid_max_m + 0.5 * settings.grid_step_m, settings.grid_step_m)
    values = [f(r) for r in grid]
    i = int(np.argmin(values))  # first minimum: smallest r on plateaus
    candidates = [(values[i], grid[i])]
    if refine:
        lo = grid[max(i - 1, 0)]
        hi = grid[min(i + 1, len(grid) - 1)]
        x, fx = _golden_section(f, lo, hi, settings.golden_tol_m)
        x, fx = _parabolic_polish(f, x, fx, lo, hi, settings.golden_tol_m)
        candidates.append((fx, x))
    fbest, rbest = min(candidates, key=lambda p: (p[0], p[1]))
    return float(rbest), float(fbest)


def optimal_rmax(
    cls: ContentClass,
    w: float,
    ctx: EvalContext,
    settings: OptimizerSettings = OptimizerSettings(),
) -> OptimizationResult:
    """Cost-minimizing D2D range for one class (analytic path, timeout 0)."""
    if not 0.0 <= w <= 1.0:
        raise ValueError("weight w must be in [0, 1]")
    r_hat, cost_val = _minimize_scalar(lambda r: ctx.cost(r, cls, w), settings)
    return OptimizationResult(
        r_hat_m=r_hat,
        cost_value=cost_val,
        breakdown=ctx.breakdown(r_hat, cls),
        weight=w,
    )


def _mix_weights(mix: TrafficMix) -> np.ndarray:
    """Per-delivery aggregate weights: load share times popularity,
    normalized."""
    w = np.array([share * cls.popularity for cls, share in mix.entries])
    total = w.sum()
    if total <= 0.0:
        raise ValueError("aggregate weights are all zero (no deliveries)")
    return w / total


def _resolve_curves(
    mix: TrafficMix, ctx: EvalContext, curves: Optional[Sequence[EnergyCurves]]
) -> Sequence[EnergyCurves]:
    if curves is not None:
        if len(curves) != len(mix.entries):
            raise ValueError("one energy curve set per mix entry is required")
        return curves
    for cls in mix.classes:
        if cls.timeout_s > 0.0:
            raise ValueError(
                "delay-tolerant classes need precomputed simulated energy curves"
            )
    return [analytic_curves(cls, ctx) for cls in mix.classes]


def aggregate_breakdown(
    r: float, mix: TrafficMix, curves: Sequence[EnergyCurves]
) -> EnergyBreakdown:
    """Per-delivery energy split of the aggregate traffic at common range ``r``."""
    u = _mix_weights(mix)
    e_d2d = float(sum(ui * c.e_d2d(r) for ui, c in zip(u, curves)))
    e_i2d = float(sum(ui * c.e_i2d(r) for ui, c in zip(u, curves)))
    off = float(sum(ui * c.offload(r) for ui, c in zip(u, curves)))
    return EnergyBreakdown.from_components(e_d2d, e_i2d, min(max(off, 0.0), 1.0))


def optimal_common_rmax(
    mix: TrafficMix,
    w: float,
    ctx: EvalContext,
    settings: OptimizerSettings = OptimizerSettings(),
    curves: Optional[Sequence[EnergyCurves]] = None,
) -> OptimizationResult:
    """Best single D2D range applied to every class of the mix (the
    traffic-oblivious benchmark)."""
    if not 0.0 <= w <= 1.0:
        raise ValueError("weight w must be in [0, 1]")
    curves = _resolve_curves(mix, ctx, curves)
    u = _mix_weights(mix)

    def agg_cost(r: float) -> float:
        return float(sum(ui * c.cost(r, w) for ui, c in zip(u, curves)))

    refine = all(c.exact for c in curves)
    r_hat, cost_val = _minimize_scalar(agg_cost, settings, refine=refine)
    return OptimizationResult(
        r_hat_m=r_hat,
        cost_value=cost_val,
        breakdown=aggregate_breakdown(r_hat, mix, curves),
        weight=w,
    )


def rmax_for_d2d_budget(
    mix: TrafficMix,
    budget_j: float,
    ctx: EvalContext,
    settings: OptimizerSettings = OptimizerSettings(),
    curves: Optional[Sequence[EnergyCurves]] = None,
) -> float:
    """Common range whose aggregate D2D energy per delivery matches
    ``budget_j``, found by bisection on the nondecreasing aggregate D2D
    curve.

    The bisection runs to a fixed spatial resolution, which makes the
    result monotone in the budget.
    """
    curves = _resolve_curves(mix, ctx, curves)
    u = _mix_weights(mix)

    def agg_d2d(r: float) -> float:
        return float(sum(ui * c.e_d2d(r) for ui, c in zip(u, curves)))

    top = agg_d2d(settings.r_grid_max_m)
    if budget_j < 0.0 or budget_j > top:
        raise BudgetRangeError(
            f"budget {budget_j} J outside the reachable aggregate D2D range "
            f"[0, {top}] J at r_grid_max {settings.r_grid_max_m} m"
        )
    if budget_j == 0.0:
        return 0.0
    lo, hi = 0.0, settings.r_grid_max_m
    steps = math.ceil(math.log2((hi - lo) / BUDGET_BISECT_WIDTH_M))
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if agg_d2d(mid) < budget_j:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
