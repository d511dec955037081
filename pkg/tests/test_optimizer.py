import numpy as np
import pytest

from d2drange.optimizer import (
    BudgetRangeError,
    OptimizerSettings,
    aggregate_breakdown,
    analytic_curves,
    optimal_common_rmax,
    optimal_rmax,
    rmax_for_d2d_budget,
    tabulated_curves,
)
from d2drange.traffic import ContentClass, TrafficMix

SETTINGS = OptimizerSettings()


def test_full_d2d_weight_turns_d2d_off(cls_low, ctx):
    res = optimal_rmax(cls_low, 1.0, ctx)
    assert res.r_hat_m == 0.0
    assert res.breakdown.e_d2d_j == 0.0


def test_weight_bounds(cls_low, ctx):
    with pytest.raises(ValueError):
        optimal_rmax(cls_low, -0.1, ctx)
    with pytest.raises(ValueError):
        optimal_rmax(cls_low, 1.01, ctx)


def test_matches_exhaustive_fine_grid(cls_low, ctx):
    # brute-force oracle: exhaustive 0.05 m scan of the same cost function
    w = 0.5
    res = optimal_rmax(cls_low, w, ctx)
    fine = np.arange(0.0, SETTINGS.r_grid_max_m + 1e-9, 0.05)
    costs = np.array([ctx.cost(r, cls_low, w) for r in fine])
    j = int(np.argmin(costs))
    assert abs(res.r_hat_m - fine[j]) <= 0.2
    assert res.cost_value <= costs[j] * (1.0 + 1e-9)


def test_higher_popularity_never_needs_larger_range(cls_low, cls_high, ctx):
    lo = optimal_rmax(cls_low, 0.5, ctx)
    hi = optimal_rmax(cls_high, 0.5, ctx)
    assert hi.r_hat_m <= lo.r_hat_m + 0.2


def test_heavier_d2d_weight_never_enlarges_range(cls_low, ctx):
    r_prev = None
    for w in (0.3, 0.5, 0.7, 0.9):
        r = optimal_rmax(cls_low, w, ctx).r_hat_m
        if r_prev is not None:
            assert r <= r_prev + 0.2
        r_prev = r


def test_refinement_never_worse_than_coarse_grid(cls_low, ctx):
    w = 0.4
    res = optimal_rmax(cls_low, w, ctx)
    grid = np.arange(0.0, SETTINGS.r_grid_max_m + 1.0, SETTINGS.grid_step_m)
    coarse_min = min(ctx.cost(r, cls_low, w) for r in grid)
    assert res.cost_value <= coarse_min


def test_single_class_mix_equals_per_class(cls_low, ctx):
    mix = TrafficMix(entries=((cls_low, 1.0),))
    per = optimal_rmax(cls_low, 0.5, ctx)
    com = optimal_common_rmax(mix, 0.5, ctx)
    assert abs(com.r_hat_m - per.r_hat_m) <= 0.2
    assert com.cost_value == pytest.approx(per.cost_value, rel=1e-9)


def test_identical_classes_with_different_shares(cls_low, ctx):
    mix1 = TrafficMix(entries=((cls_low, 0.3), (cls_low, 0.7)))
    mix2 = TrafficMix(entries=((cls_low, 1.0),))
    r1 = optimal_common_rmax(mix1, 0.5, ctx).r_hat_m
    r2 = optimal_common_rmax(mix2, 0.5, ctx).r_hat_m
    assert abs(r1 - r2) <= 0.2


def test_common_optimum_dominated_by_selective(cls_low, cls_high, ctx):
    mix = TrafficMix(entries=((cls_low, 0.5), (cls_high, 0.5)))
    w = 0.5
    common = optimal_common_rmax(mix, w, ctx)
    shares = np.array([0.5 * cls_low.popularity, 0.5 * cls_high.popularity])
    u = shares / shares.sum()
    selective = sum(
        ui * optimal_rmax(cls, w, ctx).cost_value
        for ui, cls in zip(u, (cls_low, cls_high))
    )
    assert common.cost_value >= selective - 1e-18


def test_common_rmax_on_tabulated_curves_uses_grid_argmin(cls_low, ctx):
    grid = np.arange(0.0, 301.0, 50.0)
    curves = tabulated_curves(
        grid,
        e_d2d=grid * 1e-9,
        e_i2d=np.maximum(1e-6 - grid * 5e-9, 2e-7),
        offload=np.minimum(grid / 300.0, 1.0),
    )
    mix = TrafficMix(entries=((cls_low, 1.0),))
    res = optimal_common_rmax(mix, 0.5, ctx, curves=[curves])
    # grid argmin only: result must be one of the coarse grid points
    assert res.r_hat_m in np.arange(0.0, 301.0, SETTINGS.grid_step_m)


def test_budget_zero_gives_zero_range(cls_low, ctx):
    mix = TrafficMix(entries=((cls_low, 1.0),))
    assert rmax_for_d2d_budget(mix, 0.0, ctx) == 0.0


def test_budget_round_trip(cls_low, cls_high, ctx):
    mix = TrafficMix(entries=((cls_low, 0.5), (cls_high, 0.5)))
    curves = [analytic_curves(cls, ctx) for cls in mix.classes]
    u = np.array([0.5 * cls_low.popularity, 0.5 * cls_high.popularity])
    u = u / u.sum()
    for r in (25.0, 60.0, 140.0):
        budget = float(sum(ui * c.e_d2d(r) for ui, c in zip(u, curves)))
        back = rmax_for_d2d_budget(mix, budget, ctx, curves=curves)
        assert abs(back - r) <= 0.2


def test_budget_at_common_optimum_recovers_it(cls_low, cls_high, ctx):
    mix = TrafficMix(entries=((cls_low, 0.5), (cls_high, 0.5)))
    common = optimal_common_rmax(mix, 0.5, ctx)
    budget = common.breakdown.e_d2d_j
    back = rmax_for_d2d_budget(mix, budget, ctx)
    assert abs(back - common.r_hat_m) <= 0.2


def test_budget_monotone(cls_low, ctx):
    mix = TrafficMix(entries=((cls_low, 1.0),))
    curves = [analytic_curves(cls_low, ctx)]
    top = curves[0].e_d2d(SETTINGS.r_grid_max_m)
    budgets = np.linspace(0.0, top, 12)
    radii = [rmax_for_d2d_budget(mix, b, ctx, curves=curves) for b in budgets]
    assert np.all(np.diff(radii) >= 0)


def test_budget_out_of_range(cls_low, ctx):
    mix = TrafficMix(entries=((cls_low, 1.0),))
    with pytest.raises(BudgetRangeError) as err:
        rmax_for_d2d_budget(mix, 1.0, ctx)  # 1 joule per delivery is absurd
    assert "reachable" in str(err.value)
    with pytest.raises(BudgetRangeError):
        rmax_for_d2d_budget(mix, -1e-12, ctx)


def test_aggregate_breakdown_weights_by_share_and_popularity(cls_low, cls_high, ctx):
    mix = TrafficMix(entries=((cls_low, 0.5), (cls_high, 0.5)))
    curves = [analytic_curves(cls, ctx) for cls in mix.classes]
    agg = aggregate_breakdown(40.0, mix, curves)
    u = np.array([0.5 * 0.2, 0.5 * 0.8])
    u = u / u.sum()
    expected_d2d = sum(
        ui * ctx.breakdown(40.0, cls).e_d2d_j for ui, cls in zip(u, mix.classes)
    )
    assert agg.e_d2d_j == pytest.approx(expected_d2d, rel=1e-12)


def test_settings_validation():
    with pytest.raises(ValueError):
        OptimizerSettings(grid_step_m=0.0)
    with pytest.raises(ValueError):
        OptimizerSettings(golden_tol_m=-1.0)
