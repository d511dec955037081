"""d2drange: energy-optimal D2D transmission range planning for cellular
content offloading.

The package pairs a closed-form model of the per-delivery energy split
(valid for non-delay-tolerant traffic) with a discrete-event Monte Carlo
simulator of the offloading protocol (valid for any delay tolerance), and
optimizes the per-class maximum D2D range against either.
"""

from ._kernels import BACKEND as kernel_backend
from .analytic import (
    AnalyticScopeError,
    EnergyBreakdown,
    EvalContext,
    QuadratureError,
    QuadratureSettings,
    cost,
    d2d_distance_pdf,
    energy_breakdown,
    expected_d2d_energy,
    expected_i2d_energy,
    expected_i2d_tx_energy,
    offload_probability,
)
from .layout import (
    NetworkLayout,
    UEField,
    generate_ue_field,
    i2d_distance_pdf,
    point_in_hexagon,
)
from .optimizer import (
    BudgetRangeError,
    EnergyCurves,
    OptimizationResult,
    OptimizerSettings,
    analytic_curves,
    optimal_common_rmax,
    optimal_rmax,
    rmax_for_d2d_budget,
    tabulated_curves,
)
from .radio import (
    D2D,
    I2D,
    LinkLoss,
    PathLossModel,
    RadioConfig,
    channel_gain,
    tx_energy,
)
from .scenario import Scenario, ScenarioError, load_scenario
from .sim import (
    DeliveryRecord,
    RequestEvent,
    SimOutcome,
    SimulatedBreakdown,
    UniformGridIndex,
    nearest_holder,
    run_content_delivery,
    simulate_class,
)
from .traffic import (
    ContentClass,
    TrafficMix,
    cumulative,
    intensity,
    invert_cdf,
    sample_request_time,
    thinned_density,
)

__version__ = "0.1.0"
