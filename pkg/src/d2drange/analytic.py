"""Closed-form / quadrature evaluation of offloading probability and
per-delivery energy components.

For non-delay-tolerant classes (timeout 0), the average energy per delivery
splits into a D2D part, obtained by integrating the per-transmission energy
over the time-varying nearest-holder distance law, and an I2D part, the
non-offloaded fraction times the mean BS-to-device transmission energy.
Both parts are smooth integrals on compact supports and are evaluated with
Gauss-Legendre rules under a node-doubling convergence check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaincinv

from .layout import NetworkLayout, i2d_distance_pdf
from .radio import D2D, I2D, PathLossModel, RadioConfig, channel_gain, tx_energy
from .traffic import ContentClass, intensity, thinned_density

NODE_CAP = 4096  # per axis
_CHUNK = 4_000_000  # max elements of a 2-D integrand tensor held at once


class QuadratureError(RuntimeError):
    """Node-doubling failed to converge before the node cap."""


class AnalyticScopeError(ValueError):
    """Raised for delay-tolerant classes, which the closed-form model does
    not cover; use the discrete-event simulator instead."""


@dataclass(frozen=True)
class QuadratureSettings:
    """Starting node counts and the node-doubling convergence tolerance."""

    time_nodes: int = 64
    range_nodes: int = 64
    relative_tolerance: float = 1e-6

    def __post_init__(self):
        if self.time_nodes < 16 or self.range_nodes < 16:
            raise ValueError("node counts must be at least 16")
        if not 0.0 < self.relative_tolerance <= 1e-3:
            raise ValueError("relative_tolerance must be in (0, 1e-3]")


@dataclass(frozen=True)
class EnergyBreakdown:
    """Per-delivery average energies and the offloaded fraction."""

    e_total_j: float
    e_d2d_j: float
    e_i2d_j: float
    offload_fraction: float

    def __post_init__(self):
        if self.e_d2d_j < 0 or self.e_i2d_j < 0:
            raise ValueError("energy components must be nonnegative")
        if abs(self.e_total_j - (self.e_d2d_j + self.e_i2d_j)) > 1e-12 * max(
            self.e_total_j, 1e-300
        ):
            raise ValueError("total energy must equal the sum of components")
        if not 0.0 <= self.offload_fraction <= 1.0:
            raise ValueError("offload_fraction must be in [0, 1]")

    @classmethod
    def from_components(cls, e_d2d_j, e_i2d_j, offload_fraction):
        return cls(
            e_total_j=e_d2d_j + e_i2d_j,
            e_d2d_j=e_d2d_j,
            e_i2d_j=e_i2d_j,
            offload_fraction=offload_fraction,
        )


@lru_cache(maxsize=64)
def _leggauss(n: int):
    return np.polynomial.legendre.leggauss(n)


def _gl_nodes(n: int, a: float, b: float):
    """Gauss-Legendre nodes and weights mapped to [a, b]."""
    x, w = _leggauss(n)
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * w


def _converged(cur: float, prev: float, rtol: float) -> bool:
    return abs(cur - prev) <= rtol * max(abs(cur), abs(prev))


def _time_panels(cls: ContentClass):
    """Partition [0, truncation] at outer profile quantiles, then by decades
    through the tail, so the time nodes always resolve the request mass
    however far the truncation horizon extends beyond it."""
    edges = [0.0]
    for q in (0.005, 0.995):
        t = float(gammaincinv(cls.shape, q * cls.truncation_mass)) * cls.scale_s
        if edges[-1] < t < cls.truncation_s:
            edges.append(t)
    while 0.0 < edges[-1] < cls.truncation_s and len(edges) < 16:
        edges.append(min(edges[-1] * 10.0, cls.truncation_s))
    if edges[-1] < cls.truncation_s:
        edges.append(cls.truncation_s)
    return list(zip(edges[:-1], edges[1:]))


def _profile_nodes(cls: ContentClass, n_per_panel: int):
    """Gauss-Legendre nodes and weights over the profile support,
    ``n_per_panel`` nodes on each quantile panel."""
    xs, ws = [], []
    for a, b in _time_panels(cls):
        x, w = _gl_nodes(n_per_panel, a, b)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def _integrate_time_profile(f, cls: ContentClass, n0: int, rtol: float, label: str) -> float:
    """Node-doubled composite Gauss-Legendre integral of vectorized ``f``
    over the profile support."""
    prev = None
    n = n0
    while n <= NODE_CAP:
        t, w = _profile_nodes(cls, n)
        cur = float(w @ np.asarray(f(t), dtype=float))
        if prev is not None and _converged(cur, prev, rtol):
            return cur
        prev, n = cur, 2 * n
    raise QuadratureError(
        f"{label}: no convergence over the profile support up to {NODE_CAP} "
        f"nodes per panel (last estimates {prev})"
    )


def integrate_to_tolerance(f, a: float, b: float, n0: int, rtol: float, label: str) -> float:
    """Gauss-Legendre integral of vectorized ``f`` on [a, b], doubling the
    node count until two successive estimates agree to ``rtol``."""
    if a == b:
        return 0.0
    prev = None
    n = n0
    while n <= NODE_CAP:
        x, w = _gl_nodes(n, a, b)
        cur = float(w @ np.asarray(f(x), dtype=float))
        if prev is not None and _converged(cur, prev, rtol):
            return cur
        prev, n = cur, 2 * n
    raise QuadratureError(
        f"{label}: no convergence on [{a}, {b}] up to {NODE_CAP} nodes "
        f"(last estimates {prev})"
    )


def offload_probability(r_max: float, t, cls: ContentClass, rho: float):
    """Probability that a request at time ``t`` finds a holder within
    ``r_max``: the nearest-point law of the thinned HSPPP."""
    lam = thinned_density(t, cls, rho)
    p = 1.0 - np.exp(-lam * math.pi * r_max * r_max)
    return p if np.ndim(p) else float(p)


def d2d_distance_pdf(r, r_max: float, t: float, cls: ContentClass, rho: float):
    """PDF of the D2D transmission distance at time ``t``, conditioned on a
    holder existing within ``r_max``. Undefined when the thinned density is
    zero (no holders to condition on)."""
    lam = float(thinned_density(t, cls, rho))
    if lam <= 0.0:
        raise ValueError(
            "conditional D2D distance law undefined at zero thinned density"
        )
    r = np.asarray(r, dtype=float)
    norm = 1.0 - math.exp(-lam * math.pi * r_max * r_max)
    pdf = 2.0 * lam * math.pi * r * np.exp(-lam * math.pi * r * r) / norm
    pdf = np.where((r < 0.0) | (r > r_max), 0.0, pdf)
    return pdf if pdf.ndim else float(pdf)


def expected_d2d_energy(
    r_max: float,
    cls: ContentClass,
    rho: float,
    radio: RadioConfig,
    channel: PathLossModel,
    quad: QuadratureSettings,
) -> float:
    """Average D2D energy per delivery (averaged over *all* deliveries).

    Nested time x range quadrature of the unconditional integrand
    f(t) * 2*lam(t)*pi*r*exp(-lam(t)*pi*r^2) * energy(g_d2d(r)), which
    absorbs both the offload probability and the conditional distance law
    and is well defined even where the thinned density vanishes.
    """
    if r_max <= 0.0:
        return 0.0

    def eval_at(nt: int, nr: int) -> float:
        t, wt = _profile_nodes(cls, nt)
        r, wr = _gl_nodes(nr, 0.0, r_max)
        lam = np.asarray(thinned_density(t, cls, rho))
        ft = np.asarray(intensity(t, cls))
        energy_r = tx_energy(channel_gain(channel, D2D, r), radio)
        col = wr * r * energy_r
        r_sq = r * r
        total = 0.0
        nt_total = len(t)
        step = max(1, _CHUNK // nr)
        for lo in range(0, nt_total, step):
            hi = min(lo + step, nt_total)
            expo = np.exp(-math.pi * np.outer(lam[lo:hi], r_sq))
            inner = 2.0 * math.pi * lam[lo:hi] * (expo @ col)
            total += float(wt[lo:hi] @ (ft[lo:hi] * inner))
        return total

    prev = None
    nt, nr = quad.time_nodes, quad.range_nodes
    while nt <= NODE_CAP and nr <= NODE_CAP:
        cur = eval_at(nt, nr)
        if prev is not None and _converged(cur, prev, quad.relative_tolerance):
            return cur
        prev, nt, nr = cur, 2 * nt, 2 * nr
    raise QuadratureError(
        f"d2d energy integral: no convergence at r_max={r_max} "
        f"(node cap {NODE_CAP}, last estimates {prev})"
    )


@lru_cache(maxsize=128)
def expected_i2d_tx_energy(
    layout: NetworkLayout,
    radio: RadioConfig,
    channel: PathLossModel,
    quad: QuadratureSettings,
) -> float:
    """Mean energy of one I2D transmission to a uniform position in the
    cell; independent of the D2D range and of the content class.

    Integrated piecewise around the apothem, where the distance PDF has a
    kink.
    """

    def integrand(r):
        return i2d_distance_pdf(r, layout) * tx_energy(
            channel_gain(channel, I2D, r), radio
        )

    a = layout.apothem_m
    r_out = layout.cell_circumradius_m
    rtol = quad.relative_tolerance
    inner = integrate_to_tolerance(integrand, 0.0, a, quad.range_nodes, rtol, "i2d disc part")
    outer = integrate_to_tolerance(integrand, a, r_out, quad.range_nodes, rtol, "i2d corner part")
    return inner + outer


def _nonoffload_time_average(
    r_max: float, cls: ContentClass, rho: float, quad: QuadratureSettings
) -> float:
    """Request-weighted average of the non-offload probability,
    integral of f(t) * exp(-lam(t)*pi*r_max^2) over the profile support."""
    if r_max <= 0.0 or rho * cls.popularity == 0.0:
        return 1.0

    def integrand(t):
        lam = np.asarray(thinned_density(t, cls, rho))
        return np.asarray(intensity(t, cls)) * np.exp(-math.pi * lam * r_max * r_max)

    val = _integrate_time_profile(
        integrand, cls, quad.time_nodes, quad.relative_tolerance, "non-offload time average"
    )
    return min(max(val, 0.0), 1.0)


def expected_i2d_energy(
    r_max: float,
    cls: ContentClass,
    rho: float,
    layout: NetworkLayout,
    radio: RadioConfig,
    channel: PathLossModel,
    quad: QuadratureSettings,
) -> float:
    """Average I2D energy per delivery: non-offloaded fraction times the
    mean per-transmission I2D energy."""
    return _nonoffload_time_average(r_max, cls, rho, quad) * expected_i2d_tx_energy(
        layout, radio, channel, quad
    )


@lru_cache(maxsize=65536)
def energy_breakdown(
    r_max: float,
    cls: ContentClass,
    rho: float,
    layout: NetworkLayout,
    radio: RadioConfig,
    channel: PathLossModel,
    quad: QuadratureSettings,
) -> EnergyBreakdown:
    """Full analytic per-delivery energy split at D2D range ``r_max``.

    Only valid for timeout 0; delay-tolerant classes change the holder
    density in ways the closed-form thinning argument does not capture.
    Results are memoized (all inputs are immutable).
    """
    if cls.timeout_s > 0.0:
        raise AnalyticScopeError(
            "analytic energy model covers timeout_s = 0 only; "
            "use the simulator (sim.simulate_class) for delay-tolerant classes"
        )
    if r_max < 0.0:
        raise ValueError("r_max must be nonnegative")
    e_d2d = expected_d2d_energy(r_max, cls, rho, radio, channel, quad)
    nonoff = _nonoffload_time_average(r_max, cls, rho, quad)
    e_i2d = nonoff * expected_i2d_tx_energy(layout, radio, channel, quad)
    return EnergyBreakdown.from_components(e_d2d, e_i2d, 1.0 - nonoff)


def cost(
    r_max: float,
    cls: ContentClass,
    w: float,
    rho: float,
    layout: NetworkLayout,
    radio: RadioConfig,
    channel: PathLossModel,
    quad: QuadratureSettings,
) -> float:
    """Weighted delivery cost w * E_d2d + (1 - w) * E_i2d in joules."""
    if not 0.0 <= w <= 1.0:
        raise ValueError("weight w must be in [0, 1]")
    br = energy_breakdown(r_max, cls, rho, layout, radio, channel, quad)
    return w * br.e_d2d_j + (1.0 - w) * br.e_i2d_j


@dataclass(frozen=True)
class EvalContext:
    """Bundle of everything needed to price a delivery, passed around by the
    optimizer and the experiment drivers."""

    layout: NetworkLayout
    radio: RadioConfig
    channel: PathLossModel
    quad: QuadratureSettings = QuadratureSettings()

    @property
    def rho(self) -> float:
        return self.layout.ue_density

    def breakdown(self, r_max: float, cls: ContentClass) -> EnergyBreakdown:
        return energy_breakdown(
            r_max, cls, self.rho, self.layout, self.radio, self.channel, self.quad
        )

    def cost(self, r_max: float, cls: ContentClass, w: float) -> float:
        return cost(
            r_max, cls, w, self.rho, self.layout, self.radio, self.channel, self.quad
        )
