"""Content classes and the temporal request-intensity profile.

A content class bundles the popularity (fraction of users that will ever
request a content of the class), the gamma-shaped request intensity profile
describing *when* interested users request it, and the delay-tolerance
timeout. The profile is truncated at ``truncation_s`` and renormalized so it
integrates to exactly 1 on [0, truncation_s].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaln


@dataclass(frozen=True)
class ContentClass:
    """Tuple (popularity, scale_s, shape, timeout_s) plus the profile
    truncation horizon.

    With shape > 1 the request intensity peaks at (shape - 1) * scale_s
    seconds after content generation.
    """

    popularity: float
    scale_s: float
    shape: float
    timeout_s: float = 0.0
    truncation_s: float = 20000.0

    def __post_init__(self):
        if not 0.0 <= self.popularity <= 1.0:
            raise ValueError("popularity must be in [0, 1]")
        if self.scale_s <= 0:
            raise ValueError("scale_s must be positive")
        if self.shape <= 0:
            raise ValueError("shape must be positive")
        if self.timeout_s < 0:
            raise ValueError("timeout_s must be nonnegative")
        if self.truncation_s <= 0:
            raise ValueError("truncation_s must be positive")

    @property
    def truncation_mass(self) -> float:
        """Untruncated CDF mass below the truncation horizon (the
        renormalization constant)."""
        return float(gammainc(self.shape, self.truncation_s / self.scale_s))


@dataclass(frozen=True)
class TrafficMix:
    """Weighted collection of content classes; load shares sum to 1."""

    entries: tuple  # of (ContentClass, load_share) pairs

    def __post_init__(self):
        if len(self.entries) == 0:
            raise ValueError("traffic mix must contain at least one class")
        shares = [share for _, share in self.entries]
        if any(s < 0 for s in shares):
            raise ValueError("load shares must be nonnegative")
        total = sum(shares)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"load shares must sum to 1 (got {total})")

    @property
    def classes(self) -> tuple:
        return tuple(cls for cls, _ in self.entries)

    @property
    def shares(self) -> tuple:
        return tuple(share for _, share in self.entries)


def intensity(t, cls: ContentClass):
    """Renormalized request intensity profile f(t) in 1/s.

    Zero beyond the truncation horizon; integrates to 1 on [0, truncation_s].
    Accepts scalar or array ``t`` (t >= 0).
    """
    t = np.asarray(t, dtype=float)
    k, beta = cls.shape, cls.scale_s
    safe_t = np.where(t > 0.0, t, 1.0)  # placeholder, masked out below
    log_pdf = (
        (k - 1.0) * np.log(safe_t)
        - safe_t / beta
        - k * math.log(beta)
        - gammaln(k)
    )
    pdf = np.exp(log_pdf) / cls.truncation_mass
    # t = 0: zero density for shape > 1, finite for shape = 1, divergent
    # for shape < 1 (the true t->0+ limit in every case).
    if cls.shape == 1.0:
        at_zero = 1.0 / (beta * cls.truncation_mass)
    else:
        at_zero = 0.0 if cls.shape > 1.0 else np.inf
    pdf = np.where(t == 0.0, at_zero, pdf)
    pdf = np.where((t < 0.0) | (t > cls.truncation_s), 0.0, pdf)
    return pdf if pdf.ndim else float(pdf)


def cumulative(t, cls: ContentClass):
    """CDF of the request instant: fraction of eventually-interested users
    that have requested the content by time ``t``.

    Reaches exactly 1 at the truncation horizon.
    """
    t = np.asarray(t, dtype=float)
    raw = gammainc(cls.shape, np.clip(t, 0.0, None) / cls.scale_s)
    cdf = np.minimum(raw / cls.truncation_mass, 1.0)
    cdf = np.where(t >= cls.truncation_s, 1.0, cdf)
    return cdf if cdf.ndim else float(cdf)


def invert_cdf(u, cls: ContentClass):
    """Inverse of `cumulative` by bisection on [0, truncation_s].

    Absolute tolerance 1e-6 * truncation_s. u = 0 maps to exactly 0.
    """
    u = np.asarray(u, dtype=float)
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    lo = np.zeros_like(u)
    hi = np.full_like(u, cls.truncation_s)
    tol = 1e-6 * cls.truncation_s
    n_iter = max(1, math.ceil(math.log2(cls.truncation_s / tol)))
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        below = cumulative(mid, cls) < u
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = 0.5 * (lo + hi)
    out = np.where(u <= 0.0, 0.0, out)
    return float(out[0]) if scalar else out


def sample_request_time(cls: ContentClass, rng: np.random.Generator, size=None):
    """Draw request instants distributed with CDF `cumulative`.

    Deterministic for a fixed generator state. Returns a scalar when ``size``
    is None, else an array of that shape.
    """
    u = rng.random(size)
    return invert_cdf(u, cls)


def thinned_density(t, cls: ContentClass, rho: float):
    """Spatial density (UEs/m^2) of users that have requested by time ``t``:
    the full density thinned by popularity and by the request-time CDF."""
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    return rho * cls.popularity * cumulative(t, cls)
