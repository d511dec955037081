"""Radio-level primitives: log-distance channel gain and per-transmission energy.

A transmission of ``K`` bits over ``T`` seconds in bandwidth ``B`` needs a
transmit power that closes the Shannon capacity budget against noise power
density ``sigma2`` and channel gain ``g``; the consumed energy is then

    energy(g) = (1 / g) * B * sigma2 * (2 ** (K / (B * T)) - 1)

which is the single formula everything downstream averages over distances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

D2D = "d2d"
I2D = "i2d"


def db_to_linear(db: float) -> float:
    """Convert a dB ratio to linear scale."""
    return 10.0 ** (db / 10.0)


def dbm_per_hz_to_w_per_hz(dbm: float) -> float:
    """Convert a power spectral density from dBm/Hz to W/Hz."""
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class RadioConfig:
    """Link-budget parameters shared by every transmission in a scenario.

    ``noise_figure_db`` is a dimensionless ratio in dB and is added to the
    noise spectral density, so the effective density is
    ``noise_psd_dbm_hz + noise_figure_db`` in dBm/Hz.
    """

    bandwidth_hz: float = 1e6
    slot_duration_s: float = 1.0
    packet_bits: float = 1e6
    noise_psd_dbm_hz: float = -174.0
    noise_figure_db: float = 11.0

    def __post_init__(self):
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth_hz must be positive")
        if self.slot_duration_s <= 0:
            raise ValueError("slot_duration_s must be positive")
        if self.packet_bits <= 0:
            raise ValueError("packet_bits must be positive")

    @property
    def noise_power_density(self) -> float:
        """Effective noise power density sigma^2 in W/Hz (always positive)."""
        return dbm_per_hz_to_w_per_hz(self.noise_psd_dbm_hz + self.noise_figure_db)

    @property
    def spectral_load(self) -> float:
        """K / (B * T), the spectral efficiency demanded by one packet."""
        return self.packet_bits / (self.bandwidth_hz * self.slot_duration_s)


@dataclass(frozen=True)
class LinkLoss:
    """Log-distance path loss for one link type.

    PL(d) = intercept_db + slope_db_per_decade * log10(d)
            + 20 * log10(carrier_ghz),  d clamped below at reference_distance_m.
    """

    intercept_db: float
    slope_db_per_decade: float
    carrier_ghz: float = 2.0
    reference_distance_m: float = 1.0

    def __post_init__(self):
        if self.slope_db_per_decade <= 0:
            raise ValueError("slope_db_per_decade must be positive")
        if self.reference_distance_m <= 0:
            raise ValueError("reference_distance_m must be positive")
        if self.carrier_ghz <= 0:
            raise ValueError("carrier_ghz must be positive")


@dataclass(frozen=True)
class PathLossModel:
    """Per-link-type path loss; defaults are representative urban-micro LOS
    exponents (D2D slightly steeper than BS-to-device)."""

    d2d: LinkLoss = LinkLoss(intercept_db=28.0, slope_db_per_decade=22.7)
    i2d: LinkLoss = LinkLoss(intercept_db=28.0, slope_db_per_decade=22.0)

    def link(self, link_type: str) -> LinkLoss:
        if link_type == D2D:
            return self.d2d
        if link_type == I2D:
            return self.i2d
        raise ValueError(f"unknown link type {link_type!r} (expected 'd2d' or 'i2d')")


def channel_gain(model: PathLossModel, link_type: str, r):
    """Dimensionless channel gain 10**(-PL/10) at distance ``r`` meters.

    Accepts scalar or array ``r``; distances below the reference distance
    (including 0) are clamped to it, so the gain is finite everywhere and
    strictly nonincreasing beyond the reference distance.
    """
    loss = model.link(link_type)
    d = np.maximum(np.asarray(r, dtype=float), loss.reference_distance_m)
    pl_db = (
        loss.intercept_db
        + loss.slope_db_per_decade * np.log10(d)
        + 20.0 * np.log10(loss.carrier_ghz)
    )
    gain = 10.0 ** (-pl_db / 10.0)
    return gain if gain.ndim else float(gain)


def tx_energy(gain, radio: RadioConfig):
    """Energy in joules of one packet transmission at channel gain ``gain``.

    Scales as 1/gain; raises ValueError for nonpositive gains.
    """
    g = np.asarray(gain, dtype=float)
    if np.any(g <= 0.0):
        raise ValueError("channel gain must be positive")
    e = (
        radio.bandwidth_hz
        * radio.noise_power_density
        * (2.0 ** radio.spectral_load - 1.0)
        / g
    )
    return e if e.ndim else float(e)


def tx_energy_at(model: PathLossModel, link_type: str, r, radio: RadioConfig):
    """Convenience composition: per-transmission energy at distance ``r``."""
    return tx_energy(channel_gain(model, link_type, r), radio)
