"""Physical downlink model: fading, channel gain, interference-limited rate, delay.

A single transmitter serves ``num_users`` receivers over ``num_channels``
orthogonal channels. Per-channel noise power is ``bandwidth_hz *
noise_psd_w_per_hz``; small-scale fading is redrawn independently every step
as unit-mean power fading (squared Rayleigh magnitude), so the distance term
``l**(-alpha)`` is the only large-scale factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class UnallocatedUserError(ValueError):
    """Rate requested for a user that holds no channel."""


def _frozen_vector(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-D vector")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class RadioConfig:
    """Static physical parameters.

    Units: bandwidth in Hz, noise as one-sided PSD in W/Hz, transmit powers
    in W, distances in m. The path-loss exponent is dimensionless.
    """

    bandwidth_hz: float
    noise_psd_w_per_hz: float
    path_loss_exponent: float
    num_users: int
    num_channels: int
    tx_power_w: np.ndarray  # (N,)
    distance_m: np.ndarray  # (N,)

    def __post_init__(self):
        object.__setattr__(self, "tx_power_w", _frozen_vector(self.tx_power_w, "tx_power_w"))
        object.__setattr__(self, "distance_m", _frozen_vector(self.distance_m, "distance_m"))
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth_hz must be > 0")
        if self.noise_psd_w_per_hz <= 0:
            raise ValueError("noise_psd_w_per_hz must be > 0")
        if self.path_loss_exponent <= 0:
            raise ValueError("path_loss_exponent must be > 0")
        if self.num_users < 1:
            raise ValueError("num_users must be >= 1")
        if self.num_channels < 1:
            raise ValueError("num_channels must be >= 1")
        if self.tx_power_w.shape != (self.num_users,):
            raise ValueError("tx_power_w must have length num_users")
        if self.distance_m.shape != (self.num_users,):
            raise ValueError("distance_m must have length num_users")
        if not np.all(self.tx_power_w > 0):
            raise ValueError("tx_power_w entries must be > 0")
        if not np.all(self.distance_m > 0):
            raise ValueError("distance_m entries must be > 0")

    @property
    def noise_power_w(self) -> float:
        """Total noise power per channel: bandwidth * PSD."""
        return self.bandwidth_hz * self.noise_psd_w_per_hz

    def path_gain(self) -> np.ndarray:
        """Large-scale gain l**(-alpha) per user, shape (N,)."""
        return self.distance_m ** (-self.path_loss_exponent)


@dataclass(frozen=True)
class ChannelRealization:
    """One step of small-scale fading and the resulting power gains.

    ``gain[n, m] == fading[n, m] * distance_m[n] ** (-alpha)`` exactly.
    """

    gain: np.ndarray  # (N, M)
    fading: np.ndarray  # (N, M)

    def __post_init__(self):
        for name in ("gain", "fading"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.gain.shape != self.fading.shape:
            raise ValueError("gain and fading must share a shape")

    @classmethod
    def from_fading(cls, config: RadioConfig, fading) -> "ChannelRealization":
        """Build a realization from explicit fading values (tests, replay)."""
        fading = np.asarray(fading, dtype=float)
        gain = fading * config.path_gain()[:, None]
        return cls(gain=gain, fading=fading)


@dataclass(frozen=True)
class Allocation:
    """Per-user channel assignment; 0 means no channel (local computation)."""

    channel_of: np.ndarray  # (N,) ints in [0, M]

    def __post_init__(self):
        arr = np.array(self.channel_of, dtype=np.int64)
        arr.setflags(write=False)
        object.__setattr__(self, "channel_of", arr)
        if arr.ndim != 1:
            raise ValueError("channel_of must be a 1-D vector")
        if np.any(arr < 0):
            raise ValueError("channel indices must be >= 0")

    def allocated(self) -> np.ndarray:
        """Boolean mask of users holding a channel."""
        return self.channel_of > 0


def sample_channel_realization(config: RadioConfig, rng: np.random.Generator) -> ChannelRealization:
    """Draw i.i.d. unit-mean exponential power fading and derive gains."""
    fading = rng.exponential(1.0, size=(config.num_users, config.num_channels))
    return ChannelRealization.from_fading(config, fading)


def transmission_rate(
    alloc: Allocation,
    realization: ChannelRealization,
    config: RadioConfig,
    user: int,
) -> float:
    """Downlink rate in bits/s for ``user`` under the given allocation.

    Shannon rate with co-channel interference; all signals emanate from the
    single transmitter, so every interfering signal arrives through the
    receiving user's own gain on the shared channel.
    """
    m = int(alloc.channel_of[user])
    if m == 0:
        raise UnallocatedUserError(f"user {user} has no channel")
    h = float(realization.gain[user, m - 1])
    same = (alloc.channel_of == m)
    interference = float(config.tx_power_w[same].sum() - config.tx_power_w[user]) * h
    noise = config.noise_power_w
    sinr = float(config.tx_power_w[user]) * h / (interference + noise)
    return config.bandwidth_hz * math.log2(1.0 + sinr)


def transmission_delay(data_bits: float, rate: float) -> float:
    """Seconds needed to push ``data_bits`` through ``rate`` bits/s."""
    if rate <= 0:
        raise ValueError(f"rate must be > 0, got {rate}")
    if data_bits < 0:
        raise ValueError("data_bits must be >= 0")
    return data_bits / rate


@dataclass(frozen=True)
class CalibrationReport:
    """Monte-Carlo summary of the sole-occupancy delay-exceedance ratio d/tau."""

    draws: int
    ratio_min: float
    ratio_median: float
    ratio_max: float
    frac_dissatisfied: float  # fraction of draws at or below the satisfaction threshold
    threshold_ratio: float  # d/tau value where satisfaction crosses the threshold
    degenerate: bool  # >99% of draws on one side of the threshold

    @property
    def frac_satisfied(self) -> float:
        return 1.0 - self.frac_dissatisfied


def calibration_report(
    config: RadioConfig,
    tolerable_delay_s,
    data_bits_range: tuple[float, float],
    rng: np.random.Generator,
    draws: int = 2000,
    dissatisfaction_level: float = -0.5,
) -> CalibrationReport:
    """Sample the distribution of d/tau for users alone on a channel.

    Each draw picks a uniform (user, channel) pair, fresh fading and a fresh
    demand, and computes delay over the interference-free rate. The report
    flags DEGENERATE when more than 99% of draws land on one side of the
    dissatisfaction threshold, i.e. when the QoS constraint can never bind.
    """
    if draws < 1000:
        raise ValueError("calibration needs at least 1000 draws")
    tau = np.asarray(tolerable_delay_s, dtype=float)
    low, high = data_bits_range
    users = rng.integers(0, config.num_users, size=draws)
    fading = rng.exponential(1.0, size=draws)
    demand = rng.uniform(low, high, size=draws)

    gain = fading * config.path_gain()[users]
    snr = config.tx_power_w[users] * gain / config.noise_power_w
    rate = config.bandwidth_hz * np.log2(1.0 + snr)
    ratio = demand / rate / tau[users]

    # satisfaction exp(-d/tau) - 1 <= level  <=>  d/tau >= -ln(1 + level)
    threshold = -math.log1p(dissatisfaction_level)
    frac_dissat = float(np.mean(ratio >= threshold))
    return CalibrationReport(
        draws=draws,
        ratio_min=float(ratio.min()),
        ratio_median=float(np.median(ratio)),
        ratio_max=float(ratio.max()),
        frac_dissatisfied=frac_dissat,
        threshold_ratio=threshold,
        degenerate=frac_dissat > 0.99 or frac_dissat < 0.01,
    )
