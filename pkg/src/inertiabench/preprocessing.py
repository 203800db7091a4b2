"""Signal preprocessing: denoising, noise addition, normalization, detrending.

Series-level transforms (moving average, additive noise, normalization) apply
to a full recording before windowing; detrending operates per window.  All
transforms act on each of the six channels independently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import CHANNELS, InertialSeries
from .errors import DegenerateChannelError, ShapeError


@dataclass(frozen=True)
class DenoiseStep:
    window: int

    def __post_init__(self):
        if self.window < 1:
            raise ShapeError(f"moving-average window must be >= 1, got {self.window}")


@dataclass(frozen=True)
class AddNoiseStep:
    sigma_acc: float = 0.1
    sigma_gyro: float = 0.001

    def __post_init__(self):
        if self.sigma_acc < 0 or self.sigma_gyro < 0:
            raise ShapeError("noise stds must be non-negative")


@dataclass(frozen=True)
class NormalizeStep:
    method: str = "zscore"

    def __post_init__(self):
        if self.method not in ("zscore", "robust"):
            raise ShapeError(f"unknown normalization method '{self.method}'")


@dataclass(frozen=True)
class DetrendStep:
    pass


@dataclass(frozen=True)
class PreprocSpec:
    """Ordered preprocessing pipeline; an empty list is the baseline."""

    steps: tuple = ()

    def __post_init__(self):
        allowed = (DenoiseStep, AddNoiseStep, NormalizeStep, DetrendStep)
        for s in self.steps:
            if not isinstance(s, allowed):
                raise ShapeError(f"unknown preprocessing step {s!r}")


def moving_average(series: InertialSeries, n: int) -> InertialSeries:
    """Forward moving-average filter; output indexed at each window start.

    The recording shortens to T - n + 1 samples and keeps the leading
    timestamps, so downstream ground-truth alignment stays valid.
    """
    if n < 1:
        raise ShapeError(f"window must be >= 1, got {n}")
    if n > len(series):
        raise ShapeError(f"window {n} exceeds series length {len(series)}")
    if n == 1:
        return InertialSeries(series.t.copy(), series.imu.copy())
    kernel = np.full(n, 1.0 / n)
    smoothed = np.column_stack(
        [np.convolve(series.imu[:, c], kernel, mode="valid") for c in range(6)]
    )
    return InertialSeries(series.t[: len(series) - n + 1].copy(), smoothed)


def add_measurement_noise(series: InertialSeries, sigma_acc: float,
                          sigma_gyro: float, rng: np.random.Generator) -> InertialSeries:
    """Add i.i.d. zero-mean Gaussian noise, per accelerometer/gyro std."""
    if sigma_acc < 0 or sigma_gyro < 0:
        raise ShapeError("noise stds must be non-negative")
    imu = series.imu.copy()
    n = len(series)
    if sigma_acc > 0:
        imu[:, :3] += rng.normal(0.0, sigma_acc, size=(n, 3))
    if sigma_gyro > 0:
        imu[:, 3:] += rng.normal(0.0, sigma_gyro, size=(n, 3))
    return InertialSeries(series.t.copy(), imu)


@dataclass(frozen=True)
class ChannelStats:
    """Per-channel location/scale fitted on the training split only."""

    method: str
    loc: np.ndarray
    scale: np.ndarray


def fit_channel_stats(imu: np.ndarray, method: str) -> ChannelStats:
    """Fit normalization statistics on (N, 6) training data.

    zscore uses population (1/N) std; robust uses median and IQR with
    linearly interpolated quartiles.  A zero-spread channel raises
    DegenerateChannelError naming the channel.
    """
    NormalizeStep(method)
    if method == "zscore":
        loc = imu.mean(axis=0)
        scale = imu.std(axis=0)
    else:
        loc = np.median(imu, axis=0)
        q1, q3 = np.percentile(imu, [25, 75], axis=0)
        scale = q3 - q1
    for c in range(6):
        if scale[c] == 0:
            raise DegenerateChannelError(CHANNELS[c])
    return ChannelStats(method, loc, scale)


def apply_channel_stats(series: InertialSeries, stats: ChannelStats) -> InertialSeries:
    return InertialSeries(series.t.copy(), (series.imu - stats.loc) / stats.scale)


def normalize(series: InertialSeries, method: str,
              train_imu: np.ndarray | None = None) -> InertialSeries:
    """Normalize a series; statistics come from ``train_imu`` when given
    (the training split), otherwise from the series itself."""
    stats = fit_channel_stats(series.imu if train_imu is None else train_imu, method)
    return apply_channel_stats(series, stats)


def detrend_linear(window: np.ndarray) -> np.ndarray:
    """Subtract the per-channel least-squares line from a (6, W) window.

    Also accepts a batch (M, 6, W) or a single channel (W,).
    """
    window = np.asarray(window, dtype=float)
    squeeze = window.ndim
    if window.ndim == 1:
        window = window[None, None]
    elif window.ndim == 2:
        window = window[None]
    m, c, w = window.shape
    if w < 2:
        raise ShapeError(f"window length must be >= 2, got {w}")
    t = np.arange(w, dtype=float)
    tm = t.mean()
    denom = np.sum((t - tm) ** 2)
    xm = window.mean(axis=2, keepdims=True)
    slope = np.sum(window * (t - tm), axis=2, keepdims=True) / denom
    trend = xm + slope * (t - tm)
    out = window - trend
    if squeeze == 1:
        return out[0, 0]
    if squeeze == 2:
        return out[0]
    return out
