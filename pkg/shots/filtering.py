# shots/filtering.py
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .exceptions import AlphaOutOfRange, LengthMismatch


@dataclass(frozen=True)
class AngleSeries:
    """Leg angle about the z analysis axis, degrees."""

    values: Tuple[float, ...]
    alpha_used: float

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)


def accel_angle(acc: np.ndarray) -> np.ndarray:
    """Per-sample tilt from gravity: atan2(acc_y, acc_z) in degrees."""
    acc = np.asarray(acc, dtype=float)
    return np.degrees(np.arctan2(acc[1], acc[2]))


def complementary_filter(acc, gyro_z, dt_s: float, alpha: float) -> AngleSeries:
    """
    First-order complementary filter.

        theta_0 = theta_acc_0
        theta_t = alpha * (theta_{t-1} + gyro_z_t * dt) + (1 - alpha) * theta_acc_t

    ``acc`` is 3 x N (x, y, z rows), ``gyro_z`` is N values in deg/s.
    """
    acc = np.asarray(acc, dtype=float)
    gyro_z = np.asarray(gyro_z, dtype=float)
    if not (0.0 <= alpha <= 1.0):
        raise AlphaOutOfRange(f"alpha must be in [0, 1], got {alpha!r}")
    if not dt_s > 0:
        raise AlphaOutOfRange(f"dt_s must be > 0, got {dt_s!r}")
    if acc.ndim != 2 or acc.shape[0] != 3:
        raise LengthMismatch(f"acc must be 3 x N, got shape {acc.shape}")
    if acc.shape[1] != gyro_z.shape[0]:
        raise LengthMismatch(f"acc has {acc.shape[1]} samples, gyro_z has {gyro_z.shape[0]}")

    theta_acc = accel_angle(acc)
    n = theta_acc.shape[0]
    theta = np.empty(n)
    if n == 0:
        return AngleSeries(values=(), alpha_used=float(alpha))

    theta[0] = theta_acc[0]
    for t in range(1, n):
        theta[t] = alpha * (theta[t - 1] + gyro_z[t] * dt_s) + (1.0 - alpha) * theta_acc[t]
    return AngleSeries(values=tuple(theta.tolist()), alpha_used=float(alpha))


def moving_average(series, half_width: int) -> np.ndarray:
    """
    Centered mean over ``2 * half_width + 1`` samples; windows are clipped at
    the edges rather than padded.
    """
    x = np.asarray(series, dtype=float)
    if half_width < 0:
        raise ValueError("half_width must be >= 0")
    if half_width == 0 or x.size == 0:
        return x.copy()

    n = x.size
    idx = np.arange(n)
    lo = np.maximum(idx - half_width, 0)
    hi = np.minimum(idx + half_width + 1, n)
    csum = np.concatenate(([0.0], np.cumsum(x)))
    means = (csum[hi] - csum[lo]) / (hi - lo)
    # summation round-off must not push a mean outside the data range
    return np.clip(means, x.min(), x.max())


def leg_angle(shot, cfg) -> AngleSeries:
    """Complementary-filter leg angle for a ShotRecord."""
    return complementary_filter(shot.acc(), shot.channel("gyro_z"), shot.meta.dt_s, cfg.filter_alpha)
