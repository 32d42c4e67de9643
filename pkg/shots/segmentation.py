# shots/segmentation.py
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .config import PipelineConfig
from .exceptions import NoImpactDetected, PhaseOutOfBounds, TooFewSamples
from .types import ShotRecord

MIN_IMPACT_SAMPLES = 8


@dataclass(frozen=True)
class PhaseWindow:
    """Shooting phase on the shot grid; both bounds inclusive."""

    impact_index: int
    start_index: int
    end_index: int

    @property
    def length(self) -> int:
        return self.end_index - self.start_index + 1

    def slice(self) -> slice:
        return slice(self.start_index, self.end_index + 1)

    def shifted(self, offset: int) -> "PhaseWindow":
        return PhaseWindow(self.impact_index + offset, self.start_index + offset, self.end_index + offset)


def phase_slots(cfg: PipelineConfig) -> Tuple[int, int]:
    """(slots before impact, slots after impact)."""
    return cfg.pre_slots, cfg.post_slots


def impact_residual(acc) -> np.ndarray:
    """|acc_t - median(acc)|: the gravity-free acceleration magnitude."""
    acc = np.asarray(acc, dtype=float)
    baseline = np.median(acc, axis=1, keepdims=True)
    return np.sqrt(np.sum((acc - baseline) ** 2, axis=0))


def detect_impact(acc, cfg: PipelineConfig) -> int:
    """
    Index of the ball strike: the largest gravity-free acceleration magnitude.

    The per-axis median is the baseline, so adding a constant vector to every
    sample never moves the result. The peak has to reach
    ``impact_ratio * max(median residual, impact_floor)``; np.argmax keeps the
    earliest of tied peaks.
    """
    acc = np.asarray(acc, dtype=float)
    if acc.ndim != 2 or acc.shape[0] != 3:
        raise ValueError(f"acc must be 3 x N, got shape {acc.shape}")
    if acc.shape[1] < MIN_IMPACT_SAMPLES:
        raise TooFewSamples(f"impact detection needs >= {MIN_IMPACT_SAMPLES} samples")

    residual = impact_residual(acc)
    idx = int(np.argmax(residual))
    threshold = cfg.impact_ratio * max(float(np.median(residual)), cfg.impact_floor)
    if residual[idx] < threshold:
        raise NoImpactDetected(
            f"peak {residual[idx]:.2f} m/s2 below threshold {threshold:.2f} m/s2"
        )
    return idx


def phase_around(impact_index: int, grid_len: int, cfg: PipelineConfig) -> PhaseWindow:
    pre, post = phase_slots(cfg)
    start, end = impact_index - pre, impact_index + post
    if start < 0 or end >= grid_len:
        raise PhaseOutOfBounds(
            f"phase {start}..{end} around impact {impact_index} overruns grid of {grid_len}"
        )
    return PhaseWindow(impact_index=impact_index, start_index=start, end_index=end)


def extract_phase(shot: ShotRecord, cfg: PipelineConfig) -> PhaseWindow:
    """Shooting-phase window around the shot's impact (detected if not yet set)."""
    impact = shot.impact_index
    if impact is None:
        impact = detect_impact(shot.acc(), cfg)
    return phase_around(impact, shot.grid_len, cfg)


def segment(shot: ShotRecord, cfg: PipelineConfig) -> ShotRecord:
    """Record with its impact located."""
    return shot.with_impact(detect_impact(shot.acc(), cfg))


def align_shot(shot: ShotRecord, target_index: int) -> ShotRecord:
    """
    Shift every channel so the impact lands on ``target_index``. Slots moved
    in from outside the grid repeat the nearest edge value.
    """
    if shot.impact_index is None:
        raise NoImpactDetected("cannot align a shot without an impact")
    offset = target_index - shot.impact_index
    if offset == 0:
        return shot
    values = shot.as_array()
    n = shot.grid_len
    src = np.clip(np.arange(n) - offset, 0, n - 1)
    return ShotRecord.from_array(shot.meta, values[:, src], impact_index=target_index, label=shot.label)
