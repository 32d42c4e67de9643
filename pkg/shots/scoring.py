# shots/scoring.py
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from .config import PipelineConfig
from .exceptions import GridMismatch, PhaseOutOfBounds, ShotLabError
from .filtering import complementary_filter, leg_angle
from .segmentation import PhaseWindow, align_shot, extract_phase, phase_around
from .template import channel_deviation, extract_features
from .types import (
    CHANNELS,
    FAIL,
    SCORE_METRICS,
    SUCCESS,
    GroundTruthTemplate,
    OutcomeModel,
    ShotRecord,
    ShotScore,
)

logger = logging.getLogger(__name__)

EVENT_KEYS: Tuple[str, ...] = ("player_id", "shot_index", "probability", "classified") + SCORE_METRICS

# Slots either side of the detected strike tried when matching the template.
ALIGN_SEARCH_SLOTS = 2
ALIGN_CHANNELS: Tuple[str, ...] = ("acc_y", "gyro_z")


def gap_area(shot_channel, template_channel, phase: PhaseWindow, dt_s: float) -> float:
    """Trapezoidal area between the two curves over the phase window."""
    a = np.asarray(shot_channel, dtype=float)
    b = np.asarray(template_channel, dtype=float)
    if a.shape != b.shape:
        raise GridMismatch(f"channel lengths differ: {a.shape[0]} vs {b.shape[0]}")
    if phase.start_index < 0 or phase.end_index >= a.shape[0]:
        raise GridMismatch(f"phase {phase.start_index}..{phase.end_index} outside grid of {a.shape[0]}")
    d = np.abs(a[phase.slice()] - b[phase.slice()])
    return float(np.trapezoid(d, dx=dt_s))


def locate_strike(shot: ShotRecord, template: GroundTruthTemplate, cfg: PipelineConfig) -> int:
    """
    Strike slot of ``shot`` refined against the template.

    The detected slot must have a phase that fits the grid. From there every
    slot within ``ALIGN_SEARCH_SLOTS`` is tried: the shot is moved onto the
    template's impact slot and the squared deviation of the scored channels
    over the template phase is summed. The smallest sum wins, the nearer slot
    on ties.
    """
    if shot.grid_len != template.grid_len:
        raise GridMismatch(f"shot grid {shot.grid_len} != template grid {template.grid_len}")
    detected = extract_phase(shot, cfg).impact_index
    target = phase_around(template.impact_index, template.grid_len, cfg)

    best, best_cost = detected, None
    for offset in sorted(range(-ALIGN_SEARCH_SLOTS, ALIGN_SEARCH_SLOTS + 1), key=abs):
        candidate = detected + offset
        try:
            phase_around(candidate, shot.grid_len, cfg)
        except PhaseOutOfBounds:
            continue
        moved = align_shot(shot.with_impact(candidate), template.impact_index)
        cost = 0.0
        for name in ALIGN_CHANNELS:
            d = channel_deviation(moved, template, target, name)
            cost += float(np.dot(d, d))
        if best_cost is None or cost < best_cost:
            best, best_cost = candidate, cost
    if best != detected:
        logger.debug("strike moved from slot %d to %d against the template", detected, best)
    return best


def aligned_phase(shot: ShotRecord, template: GroundTruthTemplate, cfg: PipelineConfig) -> Tuple[ShotRecord, PhaseWindow]:
    """
    Locate the shot's strike, check its own phase fits, then move it onto the
    template's impact slot. Returns the aligned shot and the template phase.
    """
    strike = locate_strike(shot, template, cfg)
    aligned = align_shot(shot.with_impact(strike), template.impact_index)
    return aligned, phase_around(template.impact_index, template.grid_len, cfg)


def score_shot(
    shot: ShotRecord,
    template: GroundTruthTemplate,
    model: OutcomeModel,
    cfg: PipelineConfig,
) -> ShotScore:
    aligned, phase = aligned_phase(shot, template, cfg)
    features = extract_features(aligned, template, phase)
    area = gap_area(aligned.channel("acc_y"), template.channel("acc_y"), phase, aligned.meta.dt_s)
    probability = model.predict(features)
    return ShotScore(
        rmse_acc_y=float(features[0]),
        rmse_gyro_z=float(features[1]),
        peak_dev_acc_y=float(features[2]),
        peak_dev_gyro_z=float(features[3]),
        gap_area_acc_y=area,
        probability=probability,
        classified=SUCCESS if probability >= cfg.classify_threshold else FAIL,
    )


# -----------------------------
# Batch
# -----------------------------

@dataclass(frozen=True)
class BatchResult:
    scores: Tuple[Tuple[int, ShotScore], ...]
    skipped: Tuple[Tuple[int, str, str], ...]
    summary: Dict[str, float] = field(default_factory=dict)


def summarize(scores: Sequence[ShotScore]) -> Dict[str, float]:
    if not scores:
        return {}
    out: Dict[str, float] = {
        "count": len(scores),
        "mean_probability": float(np.mean([s.probability for s in scores])),
        "success_rate": sum(1 for s in scores if s.classified == SUCCESS) / len(scores),
    }
    for name in SCORE_METRICS:
        out[f"mean_{name}"] = float(np.mean([getattr(s, name) for s in scores]))
    return out


def score_batch(
    shots: Sequence[ShotRecord],
    template: GroundTruthTemplate,
    model: OutcomeModel,
    cfg: PipelineConfig,
) -> BatchResult:
    """
    Score every shot in input order; a shot that fails any stage is recorded
    in ``skipped`` as (index, error code, message) and the batch goes on.
    """
    scores: List[Tuple[int, ShotScore]] = []
    skipped: List[Tuple[int, str, str]] = []
    for index, shot in enumerate(shots):
        try:
            scores.append((index, score_shot(shot, template, model, cfg)))
        except ShotLabError as e:
            logger.warning("shot %d skipped: %s (%s)", index, e.code, e)
            skipped.append((index, e.code, str(e)))
    return BatchResult(
        scores=tuple(scores),
        skipped=tuple(skipped),
        summary=summarize([s for _, s in scores]),
    )


# -----------------------------
# Events (batch output / HTTP / stream)
# -----------------------------

def score_event(score: ShotScore, player_id: str, shot_index: int) -> Dict[str, Any]:
    data = score.to_dict()
    data["player_id"] = player_id
    data["shot_index"] = shot_index
    return {key: data[key] for key in EVENT_KEYS}


def encode_event(event: Dict[str, Any]) -> str:
    return json.dumps(event, separators=(",", ":"))


def skip_event(shot_index: int, code: str, message: str, name: str = "") -> Dict[str, Any]:
    out: Dict[str, Any] = {"shot_index": shot_index, "code": code, "message": message}
    if name:
        out["file"] = name
    return out


# -----------------------------
# Diagnostics
# -----------------------------

def diagnose_shot(shot: ShotRecord, template: GroundTruthTemplate, cfg: PipelineConfig) -> Dict[str, Any]:
    """Per-channel RMSE over the phase and peak leg angle, shot vs template."""
    aligned, phase = aligned_phase(shot, template, cfg)
    rmse = {}
    for name in CHANNELS:
        d = channel_deviation(aligned, template, phase, name)
        rmse[name] = float(np.sqrt(np.mean(d ** 2)))

    shot_angle = leg_angle(aligned, cfg).as_array()
    template_angle = complementary_filter(
        template.as_array()[:3], template.channel("gyro_z"), aligned.meta.dt_s, cfg.filter_alpha
    ).as_array()

    return {
        "impact_index": phase.impact_index,
        "phase": [phase.start_index, phase.end_index],
        "channel_rmse": rmse,
        "peak_leg_angle_deg": float(np.max(np.abs(shot_angle[phase.slice()]))),
        "template_peak_leg_angle_deg": float(np.max(np.abs(template_angle[phase.slice()]))),
    }
