# shots/pipeline.py
"""
Glue between files on disk and the numeric stages, shared by the management
commands, the HTTP view and the stream server.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .config import PipelineConfig
from .exceptions import (
    GapTooLarge,
    NoImpactDetected,
    PhaseOutOfBounds,
    SessionTooShort,
    ShotLabError,
    TooFewSamples,
)
from .ingest import iter_session_files, read_session_file, session_to_shot
from .scoring import BatchResult, aligned_phase, diagnose_shot, score_batch, score_event, skip_event
from .segmentation import align_shot, extract_phase
from .template import build_ground_truth, extract_features, train_outcome_model
from .types import SUCCESS, GroundTruthTemplate, OutcomeModel, RawSession, ShotRecord, round_half_up

logger = logging.getLogger(__name__)

# failures that drop a single file from training instead of aborting it
SKIPPABLE = (SessionTooShort, GapTooLarge, TooFewSamples, NoImpactDetected, PhaseOutOfBounds)


@dataclass(frozen=True)
class NamedShot:
    name: str
    shot: ShotRecord


@dataclass(frozen=True)
class TrainingResult:
    template: GroundTruthTemplate
    model: OutcomeModel
    used: Tuple[str, ...]
    skipped: Tuple[Tuple[str, str, str], ...]


class StageError(ShotLabError):
    """A non-skippable failure, tagged with the stage and file it came from."""

    def __init__(self, stage: str, name: str, error: Exception):
        self.stage = stage
        self.name = name
        self.error = error
        super().__init__(f"{stage} failed for {name}: {error}")


# -----------------------------
# Loading
# -----------------------------

def load_sessions(path: Union[str, Path]) -> List[Tuple[str, RawSession]]:
    """Every session under ``path``, keyed by file stem. Read errors propagate."""
    out = []
    for file in iter_session_files(path):
        try:
            out.append((file.stem, read_session_file(file)))
        except ShotLabError as e:
            raise StageError("ingest", file.name, e)
        except OSError as e:
            raise StageError("ingest", file.name, e)
    return out


def load_labels(path: Union[str, Path]) -> Dict[str, str]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as e:
        raise StageError("labels", str(path), e)
    if not isinstance(data, dict):
        raise StageError("labels", str(path), ValueError("labels file must hold a JSON object"))
    return {str(k): str(v) for k, v in data.items()}


def resample_sessions(
    sessions: Sequence[Tuple[str, RawSession]],
    cfg: PipelineConfig,
    labels: Optional[Mapping[str, str]] = None,
) -> Tuple[List[NamedShot], List[Tuple[str, str, str]]]:
    shots: List[NamedShot] = []
    skipped: List[Tuple[str, str, str]] = []
    for name, session in sessions:
        label = None
        if labels is not None:
            if name not in labels:
                raise StageError("labels", name, KeyError(f"no label for {name}"))
            label = labels[name]
        try:
            shots.append(NamedShot(name, session_to_shot(session, cfg, label=label)))
        except SKIPPABLE as e:
            logger.warning("resample: skipping %s (%s: %s)", name, e.code, e)
            skipped.append((name, e.code, str(e)))
        except ShotLabError as e:
            raise StageError("resample", name, e)
    return shots, skipped


# -----------------------------
# Training
# -----------------------------

def alignment_target(impacts: Sequence[int]) -> int:
    """Common impact slot: the median of the located strikes."""
    return round_half_up(float(np.median(np.asarray(impacts, dtype=float))))


def segment_shots(
    shots: Sequence[NamedShot], cfg: PipelineConfig
) -> Tuple[List[NamedShot], List[Tuple[str, str, str]]]:
    located: List[NamedShot] = []
    skipped: List[Tuple[str, str, str]] = []
    for item in shots:
        try:
            phase = extract_phase(item.shot, cfg)
        except SKIPPABLE as e:
            logger.warning("segment: skipping %s (%s: %s)", item.name, e.code, e)
            skipped.append((item.name, e.code, str(e)))
            continue
        located.append(NamedShot(item.name, item.shot.with_impact(phase.impact_index)))
    return located, skipped


def train_from_shots(shots: Sequence[NamedShot], cfg: PipelineConfig) -> TrainingResult:
    """
    segment -> align -> build_ground_truth -> extract_features -> train_outcome_model
    on labelled shots. Features are taken the way scoring takes them, with each
    strike refined against the fresh template.
    """
    located, skipped = segment_shots(shots, cfg)
    if not located:
        raise StageError("segment", "dataset", TooFewSamples("no shot could be segmented"))

    successes = [s.shot.impact_index for s in located if s.shot.label == SUCCESS]
    target = alignment_target(successes or [s.shot.impact_index for s in located])
    aligned = [NamedShot(s.name, align_shot(s.shot, target)) for s in located]

    template = build_ground_truth([s.shot for s in aligned], cfg)
    rows = []
    for s in located:
        moved, phase = aligned_phase(s.shot, template, cfg)
        rows.append(extract_features(moved, template, phase))
    features = np.vstack(rows)
    model = train_outcome_model(features, [s.shot.label for s in aligned])

    logger.info(
        "trained on %d shots (%d success, %d skipped), template impact slot %d",
        len(aligned), template.source_count, len(skipped), target,
    )
    return TrainingResult(
        template=template,
        model=model,
        used=tuple(s.name for s in aligned),
        skipped=tuple(skipped),
    )


def train_from_directory(data_dir, labels_path, cfg: PipelineConfig) -> TrainingResult:
    sessions = load_sessions(data_dir)
    shots, skipped = resample_sessions(sessions, cfg, labels=load_labels(labels_path))
    result = train_from_shots(shots, cfg)
    return TrainingResult(
        template=result.template,
        model=result.model,
        used=result.used,
        skipped=tuple(skipped) + result.skipped,
    )


# -----------------------------
# Scoring
# -----------------------------

@dataclass(frozen=True)
class ScoreReport:
    events: Tuple[Dict, ...]
    skipped: Tuple[Dict, ...]
    summary: Dict[str, float]
    diagnostics: Optional[Tuple[Dict, ...]] = None

    def to_dict(self) -> Dict:
        out = {"scores": list(self.events), "skipped": list(self.skipped), "summary": self.summary}
        if self.diagnostics is not None:
            out["diagnostics"] = list(self.diagnostics)
        return out


def score_sessions(
    sessions: Sequence[Tuple[str, RawSession]],
    template: GroundTruthTemplate,
    model: OutcomeModel,
    cfg: PipelineConfig,
    diagnostics: bool = False,
) -> ScoreReport:
    """
    Score named sessions. ``shot_index`` is the session's position in the
    input; sessions failing any stage are reported as skips. With
    ``diagnostics`` every scored shot also gets a per-channel breakdown.
    """
    shots: List[ShotRecord] = []
    positions: List[int] = []
    skipped: List[Dict] = []
    for index, (name, session) in enumerate(sessions):
        try:
            shots.append(session_to_shot(session, cfg))
            positions.append(index)
        except ShotLabError as e:
            logger.warning("shot %d (%s) skipped: %s", index, name, e.code)
            skipped.append(skip_event(index, e.code, str(e), name))

    batch: BatchResult = score_batch(shots, template, model, cfg)
    for local, code, message in batch.skipped:
        index = positions[local]
        skipped.append(skip_event(index, code, message, sessions[index][0]))

    events = tuple(
        score_event(score, sessions[positions[local]][1].meta.player_id, positions[local])
        for local, score in batch.scores
    )
    skipped.sort(key=lambda item: item["shot_index"])

    details = None
    if diagnostics:
        details = []
        for local, _ in batch.scores:
            item = diagnose_shot(shots[local], template, cfg)
            item["shot_index"] = positions[local]
            details.append(item)
        details = tuple(details)
    return ScoreReport(events=events, skipped=tuple(skipped), summary=batch.summary, diagnostics=details)
