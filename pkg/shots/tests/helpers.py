"""Shared fixtures for the shot tests."""
from functools import lru_cache

import numpy as np

from shots.config import PipelineConfig
from shots.pipeline import resample_sessions, train_from_shots
from shots.simulator import ShotParams, default_profiles, generate_dataset, generate_shot, labels_for
from shots.template import build_ground_truth
from shots.types import SUCCESS, ImuSample, OutcomeModel, RawSession, ShotRecord

CFG = PipelineConfig()
RATE = CFG.nominal_rate_hz
N = CFG.grid_len  # 49
IMPACT = 21


def params(**kwargs) -> ShotParams:
    kwargs.setdefault("impact_time_s", IMPACT / RATE)
    return ShotParams(**kwargs)


def simulated(**kwargs):
    """(session, truth, label) for a simulated kick."""
    return generate_shot(params(**kwargs), CFG)


def truth_shot(**kwargs) -> ShotRecord:
    return simulated(**kwargs)[1]


def located_shot(label=None, **kwargs) -> ShotRecord:
    return truth_shot(**kwargs).with_label(label)


def unlocated_shot(**kwargs) -> ShotRecord:
    """Grid record as resampling would hand it over: no impact yet."""
    return truth_shot(**kwargs).with_impact(None).with_label(None)


def flat_shot(grid_len: int = N) -> ShotRecord:
    values = np.zeros((6, grid_len))
    values[2] = 9.81
    return ShotRecord.from_array(CFG.session_meta(), values)


def session_from_array(values, times_ms=None, meta=None) -> RawSession:
    values = np.asarray(values, dtype=float)
    meta = meta or CFG.session_meta()
    if times_ms is None:
        times_ms = meta.grid_times_ms()[: values.shape[1]]
    samples = tuple(
        ImuSample(t_ms=int(t), acc=values[:3, k], gyro=values[3:, k]) for k, t in enumerate(times_ms)
    )
    return RawSession(meta=meta, samples=samples)


@lru_cache(maxsize=None)
def optimal_template():
    """Template fitted on the noiseless optimal kick (impact slot 21)."""
    return build_ground_truth([located_shot(label=SUCCESS)], CFG)


def fixture_model() -> OutcomeModel:
    return OutcomeModel(weights=(-0.01, -0.01, -0.01, -0.01), intercept=1.0)


@lru_cache(maxsize=None)
def trained_dataset():
    return generate_dataset(500, default_profiles(), seed=2024)


@lru_cache(maxsize=None)
def trained():
    """TrainingResult for 500 simulated kicks from the default player profiles."""
    dataset = trained_dataset()
    shots, _ = resample_sessions([(s.name, s.session) for s in dataset], CFG, labels=labels_for(dataset))
    return train_from_shots(shots, CFG)
