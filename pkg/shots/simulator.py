# shots/simulator.py
"""
Synthetic kicks standing in for the field recordings.

Every shape is keyed to the impact time and measured in grid slots, so a
kick looks the same whatever the sampling rate. Noise is drawn before
dropout, which makes the lossless and lossy variants of one seed share
their noise.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .config import PipelineConfig
from .exceptions import InvalidParams
from .ingest import write_csv_log
from .types import FAIL, SUCCESS, ImuSample, RawSession, ShotRecord, round_half_up

logger = logging.getLogger(__name__)

GRAVITY = 9.81

# success envelope
VELOCITY_TOLERANCE = 0.15
ANGLE_TOLERANCE_DEG = 5.0
_EPS = 1e-12

# canonical kick, amplitudes in m/s2 and deg/s, offsets and widths in slots
BACKSWING_DIP = -12.0
BACKSWING_OFFSET = -5.0
BACKSWING_WIDTH = 3.0
IMPACT_PULSE = 60.0
IMPACT_WIDTH = 2.0
LATERAL_BELL = 4.0
SWING_RATE = 350.0
SWING_OFFSET = -1.0
SWING_WIDTH = 3.0
ROLL_RATE = 40.0
PITCH_RATE = -25.0
BELL_WIDTH = 4.0


def _bell(u: np.ndarray, center: float, width: float) -> np.ndarray:
    return np.exp(-((u - center) ** 2) / (2.0 * width ** 2))


@dataclass(frozen=True)
class ShotParams:
    velocity_scale: float = 1.0
    angle_dev_deg: float = 0.0
    impact_time_s: float = 3.0
    noise_sigma: float = 0.0
    dropout_fraction: float = 0.0
    seed: int = 0
    player_id: str = "sim"

    def __post_init__(self) -> None:
        def bad(name: str, rule: str) -> InvalidParams:
            return InvalidParams(f"{name} {rule}, got {getattr(self, name)!r}")

        for name in ("velocity_scale", "angle_dev_deg", "impact_time_s", "noise_sigma", "dropout_fraction"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                raise bad(name, "must be a finite number")
        if self.velocity_scale <= 0:
            raise bad("velocity_scale", "must be > 0")
        if self.angle_dev_deg < 0:
            raise bad("angle_dev_deg", "must be >= 0")
        if self.noise_sigma < 0:
            raise bad("noise_sigma", "must be >= 0")
        if not (0.0 <= self.dropout_fraction < 1.0):
            raise bad("dropout_fraction", "must be in [0, 1)")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise bad("seed", "must be a non-negative integer")
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def is_success(self) -> bool:
        return (
            abs(self.velocity_scale - 1.0) <= VELOCITY_TOLERANCE + _EPS
            and self.angle_dev_deg <= ANGLE_TOLERANCE_DEG + _EPS
        )

    @property
    def label(self) -> str:
        return SUCCESS if self.is_success else FAIL

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _check_timing(params: ShotParams, cfg: PipelineConfig) -> None:
    lo, hi = cfg.phase_pre_s, cfg.window_s - cfg.phase_post_s
    if not (lo < params.impact_time_s < hi):
        raise InvalidParams(f"impact_time_s must be in ({lo:g}, {hi:g}), got {params.impact_time_s!r}")


def canonical_channels(params: ShotParams, cfg: PipelineConfig) -> np.ndarray:
    """Noiseless (6, N) kick sampled at t = k / rate."""
    _check_timing(params, cfg)
    rate = cfg.nominal_rate_hz
    u = np.arange(cfg.grid_len, dtype=float) - params.impact_time_s * rate

    # deviation pulse amplitude whose time integral is angle_dev_deg
    deviation_peak = params.angle_dev_deg * rate / (IMPACT_WIDTH * math.sqrt(2.0 * math.pi))

    acc_x = LATERAL_BELL * _bell(u, 0.0, BELL_WIDTH)
    acc_y = (
        BACKSWING_DIP * _bell(u, BACKSWING_OFFSET, BACKSWING_WIDTH)
        + IMPACT_PULSE * params.velocity_scale * _bell(u, 0.0, IMPACT_WIDTH)
    )
    acc_z = np.full_like(u, GRAVITY)
    gyro_x = ROLL_RATE * _bell(u, 0.0, BELL_WIDTH)
    gyro_y = PITCH_RATE * _bell(u, 0.0, BELL_WIDTH)
    gyro_z = SWING_RATE * _bell(u, SWING_OFFSET, SWING_WIDTH) + deviation_peak * _bell(u, 0.0, IMPACT_WIDTH)
    return np.vstack([acc_x, acc_y, acc_z, gyro_x, gyro_y, gyro_z])


def generate_shot(params: ShotParams, cfg: PipelineConfig) -> Tuple[RawSession, ShotRecord, str]:
    """
    (lossy RawSession, lossless ground-truth ShotRecord, label). Deterministic
    for a given params.seed.
    """
    clean = canonical_channels(params, cfg)
    n = cfg.grid_len
    rng = np.random.default_rng(params.seed)

    noisy = clean + rng.standard_normal(clean.shape) * params.noise_sigma

    keep = np.ones(n, dtype=bool)
    n_drop = min(round_half_up(params.dropout_fraction * n), n - 2)
    if n_drop > 0:
        dropped = rng.choice(np.arange(1, n - 1), size=n_drop, replace=False)
        keep[dropped] = False

    meta = cfg.session_meta(params.player_id)
    times = meta.grid_times_ms().astype(int)
    samples = tuple(
        ImuSample(t_ms=int(times[k]), acc=noisy[:3, k], gyro=noisy[3:, k])
        for k in range(n)
        if keep[k]
    )
    label = params.label
    truth = ShotRecord.from_array(
        meta,
        noisy,
        impact_index=round_half_up(params.impact_time_s * cfg.nominal_rate_hz),
        label=label,
    )
    return RawSession(meta=meta, samples=samples), truth, label


# -----------------------------
# Players / datasets
# -----------------------------

@dataclass(frozen=True)
class PlayerProfile:
    """
    One player's kick mix. Clean kicks scatter narrowly around the ideal;
    misses split evenly between weak, overhit and leg-deviation kicks.
    """

    player_id: str
    clean_rate: float = 0.5
    velocity_sigma: float = 0.04
    angle_sigma: float = 1.2
    weak_velocity: Tuple[float, float] = (0.45, 0.6)
    overhit_velocity: Tuple[float, float] = (1.4, 1.55)
    deviation_angle: Tuple[float, float] = (15.0, 22.0)
    impact_slots: Tuple[int, int] = (16, 26)
    noise_sigma: float = 0.5
    dropout_fraction: float = 0.02

    def __post_init__(self) -> None:
        if not self.player_id:
            raise InvalidParams("player_id must not be empty")
        if not (0.0 <= self.clean_rate <= 1.0):
            raise InvalidParams(f"clean_rate must be in [0, 1], got {self.clean_rate!r}")
        if self.velocity_sigma < 0 or self.angle_sigma < 0 or self.noise_sigma < 0:
            raise InvalidParams("sigmas must be >= 0")
        for name in ("weak_velocity", "overhit_velocity", "deviation_angle", "impact_slots"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise InvalidParams(f"{name} range is reversed")
            object.__setattr__(self, name, (lo, hi))
        if not (0.0 <= self.dropout_fraction < 1.0):
            raise InvalidParams(f"dropout_fraction must be in [0, 1), got {self.dropout_fraction!r}")

    def draw(self, rng: np.random.Generator, noise_seed: int, cfg: PipelineConfig) -> ShotParams:
        velocity = 1.0 + rng.normal(0.0, self.velocity_sigma)
        angle = abs(rng.normal(0.0, self.angle_sigma))
        if rng.random() >= self.clean_rate:
            mode = int(rng.integers(3))
            if mode == 0:
                velocity = rng.uniform(*self.weak_velocity)
            elif mode == 1:
                velocity = rng.uniform(*self.overhit_velocity)
            else:
                angle = rng.uniform(*self.deviation_angle)
        slot = int(rng.integers(self.impact_slots[0], self.impact_slots[1] + 1))
        return ShotParams(
            velocity_scale=float(velocity),
            angle_dev_deg=float(angle),
            impact_time_s=slot / cfg.nominal_rate_hz,
            noise_sigma=self.noise_sigma,
            dropout_fraction=self.dropout_fraction,
            seed=noise_seed,
            player_id=self.player_id,
        )

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "PlayerProfile":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidParams(f"unknown profile keys: {', '.join(sorted(unknown))}")
        values = dict(data)
        for name in ("weak_velocity", "overhit_velocity", "deviation_angle", "impact_slots"):
            if name in values:
                values[name] = tuple(values[name])
        return cls(**values)


def default_profiles() -> List[PlayerProfile]:
    """Five players, 50% clean kicks on average."""
    rates = (0.6, 0.55, 0.5, 0.45, 0.4)
    return [PlayerProfile(player_id=f"player_{i + 1}", clean_rate=r) for i, r in enumerate(rates)]


def load_profiles(path: Union[str, Path]) -> List[PlayerProfile]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as e:
        raise InvalidParams(f"cannot read profiles {path}: {e}")
    if not isinstance(data, list) or not data:
        raise InvalidParams("profiles file must hold a non-empty JSON list")
    return [PlayerProfile.from_dict(item) for item in data]


@dataclass(frozen=True)
class SimulatedShot:
    shot_id: int
    session: RawSession
    label: str
    params: ShotParams

    @property
    def name(self) -> str:
        return f"shot_{self.shot_id}"


def generate_dataset(
    n_shots: int,
    profiles: Sequence[PlayerProfile],
    seed: int,
    cfg: Optional[PipelineConfig] = None,
) -> List[SimulatedShot]:
    """
    Profiles take turns shot by shot; shot i draws from the i-th child of
    SeedSequence(seed), so any prefix of a dataset is reproducible on its own.
    """
    if n_shots < 1:
        raise InvalidParams(f"n_shots must be >= 1, got {n_shots!r}")
    if not profiles:
        raise InvalidParams("at least one profile is required")
    cfg = cfg or PipelineConfig()

    out: List[SimulatedShot] = []
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(n_shots)):
        profile = profiles[i % len(profiles)]
        rng = np.random.default_rng(child)
        noise_seed = int(child.generate_state(1)[0])
        params = profile.draw(rng, noise_seed, cfg)
        session, _, label = generate_shot(params, cfg)
        out.append(SimulatedShot(shot_id=i, session=session, label=label, params=params))

    logger.info(
        "simulated %d shots over %d players (%d success)",
        n_shots, len(profiles), sum(1 for s in out if s.label == SUCCESS),
    )
    return out


def labels_for(shots: Sequence[SimulatedShot]) -> Dict[str, str]:
    return {s.name: s.label for s in shots}


def write_dataset(shots: Sequence[SimulatedShot], out_dir: Union[str, Path]) -> Path:
    """``shot_<i>.csv`` per shot plus ``labels.json``; returns the labels path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for s in shots:
        (out / f"{s.name}.csv").write_text(write_csv_log(s.session), encoding="utf-8")
    labels_path = out / "labels.json"
    labels_path.write_text(json.dumps(labels_for(shots), indent=2) + "\n", encoding="utf-8")
    return labels_path
