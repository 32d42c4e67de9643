# shots/types.py
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Any, Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np

from .exceptions import ConfigInvalid, GridMismatch, InvalidSample, NonMonotoneTime

# -----------------------------
# Channel / label vocabulary
# -----------------------------

# acc_y = shooting direction, gyro_z = leg deviation axis
CHANNELS: Tuple[str, ...] = ("acc_x", "acc_y", "acc_z", "gyro_x", "gyro_y", "gyro_z")

FEATURE_NAMES: Tuple[str, ...] = ("rmse_acc_y", "rmse_gyro_z", "peak_dev_acc_y", "peak_dev_gyro_z")

SUCCESS = "success"
FAIL = "fail"
LABELS = (SUCCESS, FAIL)

SENSOR_CALF_ABOVE_ANKLE = "calf-above-ankle"
SENSOR_SITES = (SENSOR_CALF_ABOVE_ANKLE,)

ACC_UNITS = "m/s2"
GYRO_UNITS = "deg/s"


def round_half_up(x: float) -> int:
    """Slot rounding used everywhere on the grid (Python's round() is banker's)."""
    return int(math.floor(x + 0.5))


def channel_index(name: str) -> int:
    try:
        return CHANNELS.index(name)
    except ValueError:
        raise ValueError(f"Unknown channel: {name!r}. Use one of {', '.join(CHANNELS)}.")


def _vec3(values: Iterable[Any]) -> Tuple[float, float, float]:
    out = tuple(float(v) for v in values)
    if len(out) != 3:
        raise InvalidSample(f"expected 3 axes, got {len(out)}")
    return out  # type: ignore[return-value]


def _frozen_series(values: Iterable[Any]) -> Tuple[float, ...]:
    return tuple(float(v) for v in values)


# ---------- SAMPLE ----------

@dataclass(frozen=True)
class ImuSample:
    t_ms: int
    acc: Tuple[float, float, float]
    gyro: Tuple[float, float, float]

    def __post_init__(self) -> None:
        if isinstance(self.t_ms, bool) or int(self.t_ms) != self.t_ms:
            raise InvalidSample(f"t_ms must be an integer, got {self.t_ms!r}")
        object.__setattr__(self, "t_ms", int(self.t_ms))
        object.__setattr__(self, "acc", _vec3(self.acc))
        object.__setattr__(self, "gyro", _vec3(self.gyro))
        if self.t_ms < 0:
            raise InvalidSample(f"t_ms must be >= 0, got {self.t_ms}")
        if not all(math.isfinite(v) for v in self.acc + self.gyro):
            raise InvalidSample(f"non-finite channel value at t_ms={self.t_ms}")

    @property
    def values(self) -> Tuple[float, ...]:
        """Six channel values in CHANNELS order."""
        return self.acc + self.gyro

    def to_dict(self) -> Dict[str, Any]:
        return {"t_ms": self.t_ms, "acc": list(self.acc), "gyro": list(self.gyro)}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ImuSample":
        return cls(t_ms=data["t_ms"], acc=data["acc"], gyro=data["gyro"])


# ---------- SESSION ----------

@dataclass(frozen=True)
class SessionMeta:
    player_id: str = "anonymous"
    distance_m: float = 10.0
    window_s: float = 7.0
    nominal_rate_hz: float = 7.0
    sensor_site: str = SENSOR_CALF_ABOVE_ANKLE

    def __post_init__(self) -> None:
        object.__setattr__(self, "player_id", str(self.player_id))
        for name in ("distance_m", "window_s", "nominal_rate_hz"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value <= 0:
                raise ConfigInvalid(name, f"{name} must be > 0, got {value!r}")
            object.__setattr__(self, name, value)
        if self.sensor_site not in SENSOR_SITES:
            raise ConfigInvalid("sensor_site", f"unsupported sensor site {self.sensor_site!r}")

    @property
    def grid_len(self) -> int:
        return round_half_up(self.window_s * self.nominal_rate_hz)

    @property
    def dt_s(self) -> float:
        return 1.0 / self.nominal_rate_hz

    def grid_times_ms(self) -> np.ndarray:
        """Slot offsets from session start, rounded to whole milliseconds."""
        k = np.arange(self.grid_len, dtype=float)
        return np.floor(k * 1000.0 / self.nominal_rate_hz + 0.5)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "player_id": self.player_id,
            "distance_m": self.distance_m,
            "window_s": self.window_s,
            "nominal_rate_hz": self.nominal_rate_hz,
            "sensor_site": self.sensor_site,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SessionMeta":
        known = {k: data[k] for k in cls().to_dict() if k in data}
        return cls(**known)


@dataclass(frozen=True)
class RawSession:
    meta: SessionMeta
    samples: Tuple[ImuSample, ...]

    def __post_init__(self) -> None:
        samples = tuple(self.samples)
        object.__setattr__(self, "samples", samples)
        for i in range(1, len(samples)):
            if samples[i].t_ms <= samples[i - 1].t_ms:
                raise NonMonotoneTime(i)

    def __len__(self) -> int:
        return len(self.samples)

    def times_ms(self) -> np.ndarray:
        return np.array([s.t_ms for s in self.samples], dtype=float)

    def values(self) -> np.ndarray:
        """(6, len) array of channel values."""
        if not self.samples:
            return np.zeros((len(CHANNELS), 0))
        return np.array([s.values for s in self.samples], dtype=float).T

    def to_dict(self) -> Dict[str, Any]:
        return {"meta": self.meta.to_dict(), "samples": [s.to_dict() for s in self.samples]}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RawSession":
        return cls(
            meta=SessionMeta.from_dict(data.get("meta", {})),
            samples=tuple(ImuSample.from_dict(s) for s in data.get("samples", [])),
        )


# ---------- SHOT ----------

@dataclass(frozen=True)
class ShotRecord:
    """
    One kick on the uniform grid.

    ``impact_index`` stays None until segmentation has located the strike
    (a freshly resampled record, or a flat one that has no strike at all).
    """

    meta: SessionMeta
    grid_len: int
    channels: Tuple[Tuple[float, ...], ...]
    impact_index: Optional[int] = None
    label: Optional[str] = None

    def __post_init__(self) -> None:
        channels = tuple(_frozen_series(c) for c in self.channels)
        object.__setattr__(self, "channels", channels)
        if self.impact_index is not None:
            object.__setattr__(self, "impact_index", int(self.impact_index))
        if len(channels) != len(CHANNELS):
            raise GridMismatch(f"expected {len(CHANNELS)} channels, got {len(channels)}")
        for name, series in zip(CHANNELS, channels):
            if len(series) != self.grid_len:
                raise GridMismatch(f"{name} has {len(series)} values, grid has {self.grid_len}")
            if not all(math.isfinite(v) for v in series):
                raise InvalidSample(f"non-finite value in {name}")
        if self.impact_index is not None and not (0 <= self.impact_index < self.grid_len):
            raise GridMismatch(f"impact_index {self.impact_index} outside grid of {self.grid_len}")
        if self.label is not None and self.label not in LABELS:
            raise ValueError(f"label must be one of {LABELS}, got {self.label!r}")

    @classmethod
    def from_array(
        cls,
        meta: SessionMeta,
        values: np.ndarray,
        impact_index: Optional[int] = None,
        label: Optional[str] = None,
    ) -> "ShotRecord":
        values = np.asarray(values, dtype=float)
        return cls(
            meta=meta,
            grid_len=int(values.shape[1]),
            channels=tuple(tuple(row.tolist()) for row in values),
            impact_index=impact_index,
            label=label,
        )

    def as_array(self) -> np.ndarray:
        return np.array(self.channels, dtype=float)

    def channel(self, name: str) -> np.ndarray:
        return np.array(self.channels[channel_index(name)], dtype=float)

    def acc(self) -> np.ndarray:
        return np.array(self.channels[:3], dtype=float)

    def with_impact(self, impact_index: Optional[int]) -> "ShotRecord":
        return replace(self, impact_index=impact_index)

    def with_label(self, label: Optional[str]) -> "ShotRecord":
        return replace(self, label=label)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "meta": self.meta.to_dict(),
            "grid_len": self.grid_len,
            "channels": {name: list(series) for name, series in zip(CHANNELS, self.channels)},
            "impact_index": self.impact_index,
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ShotRecord":
        return cls(
            meta=SessionMeta.from_dict(data.get("meta", {})),
            grid_len=int(data["grid_len"]),
            channels=tuple(data["channels"][name] for name in CHANNELS),
            impact_index=data.get("impact_index"),
            label=data.get("label"),
        )


# ---------- TEMPLATE ----------

@dataclass(frozen=True)
class GroundTruthTemplate:
    grid_len: int
    channels: Tuple[Tuple[float, ...], ...]
    fit_degree: int
    source_count: int
    impact_index: int
    fit_window: Optional[int] = None

    def __post_init__(self) -> None:
        channels = tuple(_frozen_series(c) for c in self.channels)
        object.__setattr__(self, "channels", channels)
        if len(channels) != len(CHANNELS):
            raise GridMismatch(f"template needs all {len(CHANNELS)} channels")
        for name, series in zip(CHANNELS, channels):
            if len(series) != self.grid_len:
                raise GridMismatch(f"template {name} has {len(series)} values, grid has {self.grid_len}")
            if not all(math.isfinite(v) for v in series):
                raise InvalidSample(f"non-finite template value in {name}")
        object.__setattr__(self, "impact_index", int(self.impact_index))
        if self.source_count < 1:
            raise ValueError("source_count must be >= 1")
        if not (0 <= self.impact_index < self.grid_len):
            raise GridMismatch(f"template impact_index {self.impact_index} outside grid")

    def channel(self, name: str) -> np.ndarray:
        return np.array(self.channels[channel_index(name)], dtype=float)

    def as_array(self) -> np.ndarray:
        return np.array(self.channels, dtype=float)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "grid_len": self.grid_len,
            "fit_degree": self.fit_degree,
            "fit_window": self.fit_window,
            "source_count": self.source_count,
            "impact_index": self.impact_index,
            "channels": {name: list(series) for name, series in zip(CHANNELS, self.channels)},
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "GroundTruthTemplate":
        channels = data["channels"]
        missing = [name for name in CHANNELS if name not in channels]
        if missing:
            raise GridMismatch(f"template is missing channels: {', '.join(missing)}")
        grid_len = int(data["grid_len"])
        return cls(
            grid_len=grid_len,
            channels=tuple(channels[name] for name in CHANNELS),
            fit_degree=int(data["fit_degree"]),
            source_count=int(data["source_count"]),
            # documents without an impact slot were aligned on the grid centre
            impact_index=int(data.get("impact_index", grid_len // 2)),
            fit_window=data.get("fit_window"),
        )


# ---------- OUTCOME MODEL ----------

@dataclass(frozen=True)
class OutcomeModel:
    weights: Tuple[float, ...]
    intercept: float
    feature_names: Tuple[str, ...] = FEATURE_NAMES

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", _frozen_series(self.weights))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "intercept", float(self.intercept))
        if len(self.weights) != len(self.feature_names):
            raise ValueError(
                f"{len(self.weights)} weights for {len(self.feature_names)} features"
            )
        if not all(math.isfinite(w) for w in self.weights + (self.intercept,)):
            raise ValueError("model weights must be finite")

    def weight(self, name: str) -> float:
        return self.weights[self.feature_names.index(name)]

    def raw(self, features: Sequence[float]) -> float:
        """Unclamped linear prediction."""
        return float(np.dot(np.asarray(self.weights), np.asarray(features, dtype=float)) + self.intercept)

    def predict(self, features: Sequence[float]) -> float:
        return min(1.0, max(0.0, self.raw(features)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "feature_names": list(self.feature_names),
            "weights": list(self.weights),
            "intercept": self.intercept,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "OutcomeModel":
        return cls(
            weights=data["weights"],
            intercept=data["intercept"],
            feature_names=data.get("feature_names", FEATURE_NAMES),
        )


# ---------- SCORE ----------

SCORE_METRICS: Tuple[str, ...] = FEATURE_NAMES + ("gap_area_acc_y",)


@dataclass(frozen=True)
class ShotScore:
    rmse_acc_y: float
    rmse_gyro_z: float
    peak_dev_acc_y: float
    peak_dev_gyro_z: float
    gap_area_acc_y: float
    probability: float
    classified: str

    def __post_init__(self) -> None:
        for name in SCORE_METRICS:
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not (0.0 <= self.probability <= 1.0):
            raise ValueError("probability must be in [0, 1]")
        if self.classified not in LABELS:
            raise ValueError(f"classified must be one of {LABELS}")

    def metrics(self) -> Dict[str, float]:
        return {name: getattr(self, name) for name in SCORE_METRICS}

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"probability": self.probability, "classified": self.classified}
        out.update(self.metrics())
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ShotScore":
        return cls(
            probability=float(data["probability"]),
            classified=data["classified"],
            **{name: float(data[name]) for name in SCORE_METRICS},
        )
