# shots/config.py
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional

from .exceptions import ConfigInvalid
from .types import SessionMeta, round_half_up

# fields holding whole numbers (slots, degrees); fit_window may also be None
_INT_FIELDS = {"fit_degree", "fit_window", "max_gap_fill", "gyro_smooth_half_width"}
_NULLABLE_FIELDS = {"fit_window"}

MIN_GRID_LEN = 8


@dataclass(frozen=True)
class PipelineConfig:
    """
    Every tunable constant of the pipeline.

    Defaults follow the field protocol (7 s per kick at roughly 7 Hz); the
    filter gain, phase bounds and fit settings are engineering choices.
    """

    window_s: float = 7.0
    nominal_rate_hz: float = 7.0
    filter_alpha: float = 0.98
    phase_pre_s: float = 0.5
    phase_post_s: float = 1.0
    fit_degree: int = 5
    fit_window: Optional[int] = 2
    classify_threshold: float = 0.5
    max_gap_fill: int = 3
    impact_ratio: float = 2.0
    impact_floor: float = 4.905
    gyro_smooth_half_width: int = 0

    # ---------- derived ----------

    @property
    def grid_len(self) -> int:
        return round_half_up(self.window_s * self.nominal_rate_hz)

    @property
    def dt_s(self) -> float:
        return 1.0 / self.nominal_rate_hz

    @property
    def pre_slots(self) -> int:
        return round_half_up(self.phase_pre_s * self.nominal_rate_hz)

    @property
    def post_slots(self) -> int:
        return round_half_up(self.phase_post_s * self.nominal_rate_hz)

    def session_meta(self, player_id: str = "anonymous") -> SessionMeta:
        return SessionMeta(
            player_id=player_id,
            window_s=self.window_s,
            nominal_rate_hz=self.nominal_rate_hz,
        )

    def with_overrides(self, overrides: Mapping[str, Any]) -> "PipelineConfig":
        return validate_config(replace(self, **_coerce_mapping(overrides)))

    # ---------- serialization ----------

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "PipelineConfig":
        return validate_config(cls(**_coerce_mapping(data)))

    @classmethod
    def from_settings(cls) -> "PipelineConfig":
        from django.conf import settings

        return cls.from_dict(getattr(settings, "KICKLAB_PIPELINE", {}) or {})


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _is_whole(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def validate_config(cfg: PipelineConfig) -> PipelineConfig:
    """
    Return ``cfg`` unchanged when every bound holds.

    Raises ConfigInvalid naming the first violated field, in declaration
    order; the phase-window fit is checked last as ``phase window``.
    """
    def need(ok: bool, name: str, rule: str) -> None:
        if not ok:
            raise ConfigInvalid(name, f"{name} {rule}, got {getattr(cfg, name, None)!r}")

    need(_is_number(cfg.window_s) and cfg.window_s > 0, "window_s", "must be > 0")
    need(_is_number(cfg.nominal_rate_hz) and cfg.nominal_rate_hz > 0, "nominal_rate_hz", "must be > 0")
    if cfg.grid_len < MIN_GRID_LEN:
        raise ConfigInvalid("window_s", f"window_s x nominal_rate_hz must give >= {MIN_GRID_LEN} slots")
    need(_is_number(cfg.filter_alpha) and 0.0 <= cfg.filter_alpha <= 1.0, "filter_alpha", "must be in [0, 1]")
    need(_is_number(cfg.phase_pre_s) and cfg.phase_pre_s >= 0, "phase_pre_s", "must be >= 0")
    need(_is_number(cfg.phase_post_s) and cfg.phase_post_s >= 0, "phase_post_s", "must be >= 0")
    need(_is_whole(cfg.fit_degree) and cfg.fit_degree >= 0, "fit_degree", "must be an integer >= 0")
    need(cfg.fit_window is None or (_is_whole(cfg.fit_window) and cfg.fit_window >= 1),
         "fit_window", "must be null or an integer >= 1")
    need(_is_number(cfg.classify_threshold) and 0.0 <= cfg.classify_threshold <= 1.0,
         "classify_threshold", "must be in [0, 1]")
    need(_is_whole(cfg.max_gap_fill) and cfg.max_gap_fill >= 0, "max_gap_fill", "must be an integer >= 0")
    need(_is_number(cfg.impact_ratio) and cfg.impact_ratio >= 1.0, "impact_ratio", "must be >= 1")
    need(_is_number(cfg.impact_floor) and cfg.impact_floor > 0, "impact_floor", "must be > 0")
    need(_is_whole(cfg.gyro_smooth_half_width) and cfg.gyro_smooth_half_width >= 0,
         "gyro_smooth_half_width", "must be an integer >= 0")

    if cfg.pre_slots + cfg.post_slots + 1 > cfg.grid_len:
        raise ConfigInvalid(
            "phase window",
            f"phase window of {cfg.phase_pre_s + cfg.phase_post_s:g} s does not fit a {cfg.window_s:g} s shot",
        )
    return cfg


# -----------------------------
# Loading (settings / file / --set)
# -----------------------------

def _coerce(name: str, value: Any) -> Any:
    if isinstance(value, str):
        s = value.strip()
        if name in _NULLABLE_FIELDS and s.lower() in ("", "null", "none"):
            return None
        try:
            value = json.loads(s)
        except ValueError:
            raise ConfigInvalid(name, f"cannot parse {name}={value!r}")
    if value is None and name in _NULLABLE_FIELDS:
        return None
    if name in _INT_FIELDS:
        if isinstance(value, float) and value.is_integer():
            return int(value)
        return value
    if _is_whole(value):
        return float(value)
    return value


def _coerce_mapping(data: Mapping[str, Any]) -> Dict[str, Any]:
    known = {f.name for f in fields(PipelineConfig)}
    out: Dict[str, Any] = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigInvalid(key, f"unknown config key {key!r}")
        out[key] = _coerce(key, value)
    return out


def parse_overrides(pairs: Iterable[str]) -> Dict[str, Any]:
    """Turn ``key=value`` strings (CLI --set) into a mapping."""
    out: Dict[str, Any] = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ConfigInvalid(pair, f"expected key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        out[key.strip()] = value
    return out


def load_config(path: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None) -> PipelineConfig:
    """
    Settings defaults, then the flat JSON config file, then overrides.
    """
    cfg = PipelineConfig.from_settings()
    if path:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as e:
            raise ConfigInvalid("config", f"cannot read config file {path}: {e}")
        if not isinstance(data, dict):
            raise ConfigInvalid("config", "config file must hold a flat JSON object")
        cfg = cfg.with_overrides(data)
    if overrides:
        cfg = cfg.with_overrides(overrides)
    return cfg
