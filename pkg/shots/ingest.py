# shots/ingest.py
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union
from urllib.parse import quote, unquote

import numpy as np

from .config import PipelineConfig
from .exceptions import (
    EmptyFile,
    FrameDecode,
    GapTooLarge,
    InvalidSample,
    MalformedLine,
    NonMonotoneTime,
    SessionTooShort,
    ShotLabError,
    TooFewSamples,
)
from .filtering import moving_average
from .types import (
    ACC_UNITS,
    CHANNELS,
    GYRO_UNITS,
    ImuSample,
    RawSession,
    SessionMeta,
    ShotRecord,
    channel_index,
)

logger = logging.getLogger(__name__)

CSV_HEADER = "t_ms,acc_x,acc_y,acc_z,gyro_x,gyro_y,gyro_z"
FRAME_KEYS = ("t_ms", "ax", "ay", "az", "gx", "gy", "gz")

# a step longer than this many nominal periods is a dropout
GAP_PERIODS = 1.5


# -----------------------------
# Helpers / decoding
# -----------------------------

def _decode(raw: Union[bytes, str]) -> str:
    if isinstance(raw, str):
        return raw
    # utf-8-sig handles a BOM from spreadsheet exports
    for enc in ("utf-8-sig", "utf-8"):
        try:
            return raw.decode(enc)
        except UnicodeDecodeError:
            continue
    return raw.decode("utf-8", errors="replace")


def _parse_meta_comment(line: str, meta: Dict[str, Any]) -> None:
    """
    ``# player_id=p1 window_s=7.0 ...`` -> meta fields. Unknown keys (units
    and the like) are informational and ignored.
    """
    known = set(SessionMeta().to_dict())
    for token in line.lstrip("#").split():
        if "=" not in token:
            continue
        key, value = token.split("=", 1)
        if key in known:
            meta[key] = unquote(value)


# -----------------------------
# CSV logs
# -----------------------------

def parse_csv_log(text: Union[bytes, str], meta: Optional[SessionMeta] = None) -> RawSession:
    """
    Parse a CSV sensor log.

    Leading ``#`` lines may carry session metadata; the first other line must
    be exactly CSV_HEADER. Line numbers in errors are 1-based physical lines.
    """
    lines = _decode(text).splitlines()
    meta_fields: Dict[str, Any] = (meta or SessionMeta()).to_dict()

    line_no = 0
    header_seen = False
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if stripped.startswith("#"):
            _parse_meta_comment(stripped, meta_fields)
            continue
        if not stripped:
            continue
        if stripped != CSV_HEADER:
            raise MalformedLine(line_no, f"expected header {CSV_HEADER!r}")
        header_seen = True
        break
    if not header_seen:
        raise EmptyFile("no header line")

    samples: List[ImuSample] = []
    prev_t: Optional[int] = None
    body = lines[line_no:]
    for offset, row in enumerate(csv.reader(body)):
        row_no = line_no + 1 + offset
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(CHANNELS) + 1:
            raise MalformedLine(row_no, f"expected {len(CHANNELS) + 1} fields, got {len(row)}")
        try:
            t_ms = int(row[0].strip())
            values = [float(cell) for cell in row[1:]]
        except ValueError:
            raise MalformedLine(row_no, "non-numeric field")
        if not all(math.isfinite(v) for v in values):
            raise MalformedLine(row_no, "non-finite value")
        if prev_t is not None and t_ms <= prev_t:
            raise NonMonotoneTime(row_no)
        try:
            samples.append(ImuSample(t_ms=t_ms, acc=values[:3], gyro=values[3:]))
        except InvalidSample as e:
            raise MalformedLine(row_no, str(e))
        prev_t = t_ms

    if not samples:
        raise EmptyFile("header without samples")
    return RawSession(meta=SessionMeta.from_dict(meta_fields), samples=tuple(samples))


def write_csv_log(session: RawSession) -> str:
    """Inverse of parse_csv_log; floats use repr so values round-trip exactly."""
    meta = session.meta
    head = " ".join(
        f"{key}={quote(str(value), safe='')}" for key, value in meta.to_dict().items()
    )
    lines = [
        f"# {head}",
        f"# acc_units={ACC_UNITS} gyro_units={GYRO_UNITS}",
        CSV_HEADER,
    ]
    for s in session.samples:
        lines.append(",".join([str(s.t_ms)] + [repr(v) for v in s.values]))
    return "\n".join(lines) + "\n"


def read_session_file(path: Union[str, Path], meta: Optional[SessionMeta] = None) -> RawSession:
    path = Path(path)
    return parse_csv_log(path.read_bytes(), meta=meta)


# -----------------------------
# Stream frames (NDJSON)
# -----------------------------

def _load_frame(line: Union[bytes, str]) -> Dict[str, Any]:
    try:
        obj = json.loads(_decode(line))
    except ValueError as e:
        raise FrameDecode(f"invalid JSON: {e}")
    if not isinstance(obj, dict):
        raise FrameDecode("frame is not a JSON object")
    return obj


def _sample_from_frame(obj: Dict[str, Any]) -> ImuSample:
    for key in FRAME_KEYS:
        if key not in obj:
            raise FrameDecode(f"missing {key}")
    t_ms = obj["t_ms"]
    if isinstance(t_ms, bool) or not isinstance(t_ms, int):
        raise FrameDecode("t_ms must be an integer")
    values = []
    for key in FRAME_KEYS[1:]:
        v = obj[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise FrameDecode(f"non-finite {key}")
        values.append(float(v))
    try:
        return ImuSample(t_ms=t_ms, acc=values[:3], gyro=values[3:])
    except InvalidSample as e:
        raise FrameDecode(str(e))


def parse_stream_frame(line: Union[bytes, str]) -> ImuSample:
    """Decode one NDJSON sample frame; unknown keys are ignored."""
    return _sample_from_frame(_load_frame(line))


def parse_frame(line: Union[bytes, str]) -> Union[SessionMeta, ImuSample]:
    """A frame is either ``{"meta": {...}}`` or a sample frame."""
    obj = _load_frame(line)
    if "meta" in obj:
        if not isinstance(obj["meta"], dict):
            raise FrameDecode("meta must be an object")
        try:
            return SessionMeta.from_dict(obj["meta"])
        except (ShotLabError, TypeError, ValueError) as e:
            raise FrameDecode(f"bad meta: {e}")
    return _sample_from_frame(obj)


def encode_stream_frame(sample: ImuSample) -> str:
    payload = {"t_ms": sample.t_ms}
    payload.update(zip(FRAME_KEYS[1:], sample.values))
    return json.dumps(payload)


def encode_meta_frame(meta: SessionMeta) -> str:
    return json.dumps({"meta": meta.to_dict()})


# -----------------------------
# Dropout
# -----------------------------

@dataclass(frozen=True)
class GapReport:
    gaps: Tuple[Tuple[int, int], ...]
    loss_fraction: float

    @property
    def missing_slots(self) -> int:
        return sum(missing for _, missing in self.gaps)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "gaps": [list(g) for g in self.gaps],
            "loss_fraction": self.loss_fraction,
        }


def _gaps(times_ms: np.ndarray, rate_hz: float) -> List[Tuple[int, int]]:
    threshold_ms = GAP_PERIODS * 1000.0 / rate_hz
    out: List[Tuple[int, int]] = []
    for i, dt_ms in enumerate(np.diff(times_ms)):
        if dt_ms > threshold_ms:
            missing = int(np.floor(dt_ms / 1000.0 * rate_hz + 0.5)) - 1
            out.append((i, missing))
    return out


def detect_gaps(session: RawSession) -> GapReport:
    """
    Gaps are steps longer than 1.5 nominal periods; ``start_index`` is the
    sample just before the hole.
    """
    if len(session) < 2:
        raise TooFewSamples("gap detection needs at least 2 samples")
    gaps = _gaps(session.times_ms(), session.meta.nominal_rate_hz)
    missing = sum(m for _, m in gaps)
    expected = len(session) + missing
    return GapReport(gaps=tuple(gaps), loss_fraction=missing / expected)


# -----------------------------
# Resampling
# -----------------------------

def resample_uniform(session: RawSession, cfg: PipelineConfig) -> np.ndarray:
    """
    Linear interpolation of every channel onto the session's uniform grid.

    Returns a (6, N) array. Samples past the first one at or beyond the last
    grid slot play no part, so trailing data never changes the result.
    """
    meta = session.meta
    if len(session) < 2:
        raise SessionTooShort("need at least 2 samples")

    times = session.times_ms()
    grid = times[0] + meta.grid_times_ms()
    if times[-1] < grid[-1]:
        raise SessionTooShort(
            f"session covers {times[-1] - times[0]:.0f} ms, window needs {grid[-1] - grid[0]:.0f} ms"
        )

    last = int(np.searchsorted(times, grid[-1], side="left"))
    times = times[: last + 1]
    for start, missing in _gaps(times, meta.nominal_rate_hz):
        if missing > cfg.max_gap_fill:
            raise GapTooLarge(start, missing)

    values = session.values()[:, : last + 1]
    return np.vstack([np.interp(grid, times, row) for row in values])


def session_to_shot(session: RawSession, cfg: PipelineConfig, label: Optional[str] = None) -> ShotRecord:
    """Resample (and optionally smooth the gyro channels) into a ShotRecord."""
    values = resample_uniform(session, cfg)
    if cfg.gyro_smooth_half_width > 0:
        for name in ("gyro_x", "gyro_y", "gyro_z"):
            i = channel_index(name)
            values[i] = moving_average(values[i], cfg.gyro_smooth_half_width)
    return ShotRecord.from_array(session.meta, values, label=label)


def iter_session_files(path: Union[str, Path]) -> List[Path]:
    """A single CSV, or every ``*.csv`` in a directory in natural order."""
    path = Path(path)
    if path.is_dir():
        return sorted(path.glob("*.csv"), key=_natural_key)
    return [path]


def _natural_key(p: Path) -> Tuple[Any, ...]:
    stem = p.stem
    head = stem.rstrip("0123456789")
    tail = stem[len(head):]
    return (head, int(tail) if tail else -1, stem)


def frames_for_session(session: RawSession) -> Iterable[str]:
    """Meta frame first, then one frame per sample (what a replay client sends)."""
    yield encode_meta_frame(session.meta)
    for s in session.samples:
        yield encode_stream_frame(s)
