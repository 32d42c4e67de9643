# shots/stream.py
from __future__ import annotations

import asyncio
import json
import logging
from dataclasses import dataclass
from typing import AsyncIterator, Callable, Dict, List, Optional, Tuple

from .config import PipelineConfig
from .exceptions import FrameDecode, GapTooLarge, NoImpactDetected, PhaseOutOfBounds, ShotLabError
from .ingest import frames_for_session, parse_frame, session_to_shot
from .scoring import encode_event, score_event, score_shot
from .types import GroundTruthTemplate, ImuSample, OutcomeModel, RawSession, SessionMeta

logger = logging.getLogger(__name__)


@dataclass
class StreamStats:
    frames: int = 0
    bad_frames: int = 0
    out_of_order: int = 0
    events: int = 0
    discarded: int = 0

    def to_dict(self) -> Dict[str, int]:
        return dict(self.__dict__)


class StreamScorer:
    """
    Per-connection buffer. Samples accumulate until they span one shot
    window, then the window is scored and the buffer starts over.
    """

    def __init__(
        self,
        template: GroundTruthTemplate,
        model: OutcomeModel,
        cfg: PipelineConfig,
        meta: Optional[SessionMeta] = None,
    ):
        self.template = template
        self.model = model
        self.cfg = cfg
        self.meta = meta or cfg.session_meta()
        self.buffer: List[ImuSample] = []
        self.shot_index = 0
        self.stats = StreamStats()

    def reset(self, meta: SessionMeta) -> None:
        if self.buffer:
            logger.warning("meta frame discarded %d buffered samples", len(self.buffer))
            self.stats.discarded += len(self.buffer)
        self.meta = meta
        self.buffer = []

    def _span_ms(self) -> float:
        return float(self.meta.grid_times_ms()[-1])

    def _spans_window(self) -> bool:
        return bool(self.buffer) and self.buffer[-1].t_ms - self.buffer[0].t_ms >= self._span_ms()

    def feed(self, sample: ImuSample) -> Optional[Dict]:
        """
        Add one sample; returns a score event when a window completed.
        Out-of-order samples are counted and ignored.
        """
        self.stats.frames += 1
        if self.buffer and sample.t_ms <= self.buffer[-1].t_ms:
            self.stats.out_of_order += 1
            logger.debug("out-of-order sample t_ms=%d ignored", sample.t_ms)
            return None
        self.buffer.append(sample)
        if not self._spans_window():
            return None
        return self._score_buffer()

    def _score_buffer(self) -> Optional[Dict]:
        session = RawSession(meta=self.meta, samples=tuple(self.buffer))
        try:
            shot = session_to_shot(session, self.cfg)
            score = score_shot(shot, self.template, self.model, self.cfg)
        except GapTooLarge as e:
            # nothing before the hole can start a usable window
            self.stats.discarded += e.start_index + 1
            self.buffer = self.buffer[e.start_index + 1:]
            return None
        except (NoImpactDetected, PhaseOutOfBounds):
            self.stats.discarded += 1
            self.buffer.pop(0)
            return None
        except ShotLabError as e:
            logger.warning("window dropped: %s (%s)", e.code, e)
            self.stats.discarded += 1
            self.buffer.pop(0)
            return None

        event = score_event(score, self.meta.player_id, self.shot_index)
        self.shot_index += 1
        self.stats.events += 1
        self.buffer = []
        return event

    def finish(self) -> None:
        if self.buffer:
            logger.warning("stream ended with a partial window of %d samples; discarded", len(self.buffer))
            self.stats.discarded += len(self.buffer)
            self.buffer = []


ScorerFactory = Callable[[], StreamScorer]


async def read_lines(reader: asyncio.StreamReader) -> AsyncIterator[Optional[bytes]]:
    """
    Newline-terminated lines from ``reader``, the last one possibly without
    its newline. A line longer than the reader's limit comes out as a single
    None and the rest of it is dropped.
    """
    oversized = False
    while True:
        try:
            line = await reader.readuntil(b"\n")
        except asyncio.IncompleteReadError as e:
            if e.partial and not oversized:
                yield e.partial
            return
        except asyncio.LimitOverrunError as e:
            await reader.readexactly(e.consumed)
            if not oversized:
                yield None
            oversized = True
            continue
        if oversized:
            # tail of the long line
            oversized = False
            continue
        yield line


async def handle_connection(
    reader: asyncio.StreamReader,
    writer: asyncio.StreamWriter,
    make_scorer: ScorerFactory,
) -> StreamStats:
    scorer = make_scorer()
    peer = writer.get_extra_info("peername")
    logger.info("stream connection from %s", peer)
    try:
        async for line in read_lines(reader):
            if line is None:
                scorer.stats.bad_frames += 1
                logger.warning("oversized frame from %s dropped", peer)
                continue
            if not line.strip():
                continue
            try:
                frame = parse_frame(line)
            except FrameDecode as e:
                scorer.stats.bad_frames += 1
                logger.debug("bad frame from %s: %s", peer, e.reason)
                continue
            if isinstance(frame, SessionMeta):
                scorer.reset(frame)
                continue
            event = scorer.feed(frame)
            if event is not None:
                writer.write((encode_event(event) + "\n").encode("utf-8"))
                await writer.drain()
    except ConnectionError as e:
        logger.warning("stream from %s lost: %s", peer, e)
    finally:
        scorer.finish()
        logger.info("stream from %s closed: %s", peer, scorer.stats.to_dict())
        writer.close()
        try:
            await writer.wait_closed()
        except ConnectionError:
            pass
    return scorer.stats


async def serve_stream(host: str, port: int, make_scorer: ScorerFactory) -> asyncio.AbstractServer:
    """Start the NDJSON scoring server; one scorer per connection."""

    async def _handler(reader, writer):
        await handle_connection(reader, writer, make_scorer)

    server = await asyncio.start_server(_handler, host, port)
    logger.info("stream server listening on %s", ", ".join(str(s.getsockname()) for s in server.sockets))
    return server


async def replay_session(host: str, port: int, session: RawSession) -> List[Dict]:
    """Send one session (meta frame first), close the write side, collect events."""
    reader, writer = await asyncio.open_connection(host, port)
    try:
        for frame in frames_for_session(session):
            writer.write((frame + "\n").encode("utf-8"))
        await writer.drain()
        writer.write_eof()

        events: List[Dict] = []
        while True:
            line = await reader.readline()
            if not line:
                break
            if line.strip():
                events.append(json.loads(line))
        return events
    finally:
        writer.close()
        try:
            await writer.wait_closed()
        except ConnectionError:
            pass


def parse_listen(value: str) -> Tuple[str, int]:
    """``host:port`` -> (host, port)."""
    host, sep, port = value.rpartition(":")
    if not sep or not host or not port.isdigit():
        raise ValueError(f"expected host:port, got {value!r}")
    return host, int(port)
