import json
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from shots.config import PipelineConfig
from shots.exceptions import (
    EmptyFile,
    FrameDecode,
    GapTooLarge,
    MalformedLine,
    NonMonotoneTime,
    SessionTooShort,
    TooFewSamples,
)
from shots.ingest import (
    CSV_HEADER,
    detect_gaps,
    encode_stream_frame,
    iter_session_files,
    parse_csv_log,
    parse_frame,
    parse_stream_frame,
    resample_uniform,
    session_to_shot,
    write_csv_log,
)
from shots.types import ImuSample, RawSession, SessionMeta

from .helpers import CFG, N, session_from_array, simulated

ROWS = "0,0.1,0.2,9.81,1.0,2.0,3.0\n143,0.1,0.2,9.81,1.0,2.0,3.5\n286,0.1,0.3,9.81,1.0,2.0,4.0\n"


class CsvLogTests(SimpleTestCase):
    def test_parses_header_rows_and_meta_comment(self):
        text = "# player_id=p7 distance_m=10.0\n# acc_units=m/s2\n" + CSV_HEADER + "\n" + ROWS
        session = parse_csv_log(text)
        self.assertEqual(len(session), 3)
        self.assertEqual(session.meta.player_id, "p7")
        self.assertEqual(session.samples[2].t_ms, 286)
        self.assertEqual(session.samples[2].gyro, (1.0, 2.0, 4.0))

    def test_bom_bytes(self):
        raw = (CSV_HEADER + "\n" + ROWS).encode("utf-8-sig")
        self.assertEqual(len(parse_csv_log(raw)), 3)

    def test_wrong_header(self):
        with self.assertRaises(MalformedLine) as ctx:
            parse_csv_log("t,ax,ay\n" + ROWS)
        self.assertEqual(ctx.exception.line_no, 1)

    def test_bad_row_reports_physical_line(self):
        text = CSV_HEADER + "\n0,0,0,9.81,0,0,0\n143,a,0,9.81,0,0,0\n"
        with self.assertRaises(MalformedLine) as ctx:
            parse_csv_log(text)
        self.assertEqual(ctx.exception.line_no, 3)

        with self.assertRaises(MalformedLine):
            parse_csv_log(CSV_HEADER + "\n0,0,0,9.81,0,0\n")
        with self.assertRaises(MalformedLine):
            parse_csv_log(CSV_HEADER + "\n0,nan,0,9.81,0,0,0\n")

    def test_non_monotone_time(self):
        text = CSV_HEADER + "\n0,0,0,9.81,0,0,0\n143,0,0,9.81,0,0,0\n143,0,0,9.81,0,0,0\n"
        with self.assertRaises(NonMonotoneTime) as ctx:
            parse_csv_log(text)
        self.assertEqual(ctx.exception.line_no, 4)

    def test_empty_inputs(self):
        with self.assertRaises(EmptyFile):
            parse_csv_log("")
        with self.assertRaises(EmptyFile):
            parse_csv_log(CSV_HEADER + "\n")

    def test_written_log_parses_back_to_the_same_session(self):
        session, _, _ = simulated(noise_sigma=0.7, dropout_fraction=0.1, seed=11, player_id="p 3")
        self.assertEqual(parse_csv_log(write_csv_log(session)), session)

    def test_directory_listing_is_natural_order(self):
        with tempfile.TemporaryDirectory() as tmp:
            for name in ("shot_10.csv", "shot_2.csv", "shot_1.csv", "notes.txt"):
                Path(tmp, name).write_text("")
            names = [p.name for p in iter_session_files(tmp)]
        self.assertEqual(names, ["shot_1.csv", "shot_2.csv", "shot_10.csv"])


class FrameTests(SimpleTestCase):
    def test_sample_frame(self):
        sample = parse_stream_frame('{"t_ms": 5, "ax": 1, "ay": 2.5, "az": 9.81, "gx": 0, "gy": 0, "gz": -3, "seq": 9}')
        self.assertEqual(sample.t_ms, 5)
        self.assertEqual(sample.acc, (1.0, 2.5, 9.81))
        self.assertEqual(sample.gyro[2], -3.0)

    def test_bad_frames(self):
        for line in (
            "not json",
            "[1, 2]",
            '{"t_ms": 1, "ax": 0, "ay": 0, "az": 0, "gx": 0, "gy": 0}',
            '{"t_ms": 1.5, "ax": 0, "ay": 0, "az": 0, "gx": 0, "gy": 0, "gz": 0}',
            '{"t_ms": true, "ax": 0, "ay": 0, "az": 0, "gx": 0, "gy": 0, "gz": 0}',
            '{"t_ms": 1, "ax": NaN, "ay": 0, "az": 0, "gx": 0, "gy": 0, "gz": 0}',
            '{"t_ms": 1, "ax": "1", "ay": 0, "az": 0, "gx": 0, "gy": 0, "gz": 0}',
        ):
            with self.subTest(line=line), self.assertRaises(FrameDecode):
                parse_stream_frame(line)

    def test_meta_frame(self):
        meta = parse_frame(json.dumps({"meta": {"player_id": "p2", "nominal_rate_hz": 7.0}}))
        self.assertIsInstance(meta, SessionMeta)
        self.assertEqual(meta.player_id, "p2")
        with self.assertRaises(FrameDecode):
            parse_frame('{"meta": {"window_s": -1}}')

    def test_encoded_frame_decodes(self):
        sample = ImuSample(t_ms=143, acc=(0.1, -2.0, 9.81), gyro=(1.0, 2.0, 300.25))
        self.assertEqual(parse_stream_frame(encode_stream_frame(sample)), sample)


class GapTests(SimpleTestCase):
    def test_single_missing_slot(self):
        values = np.zeros((6, 5))
        session = session_from_array(values, times_ms=[0, 143, 286, 572, 715])
        report = detect_gaps(session)
        self.assertEqual(report.gaps, ((2, 1),))
        self.assertAlmostEqual(report.loss_fraction, 1 / 6)

    def test_three_period_step_is_two_missing_slots(self):
        session = session_from_array(np.zeros((6, 4)), times_ms=[0, 143, 572, 715])
        report = detect_gaps(session)
        self.assertEqual(report.gaps, ((1, 2),))
        self.assertEqual(report.missing_slots, 2)

    def test_ten_of_forty_nine_dropped(self):
        full = session_from_array(np.zeros((6, N)))
        dropped = set(range(2, 22, 2))
        session = RawSession(meta=full.meta, samples=tuple(s for k, s in enumerate(full.samples) if k not in dropped))
        report = detect_gaps(session)
        self.assertEqual(report.missing_slots, 10)
        self.assertAlmostEqual(report.loss_fraction, 0.204, places=3)

    def test_needs_two_samples(self):
        with self.assertRaises(TooFewSamples):
            detect_gaps(session_from_array(np.zeros((6, 1))))

    def test_simulated_dropout_is_counted(self):
        session, _, _ = simulated(dropout_fraction=0.1, seed=5)
        report = detect_gaps(session)
        self.assertEqual(report.missing_slots, 5)
        self.assertAlmostEqual(report.loss_fraction, 5 / N)


class ResampleTests(SimpleTestCase):
    def test_lossless_session_lands_on_the_grid(self):
        session, truth, _ = simulated(noise_sigma=0.5, seed=2)
        np.testing.assert_array_equal(resample_uniform(session, CFG), truth.as_array())

    def test_trailing_samples_do_not_change_the_grid(self):
        session, _, _ = simulated(noise_sigma=0.5, seed=2)
        extra = tuple(
            ImuSample(t_ms=7000 + 143 * i, acc=(9.0, 9.0, 9.0), gyro=(9.0, 9.0, 9.0)) for i in range(5)
        )
        longer = RawSession(meta=session.meta, samples=session.samples + extra)
        np.testing.assert_array_equal(resample_uniform(longer, CFG), resample_uniform(session, CFG))

    def test_short_session(self):
        session, _, _ = simulated()
        short = RawSession(meta=session.meta, samples=session.samples[:10])
        with self.assertRaises(SessionTooShort):
            resample_uniform(short, CFG)

    def test_gap_limit(self):
        session, truth, _ = simulated(noise_sigma=0.2, seed=8)
        three = RawSession(meta=session.meta, samples=session.samples[:10] + session.samples[13:])
        filled = resample_uniform(three, CFG)
        np.testing.assert_array_equal(filled[:, :10], truth.as_array()[:, :10])

        four = RawSession(meta=session.meta, samples=session.samples[:10] + session.samples[14:])
        with self.assertRaises(GapTooLarge) as ctx:
            resample_uniform(four, CFG)
        self.assertEqual(ctx.exception.start_index, 9)
        self.assertEqual(ctx.exception.missing, 4)

        resample_uniform(four, PipelineConfig(max_gap_fill=4))

    def test_interpolation_is_linear_across_a_hole(self):
        values = np.tile(np.arange(N, dtype=float), (6, 1))
        keep = [k for k in range(N) if k not in (20, 21)]
        times = CFG.session_meta().grid_times_ms()
        session = session_from_array(values[:, keep], times_ms=times[keep])
        grid = resample_uniform(session, CFG)
        # exact slot times are rounded to the millisecond, so allow that much slack
        np.testing.assert_allclose(grid[1], np.arange(N), atol=0.01)

    def test_gyro_smoothing_leaves_acc_alone(self):
        session, truth, _ = simulated(noise_sigma=1.0, seed=3)
        shot = session_to_shot(session, PipelineConfig(gyro_smooth_half_width=1))
        np.testing.assert_array_equal(shot.acc(), truth.acc())
        self.assertFalse(np.array_equal(shot.channel("gyro_z"), truth.channel("gyro_z")))
        self.assertIsNone(shot.impact_index)
