import numpy as np
from django.test import SimpleTestCase
from hypothesis import given
from hypothesis import strategies as st

from shots.exceptions import NoImpactDetected, PhaseOutOfBounds, TooFewSamples
from shots.segmentation import PhaseWindow, align_shot, detect_impact, extract_phase, segment

from .helpers import CFG, IMPACT, N, flat_shot, located_shot, params, unlocated_shot


def resting_acc(n=N):
    acc = np.zeros((3, n))
    acc[2] = 9.81
    return acc


class DetectImpactTests(SimpleTestCase):
    def test_single_spike(self):
        acc = resting_acc()
        acc[1, 21] = 60.0
        self.assertEqual(detect_impact(acc, CFG), 21)

    def test_earliest_of_tied_peaks(self):
        acc = resting_acc()
        acc[1, 10] = 40.0
        acc[1, 30] = 40.0
        self.assertEqual(detect_impact(acc, CFG), 10)

    def test_flat_signal_has_no_strike(self):
        with self.assertRaises(NoImpactDetected):
            detect_impact(resting_acc(), CFG)

    def test_too_few_samples(self):
        with self.assertRaises(TooFewSamples):
            detect_impact(resting_acc(7), CFG)

    def test_noiseless_kick(self):
        self.assertEqual(detect_impact(unlocated_shot().acc(), CFG), IMPACT)

    @given(st.tuples(*[st.floats(-50.0, 50.0, allow_nan=False)] * 3))
    def test_constant_offset_does_not_move_the_strike(self, offset):
        acc = unlocated_shot().acc() + np.asarray(offset)[:, None]
        self.assertEqual(detect_impact(acc, CFG), IMPACT)

    @given(st.integers(-IMPACT, N - IMPACT - 1))
    def test_shifting_the_signal_shifts_the_strike(self, shift):
        acc = np.roll(unlocated_shot(noise_sigma=0.3, seed=9).acc(), shift, axis=1)
        self.assertEqual(detect_impact(acc, CFG), IMPACT + shift)


class PhaseTests(SimpleTestCase):
    def test_window_around_impact(self):
        phase = extract_phase(unlocated_shot(), CFG)
        self.assertEqual(phase, PhaseWindow(impact_index=21, start_index=17, end_index=28))
        self.assertEqual(phase.length, 12)

    def test_known_impact_is_used(self):
        phase = extract_phase(located_shot().with_impact(30), CFG)
        self.assertEqual((phase.start_index, phase.end_index), (26, 37))

    def test_window_must_fit_the_grid(self):
        with self.assertRaises(PhaseOutOfBounds):
            extract_phase(located_shot().with_impact(2), CFG)
        with self.assertRaises(PhaseOutOfBounds):
            extract_phase(located_shot().with_impact(45), CFG)

    def test_segment_sets_impact(self):
        self.assertEqual(segment(unlocated_shot(), CFG).impact_index, IMPACT)
        with self.assertRaises(NoImpactDetected):
            segment(flat_shot(), CFG)


class AlignTests(SimpleTestCase):
    def test_shift_moves_impact_and_repeats_edges(self):
        shot = located_shot(noise_sigma=0.3, seed=1)
        moved = align_shot(shot, 24)
        self.assertEqual(moved.impact_index, 24)
        original, shifted = shot.as_array(), moved.as_array()
        np.testing.assert_array_equal(shifted[:, 24], original[:, 21])
        np.testing.assert_array_equal(shifted[:, 3:], original[:, :-3])
        for k in range(3):
            np.testing.assert_array_equal(shifted[:, k], original[:, 0])

    def test_same_slot_is_a_no_op(self):
        shot = located_shot()
        self.assertIs(align_shot(shot, IMPACT), shot)

    def test_needs_an_impact(self):
        with self.assertRaises(NoImpactDetected):
            align_shot(unlocated_shot(), IMPACT)

    def test_kicks_at_different_slots_coincide_after_alignment(self):
        early = located_shot(impact_time_s=params().impact_time_s)
        late = located_shot(impact_time_s=24 / CFG.nominal_rate_hz)
        np.testing.assert_allclose(
            align_shot(late, IMPACT).as_array()[:, 10:40],
            early.as_array()[:, 10:40],
            atol=1e-9,
        )
