"""End-to-end checks on simulated field sessions."""
from dataclasses import replace

import numpy as np
from django.test import SimpleTestCase

from shots.exceptions import GapTooLarge, ShotLabError
from shots.ingest import session_to_shot
from shots.pipeline import NamedShot, score_sessions, train_from_shots
from shots.scoring import locate_strike, score_shot
from shots.segmentation import detect_impact
from shots.simulator import ShotParams, canonical_channels, default_profiles, generate_dataset, generate_shot
from shots.template import build_ground_truth
from shots.types import SCORE_METRICS, RawSession

from .helpers import CFG, IMPACT, N, fixture_model, optimal_template, params, trained, truth_shot


class ImpactRecoveryTests(SimpleTestCase):
    def test_strike_found_within_one_slot(self):
        rng = np.random.default_rng(100)
        hits = 0
        for seed in range(1000):
            p = ShotParams(
                velocity_scale=float(rng.uniform(0.5, 1.5)),
                angle_dev_deg=float(rng.uniform(0.0, 20.0)),
                impact_time_s=int(rng.integers(12, 31)) / CFG.nominal_rate_hz,
                noise_sigma=float(rng.uniform(0.0, 1.0)),
                dropout_fraction=float(rng.uniform(0.0, 0.1)),
                seed=seed,
            )
            session, truth, _ = generate_shot(p, CFG)
            try:
                found = detect_impact(session_to_shot(session, CFG).acc(), CFG)
            except ShotLabError:
                continue
            if abs(found - truth.impact_index) <= 1:
                hits += 1
        self.assertGreaterEqual(hits, 950)


class TemplateRecoveryTests(SimpleTestCase):
    def test_five_hundred_noisy_kicks_recover_the_canonical_curve(self):
        shots = [truth_shot(noise_sigma=0.5, seed=seed) for seed in range(500)]
        template = build_ground_truth(shots, CFG)
        self.assertEqual(template.source_count, 500)
        error = np.abs(template.as_array() - canonical_channels(params(), CFG))
        self.assertLess(float(error.max()), 0.1)


class HeldOutAgreementTests(SimpleTestCase):
    def test_train_on_half_score_the_other_half(self):
        profiles = [replace(p, dropout_fraction=0.0) for p in default_profiles()]
        dataset = generate_dataset(1000, profiles, seed=2024)
        train, held_out = dataset[:500], dataset[500:]

        named = [NamedShot(s.name, session_to_shot(s.session, CFG, label=s.label)) for s in train]
        result = train_from_shots(named, CFG)

        report = score_sessions([(s.name, s.session) for s in held_out], result.template, result.model, CFG)
        self.assertLessEqual(len(report.skipped), 25)
        agree = sum(1 for e in report.events if e["classified"] == held_out[e["shot_index"]].label)
        self.assertGreaterEqual(agree / len(report.events), 0.9)


class SummaryRateTests(SimpleTestCase):
    def test_half_clean_dataset_scores_near_half_success(self):
        dataset = generate_dataset(1000, default_profiles(), seed=7)
        result = trained()
        report = score_sessions([(s.name, s.session) for s in dataset], result.template, result.model, CFG)
        self.assertLessEqual(len(report.skipped), 20)
        self.assertLess(abs(report.summary["success_rate"] - 0.5), 0.05)


def miss(rng, seed):
    """A weak, slightly deviated kick struck at the usual slot."""
    return ShotParams(
        velocity_scale=float(rng.uniform(0.45, 0.6)),
        angle_dev_deg=float(rng.uniform(15.0, 22.0)),
        impact_time_s=IMPACT / CFG.nominal_rate_hz,
        noise_sigma=0.5,
        seed=seed,
    )


class DropoutResilienceTests(SimpleTestCase):
    def test_lost_samples_never_move_the_strike(self):
        rng = np.random.default_rng(8)
        template = optimal_template()
        used = 0
        for seed in range(100):
            p = miss(rng, seed)
            lossless, _, _ = generate_shot(p, CFG)
            lossy, _, _ = generate_shot(replace(p, dropout_fraction=0.2), CFG)
            try:
                shot = session_to_shot(lossy, CFG)
            except GapTooLarge:
                continue
            used += 1
            with self.subTest(seed=seed):
                self.assertEqual(locate_strike(session_to_shot(lossless, CFG), template, CFG), IMPACT)
                self.assertEqual(locate_strike(shot, template, CFG), IMPACT)
        self.assertGreaterEqual(used, 50)

    def test_twenty_percent_loss_off_the_strike_keeps_every_metric(self):
        rng = np.random.default_rng(9)
        template, model = optimal_template(), fixture_model()
        # single-slot holes well clear of the strike, so every gap is repairable
        candidates = list(range(1, 14, 2)) + list(range(32, N - 1, 2))
        for seed in range(100):
            lossless, _, _ = generate_shot(miss(rng, seed), CFG)
            dropped = set(rng.choice(candidates, size=10, replace=False).tolist())
            lossy = RawSession(
                meta=lossless.meta,
                samples=tuple(s for k, s in enumerate(lossless.samples) if k not in dropped),
            )
            base = score_shot(session_to_shot(lossless, CFG), template, model, CFG)
            hit = score_shot(session_to_shot(lossy, CFG), template, model, CFG)
            for name in SCORE_METRICS:
                with self.subTest(seed=seed, metric=name):
                    ref = getattr(base, name)
                    self.assertLess(abs(getattr(hit, name) - ref), 0.10 * ref)
