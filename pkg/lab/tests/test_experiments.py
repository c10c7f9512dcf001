import numpy as np
from django.test import SimpleTestCase

from bubbles.expansion import leading_term_prediction, truncated_disc_factor
from diagnostics.records import DiagnosticsRecord
from greens.ewald import EwaldSplit
from lab import experiments
from torus.grid import ToroidalGrid


class TestOutcome(SimpleTestCase):
    def test_skipped_passes(self):
        outcome = experiments.Outcome({}, {'dissipation': True, 'loj_trajectory': 'skipped'})
        self.assertTrue(outcome.passed)
        self.assertEqual(outcome.failed_criteria(), [])

    def test_false_fails(self):
        outcome = experiments.Outcome({'x': 1}, {'b': False, 'a': False, 'c': True})
        self.assertFalse(outcome.passed)
        self.assertEqual(outcome.failed_criteria(), ['a', 'b'])
        summary = outcome.full_summary()
        self.assertEqual(summary['verdict']['c'], True)
        self.assertFalse(summary['passed'])
        self.assertNotIn('verdict', outcome.summary)


class TestTrajectoryChecks(SimpleTestCase):
    def records(self, tensions, lam=10.0):
        return [DiagnosticsRecord(t, 4 * np.pi + 1.0, tension, lam, (0.5, 0.5))
                for t, tension in enumerate(tensions)]

    def test_too_few_samples(self):
        measurements, verdict = experiments.trajectory_checks(
            self.records([1.0, 0.5]), 4 * np.pi)
        self.assertEqual(verdict, experiments.SKIPPED)
        self.assertEqual(measurements['resolved_samples'], 2)

    def test_unresolved_samples_are_ignored(self):
        records = self.records([1.0, 0.9, 0.8])
        records.append(DiagnosticsRecord(3.0, 4 * np.pi, 1e-6, events=['unresolved']))
        measurements, verdict = experiments.trajectory_checks(records, 4 * np.pi)
        self.assertTrue(verdict)
        self.assertEqual(measurements['resolved_samples'], 3)
        self.assertEqual(measurements['window'], [0.0, 2.0])

    def test_unbounded_ratio(self):
        measurements, verdict = experiments.trajectory_checks(
            self.records([1.0, 1.0, 1e-4]), 4 * np.pi)
        self.assertFalse(verdict)
        self.assertFalse(measurements['ratio_scale']['passed'])

    def test_ode_ratio_reports_log_floor(self):
        measurements, _ = experiments.trajectory_checks(
            self.records([1.0, 0.9, 0.8]), 4 * np.pi)
        self.assertEqual(measurements['ode_ratio']['log_floor'], 1.0)
        self.assertIn('max(|log E_d|, 1)', measurements['ode_ratio']['note'])


class TestDecayReport(SimpleTestCase):
    def test_post_event_tail(self):
        records = [DiagnosticsRecord(0.0, 4 * np.pi + 1.0, 1.0),
                   DiagnosticsRecord(0.1, 4 * np.pi, 1.0, events=['unresolved']),
                   DiagnosticsRecord(0.2, 0.5, 1.0, events=['closed:12.5'])]
        records += [DiagnosticsRecord(0.2 + k / 10, 0.5 * np.exp(-3.0 * k / 10), 0.1)
                    for k in range(1, 6)]
        report = experiments._decay_report(records, 4 * np.pi)
        post = report['post_event']
        self.assertEqual(post['t_event'], 0.2)
        self.assertEqual(post['samples'], 5)
        self.assertAlmostEqual(post['rate'], 3.0, delta=1e-8)
        self.assertAlmostEqual(post['r2'], 1.0, delta=1e-10)

    def test_no_event(self):
        records = [DiagnosticsRecord(t, 4 * np.pi + 1.0 / (1 + t), 1.0) for t in range(5)]
        report = experiments._decay_report(records, 4 * np.pi)
        self.assertEqual(report['post_event'], {'reason': 'no singular event closed'})
        self.assertIn('error', report['fit'])


class TestScanReports(SimpleTestCase):
    lambdas = np.array([20.0, 40.0, 80.0])

    def test_leading_term_report(self):
        prediction = leading_term_prediction(self.lambdas)
        factors = truncated_disc_factor(self.lambdas)
        report = experiments.leading_term_report(
            self.lambdas, prediction * factors, prediction + self.lambdas ** -4)
        self.assertTrue(np.allclose(report['leading_term_ratios'], 1.0, atol=1e-12))
        self.assertTrue(np.allclose(report['leading_term_raw_ratios'], factors, atol=1e-12))
        self.assertAlmostEqual(report['residual_slope'], -4.0, delta=1e-6)
        self.assertLess(report['raw_residual_slope'], -4.0)

    def test_tension_region_slopes(self):
        regions = [{'core': 2 / lam, 'seam': 50 / lam ** 3, 'away': 0.1 / lam}
                   for lam in self.lambdas]
        slopes = experiments.tension_region_slopes(self.lambdas, regions)
        self.assertAlmostEqual(slopes['core'], -1.0, delta=1e-9)
        self.assertAlmostEqual(slopes['seam'], -3.0, delta=1e-9)
        self.assertAlmostEqual(slopes['off_seam'], -1.0, delta=1e-9)


class TestAttachmentChecks(SimpleTestCase):
    def test_tables_agree_with_pointwise_sums(self):
        rng = np.random.default_rng(5)
        attachments = [(0.0, 0.0)] + [tuple(a) for a in rng.random((9, 2))]
        checks = experiments.attachment_checks(ToroidalGrid(32), EwaldSplit(), attachments)
        self.assertEqual(checks['attachments'], 10)
        self.assertLessEqual(checks['gradient'], 1e-10)
        self.assertLessEqual(checks['values'], 1e-10)
        self.assertLessEqual(checks['j_spread'], 1e-8)


class TestHelpers(SimpleTestCase):
    def test_synthetic_decay(self):
        self.assertTrue(experiments.synthetic_decay_check())

    def test_random_rotations(self):
        first = experiments.random_rotations(3, seed=4)
        again = experiments.random_rotations(3, seed=4)
        self.assertEqual(len(first), 3)
        for a, b in zip(first, again):
            self.assertTrue(np.array_equal(a, b))
            self.assertLessEqual(np.linalg.norm(a), np.pi)
