import numpy as np
from django.test import SimpleTestCase
from scipy.integrate import simpson

from bubbles import expansion
from bubbles.construct import BubbleParams, build_bubble
from diagnostics.fitting import loglog_slope
from torus import grid as tg


def gap_law(lam):
    return 8 * np.pi ** 2 / lam ** 2


class TestPlanarSquareEnergy(SimpleTestCase):
    def test_bounded_by_discs(self):
        '''
        The square [-1/2, 1/2]^2 holds the disc of radius 1/2, whose energy
        is 4 pi s / (1 + s) with s = (lambda / 2)^2.
        '''
        value = expansion.planar_square_energy(40.0, -0.5, 0.5, -0.5, 0.5)
        self.assertGreater(value, 4 * np.pi * 400 / 401)
        self.assertLess(value, 4 * np.pi)

    def test_additive(self):
        whole = expansion.planar_square_energy(10.0, -0.3, 0.7, -0.4, 0.6)
        left = expansion.planar_square_energy(10.0, -0.3, 0.2, -0.4, 0.6)
        right = expansion.planar_square_energy(10.0, 0.2, 0.7, -0.4, 0.6)
        self.assertAlmostEqual(whole, left + right, delta=1e-10)


class TestEnergyGap(SimpleTestCase):
    def test_raw_energy(self):
        field = build_bubble(BubbleParams(40.0), tg.ToroidalGrid(512))
        expected = 4 * np.pi + gap_law(40.0)
        self.assertAlmostEqual(tg.energy(field) / expected, 1.0, delta=0.05)

    def test_lattice_defect_is_second_order(self):
        params = BubbleParams(20.0)
        coarse = expansion.lattice_defect(params, tg.ToroidalGrid(256))
        fine = expansion.lattice_defect(params, tg.ToroidalGrid(512))
        self.assertGreaterEqual(fine / coarse, 0.2)
        self.assertLessEqual(fine / coarse, 0.3)

    def test_gap_law(self):
        grid = tg.ToroidalGrid(512)
        lambdas = np.array([20.0, 28.0, 40.0])
        gaps = np.array([expansion.energy_gap(BubbleParams(lam), grid)
                         for lam in lambdas])
        self.assertTrue(np.all(gaps > 0), gaps)
        slope, _ = loglog_slope(lambdas, gaps)
        self.assertAlmostEqual(slope, -2.0, delta=0.1)
        prefactors = gaps / gap_law(lambdas)
        self.assertTrue(np.all(np.abs(prefactors - 1) <= 0.05), prefactors)

    def test_rotation_does_not_change_energy(self):
        grid = tg.ToroidalGrid(256)
        plain = expansion.energy_gap(BubbleParams(20.0, (0.4, 0.3)), grid)
        turned = expansion.energy_gap(BubbleParams(20.0, (0.4, 0.3), (0.3, -0.2, 1.0)), grid)
        self.assertAlmostEqual(plain, turned, delta=1e-9)


class TestDEDLambda(SimpleTestCase):
    def test_against_law(self):
        grid = tg.ToroidalGrid(512)
        for lam in (20.0, 40.0):
            ratio = (expansion.dE_dlambda(BubbleParams(lam), grid)
                     / (-16 * np.pi ** 2 / lam ** 3))
            self.assertAlmostEqual(ratio, 1.0, delta=0.05, msg=lam)

    def test_integrates_to_gap_difference(self):
        grid = tg.ToroidalGrid(256)
        lambdas = np.linspace(20.0, 40.0, 9)
        derivative = [expansion.dE_dlambda(BubbleParams(lam), grid) for lam in lambdas]
        change = (expansion.energy_gap(BubbleParams(40.0), grid)
                  - expansion.energy_gap(BubbleParams(20.0), grid))
        self.assertAlmostEqual(simpson(derivative, x=lambdas) / change, 1.0, delta=0.01)


class TestLeadingTerm(SimpleTestCase):
    def test_matches_truncated_disc(self):
        for lam in (20.0, 40.0, 80.0):
            ratio = (expansion.leading_term_integral(BubbleParams(lam))
                     / expansion.leading_term_prediction(lam))
            self.assertAlmostEqual(ratio, expansion.truncated_disc_factor(lam), delta=1e-6)

    def test_converges_to_prediction(self):
        ratio = (expansion.leading_term_integral(BubbleParams(160.0))
                 / expansion.leading_term_prediction(160.0))
        self.assertAlmostEqual(ratio, 1.0, delta=0.05)

    def test_truncated_disc_factor(self):
        self.assertAlmostEqual(expansion.truncated_disc_factor(40.0), 0.7823, delta=1e-4)

    def test_rotation_invariant(self):
        plain = expansion.leading_term_integral(BubbleParams(30.0, (0.2, 0.2)))
        turned = expansion.leading_term_integral(
            BubbleParams(30.0, (0.2, 0.2), (0.5, 0.1, -0.7)))
        self.assertAlmostEqual(plain / turned, 1.0, delta=1e-9)


class TestTensionScalings(SimpleTestCase):
    lambdas = np.array([20.0, 40.0, 80.0])

    def test_tension_l2(self):
        '''
        The core and the far field decay like 1/lambda. The gluing annulus
        decays like lambda^-3 but dominates at lambda = 20, so the slope of
        the whole norm is steeper than -1 over this range.
        '''
        grid = tg.ToroidalGrid(512)
        norms = []
        regions = []
        for lam in self.lambdas:
            params = BubbleParams(lam)
            norms.append(expansion.tension_l2(params, grid))
            regions.append(expansion.tension_regions(params, grid))
        for norm, region in zip(norms, regions):
            split = np.sqrt(region['core'] ** 2 + region['seam'] ** 2 + region['away'] ** 2)
            self.assertAlmostEqual(split / norm, 1.0, delta=1e-9)

        off_seam = [np.hypot(region['core'], region['away']) for region in regions]
        off_slope, _ = loglog_slope(self.lambdas, off_seam)
        self.assertAlmostEqual(off_slope, -1.0, delta=0.15)
        seam_slope, _ = loglog_slope(self.lambdas, [region['seam'] for region in regions])
        self.assertAlmostEqual(seam_slope, -3.0, delta=0.5)
        slope, _ = loglog_slope(self.lambdas, norms)
        self.assertLess(slope, off_slope)

    def test_pairing(self):
        grid = tg.ToroidalGrid(512)
        sups = [expansion.pairing_sup(BubbleParams(lam), grid, samples=10)
                for lam in self.lambdas]
        slope, _ = loglog_slope(self.lambdas, sups)
        self.assertAlmostEqual(slope, -2.0, delta=0.3)

    def test_pairing_is_reproducible(self):
        grid = tg.ToroidalGrid(128)
        params = BubbleParams(10.0)
        first = expansion.pairing_sup(params, grid, samples=3, seed=7)
        self.assertEqual(first, expansion.pairing_sup(params, grid, samples=3, seed=7))

    def test_jacobi_pairing(self):
        grid = tg.ToroidalGrid(128)
        params = BubbleParams(10.0)
        first = expansion.jacobi_pairing_sup(params, grid, samples=3, seed=7)
        self.assertTrue(np.isfinite(first))
        self.assertGreaterEqual(first, 0.0)
        self.assertEqual(first, expansion.jacobi_pairing_sup(params, grid, samples=3, seed=7),
                         'The pairing should only depend on the seed')


class TestVariationScalings(SimpleTestCase):
    def test_norms(self):
        grid = tg.ToroidalGrid(256)
        rows = [expansion.variation_scalings(BubbleParams(lam), grid)
                for lam in (20.0, 40.0)]
        for row in rows:
            self.assertGreater(row['scale_norm'], 0.2)
            self.assertLess(row['scale_norm'], 5.0)
        for key in ('translation_norms', 'rotation_norms'):
            low = np.array(rows[0][key])
            high = np.array(rows[1][key])
            ratio = high / low
            self.assertTrue(np.all((ratio > 0.2) & (ratio < 5.0)), (key, ratio))

    def test_weight_variation(self):
        grid = tg.ToroidalGrid(512)
        lambdas = np.array([20.0, 40.0, 80.0])
        values = [expansion.weight_variation_l2(grid, lam, (0.5, 0.5)) for lam in lambdas]
        slope, _ = loglog_slope(lambdas, values)
        self.assertAlmostEqual(slope, -1.0, delta=0.2)


class TestScanRow(SimpleTestCase):
    def test_columns(self):
        row = expansion.scan_row(BubbleParams(10.0), tg.ToroidalGrid(128), samples=2)
        self.assertEqual(tuple(sorted(row)), tuple(sorted(expansion.SCAN_COLUMNS)))
        self.assertTrue(all(np.isfinite(value) for value in row.values()))
