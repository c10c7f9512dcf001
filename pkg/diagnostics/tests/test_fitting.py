import numpy as np
from django.test import SimpleTestCase

from diagnostics import fitting


class TestLoglogSlope(SimpleTestCase):
    def test_exact_power(self):
        x = np.array([20.0, 40.0, 80.0])
        slope, prefactor = fitting.loglog_slope(x, 3.0 * x ** -2)
        self.assertAlmostEqual(slope, -2.0, delta=1e-12)
        self.assertAlmostEqual(prefactor, 3.0, delta=1e-10)

    def test_nonpositive(self):
        with self.assertRaises(ValueError):
            fitting.loglog_slope([1.0, 2.0], [1.0, 0.0])


class TestFitDecay(SimpleTestCase):
    def test_exponential(self):
        t = np.geomspace(1.0, 1000.0, 60)
        result = fitting.fit_decay(t, np.exp(-0.3 * np.sqrt(t)))
        self.assertEqual(result.model, 'exponential', result.candidates)
        self.assertAlmostEqual(result.constants['c1'], 0.3, delta=0.003)

    def test_power(self):
        '''
        Starting at t = 2 puts the log reference at t0 = 1, so t^-2 log t is
        one of the power models.
        '''
        t = np.geomspace(2.0, 200.0, 60)
        t0 = fitting.log_reference(t)
        self.assertEqual(t0, 1.0)
        result = fitting.fit_decay(t, t ** -2 * np.log(t))
        self.assertEqual(result.model, 'power', result.candidates)
        self.assertAlmostEqual(result.constants['exponent'], -2.0, delta=1e-6)
        self.assertAlmostEqual(result.constants['log_exponent'], 1.0, delta=1e-6)
        self.assertEqual(result.t0, t0)

    def test_selection_is_scale_invariant(self):
        '''
        Stretching t changes c1 by the inverse square root of the stretch
        but not the selected model.
        '''
        t = np.geomspace(1.0, 1000.0, 60)
        e_d = np.exp(-0.3 * np.sqrt(t))
        plain = fitting.fit_decay(t, e_d)
        stretched = fitting.fit_decay(4 * t, e_d)
        self.assertEqual(plain.model, stretched.model)
        self.assertAlmostEqual(stretched.constants['c1'], 0.15, delta=0.0015)

    def test_power_fit_is_scale_invariant(self):
        '''
        In other units of t only log C moves: the held-out R^2 and the
        exponents of both models stay put.
        '''
        t = np.geomspace(1.5, 1000.0, 60)
        for e_d in (t ** -2 * np.log(t), t ** -1.5 * np.log(t) ** 3):
            plain = fitting.fit_decay(t, e_d)
            stretched = fitting.fit_decay(4 * t, e_d)
            self.assertEqual(plain.model, stretched.model)
            for model in ('exponential', 'power'):
                self.assertAlmostEqual(plain.candidates[model]['r2'],
                                       stretched.candidates[model]['r2'], delta=1e-9)
            power, moved = plain.candidates['power'], stretched.candidates['power']
            for name in ('exponent', 'log_exponent'):
                self.assertAlmostEqual(power['constants'][name], moved['constants'][name],
                                       delta=1e-8)
            self.assertAlmostEqual(
                moved['constants']['log_C'],
                power['constants']['log_C'] - power['constants']['exponent'] * np.log(4),
                delta=1e-8)

    def test_r2_is_held_out(self):
        t = np.geomspace(1.0, 1000.0, 60)
        result = fitting.fit_decay(t, np.exp(-0.3 * np.sqrt(t)))
        self.assertLess(result.window[1], t[-1])
        self.assertAlmostEqual(result.r2, 1.0, delta=1e-9)

    def test_too_few_samples(self):
        t = np.geomspace(1.0, 1000.0, 20)
        with self.assertRaises(fitting.InsufficientData):
            fitting.fit_decay(t, np.exp(-np.sqrt(t)))

    def test_less_than_a_decade(self):
        t = np.linspace(1.0, 5.0, 50)
        with self.assertRaises(fitting.InsufficientData):
            fitting.fit_decay(t, np.exp(-np.sqrt(t)))

    def test_nonpositive_samples_are_dropped(self):
        t = np.geomspace(1.0, 1000.0, 40)
        e_d = np.exp(-0.3 * np.sqrt(t))
        e_d[::2] = 0.0
        with self.assertRaises(fitting.InsufficientData):
            fitting.fit_decay(t, e_d)


class TestExponentialTail(SimpleTestCase):
    def test_exact_tail(self):
        t = np.arange(21) / 10
        energy = np.where(t > 0.5, 3.0 * np.exp(-4.0 * (t - 0.5)), 4 * np.pi + 1)
        result = fitting.fit_exponential_tail(t, energy, 0.5)
        self.assertAlmostEqual(result['rate'], 4.0, delta=1e-9)
        self.assertAlmostEqual(result['log_C'], np.log(3.0), delta=1e-9)
        self.assertAlmostEqual(result['r2'], 1.0, delta=1e-12)
        self.assertEqual(result['samples'], 15)

    def test_too_few_samples(self):
        with self.assertRaises(fitting.InsufficientData):
            fitting.fit_exponential_tail([0.0, 1.0, 2.0], [1.0, 0.5, 0.25], 1.0)


class TestLogSquareRate(SimpleTestCase):
    def test_saturated_decay(self):
        t = np.linspace(0.0, 50.0, 101)
        e_d = np.exp(-0.5 * np.sqrt(t + 1))
        self.assertAlmostEqual(fitting.log_square_rate(t, e_d), 0.25, delta=1e-12)
