import numpy as np
from django.test import SimpleTestCase
from scipy.integrate import trapezoid

from sphere import maps
from torus import grid as tg


def smooth_sphere_field(grid):
    p = 2 * np.pi * grid.points()
    values = np.stack([np.sin(p[..., 0]),
                       0.5 * np.cos(p[..., 1]),
                       1.0 + 0.3 * np.cos(p[..., 0] + p[..., 1])], axis=-1)
    return maps.project_field(grid, values)


def smooth_tangent_field(u, shift=0.0):
    p = 2 * np.pi * u.grid.points()
    raw = np.stack([np.cos(p[..., 1] + shift),
                    np.sin(p[..., 0] - p[..., 1]),
                    np.cos(2 * p[..., 0] + shift)], axis=-1)
    return maps.tangential_part(u, raw)


def moved(u, w, eps):
    return maps.project_field(u.grid, u.values + eps * w.values)


class TestProjection(SimpleTestCase):
    def test_scales(self):
        self.assertTrue(np.allclose(maps.project_to_sphere([2.0, 0, 0]), [1, 0, 0]))

    def test_idempotent(self):
        v = maps.project_to_sphere([0.3, -0.4, 1.2])
        self.assertTrue(np.allclose(maps.project_to_sphere(v), v, atol=1e-15))

    def test_guard(self):
        with self.assertRaises(maps.BelowGuard):
            maps.project_to_sphere([0.05, 0, 0])


class TestTension(SimpleTestCase):
    def test_constant_map(self):
        u = tg.ToroidalField3.constant(tg.ToroidalGrid(32), (0, 0, 1))
        self.assertEqual(np.abs(maps.tension(u).values).max(), 0.0)

    def test_tangent(self):
        u = smooth_sphere_field(tg.ToroidalGrid(64))
        tau = maps.tension(u).values
        normal = np.abs(np.sum(tau * u.values, axis=-1)).max()
        self.assertLess(normal, 1e-10 * np.abs(tau).max())

    def test_requires_sphere(self):
        grid = tg.ToroidalGrid(16)
        with self.assertRaises(ValueError):
            maps.tension(tg.ToroidalField3(grid, np.ones(grid.shape + (3,))))

    def test_energy_gradient_identity(self):
        '''
        dE(u)(w) matches a centered difference of E(pi(u + eps w)).
        '''
        u = smooth_sphere_field(tg.ToroidalGrid(64))
        w = smooth_tangent_field(u)
        eps = 1e-5
        numeric = (tg.energy(moved(u, w, eps))
                   - tg.energy(moved(u, w, -eps))) / (2 * eps)
        exact = maps.first_variation(u, w)
        self.assertAlmostEqual(numeric / exact, 1.0, delta=1e-3)


class TestSecondVariation(SimpleTestCase):
    def setUp(self):
        self.u = smooth_sphere_field(tg.ToroidalGrid(64))
        self.v = smooth_tangent_field(self.u)
        self.w = smooth_tangent_field(self.u, shift=0.7)

    def test_second_difference(self):
        eps = 1e-3
        e0 = tg.energy(self.u)
        numeric = (tg.energy(moved(self.u, self.v, eps)) - 2 * e0
                   + tg.energy(moved(self.u, self.v, -eps))) / eps ** 2
        exact = maps.second_variation(self.u, self.v, self.v)
        self.assertAlmostEqual(numeric / exact, 1.0, delta=1e-2)

    def test_symmetric(self):
        vw = maps.second_variation(self.u, self.v, self.w)
        wv = maps.second_variation(self.u, self.w, self.v)
        self.assertAlmostEqual(vw, wv, delta=1e-12 * max(abs(vw), 1.0))

    def test_rejects_normal_fields(self):
        normal = tg.ToroidalField3(self.u.grid, self.u.values)
        with self.assertRaises(maps.NotTangential):
            maps.second_variation(self.u, normal, self.w)


class TestStereographic(SimpleTestCase):
    def test_centre_is_south_pole(self):
        self.assertTrue(np.allclose(maps.stereographic(7.0, [0.0, 0.0]),
                                    [0, 0, -1]))

    def test_unit(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((100, 2))
        norms = np.linalg.norm(maps.stereographic(13.0, x), axis=-1)
        self.assertLess(np.abs(norms - 1).max(), 1e-14)

    def test_far_expansion(self):
        '''
        Outside the core pi_lambda = p* + (2x / (lambda |x|^2), 0) + O(lambda^-2).
        '''
        lam = 40.0
        rng = np.random.default_rng(1)
        angle = 2 * np.pi * rng.random(200)
        r = tg.R0 / 2 + (0.5 - tg.R0 / 2) * rng.random(200)
        x = np.stack([r * np.cos(angle), r * np.sin(angle)], axis=-1)
        approx = maps.P_STAR + np.concatenate(
            [2 * x / (lam * r[:, None] ** 2), np.zeros((200, 1))], axis=-1)
        error = np.linalg.norm(maps.stereographic(lam, x) - approx, axis=-1)
        self.assertLessEqual(error.max(), 4 / (lam * tg.R0 / 2) ** 2)

    def test_conformal_factor(self):
        lam, step = 6.0, 1e-6
        x = np.array([0.07, -0.03])
        partials = [(maps.stereographic(lam, x + step * e)
                     - maps.stereographic(lam, x - step * e)) / (2 * step)
                    for e in np.eye(2)]
        numeric = np.sqrt(sum(np.sum(d * d) for d in partials))
        self.assertAlmostEqual(numeric / maps.conformal_factor(lam, x), 1.0,
                               delta=1e-6)

    def test_lambda_derivative(self):
        lam, step = 9.0, 1e-5
        x = np.array([[0.04, 0.11], [0.2, -0.01]])
        numeric = (maps.stereographic(lam + step, x)
                   - maps.stereographic(lam - step, x)) / (2 * step)
        self.assertTrue(np.allclose(numeric, maps.stereographic_dlambda(lam, x),
                                    atol=1e-8))

    def test_laplacian_of_lambda_derivative(self):
        lam, step = 5.0, 1e-3
        x = np.array([0.13, 0.05])
        lap = sum(maps.stereographic_dlambda(lam, x + step * e)
                  + maps.stereographic_dlambda(lam, x - step * e)
                  for e in np.eye(2)) - 4 * maps.stereographic_dlambda(lam, x)
        lap /= step ** 2
        exact = maps.laplacian_stereographic_dlambda(lam, x)
        self.assertTrue(np.allclose(lap, exact, rtol=1e-4, atol=1e-4), (lap, exact))

    def test_disc_energy_increases_to_full_sphere(self):
        '''
        The energy of pi_lambda on a fixed disc is 4 pi s / (1 + s), s =
        lambda^2 r^2; check it through the conformal factor.
        '''
        r = 0.25
        energies = []
        for lam in (4.0, 16.0, 64.0):
            t = np.linspace(0, r, 20001)
            density = 0.5 * maps.conformal_factor(lam, np.stack(
                [t, np.zeros_like(t)], axis=-1)) ** 2
            energies.append(trapezoid(2 * np.pi * t * density, t))
        self.assertTrue(energies[0] < energies[1] < energies[2] < 4 * np.pi)
        self.assertAlmostEqual(energies[2], 4 * np.pi * 256 / 257, delta=1e-3)


class TestRotationFamily(SimpleTestCase):
    def test_identity(self):
        rot = maps.RotationParam()
        y = np.array([0.6, 0.0, 0.8])
        self.assertTrue(np.allclose(maps.omega_eval(rot, y), y))
        self.assertTrue(np.allclose(maps.d_omega_pstar(rot), np.eye(3)[:, :2]))

    def test_differential_at_pstar(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            rot = maps.RotationParam(0.1 * rng.standard_normal(3))
            dw = maps.d_omega_pstar(rot)
            self.assertAlmostEqual(np.sum(dw * dw), 2.0, delta=1e-12)
            self.assertAlmostEqual(maps.alpha_omega(rot), 1.0, delta=1e-12)
            s = maps.s_omega(rot)
            self.assertTrue(np.allclose(s.T @ s, np.eye(2), atol=1e-12))

    def test_soft_membership_check(self):
        with self.assertLogs('sphere.maps', 'WARNING'):
            rot = maps.RotationParam((1.0, 0.0, 0.0))
        self.assertFalse(rot.in_family())

    def test_perturbed(self):
        rot = maps.RotationParam((0.0, 0.0, 0.3))
        turned = rot.perturbed((0, 0, 1), 0.2)
        self.assertTrue(np.allclose(turned.rotvec, [0, 0, 0.5]))

    def test_sphere_energy(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            rot = maps.RotationParam(0.1 * rng.standard_normal(3))
            energy = maps.sphere_energy(lambda y: maps.omega_eval(rot, y))
            self.assertAlmostEqual(energy, 4 * np.pi, delta=1e-3)


class TestDegree(SimpleTestCase):
    def test_constant(self):
        u = tg.ToroidalField3.constant(tg.ToroidalGrid(16), (0, 0, 1))
        self.assertEqual(maps.discrete_degree(u), 0.0)

    def test_planar_bubble_on_grid(self):
        grid = tg.ToroidalGrid(64)
        x = tg.translate_coords((0.5, 0.5), grid.points())
        u = maps.project_field(grid, maps.stereographic(8.0, x))
        # pi_lambda jumps across the wrap seam, but only the core covers -p*
        self.assertAlmostEqual(abs(maps.discrete_degree(u)), 1.0, delta=1e-6)
