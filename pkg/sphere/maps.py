'''
The round target S^2: nearest-point projection, tension and second
variation of the discrete energy, stereographic bubbles and the rotation
family omega = R acting on S^2.
'''
import logging

import numpy as np
from scipy.spatial.transform import Rotation

from torus.grid import (ToroidalField3, gradient_dot_array, gradient_sq_array,
                        integrate, laplacian_array)

logger = logging.getLogger(__name__)

#: The point p* = (0, 0, 1) where bubbles attach
P_STAR = np.array([0.0, 0.0, 1.0])
#: Below this length a vector is too short to project
DELTA_N = 0.1
#: Radius of the rotation family around the identity, measured at p*
SIGMA_1 = 0.2
#: Largest admissible normal component of a tangent field
TANGENCY_TOLERANCE = 1e-8


class BelowGuard(ValueError):
    '''
    A vector shorter than DELTA_N was handed to the projection.
    '''
    def __init__(self, count, smallest):
        super().__init__('%i samples below the projection guard (min |v| = %.3g)'
                         % (count, smallest))
        self.count = count
        self.smallest = smallest


class NotTangential(ValueError):
    pass


class RotationParam():
    '''
    A rotation R of S^2 given by its axis-angle vector.

    :param rotvec: axis times angle (radians).
    '''
    def __init__(self, rotvec=(0.0, 0.0, 0.0)):
        self.rotvec = np.array(rotvec, dtype=float).reshape(3)
        self.matrix = Rotation.from_rotvec(self.rotvec).as_matrix()
        if not self.in_family():
            logger.warning('rotation %s moves p* by %.3g, outside the family '
                           'of radius %g', self.rotvec, self.displacement(),
                           SIGMA_1)

    def displacement(self):
        return float(np.linalg.norm(P_STAR - self.matrix @ P_STAR))

    def in_family(self, sigma=SIGMA_1):
        return self.displacement() <= sigma

    def perturbed(self, axis, angle):
        '''
        exp(angle [axis]x) R, the rotation moved along a fixed axis.
        '''
        turn = Rotation.from_rotvec(angle * np.asarray(axis, dtype=float))
        return RotationParam((turn * Rotation.from_rotvec(self.rotvec)).as_rotvec())

    def __repr__(self):
        return 'RotationParam(%s)' % np.array2string(self.rotvec, precision=6)


def project_to_sphere(v):
    '''
    Nearest-point projection v / |v| for one vector or an (..., 3) array.

    :raises BelowGuard: when any |v| < DELTA_N.
    '''
    v = np.asarray(v, dtype=float)
    norms = np.linalg.norm(v, axis=-1, keepdims=True)
    short = norms < DELTA_N
    if np.any(short):
        raise BelowGuard(int(np.count_nonzero(short)), float(norms.min()))
    return v / norms


def project_field(grid, values):
    return ToroidalField3(grid, project_to_sphere(values), on_sphere=True)


def _require_on_sphere(u):
    if not u.on_sphere:
        raise ValueError('%r is not flagged as an on-sphere field' % u)


def tension_array(values, h):
    '''
    tau = Delta u + |grad u|^2 u on a raw (N, N, 3) array.
    '''
    return (laplacian_array(values, h)
            + gradient_sq_array(values, h)[..., None] * values)


def tension(u):
    '''
    The discrete tension field of an on-sphere map.

    For unit samples u(x + h e) . u(x) - 1 = -|u(x + h e) - u(x)|^2 / 2,
    which makes tau . u vanish up to round-off.
    '''
    _require_on_sphere(u)
    return ToroidalField3(u.grid, tension_array(u.values, u.grid.h))


def tangential_part(u, w):
    w = w.values if isinstance(w, ToroidalField3) else np.asarray(w)
    return ToroidalField3(
        u.grid, w - np.sum(w * u.values, axis=-1, keepdims=True) * u.values)


def first_variation(u, w, tau=None):
    '''
    dE(u)(w) = -sum tau . w h^2 for tangent w.
    '''
    tau = tension(u) if tau is None else tau
    return -integrate(np.sum(tau.values * w.values, axis=-1), u.grid)


def check_tangent(u, w):
    normal = np.abs(np.sum(u.values * w.values, axis=-1)).max()
    if normal > TANGENCY_TOLERANCE:
        raise NotTangential('field has normal component %.3g' % normal)


def second_variation(u, v, w):
    '''
    d^2E(u)(v, w) = sum (grad v . grad w - |grad u|^2 v . w) h^2.

    :raises NotTangential: unless v and w are tangent along u.
    '''
    _require_on_sphere(u)
    check_tangent(u, v)
    check_tangent(u, w)
    h = u.grid.h
    density = (gradient_dot_array(v.values, w.values, h)
               - gradient_sq_array(u.values, h) * np.sum(v.values * w.values,
                                                         axis=-1))
    return integrate(density, u.grid)


def stereographic(lam, x):
    '''
    pi_lambda(x) = (2 lambda x, lambda^2 |x|^2 - 1) / (1 + lambda^2 |x|^2).
    '''
    x = np.asarray(x, dtype=float)
    s = lam * lam * np.sum(x * x, axis=-1)
    d = 1.0 + s
    return np.concatenate([2 * lam * x / d[..., None], ((s - 1) / d)[..., None]],
                          axis=-1)


def conformal_factor(lam, x):
    '''
    |grad pi_lambda| = 2 sqrt(2) lambda / (1 + lambda^2 |x|^2).
    '''
    s = lam * lam * np.sum(np.asarray(x) ** 2, axis=-1)
    return 2 * np.sqrt(2) * lam / (1 + s)


def stereographic_dlambda(lam, x):
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    s = lam * lam * r2
    d2 = (1.0 + s) ** 2
    return np.concatenate([2 * x * ((1 - s) / d2)[..., None],
                           (4 * lam * r2 / d2)[..., None]], axis=-1)


def laplacian_stereographic_dlambda(lam, x):
    '''
    Delta d/dlambda pi_lambda. Uses Delta pi_lambda = f pi_lambda with
    f = -8 lambda^2 / (1 + s)^2.
    '''
    s = lam * lam * np.sum(np.asarray(x) ** 2, axis=-1)
    d = 1.0 + s
    f = -8 * lam * lam / d ** 2
    df = 16 * lam * (s - 1) / d ** 3
    return (df[..., None] * stereographic(lam, x)
            + f[..., None] * stereographic_dlambda(lam, x))


def omega_eval(rot, y):
    return np.asarray(y, dtype=float) @ rot.matrix.T


def d_omega_pstar(rot):
    '''
    d omega(p*) in the frame e1, e2 of T_p* S^2: a 3 x 2 matrix.
    '''
    return rot.matrix[:, :2]


def alpha_omega(rot):
    return float(np.linalg.norm(d_omega_pstar(rot)) / np.sqrt(2))


def s_omega(rot):
    return d_omega_pstar(rot) / alpha_omega(rot)


def sphere_energy(omega, radial_nodes=64, angular_nodes=64, step=1e-5):
    '''
    E(omega, S^2) by pulling back through the stereographic chart.

    The plane is parametrized by r = tan(pi s / 2), s in (0, 1), with
    Gauss-Legendre nodes in s and the trapezoid rule in angle. Derivatives
    of omega o pi are centered differences in r and angle.

    :param omega: callable taking an (..., 3) array of sphere points.
    '''
    nodes, weights = np.polynomial.legendre.leggauss(radial_nodes)
    s = 0.5 * (nodes + 1)
    r = np.tan(0.5 * np.pi * s)
    dr_ds = 0.5 * np.pi / np.cos(0.5 * np.pi * s) ** 2
    theta = 2 * np.pi * np.arange(angular_nodes) / angular_nodes
    r, theta = np.meshgrid(r, theta, indexing='ij')

    def chart(rr, tt):
        x = np.stack([rr * np.cos(tt), rr * np.sin(tt)], axis=-1)
        return omega(stereographic(1.0, x))

    hr = step * np.maximum(r, 1.0)
    d_r = (chart(r + hr, theta) - chart(r - hr, theta)) / (2 * hr[..., None])
    d_t = (chart(r, theta + step) - chart(r, theta - step)) / (2 * step)
    density = np.sum(d_r ** 2, axis=-1) + np.sum(d_t ** 2, axis=-1) / r ** 2
    radial = np.sum(density * r, axis=1) * (2 * np.pi / angular_nodes)
    return float(0.5 * np.sum(0.5 * weights * dr_ds * radial))


def discrete_degree(u):
    '''
    Degree of a sampled map: signed solid angles of the two triangles of
    every grid cell, summed and divided by 4 pi.
    '''
    p00 = u.values
    p10 = np.roll(p00, -1, axis=0)
    p01 = np.roll(p00, -1, axis=1)
    p11 = np.roll(p10, -1, axis=1)
    total = _solid_angle(p00, p10, p11) + _solid_angle(p00, p11, p01)
    return float(np.sum(total) / (4 * np.pi))


def _solid_angle(a, b, c):
    triple = np.sum(a * np.cross(b, c), axis=-1)
    denom = (1 + np.sum(a * b, axis=-1) + np.sum(b * c, axis=-1)
             + np.sum(c * a, axis=-1))
    return 2 * np.arctan2(triple, denom)
