'''
The adapted bubble z = z_lambda^{a, omega} on the torus.

Inside the coordinate disc around a it glues the rotated stereographic
bubble R pi_lambda, corrected by the regular part of the Green function, to
the far-field profile omega(p*) + (2 / lambda) R (-grad G - grad J(0), 0).
Outside the disc only the far-field profile is used. The glued vector is
then projected onto the sphere.
'''
import logging

import numpy as np

from greens.ewald import DEFAULT_SPLIT, grad_regular, greens_gradient, grid_grad_regular
from sphere.maps import (P_STAR, RotationParam, alpha_omega, d_omega_pstar,
                         project_field, stereographic)
from torus.grid import IOTA, R0

logger = logging.getLogger(__name__)

#: Smallest admissible bubble scale
LAMBDA_1 = 2.0


class BubbleParams():
    '''
    :param float lam: bubble scale lambda >= LAMBDA_1.
    :param a: attachment point, reduced mod 1.
    :param rot: a RotationParam or an axis-angle vector.
    '''
    def __init__(self, lam, a=(0.5, 0.5), rot=None):
        lam = float(lam)
        if not lam >= LAMBDA_1:
            raise ValueError('lambda must be at least %g, got %g' % (LAMBDA_1, lam))
        if not isinstance(rot, RotationParam):
            rot = RotationParam((0.0, 0.0, 0.0) if rot is None else rot)
        self.lam = lam
        self.a = np.mod(np.asarray(a, dtype=float).reshape(2), 1.0)
        self.rot = rot

    @property
    def alpha(self):
        return alpha_omega(self.rot)

    def with_lambda(self, lam):
        return BubbleParams(lam, self.a, self.rot)

    def with_a(self, a):
        return BubbleParams(self.lam, a, self.rot)

    def with_rot(self, rot):
        return BubbleParams(self.lam, self.a, rot)

    def theta(self, scale):
        '''
        Optimizer coordinates (scale * a, log lambda, rotvec).
        '''
        return np.concatenate([scale * self.a, [np.log(self.lam)], self.rot.rotvec])

    @classmethod
    def from_theta(cls, theta, scale):
        theta = np.asarray(theta, dtype=float)
        return cls(np.exp(theta[2]), theta[:2] / scale, theta[3:])

    def serialize(self):
        return {
            'lambda': self.lam,
            'a1': float(self.a[0]),
            'a2': float(self.a[1]),
            'rot': [float(c) for c in self.rot.rotvec],
        }

    def __repr__(self):
        return 'BubbleParams(lam=%g, a=(%g, %g), rot=%r)' % (
            self.lam, self.a[0], self.a[1], self.rot)


class CutoffProfile():
    '''
    phi = 1 on [0, inner], 0 on [outer, inf), quintic smoothstep between.
    '''
    def __init__(self, inner=R0 / 2, outer=R0):
        self.inner = inner
        self.outer = outer

    def __call__(self, r):
        s = np.clip((self.outer - np.asarray(r, dtype=float))
                    / (self.outer - self.inner), 0.0, 1.0)
        return s * s * s * (10 - 15 * s + 6 * s * s)


CUTOFF = CutoffProfile()


def _embed(params, planar):
    '''
    (2 / lambda) d omega(p*) applied to planar vectors (..., 2).
    '''
    return (2 / params.lam) * planar @ d_omega_pstar(params.rot).T


def j_field(params, x, split=DEFAULT_SPLIT):
    '''
    j(x) = (2 / lambda) d omega(p*)(grad J(x, 0) - grad J(0, 0), 0).

    :param x: translation coordinates with |x| < r0.
    '''
    x = np.asarray(x, dtype=float)
    if np.any(np.linalg.norm(x, axis=-1) >= R0):
        raise ValueError('j is only defined on the coordinate disc |x| < %g' % R0)
    return _embed(params, grad_regular(x, split) - grad_regular(np.zeros(2), split))


def _glue(params, x, regular, split):
    '''
    The unprojected map from translation coordinates and grad J(x, 0).
    '''
    r2 = np.sum(x * x, axis=-1)
    r = np.sqrt(r2)
    phi = CUTOFF(r)
    regular_origin = grad_regular(np.zeros(2), split)
    matrix = params.rot.matrix

    core = stereographic(params.lam, x) @ matrix.T + _embed(params, regular - regular_origin)

    # x / |x|^2 is only needed where phi < 1, away from the pole
    outer = r > CUTOFF.inner
    singular = np.zeros_like(x)
    singular[outer] = x[outer] / r2[outer][:, None]
    far = matrix @ P_STAR + _embed(params, singular + regular - regular_origin)

    blend = phi[..., None]
    return np.where(blend == 1.0, core, blend * core + (1 - blend) * far), phi


def tilde_v(params, x, split=DEFAULT_SPLIT):
    '''
    Inner formula phi (R pi_lambda + j) + (1 - phi) v_far at points x.
    '''
    x = np.asarray(x, dtype=float)
    glued, _ = _glue(params, x, grad_regular(x, split), split)
    return glued


def v_away(params, x, split=DEFAULT_SPLIT):
    '''
    omega(p*) + (2 / lambda) d omega(p*)(-grad G(x) - grad J(0, 0), 0).
    '''
    return (params.rot.matrix @ P_STAR
            + _embed(params, -greens_gradient(x, split)
                     - grad_regular(np.zeros(2), split)))


class BubbleParts():
    '''
    A built bubble together with the pieces it was glued from.
    '''
    def __init__(self, params, field, x, glued, phi):
        self.params = params
        self.field = field
        self.x = x
        self.glued = glued
        self.phi = phi


def build_bubble_parts(params, grid, split=DEFAULT_SPLIT):
    grid.check_resolution(params.lam)
    x, regular = grid_grad_regular(grid, params.a, split)
    glued, phi = _glue(params, x, regular, split)
    field = project_field(grid, glued)
    return BubbleParts(params, field, x, glued, phi)


def build_bubble(params, grid, split=DEFAULT_SPLIT):
    '''
    Sample z_lambda^{a, omega} on `grid`.

    :raises ResolutionError: when lambda * h > 0.2.
    :raises BelowGuard: when the glued vector gets too short to project.
    '''
    return build_bubble_parts(params, grid, split).field


def far_field_sup(params, grid, parts=None):
    '''
    sup over |x| >= iota of |z - omega(p*)|.
    '''
    parts = parts or build_bubble_parts(params, grid)
    away = np.linalg.norm(parts.x, axis=-1) >= IOTA
    deviation = parts.field.values[away] - params.rot.matrix @ P_STAR
    return float(np.linalg.norm(deviation, axis=-1).max())


def seam_error_sup(params, grid, parts=None):
    '''
    sup over the gluing annulus of |v - (R pi_lambda + j)|.
    '''
    parts = parts or build_bubble_parts(params, grid)
    r = np.linalg.norm(parts.x, axis=-1)
    annulus = (r > CUTOFF.inner) & (r < CUTOFF.outer)
    x = parts.x[annulus]
    core = stereographic(params.lam, x) @ params.rot.matrix.T + j_field(params, x)
    return float(np.linalg.norm(parts.glued[annulus] - core, axis=-1).max())


def core_sample(params, grid, field):
    '''
    Value of the field at the sample nearest the attachment point.
    '''
    i, j = grid.nearest_index(params.a)
    return field.values[i, j]
