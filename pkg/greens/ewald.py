'''
Green's function of the unit-area flat torus, -Delta G = 2 pi (delta - 1),
normalized to mean zero.

G is summed by Ewald splitting at heat-kernel time sigma:

    G(x) = 1/2 sum_n E1(|x - n|^2 / (4 sigma)) - 2 pi sigma
           + sum_{k != 0} exp(-4 pi^2 sigma |k|^2) cos(2 pi k.x) / (2 pi |k|^2)

The n = 0 image carries the log singularity; J(x) = G(x) + log|x| and
grad_regular(x) = -grad G(x) - x / |x|^2 are computed from the smooth
combination E1(z) + log z so both pass through x = 0.
'''
import logging

import numpy as np
from scipy.special import exp1

from torus.grid import (integrate, laplacian_array, translate_coords, translate_coords_inverse,
                        wrap)

logger = logging.getLogger(__name__)

#: Area of the unit torus
AREA = 1.0
#: Analytic value of the trace of the regular part's mixed Hessian at 0
J_EXACT = -2 * np.pi / AREA
#: Largest tolerated disagreement between j_constant estimates
J_TOLERANCE = 1e-4
#: Points per chunk for the direct Fourier sum
CHUNK = 4096


class AtSingularity(ValueError):
    pass


class NonConvergent(RuntimeError):
    pass


class EwaldSplit():
    '''
    :param float sigma: heat-kernel splitting time.
    :param int images: real-space image rings kept around the cell.
    :param int modes: Fourier modes kept per direction and sign.
    '''
    def __init__(self, sigma=0.01, images=1, modes=12):
        if sigma <= 0:
            raise ValueError('sigma must be positive')
        self.sigma = float(sigma)
        self.images = int(images)
        self.modes = int(modes)
        tail_real = np.exp(-(self.images + 0.5) ** 2 / (4 * self.sigma))
        tail_fourier = np.exp(-4 * np.pi ** 2 * self.sigma * (self.modes + 1) ** 2)
        if max(tail_real, tail_fourier) > 1e-12:
            logger.warning('Ewald split sigma=%g images=%i modes=%i truncates '
                           'at %.1e', self.sigma, self.images, self.modes,
                           max(tail_real, tail_fourier))

        offsets = np.arange(-self.images, self.images + 1)
        n1, n2 = np.meshgrid(offsets, offsets, indexing='ij')
        images = np.stack([n1.ravel(), n2.ravel()], axis=-1).astype(float)
        self.far_images = images[np.any(images != 0, axis=1)]

        ks = np.arange(-self.modes, self.modes + 1)
        k1, k2 = np.meshgrid(ks, ks, indexing='ij')
        k_sq = (k1 * k1 + k2 * k2).astype(float)
        k_sq[self.modes, self.modes] = np.inf
        #: exp(-4 pi^2 sigma |k|^2) / |k|^2 on the (2M+1)^2 mode square
        self.damping = np.exp(-4 * np.pi ** 2 * self.sigma * k_sq) / k_sq
        self.ks = ks.astype(float)
        nonzero = np.isfinite(k_sq)
        self.k_list = np.stack([k1[nonzero], k2[nonzero]], axis=-1).astype(float)
        self.damping_list = self.damping[nonzero]

    def __repr__(self):
        return 'EwaldSplit(sigma=%g, images=%i, modes=%i)' % (
            self.sigma, self.images, self.modes)


DEFAULT_SPLIT = EwaldSplit()


def _ein(z):
    '''
    E1(z) + log z, which tends to -Euler's constant as z -> 0.
    '''
    z = np.asarray(z, dtype=float)
    safe = np.where(z > 1e-8, z, 1.0)
    return np.where(z > 1e-8, exp1(safe) + np.log(safe), -np.euler_gamma + z)


def _one_minus_exp_over(z):
    '''
    (1 - exp(-z)) / z, equal to 1 at z = 0.
    '''
    z = np.asarray(z, dtype=float)
    safe = np.where(z > 1e-12, z, 1.0)
    return np.where(z > 1e-12, -np.expm1(-safe) / safe, 1.0 - 0.5 * z)


def _fourier_terms(x, split):
    '''
    Fourier parts of the value and of grad_regular for an (P, 2) array.
    '''
    value = np.empty(len(x))
    grad = np.empty((len(x), 2))
    for start in range(0, len(x), CHUNK):
        chunk = x[start:start + CHUNK]
        phase = 2 * np.pi * chunk @ split.k_list.T
        value[start:start + CHUNK] = np.cos(phase) @ split.damping_list / (2 * np.pi)
        grad[start:start + CHUNK] = (np.sin(phase) * split.damping_list) @ split.k_list
    return value, grad


def _prepare(x):
    x = wrap(np.asarray(x, dtype=float))
    shape = x.shape[:-1]
    return x.reshape(-1, 2), shape


def regular_value(x, split=DEFAULT_SPLIT):
    '''
    J(x) = G(x) + log|x| for wrapped x, smooth through the origin.
    '''
    flat, shape = _prepare(x)
    sigma = split.sigma
    r2 = np.sum(flat * flat, axis=-1)
    value = 0.5 * _ein(r2 / (4 * sigma)) + 0.5 * np.log(4 * sigma) - 2 * np.pi * sigma
    for n in split.far_images:
        d = flat - n
        value += 0.5 * exp1(np.sum(d * d, axis=-1) / (4 * sigma))
    fourier, _ = _fourier_terms(flat, split)
    return (value + fourier).reshape(shape)


def _check_singular(flat):
    if np.any(np.all(flat == 0.0, axis=-1)):
        raise AtSingularity('Green function evaluated at its pole')


def greens_value(x, split=DEFAULT_SPLIT):
    '''
    G(x) for an array of points (..., 2).

    :raises AtSingularity: when a point wraps onto the lattice.
    '''
    flat, shape = _prepare(x)
    _check_singular(flat)
    r = np.sqrt(np.sum(flat * flat, axis=-1))
    return regular_value(flat, split).reshape(shape) - np.log(r).reshape(shape)


def grad_regular(x, split=DEFAULT_SPLIT):
    '''
    grad_y J_a(x, 0) = -grad G(x) - x / |x|^2, defined through x = 0.
    '''
    flat, shape = _prepare(x)
    sigma = split.sigma
    r2 = np.sum(flat * flat, axis=-1)
    grad = -_one_minus_exp_over(r2 / (4 * sigma))[:, None] * flat / (4 * sigma)
    for n in split.far_images:
        d = flat - n
        d2 = np.sum(d * d, axis=-1)
        grad += (np.exp(-d2 / (4 * sigma)) / d2)[:, None] * d
    _, fourier = _fourier_terms(flat, split)
    return (grad + fourier).reshape(shape + (2,))


def greens_gradient(x, split=DEFAULT_SPLIT):
    flat, shape = _prepare(x)
    _check_singular(flat)
    r2 = np.sum(flat * flat, axis=-1)
    return (-grad_regular(flat, split) - flat / r2[:, None]).reshape(shape + (2,))


def grid_grad_regular(grid, a, split=DEFAULT_SPLIT):
    '''
    grad_regular at every sample, in translation coordinates around `a`.

    The Fourier sum factorizes along the two axes, so it costs two small
    matrix products instead of a sum over all modes per sample.

    :returns: (x, grad) with x the (N, N, 2) wrapped coordinates.
    '''
    a = np.mod(np.asarray(a, dtype=float), 1.0)
    x1 = wrap(grid.axis() - a[0])
    x2 = wrap(grid.axis() - a[1])
    x = np.stack(np.meshgrid(x1, x2, indexing='ij'), axis=-1)
    sigma = split.sigma

    r2 = x1[:, None] ** 2 + x2[None, :] ** 2
    grad = -_one_minus_exp_over(r2 / (4 * sigma))[..., None] * x / (4 * sigma)
    for n in split.far_images:
        d1 = (x1 - n[0])[:, None]
        d2 = (x2 - n[1])[None, :]
        dist = d1 * d1 + d2 * d2
        weight = np.exp(-dist / (4 * sigma)) / dist
        grad[..., 0] += weight * d1
        grad[..., 1] += weight * d2

    e1 = np.exp(2j * np.pi * np.outer(split.ks, x1))
    e2 = np.exp(2j * np.pi * np.outer(split.ks, x2))
    for axis, k in enumerate((split.ks[:, None], split.ks[None, :])):
        grad[..., axis] += np.imag(e1.T @ (split.damping * k) @ e2)
    return x, grad


def grid_greens_value(grid, a, split=DEFAULT_SPLIT):
    '''
    G on every sample relative to `a`; the sample at distance zero is NaN.
    '''
    a = np.mod(np.asarray(a, dtype=float), 1.0)
    x1 = wrap(grid.axis() - a[0])
    x2 = wrap(grid.axis() - a[1])
    sigma = split.sigma
    value = np.full((grid.n, grid.n), -2 * np.pi * sigma)
    r2 = x1[:, None] ** 2 + x2[None, :] ** 2
    with np.errstate(divide='ignore'):
        value += 0.5 * exp1(r2 / (4 * sigma))
    for n in split.far_images:
        dist = (x1 - n[0])[:, None] ** 2 + (x2 - n[1])[None, :] ** 2
        value += 0.5 * exp1(dist / (4 * sigma))
    e1 = np.exp(2j * np.pi * np.outer(split.ks, x1))
    e2 = np.exp(2j * np.pi * np.outer(split.ks, x2))
    value += np.real(e1.T @ split.damping @ e2) / (2 * np.pi)
    value[r2 == 0] = np.nan
    return value


def greens_value_series(x, terms=30):
    '''
    G from the row-summed lattice series. With t = |x2| in [0, 1/2] and
    q_k = exp(-2 pi k):

        G = pi (t^2 - t + 1/6) - log|1 - exp(2 pi i x1 - 2 pi t)|
            + sum_k cos(2 pi k x1) (q_k e^{-2 pi k t} + e^{-2 pi k (1 - t)})
                                   / (k (1 - q_k))

    Exponentially convergent and independent of the Ewald split.
    '''
    flat, shape = _prepare(x)
    _check_singular(flat)
    x1, t = flat[:, 0], np.abs(flat[:, 1])
    value = np.pi * (t * t - t + 1.0 / 6)
    value -= np.log(np.abs(1 - np.exp(2j * np.pi * x1 - 2 * np.pi * t)))
    for k in range(1, terms + 1):
        q = np.exp(-2 * np.pi * k)
        value += (np.cos(2 * np.pi * k * x1)
                  * (q * np.exp(-2 * np.pi * k * t) + np.exp(-2 * np.pi * k * (1 - t)))
                  / (k * (1 - q)))
    return value.reshape(shape)


def divergence_grad_regular(x, split=DEFAULT_SPLIT, step=1e-3):
    '''
    Centered-difference divergence of grad_regular at points (..., 2).
    '''
    x = np.asarray(x, dtype=float)
    total = 0.0
    for axis in (0, 1):
        e = np.zeros(2)
        e[axis] = step
        total = total + (grad_regular(x + e, split)[..., axis]
                         - grad_regular(x - e, split)[..., axis]) / (2 * step)
    return total


def j_constant(split=DEFAULT_SPLIT, radii=(4e-2, 2e-2, 1e-2), directions=8, a=(0.0, 0.0)):
    '''
    The constant J = lim_{x -> 0} div grad_y J(x, 0), by circle averages of
    the divergence at shrinking radii and Richardson extrapolation.

    The circles are laid out on the torus around `a` and read back in
    translation coordinates.

    :raises NonConvergent: when the extrapolations disagree, or differ from
      -2 pi / Area, by more than J_TOLERANCE.
    '''
    angles = 2 * np.pi * np.arange(directions) / directions
    circle = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    a = np.mod(np.asarray(a, dtype=float), 1.0)
    averages = []
    for r in radii:
        x = translate_coords(a, translate_coords_inverse(a, r * circle))
        averages.append(float(np.mean(divergence_grad_regular(x, split))))
    extrapolated = [(4 * fine - coarse) / 3
                    for coarse, fine in zip(averages, averages[1:])]
    value = extrapolated[-1]
    logger.debug('J circle averages %s, extrapolated %s', averages, extrapolated)
    if max(extrapolated) - min(extrapolated) > J_TOLERANCE:
        raise NonConvergent('J estimates %s do not agree' % extrapolated)
    if abs(value - J_EXACT) > J_TOLERANCE:
        raise NonConvergent('J = %.8g differs from -2 pi / Area' % value)
    return value


class GreensTable():
    '''
    G, grad G and grad_y J sampled on a grid around an attachment point.
    '''
    def __init__(self, grid, a, split, values, gradient, regular_gradient,
                 regular_gradient_origin, j):
        self.grid = grid
        self.a = a
        self.split = split
        self.values = values
        self.gradient = gradient
        self.regular_gradient = regular_gradient
        self.regular_gradient_origin = regular_gradient_origin
        self.j = j

    @classmethod
    def build(cls, grid, a=(0.0, 0.0), split=DEFAULT_SPLIT):
        a = np.mod(np.asarray(a, dtype=float), 1.0)
        x, regular = grid_grad_regular(grid, a, split)
        values = grid_greens_value(grid, a, split)
        r2 = np.sum(x * x, axis=-1)
        with np.errstate(divide='ignore', invalid='ignore'):
            gradient = -regular - x / r2[..., None]
        gradient[r2 == 0] = np.nan
        origin = grad_regular(np.zeros(2), split)
        table = cls(grid, a, split, values, gradient, regular, origin,
                    j_constant(split, a=a))
        logger.info('built Green table on %r: J = %.10g, |grad J(0)| = %.2e',
                    grid, table.j, np.linalg.norm(origin))
        return table

    def coordinates(self):
        return translate_coords(self.a, self.grid.points())

    def discrete_laplacian(self):
        '''
        5-point Laplacian of the tabulated G; NaN next to the pole.
        '''
        return laplacian_array(self.values, self.grid.h)

    def mean(self):
        finite = np.isfinite(self.values)
        return integrate(self.values[finite], self.grid)

    def export_rows(self):
        '''
        (x1, x2, G, dG1, dG2) for every regular sample, row-major.
        '''
        x = self.coordinates().reshape(-1, 2)
        values = self.values.ravel()
        gradient = self.gradient.reshape(-1, 2)
        keep = np.isfinite(values)
        return np.column_stack([x[keep], values[keep], gradient[keep]])

    def summary(self):
        return {
            'j_constant': self.j,
            'j_exact': J_EXACT,
            'grad_regular_origin': [float(c) for c in self.regular_gradient_origin],
            'sigma': self.split.sigma,
            'grid_n': self.grid.n,
            'g_half_half': float(greens_value(np.array([0.5, 0.5]), self.split)),
            'g_half_zero': float(greens_value(np.array([0.5, 0.0]), self.split)),
        }

