'''
Periodic grid calculus on the unit-area flat square torus.

Samples sit at p_ij = (i*h, j*h) with h = 1/N. A field is stored as an
(N, N, 3) array whose first axis runs along x1 and second along x2.

The discrete Dirichlet energy is half the sum of squared forward
differences. Its gradient is exactly the 5-point Laplacian, and the
per-sample |grad u|^2 below is the symmetric average of forward and
backward differences, so sums of it reproduce the energy exactly.
'''
import logging

import numpy as np

logger = logging.getLogger(__name__)

#: Radius of the coordinate disc that fits inside the unit torus
IOTA = 0.25
#: Radius where the weight rho stops following the bubble profile
R0 = IOTA
#: Largest admissible lambda * h
RESOLUTION_LIMIT = 0.2
#: Smallest admissible number of samples per side
MIN_SAMPLES = 16
#: Tolerance of the on-sphere check
SPHERE_TOLERANCE = 1e-12


class ResolutionError(ValueError):
    '''
    The bubble core is too small for the grid (lambda * h > 0.2).
    '''


class ToroidalGrid():
    '''
    An N x N periodic sampling of [0, 1)^2.
    '''
    def __init__(self, n):
        n = int(n)
        if n < MIN_SAMPLES:
            raise ValueError('grid needs at least %i samples per side, got %i'
                             % (MIN_SAMPLES, n))
        self.n = n
        self.h = 1.0 / n

    @property
    def shape(self):
        return (self.n, self.n)

    @property
    def cell_area(self):
        return self.h * self.h

    def axis(self):
        '''
        Sample coordinates along one side, i*h for i = 0..N-1.
        '''
        return np.arange(self.n) * self.h

    def points(self):
        '''
        :returns: an (N, N, 2) array with the sample positions p_ij.
        '''
        axis = self.axis()
        return np.stack(np.meshgrid(axis, axis, indexing='ij'), axis=-1)

    def wrap_index(self, i, j):
        return (i % self.n, j % self.n)

    def nearest_index(self, point):
        '''
        Index of the sample closest to `point` (periodically).
        '''
        i, j = np.rint(np.asarray(point, dtype=float) / self.h).astype(int)
        return self.wrap_index(i, j)

    def check_resolution(self, lam):
        '''
        Raise ResolutionError unless a bubble of scale `lam` is resolved.
        '''
        if lam * self.h > RESOLUTION_LIMIT * (1 + 1e-12):
            raise ResolutionError(
                'grid_n=%i with lambda=%g gives lambda*h=%.4g > %g'
                % (self.n, lam, lam * self.h, RESOLUTION_LIMIT))

    def __eq__(self, other):
        return isinstance(other, ToroidalGrid) and other.n == self.n

    def __hash__(self):
        return hash(self.n)

    def __repr__(self):
        return 'ToroidalGrid(%i)' % self.n


class ToroidalField3():
    '''
    A map from the grid into R^3.

    The values are copied and frozen; operations build new fields.

    :param ToroidalGrid grid: the sampling grid.
    :param values: array-like of shape (N, N, 3).
    :param bool on_sphere: check and record that every sample has unit
      length.
    '''
    def __init__(self, grid, values, on_sphere=False):
        values = np.array(values, dtype=float)
        if values.shape != grid.shape + (3,):
            raise ValueError('field shape %s does not match %r'
                             % (values.shape, grid))
        if not np.all(np.isfinite(values)):
            raise ValueError('field has non-finite samples')
        if on_sphere:
            defect = np.abs(np.linalg.norm(values, axis=-1) - 1.0).max()
            if defect > SPHERE_TOLERANCE:
                raise ValueError('field is off the sphere by %.3g' % defect)
        values.setflags(write=False)
        self.grid = grid
        self.values = values
        self.on_sphere = on_sphere

    @classmethod
    def constant(cls, grid, vector):
        vector = np.asarray(vector, dtype=float)
        norm = np.linalg.norm(vector)
        values = np.broadcast_to(vector, grid.shape + (3,))
        return cls(grid, values, on_sphere=abs(norm - 1.0) <= SPHERE_TOLERANCE)

    def norms(self):
        return np.linalg.norm(self.values, axis=-1)

    def roll(self, shift):
        '''
        The field translated by `shift` samples along each axis.
        '''
        return ToroidalField3(self.grid,
                              np.roll(self.values, shift, axis=(0, 1)),
                              on_sphere=self.on_sphere)

    def __sub__(self, other):
        return ToroidalField3(self.grid, self.values - other.values)

    def __repr__(self):
        return 'ToroidalField3(%r, on_sphere=%s)' % (self.grid, self.on_sphere)


class WeightField():
    '''
    The bubble weight rho attached to a scale and attachment point.
    '''
    def __init__(self, grid, values, lam, a):
        self.grid = grid
        self.values = values
        self.lam = float(lam)
        self.a = np.mod(np.asarray(a, dtype=float), 1.0)


def _values(u):
    return u.values if isinstance(u, ToroidalField3) else np.asarray(u)


def forward_differences(values, h):
    '''
    Forward differences of an array along the two grid axes.
    '''
    return [(np.roll(values, -1, axis=d) - values) / h for d in (0, 1)]


def laplacian_array(values, h):
    '''
    5-point periodic Laplacian of an (N, N, ...) array.
    '''
    out = -4.0 * values
    for d in (0, 1):
        out = out + np.roll(values, 1, axis=d) + np.roll(values, -1, axis=d)
    return out / (h * h)


def gradient_sq_array(values, h):
    total = 0.0
    for d, diff in enumerate(forward_differences(values, h)):
        forward = np.sum(diff * diff, axis=-1)
        total = total + 0.5 * (forward + np.roll(forward, 1, axis=d))
    return total


def gradient_dot_array(v, w, h):
    total = 0.0
    for d, (dv, dw) in enumerate(zip(forward_differences(v, h),
                                     forward_differences(w, h))):
        forward = np.sum(dv * dw, axis=-1)
        total = total + 0.5 * (forward + np.roll(forward, 1, axis=d))
    return total


def laplacian(u):
    '''
    :param ToroidalField3 u: the field.
    :returns: the 5-point Laplacian as a ToroidalField3.
    '''
    return ToroidalField3(u.grid, laplacian_array(u.values, u.grid.h))


def gradient_sq(u):
    '''
    |grad u|^2 at every sample, an (N, N) array.
    '''
    return gradient_sq_array(u.values, u.grid.h)


def gradient_dot(v, w):
    '''
    grad v . grad w at every sample, the bilinear companion of
    gradient_sq.
    '''
    return gradient_dot_array(_values(v), _values(w), v.grid.h)


def integrate(scalar, grid):
    return float(np.sum(scalar) * grid.cell_area)


def energy_density(u):
    return 0.5 * gradient_sq(u)


def energy(u):
    '''
    Dirichlet energy 1/2 sum |grad u|^2 h^2.
    '''
    return integrate(energy_density(u), u.grid)


def wrap(x):
    '''
    Map coordinates into [-1/2, 1/2).
    '''
    x = np.asarray(x, dtype=float)
    return x - np.floor(x + 0.5)


def translate_coords(a, p):
    '''
    The translation coordinates F_a(p) = wrap(p - a).
    '''
    return wrap(np.asarray(p, dtype=float) - np.asarray(a, dtype=float))


def translate_coords_inverse(a, x):
    return np.mod(np.asarray(a, dtype=float) + np.asarray(x, dtype=float), 1.0)


def periodic_distance(p, q):
    return np.linalg.norm(wrap(np.asarray(p) - np.asarray(q)), axis=-1)


def weight_values(lam, x):
    '''
    rho at translation coordinates `x` (array of shape (..., 2)).
    '''
    r2 = np.minimum(np.sum(np.asarray(x) ** 2, axis=-1), R0 * R0)
    return lam / (1.0 + lam * lam * r2)


def weight_field(grid, lam, a):
    '''
    Sample rho for the bubble of scale `lam` attached at `a`.
    '''
    x = translate_coords(a, grid.points())
    return WeightField(grid, weight_values(lam, x), lam, a)


def weighted_inner(v, w, rho):
    '''
    <v, w>_z = sum (grad v . grad w + rho^2 v . w) h^2.
    '''
    v, w = _values(v), _values(w)
    density = gradient_dot_array(v, w, rho.grid.h)
    density = density + rho.values ** 2 * np.sum(v * w, axis=-1)
    return integrate(density, rho.grid)


def weighted_norm(w, rho):
    return float(np.sqrt(max(weighted_inner(w, w, rho), 0.0)))


def mean_value_check(w, rho):
    '''
    |mean of w| / ((log lambda)^(1/2) * ||w||_z); small for every w when the
    weighted norm controls averages with the expected log loss.
    '''
    norm = weighted_norm(w, rho)
    if norm == 0.0:
        raise ValueError('mean value check needs a nonzero field')
    mean = np.mean(_values(w), axis=(0, 1))
    return float(np.linalg.norm(mean) / (np.sqrt(np.log(rho.lam)) * norm))
