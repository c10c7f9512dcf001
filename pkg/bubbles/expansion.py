'''
Measurements on adapted bubbles: energy gap, its lambda derivative and
leading term, tension and variation scalings.

The grid energy of a bubble with lambda * h ~ 0.1 carries a discretization
error of order (lambda h)^2, far larger than the gap ~ 8 pi^2 / lambda^2.
That error sits in the core, where the bubble is the planar stereographic
map, so it is measured on the exact planar bubble sampled at the same
offsets and removed (the lattice defect). Tension measurements are
corrected the same way.
'''
import logging

import numpy as np
from scipy.integrate import quad

from bubbles.construct import CUTOFF, build_bubble, build_bubble_parts, far_field_sup, j_field
from greens.ewald import DEFAULT_SPLIT, J_EXACT
from sphere.maps import (laplacian_stereographic_dlambda, stereographic,
                         stereographic_dlambda, tangential_part, tension_array)
from torus.grid import (R0, ToroidalField3, energy, gradient_sq_array, integrate,
                        laplacian_array, translate_coords, weight_field, weighted_norm)

logger = logging.getLogger(__name__)

SPHERE_ENERGY = 4 * np.pi

SCAN_COLUMNS = ('lambda', 'energy', 'gap', 'dE_dlambda', 'leading_term',
                'tension_l2', 'pairing_sup', 'far_field_sup')


def _planar_stencil(lam, x, h):
    '''
    pi_lambda at x and at its four lattice neighbours, unwrapped.
    '''
    centre = stereographic(lam, x)
    neighbours = []
    for axis in (0, 1):
        e = np.zeros(2)
        e[axis] = h
        neighbours.append((stereographic(lam, x + e), stereographic(lam, x - e)))
    return centre, neighbours


def _planar_lattice_quantities(lam, x, h):
    centre, neighbours = _planar_stencil(lam, x, h)
    lap = 0.0
    gsq = 0.0
    for plus, minus in neighbours:
        lap = lap + (plus + minus - 2 * centre) / (h * h)
        gsq = gsq + 0.5 * (np.sum((plus - centre) ** 2, axis=-1)
                           + np.sum((centre - minus) ** 2, axis=-1)) / (h * h)
    return centre, lap, gsq


def planar_square_energy(lam, lo1, hi1, lo2, hi2):
    '''
    Exact energy of pi_lambda on the rectangle [lo1, hi1] x [lo2, hi2].

    The inner integral of 4 lambda^2 / (A + lambda^2 y^2)^2, A = 1 + lambda^2
    x^2, is done in closed form; the outer one by adaptive quadrature.
    '''
    def strip(x1):
        a = 1 + lam * lam * x1 * x1

        def primitive(y):
            y = lam * y
            return y / (2 * a * (a + y * y)) + np.arctan(y / np.sqrt(a)) / (2 * a ** 1.5)

        return 4 * lam * (primitive(hi2) - primitive(lo2))

    points = [0.0] if lo1 < 0 < hi1 else None
    value, _ = quad(strip, lo1, hi1, points=points, limit=400,
                    epsabs=1e-13, epsrel=1e-13)
    return value


def lattice_defect(params, grid):
    '''
    Grid energy minus exact energy of pi_lambda on the union of the grid
    cells around a (a square of side 1).
    '''
    x = translate_coords(params.a, grid.points())
    h = grid.h
    _, _, gsq = _planar_lattice_quantities(params.lam, x, h)
    lattice = 0.5 * integrate(gsq, grid)
    lo1 = x[:, 0, 0].min() - h / 2
    lo2 = x[0, :, 1].min() - h / 2
    exact = planar_square_energy(params.lam, lo1, lo1 + 1.0, lo2, lo2 + 1.0)
    return lattice - exact


def energy_gap(params, grid, corrected=True, field=None):
    '''
    E(z) - 4 pi, with the planar lattice defect removed unless
    `corrected` is False.
    '''
    field = build_bubble(params, grid) if field is None else field
    gap = energy(field) - SPHERE_ENERGY
    if corrected:
        gap -= lattice_defect(params, grid)
    return gap


def dE_dlambda(params, grid, rel_step=1e-3, corrected=True):
    step = rel_step * params.lam
    above = energy_gap(params.with_lambda(params.lam + step), grid, corrected)
    below = energy_gap(params.with_lambda(params.lam - step), grid, corrected)
    return (above - below) / (2 * step)


def leading_term_prediction(lam, j=J_EXACT, alpha=1.0):
    '''
    4 pi |d omega(p*)|^2 J lambda^-3, with |d omega(p*)|^2 = 2 alpha^2.
    '''
    return 4 * np.pi * 2 * alpha ** 2 * j / lam ** 3


def truncated_disc_factor(lam, radius=R0 / 2):
    '''
    Share of the leading term carried by the disc of the given radius.

    Near the pole grad J(x, 0) = -pi x on the square torus, which turns the
    integral into one of s (s - 1) / (1 + s)^4 in s = lambda^2 |x|^2.
    '''
    t = 1 + (lam * radius) ** 2
    return 1 - 6 / t + 9 / t ** 2 - 4 / t ** 3


def _polar_nodes(lam, radius, radial_nodes, angular_nodes):
    edges = [0.0]
    r = 1.0 / lam
    while r < radius:
        edges.append(r)
        r *= 4
    edges.append(radius)
    nodes, weights = np.polynomial.legendre.leggauss(radial_nodes)
    rs, ws = [], []
    for lo, hi in zip(edges, edges[1:]):
        rs.append(lo + 0.5 * (hi - lo) * (nodes + 1))
        ws.append(0.5 * (hi - lo) * weights)
    rs, ws = np.concatenate(rs), np.concatenate(ws)
    theta = 2 * np.pi * np.arange(angular_nodes) / angular_nodes
    points = np.stack([rs[:, None] * np.cos(theta), rs[:, None] * np.sin(theta)],
                      axis=-1)
    return points, ws * rs * (2 * np.pi / angular_nodes)


def leading_term_integral(params, radius=R0 / 2, radial_nodes=24, angular_nodes=64,
                          split=DEFAULT_SPLIT):
    '''
    The integral of j . Delta d/dlambda (R pi_lambda) over the disc
    |x| < radius, by polar Gauss-Legendre quadrature.
    '''
    points, weights = _polar_nodes(params.lam, radius, radial_nodes, angular_nodes)
    j = j_field(params, points, split)
    lap = laplacian_stereographic_dlambda(params.lam, points) @ params.rot.matrix.T
    integrand = np.sum(j * lap, axis=-1)
    return float(np.sum(weights[:, None] * integrand))


def bubble_tension(params, grid, parts=None):
    '''
    Grid tension of the bubble minus R times the grid tension of the exact
    planar bubble at the same samples.
    '''
    parts = parts or build_bubble_parts(params, grid)
    h = grid.h
    tau = tension_array(parts.field.values, h)
    centre, lap, gsq = _planar_lattice_quantities(params.lam, parts.x, h)
    planar = lap + gsq[..., None] * centre
    return tau - planar @ params.rot.matrix.T


def tension_l2(params, grid, parts=None, corrected=True):
    if corrected:
        tau = bubble_tension(params, grid, parts)
    else:
        parts = parts or build_bubble_parts(params, grid)
        tau = tension_array(parts.field.values, grid.h)
    return float(np.sqrt(integrate(np.sum(tau * tau, axis=-1), grid)))


def tension_regions(params, grid, parts=None):
    '''
    L2 norms of the corrected tension on the core disc |x| < r0 / 2, on the
    gluing annulus r0 / 2 <= |x| < r0 and on the rest of the torus.
    '''
    parts = parts or build_bubble_parts(params, grid)
    tau = bubble_tension(params, grid, parts)
    density = np.sum(tau * tau, axis=-1)
    r = np.linalg.norm(parts.x, axis=-1)
    masks = {
        'core': r < CUTOFF.inner,
        'seam': (r >= CUTOFF.inner) & (r < CUTOFF.outer),
        'away': r >= CUTOFF.outer,
    }
    return {name: float(np.sqrt(integrate(np.where(mask, density, 0.0), grid)))
            for name, mask in masks.items()}


def random_smooth_field(grid, rng, modes=2):
    '''
    Random trigonometric polynomial of degree `modes` in each direction,
    coefficients damped by 1 / (1 + |k|^2).
    '''
    axis = 2 * np.pi * grid.axis()
    ks = np.arange(-modes, modes + 1)
    e1 = np.exp(1j * np.outer(ks, axis))
    values = np.empty(grid.shape + (3,))
    damping = 1.0 / (1 + ks[:, None] ** 2 + ks[None, :] ** 2)
    for component in range(3):
        coefficients = (rng.standard_normal((len(ks), len(ks)))
                        + 1j * rng.standard_normal((len(ks), len(ks)))) * damping
        values[..., component] = np.real(e1.T @ coefficients @ e1)
    return values


def pairing_sup(params, grid, samples=50, seed=0, parts=None):
    '''
    sup |dE(z)(w)| over random tangent w with ||w||_z = 1, using the
    corrected tension.
    '''
    parts = parts or build_bubble_parts(params, grid)
    z = parts.field
    tau = bubble_tension(params, grid, parts)
    rho = weight_field(grid, params.lam, params.a)
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(samples):
        w = tangential_part(z, random_smooth_field(grid, rng))
        pairing = integrate(np.sum(tau * w.values, axis=-1), grid)
        best = max(best, abs(pairing) / weighted_norm(w, rho))
    return best


def _scale_variation(params, grid, rel_step=1e-3):
    step = rel_step * params.lam
    above = build_bubble(params.with_lambda(params.lam + step), grid).values
    below = build_bubble(params.with_lambda(params.lam - step), grid).values
    return params.lam * (above - below) / (2 * step)


def jacobi_pairing_sup(params, grid, samples=20, seed=0, parts=None):
    '''
    sup |d^2E(z)(lambda d_lambda z, w)| / ||lambda d_lambda z||_z over random
    unit tangent w. The planar lattice residual of the dilation Jacobi field
    is removed as for the tension.
    '''
    parts = parts or build_bubble_parts(params, grid)
    z = parts.field
    h = grid.h
    rho = weight_field(grid, params.lam, params.a)
    v = tangential_part(z, _scale_variation(params, grid)).values
    residual = laplacian_array(v, h) + gradient_sq_array(z.values, h)[..., None] * v

    lam, x = params.lam, parts.x
    dilation = lam * stereographic_dlambda(lam, x)
    centre, _, gsq = _planar_lattice_quantities(lam, x, h)
    planar_lap = 0.0
    for axis in (0, 1):
        e = np.zeros(2)
        e[axis] = h
        planar_lap = planar_lap + (lam * stereographic_dlambda(lam, x + e)
                                   + lam * stereographic_dlambda(lam, x - e)
                                   - 2 * dilation) / (h * h)
    planar = (planar_lap + gsq[..., None] * dilation) @ params.rot.matrix.T
    residual = residual - planar

    v_norm = weighted_norm(v, rho)
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(samples):
        w = tangential_part(z, random_smooth_field(grid, rng))
        value = -integrate(np.sum(residual * w.values, axis=-1), grid)
        best = max(best, abs(value) / (weighted_norm(w, rho) * v_norm))
    return best


def weight_variation_l2(grid, lam, a, rel_step=1e-3):
    '''
    L2 norm of d rho / d lambda.
    '''
    step = rel_step * lam
    d_rho = (weight_field(grid, lam + step, a).values
             - weight_field(grid, lam - step, a).values) / (2 * step)
    return float(np.sqrt(integrate(d_rho ** 2, grid)))


def variation_scalings(params, grid):
    '''
    Weighted norms of the variations of z along its parameters, and the
    size of the matching variation of the weight rho.
    '''
    z = build_bubble(params, grid)
    rho = weight_field(grid, params.lam, params.a)

    def norm(values):
        return weighted_norm(ToroidalField3(grid, values), rho)

    lam, h = params.lam, grid.h
    scale = norm(_scale_variation(params, grid))

    translations = []
    for axis in (0, 1):
        e = np.zeros(2)
        e[axis] = h
        above = build_bubble(params.with_a(params.a + e), grid).values
        below = build_bubble(params.with_a(params.a - e), grid).values
        translations.append(norm((above - below) / (2 * h * lam)))

    rotations = []
    angle = 1e-3
    for axis in np.eye(3):
        above = build_bubble(params.with_rot(params.rot.perturbed(axis, angle)), grid)
        below = build_bubble(params.with_rot(params.rot.perturbed(axis, -angle)), grid)
        rotations.append(norm((above.values - below.values) / (2 * angle)))

    weight = weight_variation_l2(grid, lam, params.a)

    logger.debug('variations at %r: scale %.4g translations %s rotations %s',
                 params, scale, translations, rotations)
    return {
        'lambda': lam,
        'scale_norm': scale,
        'translation_norms': translations,
        'rotation_norms': rotations,
        'weight_variation_l2': weight,
        'weight_ratio': lam * weight / scale,
        'energy': energy(z),
    }


def scan_row(params, grid, samples=50, seed=0):
    '''
    One row of a bubble scan, keyed by SCAN_COLUMNS.
    '''
    parts = build_bubble_parts(params, grid)
    row = {
        'lambda': params.lam,
        'energy': energy(parts.field),
        'gap': energy_gap(params, grid, field=parts.field),
        'dE_dlambda': dE_dlambda(params, grid),
        'leading_term': leading_term_integral(params),
        'tension_l2': tension_l2(params, grid, parts),
        'pairing_sup': pairing_sup(params, grid, samples, seed, parts),
        'far_field_sup': far_field_sup(params, grid, parts),
    }
    logger.info('scanned lambda=%g: gap %.6g, tension %.4g', params.lam,
                row['gap'], row['tension_l2'])
    return row
