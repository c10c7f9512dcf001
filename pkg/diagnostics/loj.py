'''
Lojasiewicz-type ratios along bubble scans and flow trajectories.

The energy exponent is fixed at gamma_1 = 2 and the distance exponent at
gamma_2 = 1, the values for a round sphere target.
'''
import logging

import numpy as np

from sphere.maps import P_STAR
from torus.grid import integrate, translate_coords

logger = logging.getLogger(__name__)

GAMMA_1 = 2
GAMMA_2 = 1
#: E_infinity of a single-bubble run
SINGLE_BUBBLE_ENERGY = 4 * np.pi
BOUNDED_FACTOR = 10.0
#: Floor on |log E_d| in the decay ratio
LOG_FLOOR = 1.0


def log_envelope(tension):
    '''
    1 + |log T|^(1/2)
    '''
    return 1 + np.sqrt(np.abs(np.log(tension)))


def loj_ratios(tension, lam, energy, e_inf=SINGLE_BUBBLE_ENERGY):
    '''
    :param tension: L2 norm of the tension, scalar or array.
    :param lam: bubble scale.
    :param energy: Dirichlet energy.
    :returns: (ratio_scale, ratio_energy); NaN wherever the tension is not
        positive.
    '''
    tension = np.asarray(tension, dtype=float)
    lam = np.asarray(lam, dtype=float)
    energy = np.asarray(energy, dtype=float)
    positive = tension > 0
    safe = np.where(positive, tension, 1.0)
    envelope = log_envelope(safe)
    ratio_scale = np.where(positive, (1 / lam) / (safe * envelope), np.nan)
    ratio_energy = np.where(
        positive,
        np.abs(energy - e_inf) / (safe ** GAMMA_1 * envelope ** GAMMA_1),
        np.nan)
    if ratio_scale.ndim == 0:
        return float(ratio_scale), float(ratio_energy)
    return ratio_scale, ratio_energy


def bounded(values, factor=BOUNDED_FACTOR):
    '''
    Whether the maximum of the finite values stays within `factor` times
    their median.

    :returns: (passed, max / median)
    '''
    values = np.asarray(values, dtype=float)
    values = values[np.isfinite(values)]
    if len(values) == 0:
        return False, float('nan')
    median = float(np.median(values))
    if median <= 0:
        return False, float('inf')
    ratio = float(values.max() / median)
    return ratio <= factor, ratio


def ode_ratio_check(e_d, tension):
    '''
    E_d / (|log E_d| T^2) per sample, with |log E_d| floored at LOG_FLOOR.
    '''
    e_d = np.asarray(e_d, dtype=float)
    tension = np.asarray(tension, dtype=float)
    if np.any(e_d <= 0) or np.any(tension <= 0):
        raise ValueError('the decay ratio needs positive E_d and tension')
    log_factor = np.maximum(np.abs(np.log(e_d)), LOG_FLOOR)
    return e_d / (log_factor * tension ** 2)


def away_convergence_check(u, a, r, alpha, e_d, lam=None, target=P_STAR):
    '''
    Deviation of u from the constant `target` away from the bubble core,
    divided by E_d^alpha.

    :param float r: exclusion radius around a; must exceed 3 / lam when lam
        is given.
    :param float alpha: exponent, below 1/2.
    :returns: dict with the sup norm ('sup') and the L2 norm over the whole
        torus ('l2'), both divided by E_d^alpha.
    '''
    if not alpha < (GAMMA_1 - 1) / GAMMA_1:
        raise ValueError('alpha must be below %g, got %g' % ((GAMMA_1 - 1) / GAMMA_1, alpha))
    if lam is not None and not r > 3 / lam:
        raise ValueError('exclusion radius %g does not exceed 3 / lambda = %g'
                         % (r, 3 / lam))
    if not e_d > 0:
        raise ValueError('E_d must be positive, got %g' % e_d)
    grid = u.grid
    x = translate_coords(a, grid.points())
    away = np.linalg.norm(x, axis=-1) >= r
    deviation = np.linalg.norm(u.values - np.asarray(target), axis=-1)
    scale = e_d ** alpha
    return {
        'sup': float(deviation[away].max(initial=0.0) / scale),
        'l2': float(np.sqrt(integrate(deviation ** 2, grid)) / scale),
    }
