'''
Distance from a map to the family of adapted bubbles, by simplex descent
over (lambda a1, lambda a2, log lambda, rotation vector).
'''
import logging

import numpy as np
from scipy.optimize import minimize

from bubbles.construct import BubbleParams, build_bubble
from torus.grid import weight_field, weighted_norm

logger = logging.getLogger(__name__)

MAX_EVALUATIONS = 2000
SIMPLEX_TOLERANCE = 1e-4
#: Initial simplex steps in the rescaled coordinates
STEPS = np.array([0.5, 0.5, 0.05, 0.05, 0.05, 0.05])


class NotConverged(RuntimeError):
    '''
    No descent shrank its simplex below the tolerance. `dist` and `params`
    hold the best point found.
    '''
    def __init__(self, message, dist, params):
        super().__init__(message)
        self.dist = dist
        self.params = params


def bubble_distance(u, params):
    '''
    ||u - z||_z for the bubble z with the given parameters.
    '''
    z = build_bubble(params, u.grid)
    return weighted_norm(u - z, weight_field(u.grid, params.lam, params.a))


class _Objective():
    def __init__(self, u, scale):
        self.u = u
        self.scale = scale
        self.evaluations = 0

    def params(self, theta):
        return BubbleParams.from_theta(theta, self.scale)

    def __call__(self, theta):
        self.evaluations += 1
        try:
            value = bubble_distance(self.u, self.params(theta))
        except ValueError:
            # outside lambda >= 2, beyond the grid resolution or below the
            # projection guard
            return np.inf
        logger.debug('theta %s: %.10g', np.array2string(theta, precision=6), value)
        return value


def _descend(objective, start):
    simplex = np.vstack([start, start + np.diag(STEPS)])
    return minimize(objective, start, method='Nelder-Mead',
                    options={'initial_simplex': simplex, 'xatol': SIMPLEX_TOLERANCE,
                             'fatol': np.inf, 'maxfev': MAX_EVALUATIONS})


def dist_to_Z(u, seed):
    '''
    Minimize ||u - z(theta)||_{z(theta)} starting from `seed`, then once more
    from the seed shifted by a quarter of the initial simplex.

    Returns (dist, BubbleParams). The result is never worse than the seed.

    :raises NotConverged: when neither descent converges within 2000
        evaluations.
    '''
    objective = _Objective(u, seed.lam)
    start = seed.theta(seed.lam)
    best_value = objective(start)
    best_theta = start
    converged = False
    for origin in (start, start + 0.25 * STEPS):
        result = _descend(objective, origin)
        converged = converged or bool(result.success)
        logger.debug('descent from %s: %.10g after %i evaluations (%s)',
                     np.array2string(origin, precision=6), result.fun, result.nfev,
                     result.message)
        if result.fun < best_value:
            best_value = float(result.fun)
            best_theta = result.x
    params = objective.params(best_theta)
    if not converged:
        raise NotConverged('simplex did not shrink below %g in %i evaluations'
                           % (SIMPLEX_TOLERANCE, MAX_EVALUATIONS), best_value, params)
    logger.info('distance to bubbles %.6g at %r after %i evaluations', best_value,
                params, objective.evaluations)
    return best_value, params
