'''
Least-squares fits of decay and scaling laws.
'''
import logging

import numpy as np

logger = logging.getLogger(__name__)

#: Fewest positive samples a decay fit accepts
MIN_SAMPLES = 30
#: Share of the samples used for fitting, the rest is held out
FIT_SHARE = 0.7


class InsufficientData(ValueError):
    pass


def loglog_slope(x, y):
    '''
    Fit y = C x^p by least squares in log-log coordinates.

    :returns: (p, C)
    '''
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError('log-log fit needs positive data')
    if len(x) < 2:
        raise ValueError('log-log fit needs at least two points')
    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope), float(np.exp(intercept))


class FitResult():
    '''
    The selected decay model.

    :param str model: 'exponential' (log E_d = log C - c1 sqrt(t)) or
        'power' (log E_d = log C + p log t + q log log(t / t0)).
    :param dict constants: fitted constants of the selected model.
    :param float r2: R^2 of the selected model on the held-out tail.
    :param tuple window: (t_lo, t_hi) of the fitting window.
    :param dict candidates: constants and held-out R^2 of every model tried.
    :param float t0: reference time of the log correction.
    '''
    def __init__(self, model, constants, r2, window, candidates, t0=None):
        self.model = model
        self.constants = constants
        self.r2 = r2
        self.window = window
        self.candidates = candidates
        self.t0 = t0

    def serialize(self):
        return {
            'model': self.model,
            'constants': dict(self.constants),
            'r2': self.r2,
            'window': list(self.window),
            'candidates': self.candidates,
            't0': self.t0,
        }

    def __repr__(self):
        return 'FitResult(%s, %r, r2=%.6g)' % (self.model, self.constants, self.r2)


def _r2(observed, predicted):
    residual = np.sum((observed - predicted) ** 2)
    total = np.sum((observed - observed.mean()) ** 2)
    if total == 0.0:
        return 1.0 if residual == 0.0 else float('-inf')
    return float(1 - residual / total)


def log_reference(t):
    '''
    The time t0 = t_min / 2 that the log t correction is measured from, so
    log(t / t0) >= log 2 on the samples and t0 moves with the units of t.
    '''
    return float(np.min(t)) / 2


def _design(model, t, t0):
    columns = [np.ones_like(t)]
    if model == 'exponential':
        columns.append(np.sqrt(t))
    else:
        columns.append(np.log(t))
        columns.append(np.log(np.log(t / t0)))
    return np.stack(columns, axis=-1)


def _constants(model, coefficients):
    if model == 'exponential':
        return {'log_C': float(coefficients[0]), 'c1': float(-coefficients[1])}
    return {'log_C': float(coefficients[0]), 'exponent': float(coefficients[1]),
            'log_exponent': float(coefficients[2])}


def fit_decay(t, e_d):
    '''
    Fit E_d(t) by C exp(-c1 sqrt(t)) and by C t^p log(t / t0)^q, and select the
    model with the better R^2 on the held-out late samples.

    t0 comes from log_reference, so rescaling t only moves log C and c1.

    :raises InsufficientData: with fewer than 30 positive samples or when
        they cover less than a decade of t.
    '''
    t = np.asarray(t, dtype=float)
    e_d = np.asarray(e_d, dtype=float)
    keep = (t > 0) & (e_d > 0) & np.isfinite(e_d)
    t, e_d = t[keep], e_d[keep]
    order = np.argsort(t, kind='stable')
    t, e_d = t[order], e_d[order]
    if len(t) < MIN_SAMPLES:
        raise InsufficientData('decay fit needs %i positive samples, got %i'
                               % (MIN_SAMPLES, len(t)))
    if t[-1] < 10 * t[0]:
        raise InsufficientData('samples cover t in [%g, %g], less than a decade'
                               % (t[0], t[-1]))

    log_e = np.log(e_d)
    cut = int(round(FIT_SHARE * len(t)))
    t0 = log_reference(t)

    candidates = {}
    for model in ('exponential', 'power'):
        design = _design(model, t, t0)
        coefficients, *_ = np.linalg.lstsq(design[:cut], log_e[:cut], rcond=None)
        r2 = _r2(log_e[cut:], design[cut:] @ coefficients)
        candidates[model] = {'constants': _constants(model, coefficients), 'r2': r2}

    model = max(candidates, key=lambda name: candidates[name]['r2'])
    logger.info('decay fit selected %s model, held-out r2 %.6g (exponential %.6g, '
                'power %.6g)', model, candidates[model]['r2'],
                candidates['exponential']['r2'], candidates['power']['r2'])
    return FitResult(model, candidates[model]['constants'], candidates[model]['r2'],
                     (float(t[0]), float(t[cut - 1])), candidates, t0)


def log_square_rate(t, e_d):
    '''
    Slope of (log E_d)^2 against t.

    Saturating -dE_d/dt = E_d / (C0 |log E_d|) makes (log E_d)^2 grow
    linearly at rate 2 / C0.
    '''
    t = np.asarray(t, dtype=float)
    e_d = np.asarray(e_d, dtype=float)
    keep = (e_d > 0) & np.isfinite(e_d)
    if np.count_nonzero(keep) < 2:
        raise InsufficientData('need two positive samples of E_d')
    slope, _ = np.polyfit(t[keep], np.log(e_d[keep]) ** 2, 1)
    return float(slope)


def fit_exponential_tail(t, energy, t_event, minimum=3):
    '''
    Fit E(t) = C exp(-c (t - t_event)) to the samples after a singular event,
    where the body map is expected to settle on a constant map of energy 0.

    :returns: dict with rate c, log_C, R^2 of the fit in log coordinates and
        the sample count.
    :raises InsufficientData: with fewer than ``minimum`` positive samples
        after t_event.
    '''
    t = np.asarray(t, dtype=float)
    energy = np.asarray(energy, dtype=float)
    keep = (t > t_event) & (energy > 0) & np.isfinite(energy)
    if np.count_nonzero(keep) < minimum:
        raise InsufficientData('post-event fit needs %i positive samples after t=%g, got %i'
                               % (minimum, t_event, np.count_nonzero(keep)))
    elapsed = t[keep] - t_event
    log_e = np.log(energy[keep])
    slope, intercept = np.polyfit(elapsed, log_e, 1)
    return {
        't_event': float(t_event),
        'rate': float(-slope),
        'log_C': float(intercept),
        'r2': _r2(log_e, intercept + slope * elapsed),
        'samples': int(np.count_nonzero(keep)),
    }
