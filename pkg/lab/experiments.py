'''
The computations behind the management commands.

Each function takes a RunConfig and returns an Outcome holding a JSON
summary, a verdict block that maps criterion ids to True, False or
'skipped', and optionally a series for the CSV file.
'''
import logging

import numpy as np
from scipy.spatial.transform import Rotation

from bubbles.construct import BubbleParams, build_bubble
from bubbles.expansion import (SCAN_COLUMNS, jacobi_pairing_sup, leading_term_prediction,
                               random_smooth_field, scan_row, tension_regions,
                               truncated_disc_factor, variation_scalings)
from diagnostics.distance import NotConverged, bubble_distance, dist_to_Z
from diagnostics.fitting import (InsufficientData, fit_decay, fit_exponential_tail,
                                 log_square_rate, loglog_slope)
from diagnostics.loj import (BOUNDED_FACTOR, LOG_FLOOR, SINGLE_BUBBLE_ENERGY,
                             away_convergence_check, bounded, log_envelope, loj_ratios,
                             ode_ratio_check)
from diagnostics.records import COLUMNS, DiagnosticsRecord
from flow import engine
from greens.ewald import (J_EXACT, EwaldSplit, GreensTable, NonConvergent, grad_regular,
                          greens_value, grid_grad_regular, grid_greens_value, j_constant)
from lab.output import read_series, resolve_path
from sphere.maps import P_STAR, project_field, sphere_energy, tangential_part
from torus.grid import IOTA, ToroidalGrid, periodic_distance, weight_field, weighted_norm
from torus.serialize import read_field

logger = logging.getLogger(__name__)

SKIPPED = 'skipped'

GREENS_COLUMNS = ('x1', 'x2', 'G', 'dG1', 'dG2')
#: Shift used for the translation equivariance check, in samples
DETECTION_SHIFT = (7, 13)
#: Attachment points compared in the Green table check
ATTACHMENTS = 10


class Outcome():
    '''
    :param dict summary: measured values.
    :param dict verdict: criterion id -> True, False or 'skipped'.
    :param columns: CSV column names, or None when there is no series.
    :param rows: CSV rows in column order.
    '''
    def __init__(self, summary, verdict, columns=None, rows=()):
        self.summary = summary
        self.verdict = verdict
        self.columns = columns
        self.rows = list(rows)

    @property
    def passed(self):
        return all(value is True or value == SKIPPED for value in self.verdict.values())

    def failed_criteria(self):
        return sorted(key for key, value in self.verdict.items() if value is False)

    def full_summary(self):
        summary = dict(self.summary)
        summary['verdict'] = dict(self.verdict)
        summary['passed'] = self.passed
        return summary


def _within(value, target, relative):
    return bool(abs(value - target) <= relative * abs(target))


def _band(values, factor=5.0):
    values = np.abs(np.asarray(values, dtype=float))
    return bool(values.min() > 0 and values.max() / values.min() <= factor)


def _slope(x, y):
    try:
        return loglog_slope(x, y)[0]
    except ValueError:
        return float('nan')


def _rotation(config):
    return (config['rot1'], config['rot2'], config['rot3'])


def attachment_checks(grid, split, attachments, stride=None):
    '''
    Compare the tables built around each attachment point with the pointwise
    sums at the same translation offsets, and J computed around each point.

    :returns: dict with the largest gradient and value differences and the
      spread of J across the attachments.
    '''
    stride = stride or max(1, grid.n // 32)
    gradient = 0.0
    values = 0.0
    constants = []
    for a in attachments:
        x, grad = grid_grad_regular(grid, a, split)
        sub = x[::stride, ::stride]
        gradient = max(gradient, float(np.abs(grad[::stride, ::stride]
                                              - grad_regular(sub, split)).max()))
        table = grid_greens_value(grid, a, split)[::stride, ::stride]
        regular = np.isfinite(table)
        values = max(values, float(np.abs(table[regular]
                                          - greens_value(sub[regular], split)).max()))
        constants.append(j_constant(split, a=a))
    return {
        'attachments': len(attachments),
        'gradient': gradient,
        'values': values,
        'j_spread': float(max(constants) - min(constants)),
    }


def random_rotations(count, seed):
    rng = np.random.default_rng(seed)
    rotations = []
    for _ in range(count):
        axis = rng.standard_normal(3)
        axis /= np.linalg.norm(axis)
        rotations.append(rng.uniform(0, np.pi) * axis)
    return rotations


def greens_table(config, sink=None):
    grid = ToroidalGrid(config['grid_n'])
    split = EwaldSplit(config['sigma'], config['images'], config['modes'])
    summary = {}
    verdict = {}
    rows = []
    try:
        table = GreensTable.build(grid, (config['a1'], config['a2']), split)
    except NonConvergent as error:
        logger.error('Green table: %s', error)
        summary['error'] = str(error)
        verdict['greens_constants'] = False
    else:
        rng = np.random.default_rng(config['seed'])
        attachments = [(config['a1'], config['a2'])] + list(rng.random((ATTACHMENTS - 1, 2)))
        checks = attachment_checks(grid, split, attachments)
        origin = np.abs(table.regular_gradient_origin).max()
        summary.update(table.summary())
        summary['attachment_checks'] = checks
        verdict['greens_constants'] = bool(abs(table.j - J_EXACT) <= 1e-4 and origin <= 1e-6
                                           and checks['gradient'] <= 1e-10
                                           and checks['values'] <= 1e-10
                                           and checks['j_spread'] <= 1e-8)
        rows = table.export_rows().tolist()

    energies = []
    for rotvec in random_rotations(config['rotations'], config['seed']):
        matrix = Rotation.from_rotvec(rotvec).as_matrix()
        energies.append(sphere_energy(lambda y, matrix=matrix: y @ matrix.T))
    summary['sphere_energies'] = energies
    verdict['sphere_energy'] = bool(np.all(np.abs(np.array(energies) - 4 * np.pi) <= 1e-3))
    return Outcome(summary, verdict, GREENS_COLUMNS, rows)


def leading_term_report(lambdas, values, derivatives):
    '''
    Leading-term ratios and residual slopes of a scan.

    The corrected ratio divides out the share of the term carried by the
    truncated disc; the raw ratio and the raw residual value - prediction
    are reported next to it.
    '''
    lambdas = np.asarray(lambdas, dtype=float)
    values = np.asarray(values, dtype=float)
    prediction = leading_term_prediction(lambdas)
    factors = truncated_disc_factor(lambdas)
    return {
        'leading_term_ratios': values / (prediction * factors),
        'leading_term_raw_ratios': values / prediction,
        'truncated_disc_factors': factors,
        'residual_slope': _slope(lambdas, np.abs(np.asarray(derivatives) - prediction)),
        'raw_residual_slope': _slope(lambdas, np.abs(values - prediction)),
    }


def tension_region_slopes(lambdas, regions):
    '''
    Log-log slopes of the tension split by tension_regions, plus the slope
    of everything off the gluing annulus.
    '''
    slopes = {name: _slope(lambdas, [region[name] for region in regions])
              for name in ('core', 'seam', 'away')}
    off_seam = [np.hypot(region['core'], region['away']) for region in regions]
    slopes['off_seam'] = _slope(lambdas, off_seam)
    return slopes


def _detection_check(params, grid):
    z = build_bubble(params, grid)
    try:
        detection = engine.detect_bubble(z)
        moved = engine.detect_bubble(z.roll(DETECTION_SHIFT))
    except (engine.NoBubble, engine.Unresolved) as error:
        logger.warning('no bubble detected at %r: %s', params, error)
        return {'detected': None, 'found': False, 'equivariant': False}
    shift = np.array(DETECTION_SHIFT) * grid.h
    equivariant = bool(np.allclose(np.mod(detection.a + shift, 1.0), moved.a, atol=1e-12)
                       and moved.lam == detection.lam)
    found = bool(params.lam / 1.2 <= detection.lam <= params.lam * 1.2
                 and periodic_distance(detection.a, params.a) <= 2 * grid.h)
    return {'detected': detection.serialize(), 'found': found, 'equivariant': equivariant}


def bubble_scan(config, sink=None):
    grid = ToroidalGrid(config['grid_n'])
    lambdas = np.array(config['lambdas'], dtype=float)
    a = (config['a1'], config['a2'])
    rows = []
    variations = []
    detections = []
    jacobi = []
    regions = []
    for lam in lambdas:
        params = BubbleParams(lam, a, _rotation(config))
        row = scan_row(params, grid, config['samples'], config['seed'])
        rows.append([row[name] for name in SCAN_COLUMNS])
        variations.append(variation_scalings(params, grid))
        detections.append(_detection_check(params, grid))
        jacobi.append(jacobi_pairing_sup(params, grid, config['samples'], config['seed']))
        regions.append(tension_regions(params, grid))
    table = {name: np.array([row[i] for row in rows])
             for i, name in enumerate(SCAN_COLUMNS)}

    gaps = table['gap']
    gap_slope = _slope(lambdas, gaps)
    prefactors = gaps * lambdas ** 2 / (8 * np.pi ** 2)

    law = -16 * np.pi ** 2 / lambdas ** 3
    chosen = np.isin(lambdas, (20.0, 40.0))
    if not np.any(chosen):
        chosen = np.ones_like(lambdas, dtype=bool)
    derivative_ratios = table['dE_dlambda'] / law

    leading = leading_term_report(lambdas, table['leading_term'], table['dE_dlambda'])
    nearest = int(np.argmin(np.abs(lambdas - 40.0)))

    tension_slope = _slope(lambdas, table['tension_l2'])
    region_slopes = tension_region_slopes(lambdas, regions)
    if abs(tension_slope + 1) > 0.15:
        logger.warning('tension slope %.3g; gluing annulus slope %.3g, off the annulus %.3g',
                       tension_slope, region_slopes['seam'], region_slopes['off_seam'])
    pairing_slope = _slope(lambdas, table['pairing_sup'] / np.sqrt(np.log(lambdas)))

    weight_slope = _slope(lambdas, [v['weight_variation_l2'] for v in variations])
    scale_norms = [v['scale_norm'] for v in variations]
    translations = np.array([v['translation_norms'] for v in variations])
    rotations = np.array([v['rotation_norms'] for v in variations])

    summary = {
        'lambdas': lambdas,
        'gap_slope': gap_slope,
        'gap_prefactors': prefactors,
        'dE_dlambda_ratios': derivative_ratios,
        'tension_slope': tension_slope,
        'tension_regions': regions,
        'tension_region_slopes': region_slopes,
        'pairing_slope': pairing_slope,
        'jacobi_pairing': jacobi,
        'variations': variations,
        'weight_slope': weight_slope,
        'detections': detections,
    }
    summary.update(leading)
    verdict = {
        'energy_gap_law': bool(np.all(gaps > 0) and abs(gap_slope + 2) <= 0.1
                               and np.all(np.abs(prefactors - 1) <= 0.05)),
        'dE_dlambda': bool(np.all(np.abs(derivative_ratios[chosen] - 1) <= 0.05)),
        'leading_term': bool(abs(leading['leading_term_ratios'][nearest] - 1) <= 0.05
                             and abs(leading['residual_slope'] + 4) <= 0.5),
        'tension_scalings': bool(abs(tension_slope + 1) <= 0.15
                                 and abs(pairing_slope + 2) <= 0.3),
        'variation_scalings': bool(_band(scale_norms)
                                   and all(_band(column) for column in translations.T)
                                   and all(_band(column) for column in rotations.T)
                                   and abs(weight_slope + 1) <= 0.2),
        'bubble_detection': all(d['found'] and d['equivariant'] for d in detections),
    }
    return Outcome(summary, verdict, SCAN_COLUMNS, rows)


def trajectory_checks(records, e_inf, factor=BOUNDED_FACTOR):
    '''
    Boundedness of the Lojasiewicz ratios, the decay ODE ratio and the
    distance prefactor over the samples with a resolved bubble.

    :returns: (measurements, verdict) where verdict is True, False or
      'skipped'.
    '''
    resolved = [r for r in records if np.isfinite(r.lam) and r.tension_l2 > 0]
    if len(resolved) < 3:
        logger.warning('only %i samples with a resolved bubble, trajectory check '
                       'skipped', len(resolved))
        return {'resolved_samples': len(resolved)}, SKIPPED

    tension = np.array([r.tension_l2 for r in resolved])
    e_d = np.array([r.energy for r in resolved]) - e_inf
    checks = {
        'ratio_scale': bounded([r.ratio_scale for r in resolved], factor),
        'ratio_energy': bounded([r.ratio_energy for r in resolved], factor),
    }
    positive = e_d > 0
    if np.count_nonzero(positive) >= 3:
        checks['ode_ratio'] = bounded(ode_ratio_check(e_d[positive], tension[positive]),
                                      factor)
    dist = np.array([r.dist_z for r in resolved])
    measured = np.isfinite(dist)
    if np.count_nonzero(measured) >= 3:
        prefactors = dist[measured] / (tension[measured] * log_envelope(tension[measured]))
        checks['dist_prefactor'] = bounded(prefactors, 1.5)

    measurements = {name: {'passed': ok, 'max_over_median': ratio}
                    for name, (ok, ratio) in checks.items()}
    if 'ode_ratio' in measurements:
        measurements['ode_ratio']['log_floor'] = LOG_FLOOR
        measurements['ode_ratio']['note'] = (
            'E_d / (max(|log E_d|, %g) T^2); the floor departs from E_d / (|log E_d| T^2) '
            'where |log E_d| < %g' % (LOG_FLOOR, LOG_FLOOR))
    measurements['resolved_samples'] = len(resolved)
    measurements['window'] = [resolved[0].t, resolved[-1].t]
    return measurements, all(ok for ok, _ in checks.values())


def _post_event_report(records):
    '''
    Exponential fit of E(t) after the last singular event that closed, when
    the flow took the finite-time branch.
    '''
    closed = [r.t for r in records if any(tag.startswith('closed:') for tag in r.events)]
    if not closed:
        return {'reason': 'no singular event closed'}
    t_event = closed[-1]
    try:
        return fit_exponential_tail([r.t for r in records], [r.energy for r in records],
                                    t_event)
    except InsufficientData as error:
        return {'t_event': t_event, 'reason': str(error)}


def _decay_report(records, e_inf):
    t = np.array([r.t for r in records])
    e_d = np.array([r.energy for r in records]) - e_inf
    try:
        fit = fit_decay(t, e_d).serialize()
    except InsufficientData as error:
        fit = {'error': str(error)}
    try:
        rate = log_square_rate(t, e_d)
    except InsufficientData:
        rate = None
    return {'fit': fit, 'log_square_rate': rate, 'post_event': _post_event_report(records)}


def _dissipation(settings):
    u = engine.initial_field(settings)
    if engine.FlowState(0.0, u).tension_l2 == 0:
        return {'reason': 'initial map is harmonic'}, SKIPPED
    residual = engine.dissipation_residual(u)
    measurements = {'residual': residual}
    passed = residual <= 0.05
    kind, args = engine.parse_init(settings.init)
    if kind == 'bubble':
        fine_grid = ToroidalGrid(2 * settings.grid_n)
        lam, a1, a2 = args[:3]
        fine = engine.dissipation_residual(
            build_bubble(BubbleParams(lam, (a1, a2), args[3:]), fine_grid))
        measurements['residual_refined'] = fine
        passed = passed and fine <= 0.5 * residual
    return measurements, bool(passed)


def flow_settings(config):
    return engine.FlowSettings(config['grid_n'], config['init'], config['t_end'],
                               config['dt_safety'], config['sample_every'], config['e_inf'],
                               config['dist_every'], config['max_steps'], config['alpha'])


def flow(config, sink=None):
    settings = flow_settings(config)
    e_inf = settings.e_inf
    kind, args = engine.parse_init(settings.init)
    target = (BubbleParams(args[0], args[1:3], args[3:]).rot.matrix @ P_STAR
              if kind == 'bubble' else P_STAR)
    away = []

    def observe(state, record):
        e_d = record.energy - e_inf
        if not np.isfinite(record.lam) or e_d <= 0:
            return
        radius = max(IOTA, 3.5 / record.lam)
        if radius >= 0.5:
            return
        away.append(away_convergence_check(state.u, record.a, radius, settings.alpha,
                                           e_d, record.lam, target)['sup'])

    dissipation, dissipation_verdict = _dissipation(settings)
    history = engine.run(settings, sink, observe)
    trajectory, trajectory_verdict = trajectory_checks(history.records, e_inf)

    drops = [event.energy_drop for event in history.events if event.closed]
    if drops:
        quantization = bool(all(_within(drop, 4 * np.pi, 0.15) for drop in drops))
    else:
        logger.warning('no singular event closed before t_end, energy quantization '
                       'skipped')
        quantization = SKIPPED

    summary = history.serialize()
    summary.update({
        'settings': settings.serialize(),
        'dissipation': dissipation,
        'trajectory': trajectory,
        'away_convergence': {'alpha': settings.alpha, 'values': away,
                             'bounded': bounded(away)[0] if away else None},
        'decay': _decay_report(history.records, e_inf),
    })
    verdict = {
        'dissipation': dissipation_verdict,
        'loj_trajectory': trajectory_verdict,
        'energy_quantization': quantization,
    }
    rows = [record.as_row() for record in history.records]
    return Outcome(summary, verdict, COLUMNS, rows)


def synthetic_decay_check():
    '''
    fit_decay on exact exponential-in-sqrt(t) and power-law data.
    '''
    t = np.geomspace(1.0, 1000.0, 60)
    exponential = fit_decay(t, np.exp(-0.3 * np.sqrt(t)))
    t = np.geomspace(2.0, 200.0, 60)
    power = fit_decay(t, t ** -2 * np.log(t))
    return bool(exponential.model == 'exponential'
                and _within(exponential.constants['c1'], 0.3, 0.01)
                and power.model == 'power'
                and _within(power.constants['exponent'], -2.0, 0.05))


def _read(path):
    return read_series(resolve_path(path))


def loj_check(config, sink=None):
    e_inf = SINGLE_BUBBLE_ENERGY if config['e_inf'] is None else config['e_inf']
    columns, rows, series_hash = _read(config['series'])
    missing = [name for name in COLUMNS if name not in columns]
    if missing:
        raise ValueError('%s lacks columns %s' % (config['series'], ', '.join(missing)))
    records = [DiagnosticsRecord.from_row(row, e_inf) for row in rows]
    trajectory, trajectory_verdict = trajectory_checks(records, e_inf,
                                                       config['bounded_factor'])
    summary = {
        'series_manifest': series_hash,
        'samples': len(records),
        'trajectory': trajectory,
        'decay': _decay_report(records, e_inf),
    }
    if config['scan']:
        _, scan_rows, _ = _read(config['scan'])
        lambdas = np.array([row['lambda'] for row in scan_rows])
        tension = np.array([row['tension_l2'] for row in scan_rows])
        energy = np.array([row['gap'] for row in scan_rows]) + SINGLE_BUBBLE_ENERGY
        ratio_energy = loj_ratios(tension, lambdas, energy)[1]
        ok, spread = bounded(ratio_energy, config['bounded_factor'])
        summary['scan_ratio_energy'] = {'values': ratio_energy, 'passed': ok,
                                        'max_over_median': spread}
    verdict = {
        'loj_trajectory': trajectory_verdict,
        'decay_fit': synthetic_decay_check(),
    }
    return Outcome(summary, verdict)


def dist_fit(config, sink=None):
    rotation = _rotation(config)
    seed = BubbleParams(config['seed_lambda'], (config['a1'], config['a2']), rotation)
    truth = None
    if config['field']:
        u = read_field(config['field'], on_sphere=True)
    else:
        grid = ToroidalGrid(config['grid_n'])
        truth = BubbleParams(config['lambda'], (config['a1'], config['a2']), rotation)
        u = build_bubble(truth, grid)
        epsilon = config['epsilon']
        if epsilon > 0:
            rho = weight_field(grid, truth.lam, truth.a)
            rng = np.random.default_rng(config['seed'])
            v = tangential_part(u, random_smooth_field(grid, rng))
            u = project_field(grid, u.values + epsilon * v.values / weighted_norm(v, rho))

    converged = True
    try:
        dist, params = dist_to_Z(u, seed)
    except NotConverged as error:
        logger.warning('%s', error)
        dist, params, converged = error.dist, error.params, False

    summary = {
        'dist': dist,
        'params': params.serialize(),
        'seed': seed.serialize(),
        'seed_distance': bubble_distance(u, seed),
        'converged': converged,
        'truth': truth.serialize() if truth else None,
    }
    if truth is not None and config['epsilon'] > 0:
        recovered = bool(converged and dist <= 1.5 * config['epsilon']
                         and _within(params.lam, truth.lam, 0.01))
    else:
        recovered = SKIPPED
    return Outcome(summary, {'perturbation_recovery': recovered})


EXPERIMENTS = {
    'greens_table': greens_table,
    'bubble_scan': bubble_scan,
    'flow': flow,
    'loj_check': loj_check,
    'dist_fit': dist_fit,
}
