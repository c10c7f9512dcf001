'''
Harmonic map flow du/dt = tau(u) on the torus grid.

Each step is an explicit Heun step with nearest-point projection after both
stages. Bubbles are located by pinning the largest ball energy to half the
sphere energy.
'''
import logging

import numpy as np

from bubbles.construct import BubbleParams, build_bubble
from diagnostics.distance import NotConverged, dist_to_Z
from diagnostics.loj import SINGLE_BUBBLE_ENERGY
from diagnostics.records import DiagnosticsRecord
from sphere.maps import P_STAR, BelowGuard, project_field, tension_array
from torus.grid import (RESOLUTION_LIMIT, ToroidalField3, ToroidalGrid, energy_density,
                        integrate, periodic_distance)
from torus.serialize import read_field

logger = logging.getLogger(__name__)

#: Allowed energy increase per step, relative to E(0)
ENERGY_TOLERANCE = 1e-8
#: Largest dt / h^2
DT_SAFETY = 0.2
DT_GROWTH = 1.1
CLEAN_STEPS = 50
MAX_HALVINGS = 30
HALF_SPHERE_ENERGY = 2 * np.pi
BISECTION_TOLERANCE = 1e-3
#: Smallest resolved bubble radius in grid spacings
MIN_RADIUS_CELLS = 3


class EnergyIncreased(RuntimeError):
    def __init__(self, before, after):
        super().__init__('energy rose from %.17g to %.17g' % (before, after))
        self.before = before
        self.after = after


class NoBubble(ValueError):
    pass


class Unresolved(RuntimeError):
    '''
    The bubble radius fell below three grid spacings.
    '''
    def __init__(self, radius, h, a):
        super().__init__('bubble radius %.4g is below %i h = %.4g'
                         % (radius, MIN_RADIUS_CELLS, MIN_RADIUS_CELLS * h))
        self.radius = radius
        self.a = a


class FlowState():
    '''
    :param float t: flow time.
    :param ToroidalField3 u: the on-sphere map.
    :param int steps: accepted steps so far.
    :param float dt: size of the last accepted step.
    '''
    def __init__(self, t, u, steps=0, dt=0.0):
        if not u.on_sphere:
            raise ValueError('flow states must be on the sphere')
        self.t = float(t)
        self.u = u
        self.steps = steps
        self.dt = dt
        self.tau = tension_array(u.values, u.grid.h)
        self.energy = integrate(energy_density(u), u.grid)
        self.tension_l2 = float(np.sqrt(integrate(np.sum(self.tau ** 2, axis=-1), u.grid)))

    @property
    def grid(self):
        return self.u.grid

    def __repr__(self):
        return 'FlowState(t=%g, energy=%.12g, steps=%i)' % (self.t, self.energy, self.steps)


class StepController():
    '''
    dt starts at safety * h^2, halves on every failed step and grows by 10%
    after 50 clean steps, never above its start.
    '''
    def __init__(self, h, safety=DT_SAFETY):
        if not 0 < safety <= DT_SAFETY:
            raise ValueError('dt_safety must be in (0, %g], got %g' % (DT_SAFETY, safety))
        self.dt_max = safety * h * h
        self.dt = self.dt_max
        self.clean = 0
        self.halvings = 0

    def failed(self, error):
        self.halvings += 1
        if self.halvings > MAX_HALVINGS:
            raise error
        self.dt /= 2
        self.clean = 0
        logger.warning('%s; dt halved to %.4g', error, self.dt)

    def succeeded(self):
        self.halvings = 0
        self.clean += 1
        if self.clean >= CLEAN_STEPS and self.dt < self.dt_max:
            self.dt = min(self.dt * DT_GROWTH, self.dt_max)
            self.clean = 0


def step(state, dt, initial_energy=None):
    '''
    One Heun step with projection after each stage.

    :raises EnergyIncreased: when E grows by more than 1e-8 E(0).
    :raises BelowGuard: when a stage leaves the projection neighbourhood.
    '''
    grid = state.grid
    h = grid.h
    if dt > DT_SAFETY * h * h * (1 + 1e-12):
        raise ValueError('dt=%g exceeds %g h^2' % (dt, DT_SAFETY))
    initial_energy = state.energy if initial_energy is None else initial_energy
    u = state.u.values
    predictor = project_field(grid, u + dt * state.tau).values
    corrected = u + 0.5 * dt * (state.tau + tension_array(predictor, h))
    new = FlowState(state.t + dt, project_field(grid, corrected), state.steps + 1, dt)
    if new.energy > state.energy + ENERGY_TOLERANCE * initial_energy:
        raise EnergyIncreased(state.energy, new.energy)
    return new


def advance(state, controller, initial_energy, limit=np.inf):
    '''
    Take one accepted step, halving dt on failures.
    '''
    while True:
        dt = min(controller.dt, limit)
        try:
            new = step(state, dt, initial_energy)
        except (EnergyIncreased, BelowGuard) as error:
            controller.failed(error)
            continue
        controller.succeeded()
        logger.debug('t=%.6g dt=%.3g energy=%.12g tension=%.6g', new.t, dt,
                     new.energy, new.tension_l2)
        return new


def dissipation_residual(u, dt=None):
    '''
    |(E(t) - E(t + dt)) / dt - T^2| / T^2 over one step.
    '''
    state = FlowState(0.0, u)
    dt = DT_SAFETY * u.grid.h ** 2 if dt is None else dt
    new = step(state, dt)
    rate = (state.energy - new.energy) / dt
    return abs(rate - state.tension_l2 ** 2) / state.tension_l2 ** 2


class BubbleDetection():
    def __init__(self, a, lam, core_energy):
        self.a = a
        self.lam = lam
        self.core_energy = core_energy

    @property
    def radius(self):
        return 1.0 / self.lam

    def serialize(self):
        return {'a1': float(self.a[0]), 'a2': float(self.a[1]), 'lambda': self.lam,
                'core_energy': self.core_energy}

    def __repr__(self):
        return 'BubbleDetection(a=(%g, %g), lam=%g)' % (self.a[0], self.a[1], self.lam)


class BallEnergies():
    '''
    Energies of the balls B_r(c) at every sample c.

    A sample at distance d from c counts with weight clip((r - d) / h + 1/2,
    0, 1), the share of its cell inside the ball along the radius. All
    centres are evaluated at once by FFT convolution.
    '''
    def __init__(self, u):
        grid = u.grid
        self.grid = grid
        density = energy_density(u)
        self.total = integrate(density, grid)
        self.density_hat = np.fft.rfft2(density * grid.cell_area)
        self.distance = periodic_distance(grid.points(), np.zeros(2))

    def __call__(self, r):
        h = self.grid.h
        kernel = np.clip((r - self.distance) / h + 0.5, 0.0, 1.0)
        return np.fft.irfft2(self.density_hat * np.fft.rfft2(kernel), s=self.grid.shape)


def detect_bubble(u):
    '''
    Locate the bubble of u: the radius r at which the largest ball energy
    is 2 pi, found by bisection, and the centre attaining it. Ties go to
    the lowest row-major index.

    :raises NoBubble: when E(u) < 2 pi.
    :raises Unresolved: when r < 3h.
    '''
    balls = BallEnergies(u)
    if balls.total < HALF_SPHERE_ENERGY:
        raise NoBubble('energy %.6g is below 2 pi' % balls.total)
    h = u.grid.h
    lo, hi = 0.0, np.sqrt(0.5) + h
    while hi - lo > BISECTION_TOLERANCE * hi:
        mid = 0.5 * (lo + hi)
        if balls(mid).max() >= HALF_SPHERE_ENERGY:
            hi = mid
        else:
            lo = mid
    radius = 0.5 * (lo + hi)
    energies = balls(radius)
    index = np.unravel_index(np.argmax(energies), energies.shape)
    a = np.array(index, dtype=float) * h
    if radius < MIN_RADIUS_CELLS * h:
        raise Unresolved(radius, h, a)
    return BubbleDetection(a, 1.0 / radius, float(energies[index]))


class FlowSettings():
    '''
    :param int grid_n: samples per side.
    :param str init: 'constant', 'bubble:lambda,a1,a2,r1,r2,r3' or
        'file:<path>'.
    :param float t_end: final flow time.
    :param float dt_safety: dt / h^2 at most, up to 0.2.
    :param int sample_every: accepted steps between records.
    :param e_inf: limit energy for the ratios, 4 pi when None.
    :param int dist_every: compute the distance to the bubble family every
        this many records; 0 turns it off.
    :param int max_steps: hard limit on accepted steps.
    :param float alpha: exponent of the away-from-bubble convergence check.
    '''
    def __init__(self, grid_n, init='constant', t_end=0.01, dt_safety=DT_SAFETY,
                 sample_every=50, e_inf=None, dist_every=0, max_steps=10 ** 6, alpha=0.4):
        self.grid_n = int(grid_n)
        self.init = init
        self.t_end = float(t_end)
        self.dt_safety = float(dt_safety)
        self.sample_every = int(sample_every)
        self.e_inf = SINGLE_BUBBLE_ENERGY if e_inf is None else float(e_inf)
        self.dist_every = int(dist_every)
        self.max_steps = int(max_steps)
        self.alpha = float(alpha)
        if self.sample_every < 1:
            raise ValueError('sample_every must be positive')

    @property
    def grid(self):
        return ToroidalGrid(self.grid_n)

    def serialize(self):
        return dict(vars(self))


def parse_init(init):
    '''
    Split an init string into its kind and arguments.
    '''
    kind, _, rest = init.partition(':')
    if kind == 'constant' and not rest:
        return kind, ()
    if kind == 'bubble':
        values = [float(value) for value in rest.split(',')]
        if len(values) != 6:
            raise ValueError('bubble init needs lambda,a1,a2,r1,r2,r3, got %r' % rest)
        return kind, tuple(values)
    if kind == 'file' and rest:
        return kind, (rest,)
    raise ValueError('unknown init %r' % init)


def initial_field(settings):
    grid = settings.grid
    kind, args = parse_init(settings.init)
    if kind == 'constant':
        return ToroidalField3.constant(grid, P_STAR)
    if kind == 'bubble':
        lam, a1, a2 = args[:3]
        return build_bubble(BubbleParams(lam, (a1, a2), args[3:]), grid)
    field = read_field(args[0], on_sphere=True)
    if field.grid != grid:
        raise ValueError('%s holds %r, expected %r' % (args[0], field.grid, grid))
    return field


class SingularEvent():
    '''
    A stretch of samples where the bubble was below grid scale, with the
    energies at the last resolved sample before it and the first sample
    after it.
    '''
    def __init__(self, t_open, energy_before):
        self.t_open = t_open
        self.energy_before = energy_before
        self.t_close = None
        self.energy_after = None

    @property
    def closed(self):
        return self.t_close is not None

    @property
    def energy_drop(self):
        return None if not self.closed else self.energy_before - self.energy_after

    def close(self, t, energy):
        self.t_close = t
        self.energy_after = energy

    def serialize(self):
        return {'t_open': self.t_open, 't_close': self.t_close,
                'energy_before': self.energy_before, 'energy_after': self.energy_after,
                'energy_drop': self.energy_drop}


class FlowHistory():
    def __init__(self, settings, records, events, state, initial_energy):
        self.settings = settings
        self.records = records
        self.events = events
        self.state = state
        self.initial_energy = initial_energy

    def serialize(self):
        return {
            'initial_energy': self.initial_energy,
            'final_energy': self.state.energy,
            'final_t': self.state.t,
            'steps': self.state.steps,
            'samples': len(self.records),
            'events': [event.serialize() for event in self.events],
        }


class _Recorder():
    '''
    Turns states into records and tracks singular events.
    '''
    def __init__(self, settings, sink, observe=None):
        self.settings = settings
        self.sink = sink
        self.observe = observe
        self.records = []
        self.events = []
        self.last_resolved_energy = None
        self.rotation = (0.0, 0.0, 0.0)

    @property
    def open_event(self):
        if self.events and not self.events[-1].closed:
            return self.events[-1]
        return None

    def _close(self, state, tags):
        event = self.open_event
        if event is not None:
            event.close(state.t, state.energy)
            tags.append('closed:%.17g' % event.energy_drop)
            logger.info('singular event from t=%g closed at t=%g, energy drop %.6g',
                        event.t_open, state.t, event.energy_drop)

    def _distance(self, state, detection):
        settings = self.settings
        if not settings.dist_every or len(self.records) % settings.dist_every:
            return float('nan')
        if detection.lam < 2 or detection.lam * state.grid.h > RESOLUTION_LIMIT:
            return float('nan')
        seed = BubbleParams(detection.lam, detection.a, self.rotation)
        try:
            dist, params = dist_to_Z(state.u, seed)
        except NotConverged as error:
            logger.warning('distance at t=%g: %s', state.t, error)
            dist, params = error.dist, error.params
        self.rotation = params.rot.rotvec
        return dist

    def record(self, state):
        tags = []
        lam, a, dist = float('nan'), (float('nan'), float('nan')), float('nan')
        try:
            detection = detect_bubble(state.u)
        except Unresolved as error:
            tags.append('unresolved')
            if self.open_event is None:
                before = (state.energy if self.last_resolved_energy is None
                          else self.last_resolved_energy)
                self.events.append(SingularEvent(state.t, before))
                logger.info('bubble unresolved at t=%g (radius %.4g)', state.t,
                            error.radius)
        except NoBubble:
            self._close(state, tags)
        else:
            self._close(state, tags)
            self.last_resolved_energy = state.energy
            lam, a = detection.lam, detection.a
            dist = self._distance(state, detection)
        record = DiagnosticsRecord(state.t, state.energy, state.tension_l2, lam, a, dist,
                                   tags, self.settings.e_inf)
        self.records.append(record)
        if self.sink is not None:
            self.sink(record)
        if self.observe is not None:
            self.observe(state, record)
        return record


def run(settings, sink=None, observe=None):
    '''
    Flow from settings.init until t_end or max_steps, recording every
    sample_every accepted steps. The flow continues past unresolved
    bubbles; such stretches are kept as SingularEvents.

    :param sink: callable receiving each DiagnosticsRecord as it is made.
    :param observe: callable receiving (FlowState, DiagnosticsRecord) at
        every sample.
    :returns: a FlowHistory.
    '''
    state = FlowState(0.0, initial_field(settings))
    initial_energy = state.energy
    controller = StepController(state.grid.h, settings.dt_safety)
    recorder = _Recorder(settings, sink, observe)
    logger.info('flow from %s on N=%i, E(0)=%.12g', settings.init, settings.grid_n,
                initial_energy)
    recorder.record(state)
    # stop within round-off of t_end
    end = settings.t_end * (1 - 1e-12)
    while state.t < end and state.steps < settings.max_steps:
        state = advance(state, controller, initial_energy, settings.t_end - state.t)
        if state.steps % settings.sample_every == 0:
            recorder.record(state)
    if recorder.records[-1].t != state.t:
        recorder.record(state)
    logger.info('flow finished at t=%g after %i steps, E=%.12g', state.t, state.steps,
                state.energy)
    return FlowHistory(settings, recorder.records, recorder.events, state, initial_energy)
