import numpy as np

from diagnostics.loj import SINGLE_BUBBLE_ENERGY, loj_ratios

COLUMNS = ('t', 'energy', 'tension_l2', 'lambda', 'a1', 'a2', 'ratio_scale',
           'ratio_energy', 'dist_z', 'events')

NAN = float('nan')


class DiagnosticsRecord():
    '''
    One sample of a trajectory or scan.

    :param float t: flow time.
    :param float energy: Dirichlet energy.
    :param float tension_l2: L2 norm of the tension.
    :param float lam: detected bubble scale, NaN when none was resolved.
    :param a: detected attachment point, NaN pair when none was resolved.
    :param float dist_z: distance to the bubble family, NaN when not computed.
    :param events: list of event tags such as 'unresolved' or
        'closed:<energy drop>'.
    '''
    def __init__(self, t, energy, tension_l2, lam=NAN, a=(NAN, NAN), dist_z=NAN,
                 events=(), e_inf=SINGLE_BUBBLE_ENERGY):
        self.t = float(t)
        self.energy = float(energy)
        self.tension_l2 = float(tension_l2)
        self.lam = float(lam)
        self.a = (float(a[0]), float(a[1]))
        self.dist_z = float(dist_z)
        self.events = list(events)
        if np.isfinite(self.lam):
            self.ratio_scale, self.ratio_energy = loj_ratios(
                self.tension_l2, self.lam, self.energy, e_inf)
        else:
            self.ratio_scale = self.ratio_energy = NAN

    def as_row(self):
        '''
        Values in COLUMNS order; events joined by ';'.
        '''
        return (self.t, self.energy, self.tension_l2, self.lam, self.a[0], self.a[1],
                self.ratio_scale, self.ratio_energy, self.dist_z, ';'.join(self.events))

    def serialize(self):
        return dict(zip(COLUMNS, self.as_row()))

    @classmethod
    def from_row(cls, row, e_inf=SINGLE_BUBBLE_ENERGY):
        '''
        Rebuild a record from a mapping of COLUMNS to values; the ratios are
        recomputed.
        '''
        events = row.get('events') or ''
        return cls(row['t'], row['energy'], row['tension_l2'], row['lambda'],
                   (row['a1'], row['a2']), row['dist_z'],
                   [tag for tag in events.split(';') if tag], e_inf)

    def __repr__(self):
        return 'DiagnosticsRecord(t=%g, energy=%.10g, lambda=%g)' % (
            self.t, self.energy, self.lam)


def column(records, name):
    '''
    One column of a record list as a float array.
    '''
    index = COLUMNS.index(name)
    return np.array([record.as_row()[index] for record in records], dtype=float)
