import json
import math

from django.db import models
from django.utils import timezone

import bleach
import markdown

from diagnostics.records import COLUMNS

REPORT_TAGS = bleach.ALLOWED_TAGS | {'p', 'h1', 'h2', 'pre'}
VERDICT_LABELS = {True: 'pass', False: 'FAIL', 'skipped': 'skipped'}


class Run(models.Model):
    subcommand = models.CharField(max_length=20)
    #: The config text as given, before defaults were filled in
    config_text = models.TextField(blank=True)
    manifest = models.TextField()
    manifest_hash = models.CharField(max_length=64)

    summary = models.TextField(default='')
    #: None until the run finishes
    passed = models.BooleanField(default=None, null=True)
    error = models.TextField(default='')

    date_started = models.DateTimeField(auto_now_add=True)
    date_finished = models.DateTimeField(default=None, null=True)

    def append_record(self, record):
        SeriesRecord.from_record(self, self.series.count(), record).save()

    def finish(self, summary, passed):
        '''
        Store the summary JSON text and the overall verdict, and save.
        '''
        self.summary = summary
        self.passed = passed
        self.date_finished = timezone.now()
        self.save()

    def fail(self, error):
        self.error = str(error)
        self.passed = False
        self.date_finished = timezone.now()
        self.save()

    def verdict(self):
        if not self.summary:
            return {}
        return json.loads(self.summary).get('verdict', {})

    def report(self):
        '''
        Markdown text describing the run.
        '''
        lines = ['# %s run %i' % (self.subcommand, self.pk), '',
                 'manifest `%s`' % self.manifest_hash, '']
        verdict = self.verdict()
        if verdict:
            lines += ['## Verdict', '']
            lines += ['- **%s**: %s' % (key, VERDICT_LABELS.get(value, value))
                      for key, value in sorted(verdict.items())]
            lines.append('')
        if self.error:
            lines += ['## Error', '', self.error, '']
        lines += ['## Config', '']
        lines += ['    ' + line for line in (self.config_text or '(defaults)').splitlines()]
        return '\n'.join(lines) + '\n'

    def markdown_report(self):
        return bleach.clean(markdown.markdown(self.report()), tags=REPORT_TAGS)

    def serialize(self):
        return {
            'id': self.pk,
            'subcommand': self.subcommand,
            'manifest': self.manifest_hash,
            'passed': self.passed,
            'date_started': self.date_started.isoformat(),
            'date_finished': (self.date_finished.isoformat()
                              if self.date_finished else None),
        }

    def __str__(self):
        return '%i: %s %s' % (self.pk, self.subcommand, self.manifest_hash[:12])


def _finite(value):
    return value if math.isfinite(value) else None


class SeriesRecord(models.Model):
    '''
    One DiagnosticsRecord of a flow run. Non-finite values are stored as
    NULL.
    '''
    run = models.ForeignKey(Run, on_delete=models.CASCADE, related_name='series')
    index = models.PositiveIntegerField()

    t = models.FloatField()
    energy = models.FloatField()
    tension_l2 = models.FloatField()
    lam = models.FloatField(null=True)
    a1 = models.FloatField(null=True)
    a2 = models.FloatField(null=True)
    ratio_scale = models.FloatField(null=True)
    ratio_energy = models.FloatField(null=True)
    dist_z = models.FloatField(null=True)
    events = models.CharField(max_length=200, blank=True)

    class Meta:
        ordering = ['index']
        unique_together = [('run', 'index')]

    @classmethod
    def from_record(cls, run, index, record):
        return cls(run=run, index=index, t=record.t, energy=record.energy,
                   tension_l2=record.tension_l2, lam=_finite(record.lam),
                   a1=_finite(record.a[0]), a2=_finite(record.a[1]),
                   ratio_scale=_finite(record.ratio_scale),
                   ratio_energy=_finite(record.ratio_energy),
                   dist_z=_finite(record.dist_z), events=';'.join(record.events))

    def serialize(self):
        return dict(zip(COLUMNS, (self.t, self.energy, self.tension_l2, self.lam, self.a1,
                                  self.a2, self.ratio_scale, self.ratio_energy, self.dist_z,
                                  self.events)))

    def __str__(self):
        return 'run %i sample %i' % (self.run_id, self.index)
