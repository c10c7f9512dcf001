'''
Execute a validated config: manifest first, then the experiment, then the
series, summary and plot files, with a Run row tracking it all.
'''
import json
import logging
import os

from lab import experiments, models
from lab.output import dumps_summary, resolve_path, write_series, write_summary
from lab.plots import write_plot_scripts

logger = logging.getLogger(__name__)

MANIFEST_NAME = 'manifest.json'


class RunFiles():
    '''
    Paths of the files a run writes into its output directory.
    '''
    def __init__(self, config):
        self.directory = resolve_path(os.path.join(config['out'] or config.subcommand, ''))
        if config.subcommand == 'flow':
            series, summary = config['out_csv'], config['out_json']
        else:
            series = '%s.csv' % config.subcommand
            summary = '%s.json' % config.subcommand
        self.manifest = os.path.join(self.directory, MANIFEST_NAME)
        self.series = os.path.join(self.directory, series)
        self.summary = os.path.join(self.directory, summary)
        self.stem = os.path.splitext(os.path.basename(self.summary))[0]


def _plots(config, files):
    if config.subcommand == 'flow':
        return write_plot_scripts(files.directory, files.stem, flow_csv=files.series,
                                  e_inf=config['e_inf'])
    if config.subcommand == 'bubble_scan':
        return write_plot_scripts(files.directory, files.stem, scan_csv=files.series)
    if config.subcommand == 'loj_check':
        scan = resolve_path(config['scan']) if config['scan'] else None
        return write_plot_scripts(files.directory, files.stem,
                                  flow_csv=resolve_path(config['series']),
                                  scan_csv=scan, e_inf=config['e_inf'])
    return []


def execute(config):
    '''
    :returns: (run, outcome).
    :raises Exception: whatever the experiment raised; the run is marked
      failed first.
    '''
    files = RunFiles(config)
    manifest = config.manifest()
    write_summary(files.manifest, manifest)
    run = models.Run.objects.create(subcommand=config.subcommand, config_text=config.text,
                                    manifest=json.dumps(manifest, sort_keys=True),
                                    manifest_hash=config.manifest_hash)
    logger.info('run %i: %s in %s', run.pk, config.subcommand, files.directory)

    sink = run.append_record if config.subcommand == 'flow' else None
    try:
        outcome = experiments.EXPERIMENTS[config.subcommand](config, sink=sink)
    except Exception as error:
        logger.exception('run %i failed', run.pk)
        run.fail(error)
        raise

    if outcome.columns is not None:
        write_series(files.series, outcome.columns, outcome.rows, config.manifest_hash)
    summary = outcome.full_summary()
    summary['plots'] = [os.path.basename(path) for path in _plots(config, files)]
    write_summary(files.summary, summary, config.manifest_hash)
    run.finish(dumps_summary(summary, config.manifest_hash), outcome.passed)
    if outcome.passed:
        logger.info('run %i passed', run.pk)
    else:
        logger.warning('run %i failed: %s', run.pk, ', '.join(outcome.failed_criteria()))
    return run, outcome
