import logging

from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from lab.config import ParseError, parse_config
from lab.runs import execute

logger = logging.getLogger(__name__)

#: Exit status when a run completes but an acceptance criterion fails
CRITERIA_FAILED = 2


class LabCommand(BaseCommand):
    '''
    A subcommand driven by a key=value config file. Flags override config
    keys of the same name.
    '''
    subcommand = None

    def add_arguments(self, parser):
        parser.add_argument('--config', help='key=value config file')
        parser.add_argument('--out', help='output directory')
        parser.add_argument('--seed', type=int, help='random seed')
        parser.add_argument('--grid-n', type=int, help='samples per side')
        self.add_flags(parser)

    def add_flags(self, parser):
        pass

    def overrides(self, options):
        '''
        Config values given as flags, as text the way a config file holds
        them.
        '''
        flags = {'out': options['out'], 'seed': options['seed'],
                 'grid_n': options['grid_n']}
        return {key: None if value is None else str(value) for key, value in flags.items()}

    def handle(self, *args, **options):
        text = ''
        if options['config']:
            try:
                with open(options['config']) as stream:
                    text = stream.read()
            except OSError as error:
                raise CommandError('cannot read config: %s' % error)
        try:
            config = parse_config(text, self.subcommand, self.overrides(options))
        except ParseError as error:
            raise CommandError('%s: %s' % (options['config'], error))
        except ValidationError as error:
            raise CommandError('; '.join(error.messages))

        try:
            run, outcome = execute(config)
        except (OSError, ValueError, RuntimeError) as error:
            raise CommandError('%s failed: %s' % (self.subcommand, error))

        for key, value in sorted(outcome.verdict.items()):
            self.stdout.write('%-22s %s' % (key, value))
        if not outcome.passed:
            failed = ', '.join(outcome.failed_criteria())
            raise CommandError('run %i failed %s' % (run.pk, failed), returncode=CRITERIA_FAILED)
        self.stdout.write(self.style.SUCCESS('run %i passed' % run.pk))
