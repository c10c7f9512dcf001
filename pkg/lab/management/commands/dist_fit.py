from lab.management.base import LabCommand


class Command(LabCommand):
    help = 'Distance from a field to the family of bubble maps.'
    subcommand = 'dist_fit'

    def add_flags(self, parser):
        parser.add_argument('--field', help='binary field file')
        parser.add_argument('--seed-lambda', type=float, help='initial bubble scale')

    def overrides(self, options):
        overrides = super().overrides(options)
        overrides['field'] = options['field']
        if options['seed_lambda'] is not None:
            overrides['seed_lambda'] = repr(options['seed_lambda'])
        return overrides
