from lab.management.base import LabCommand


class Command(LabCommand):
    help = 'Recheck the Lojasiewicz ratios and fit the decay of a saved flow series.'
    subcommand = 'loj_check'

    def add_flags(self, parser):
        parser.add_argument('--series', help='flow series CSV')
        parser.add_argument('--scan', help='bubble scan CSV')

    def overrides(self, options):
        overrides = super().overrides(options)
        overrides.update(series=options['series'], scan=options['scan'])
        return overrides
