from lab.management.base import LabCommand


class Command(LabCommand):
    help = 'Energy expansion, tension and variation scalings over a list of bubble scales.'
    subcommand = 'bubble_scan'

    def add_flags(self, parser):
        parser.add_argument('--lambdas', help='comma separated bubble scales')

    def overrides(self, options):
        overrides = super().overrides(options)
        overrides['lambdas'] = options['lambdas']
        return overrides
