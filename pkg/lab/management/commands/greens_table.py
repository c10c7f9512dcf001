from lab.management.base import LabCommand


class Command(LabCommand):
    help = 'Tabulate the torus Green function and check its constants.'
    subcommand = 'greens_table'
