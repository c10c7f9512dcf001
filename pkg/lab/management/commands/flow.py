from lab.management.base import LabCommand


class Command(LabCommand):
    help = 'Run the harmonic map flow with Lojasiewicz diagnostics.'
    subcommand = 'flow'
