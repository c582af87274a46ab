import sys

from django.core.management.base import BaseCommand

from cli.runner import run


class Command(BaseCommand):
    help = 'Quasihyperbolic geometry toolkit: domain, metric, profile, experiment and plot commands.'

    def run_from_argv(self, argv):
        sys.exit(run(argv[2:]))

    def handle(self, *args, **options):
        sys.exit(run(list(args)))
