"""Entry point for ``qhgeo``: argument parsing, output routing, exit codes."""

import argparse
import json
import logging
import sys
from typing import List, Optional, TextIO

from rest_framework.exceptions import ValidationError

from geometry.exceptions import COMPUTATION_ERRORS, QhGeoError
from geometry.primitives import Point
from domains.catalog import catalog_names
from analysis.samplers import SAMPLERS
from cli import commands
from cli.serializers import RunConfig, build_run_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_COMPUTATION = 1
EXIT_USAGE = 2


def pointArgument(text: str) -> Point:
    try:
        values = [float(value) for value in text.split(',')]
        if len(values) != 2:
            raise ValueError(text)
        return Point.fromSequence(values)
    except (ValueError, QhGeoError):
        raise argparse.ArgumentTypeError(f'expected a point as "x,y", got {text!r}')


def commonOptions() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument('--seed', type=int)
    parent.add_argument('--threads', type=int)
    parent.add_argument('--format', dest='output_format', choices=('csv', 'json'))
    parent.add_argument('--out', help='write the result here instead of stdout')
    parent.add_argument('--plot', help='write an SVG figure here')
    parent.add_argument('--record', action='store_true', help='store the run in the experiment ledger')
    parent.add_argument('--rel-tol', dest='rel_tol', type=float)
    parent.add_argument('--max-level', dest='max_level', type=int)
    return parent


def domainOptions() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument('--domain', required=True, help='catalog name or path to a domain JSON file')
    parent.add_argument('--param', action='append', metavar='KEY=VALUE', help='catalog builder option')
    return parent


def samplingOptions(default_sampler: str = 'uniform') -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument('--samples', type=int, default=200)
    parent.add_argument('--sampler', choices=SAMPLERS, default=default_sampler)
    return parent


def combOptions() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument('--u', type=float, default=0.2)
    parent.add_argument('--t', type=float, default=0.4)
    parent.add_argument('--v', type=float, default=0.7)
    parent.add_argument('--kmax', type=int, default=6)
    return parent


def pairOptions(required: bool = True) -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument('--x', type=pointArgument, required=required)
    parent.add_argument('--y', type=pointArgument, required=required)
    return parent


def addCommand(group, name: str, handler, parents, help_text: str = None):
    parser = group.add_parser(name, parents=parents, help=help_text)
    parser.set_defaults(handler=handler)
    return parser


def build_parser() -> argparse.ArgumentParser:
    common, domain = commonOptions(), domainOptions()
    parser = argparse.ArgumentParser(prog='qhgeo', description='Quasihyperbolic and distance-ratio metric toolkit.')
    groups = parser.add_subparsers(dest='group', required=True)

    domain_group = groups.add_parser('domain').add_subparsers(dest='action', required=True)
    addCommand(domain_group, 'list', commands.domain_list, [common])
    build = addCommand(domain_group, 'build', commands.domain_build, [common, combOptions()],
                       'write a catalog domain as a JSON document')
    build.add_argument('--catalog', required=True, choices=catalog_names())
    build.add_argument('--param', action='append', metavar='KEY=VALUE', help='catalog builder option')
    addCommand(domain_group, 'show', commands.domain_show, [common, domain])
    addCommand(domain_group, 'svg', commands.domain_svg, [common, domain])
    addCommand(domain_group, 'check', commands.domain_check, [common, domain])

    metric_group = groups.add_parser('metric').add_subparsers(dest='action', required=True)
    addCommand(metric_group, 'j', commands.metric_j, [common, domain, pairOptions()])
    addCommand(metric_group, 'k', commands.metric_k, [common, domain, pairOptions()])
    qh_length = addCommand(metric_group, 'qh-length', commands.metric_qh_length, [common, domain])
    qh_length.add_argument('--path', required=True, help='vertices as "x1,y1;x2,y2;..."')
    batch = addCommand(metric_group, 'batch', commands.metric_batch, [common, domain])
    batch.add_argument('--pairs', required=True, help='CSV file with columns x1,y1,x2,y2')

    profile_group = groups.add_parser('profile').add_subparsers(dest='action', required=True)
    addCommand(profile_group, 'phi', commands.profile_phi, [common, domain, samplingOptions()])
    addCommand(profile_group, 'uniformity', commands.profile_uniformity,
               [common, domain, samplingOptions('boundary-biased')])
    addCommand(profile_group, 'john', commands.profile_john, [common, domain, samplingOptions()])

    experiment_group = groups.add_parser('experiment').add_subparsers(dest='action', required=True)
    addCommand(experiment_group, 'comb-divergence', commands.experiment_comb_divergence, [common, combOptions()])
    comb_phi = addCommand(experiment_group, 'comb-phi', commands.experiment_comb_phi, [common, combOptions()])
    comb_phi.add_argument('--samples', type=int, default=200)
    witness = addCommand(experiment_group, 'witness', commands.experiment_witness, [common, combOptions()])
    witness.add_argument('--samples', type=int, default=50)
    mobius = addCommand(experiment_group, 'mobius', commands.experiment_mobius, [common, domain])
    mobius.add_argument('--map', default='cayley', help='cayley, inverse-cayley, identity or "a,b,c,d"')
    mobius.add_argument('--samples', type=int, default=100)
    qs = addCommand(experiment_group, 'qs', commands.experiment_qs, [common, domain])
    qs.add_argument('--samples', type=int, default=100)
    addCommand(experiment_group, 'slit', commands.experiment_slit, [common])
    addCommand(experiment_group, 'chain', commands.experiment_chain, [common, domain, samplingOptions()])

    plot_group = groups.add_parser('plot').add_subparsers(dest='action', required=True)
    addCommand(plot_group, 'domain', commands.plot_domain, [common, domain, pairOptions(required=False)])
    return parser


def writeText(path: str, text: str) -> None:
    with open(path, 'w', encoding='utf-8') as handle:
        handle.write(text)


def writeError(stream: TextIO, payload) -> None:
    stream.write(json.dumps(payload, sort_keys=True, default=str) + '\n')


def recordArguments(args) -> dict:
    skipped = {'handler', 'record', 'out', 'plot'}
    return {key: (str(value) if isinstance(value, Point) else value)
            for key, value in vars(args).items() if key not in skipped}


def recordRun(args, config: RunConfig, result: Optional[commands.CommandResult], failed: bool = False) -> None:
    from django.core.management import call_command
    from django.db import connection
    from analysis.ledger import record_run
    from analysis.models import ExperimentRun

    if ExperimentRun._meta.db_table not in connection.introspection.table_names():
        call_command('migrate', 'analysis', verbosity=0)
    command = f'{args.group} {args.action}'
    text = result.text if result else ''
    record_run(command, recordArguments(args), config.ledgerFields(), text,
               result.rows if result else 0, failed=failed)


def run(argv: List[str], stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return EXIT_USAGE if exit_.code else EXIT_OK

    config = None
    try:
        config = build_run_config(args.seed, args.rel_tol, args.max_level, args.output_format, args.threads,
                                  args.plot)
        result = args.handler(args, config)
    except ValidationError as error:
        writeError(stderr, {'error': 'invalid_input', 'detail': error.detail})
        return EXIT_USAGE
    except COMPUTATION_ERRORS as error:
        logger.warning('%s %s failed: %s', args.group, args.action, error)
        writeError(stderr, error.asRecord())
        if args.record:
            recordRun(args, config, None, failed=True)
        return EXIT_COMPUTATION
    except QhGeoError as error:
        writeError(stderr, error.asRecord())
        return EXIT_USAGE

    if args.out:
        writeText(args.out, result.text)
    else:
        stdout.write(result.text)
    if config.plot and result.svg is not None:
        writeText(config.plot, result.svg)
    if args.record:
        recordRun(args, config, result)
    return EXIT_OK
