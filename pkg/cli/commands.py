"""Handlers behind the qhgeo subcommands. Each returns a CommandResult."""

import json
import logging
import os
from dataclasses import dataclass
from typing import Dict, List, Optional

from geometry.domain import Domain, check_boundary_chain
from geometry.exceptions import InvalidParams
from geometry.paths import PolyPath
from geometry.primitives import Point
from geometry.serializers import domain_from_json
from geometry.svg import render_domain_svg
from domains.catalog import SLIT_EPSILONS, catalog_domain, catalog_names, slit_k_lower_bound
from domains.comb import CombParams, build_comb
from metrics.batch import BATCH_COLUMNS, SampleFailure, batch_rows, evaluate_pairs, read_pairs_csv
from metrics.estimators import j_metric, k_metric, qh_length
from metrics.serializers import sample_to_json
from analysis.experiments import CombDivergenceRow, comb_divergence, slit_trend, witness_path_check
from analysis.mobius import CAYLEY, IDENTITY, INVERSE_CAYLEY, mobius_bilipschitz_check
from analysis.plots import comb_divergence_svg, envelope_svg, samples_svg
from analysis.profiles import (
    check_comb_phi,
    john_constant,
    john_from_samples,
    phi_profile,
    profile_from_samples,
    sampled_metrics,
    theorem12_constant_chain,
    uniformity_constant,
    uniformity_from_samples,
)
from analysis.quasisymmetry import qs_identity_sampler
from analysis.samplers import make_rng, sample_pairs
from cli.output import render_json, render_scalar, render_table
from cli.serializers import RunConfig

logger = logging.getLogger(__name__)

COMB_CATALOG = ('comb', 'comb-complement')

NAMED_MAPS = {
    'cayley': CAYLEY,
    'inverse-cayley': INVERSE_CAYLEY,
    'identity': IDENTITY,
}


@dataclass
class CommandResult:
    text: str
    rows: int = 1
    svg: Optional[str] = None


def parseParams(pairs: Optional[List[str]]) -> Dict:
    options = {}
    for item in pairs or []:
        key, _, raw = item.partition('=')
        try:
            options[key] = json.loads(raw)
        except json.JSONDecodeError:
            options[key] = raw
    return options


def catalogDomain(name: str, options: Dict) -> Domain:
    try:
        return catalog_domain(name, **options)
    except TypeError as error:
        raise InvalidParams(f'bad options for {name}: {error}', options=options)


def resolve_domain(source: str, params: Optional[List[str]] = None) -> Domain:
    """A JSON file path wins over a catalog name."""
    if os.path.isfile(source):
        with open(source, encoding='utf-8') as handle:
            try:
                document = json.load(handle)
            except json.JSONDecodeError as error:
                raise InvalidParams(f'{source} is not valid JSON: {error}')
        return domain_from_json(document)
    return catalogDomain(source, parseParams(params))


def pointsOf(text: str) -> List[Point]:
    points = []
    for chunk in filter(None, text.split(';')):
        try:
            values = [float(value) for value in chunk.split(',')]
        except ValueError:
            values = []
        if len(values) != 2:
            raise InvalidParams(f'expected a vertex as "x,y", got {chunk!r}')
        points.append(Point.fromSequence(values))
    return points


def pairRows(x: Point, y: Point) -> List[float]:
    return [x.x, x.y, y.x, y.y]


# -- domain -------------------------------------------------------------------

def domain_list(args, config: RunConfig) -> CommandResult:
    names = catalog_names()
    return CommandResult(render_table(['name'], [[name] for name in names], config.output_format), len(names))


def domain_build(args, config: RunConfig) -> CommandResult:
    options = parseParams(args.param)
    if args.catalog in COMB_CATALOG:
        options.update(u=args.u, t=args.t, v=args.v, kmax=args.kmax)
    return CommandResult(render_json(catalogDomain(args.catalog, options).toRecord()))


def domain_show(args, config: RunConfig) -> CommandResult:
    return CommandResult(render_json(resolve_domain(args.domain, args.param).toRecord()))


def domain_svg(args, config: RunConfig) -> CommandResult:
    return CommandResult(render_domain_svg(resolve_domain(args.domain, args.param)))


def domain_check(args, config: RunConfig) -> CommandResult:
    domain = resolve_domain(args.domain, args.param)
    healthy = check_boundary_chain(domain)
    if config.output_format == 'json':
        return CommandResult(render_json({'name': domain.name, 'boundary_chain': healthy}))
    return CommandResult(render_table(['name', 'boundary_chain'], [[domain.name, healthy]], 'csv'))


# -- metric -------------------------------------------------------------------

def metric_j(args, config: RunConfig) -> CommandResult:
    domain = resolve_domain(args.domain, args.param)
    return CommandResult(render_scalar('j', j_metric(domain, args.x, args.y), config.output_format))


def metric_k(args, config: RunConfig) -> CommandResult:
    domain = resolve_domain(args.domain, args.param)
    sample = k_metric(domain, args.x, args.y, config.rel_tol, config.max_level, strict=True)
    svg = None
    if config.plot:
        svg = render_domain_svg(domain, paths=[sample.geodesic], markers=[args.x, args.y])
    record = sample_to_json(sample, with_geodesic=True)
    return CommandResult(render_scalar('k', sample.k_est, config.output_format, record), svg=svg)


def metric_qh_length(args, config: RunConfig) -> CommandResult:
    domain = resolve_domain(args.domain, args.param)
    path = PolyPath.fromPoints(pointsOf(args.path))
    return CommandResult(render_scalar('qh_length', qh_length(domain, path), config.output_format))


def metric_batch(args, config: RunConfig) -> CommandResult:
    domain = resolve_domain(args.domain, args.param)
    outcomes = evaluate_pairs(domain, read_pairs_csv(args.pairs), config.rel_tol, config.max_level, config.threads)
    if config.output_format == 'json':
        records = [outcome.toRecord() if isinstance(outcome, SampleFailure) else sample_to_json(outcome)
                   for outcome in outcomes]
        return CommandResult(render_json(records), len(records))
    return CommandResult(render_table(BATCH_COLUMNS, batch_rows(outcomes), 'csv'), len(outcomes))


# -- profile ------------------------------------------------------------------

def profile_phi(args, config: RunConfig) -> CommandResult:
    domain = resolve_domain(args.domain, args.param)
    profile = phi_profile(domain, args.samples, args.sampler, config.rel_tol, config.seed, config.threads)
    svg = envelope_svg(profile.bins, 'ratio', 'sup k', domain.name) if config.plot else None
    return CommandResult(render_table(['ratio_edge', 'sup_k'], profile.rows(), config.output_format),
                         len(profile.bins), svg)


def reportTable(record: Dict, config: RunConfig) -> str:
    if config.output_format == 'json':
        return render_json(record)
    flat = {}
    for key, value in record.items():
        if isinstance(value, list) and value and isinstance(value[0], list):
            for index, point in enumerate(value, start=1):
                flat[f'x{index}'], flat[f'y{index}'] = point
        elif isinstance(value, list):
            flat[f'{key}_x'], flat[f'{key}_y'] = value
        else:
            flat[key] = value
    return render_table(list(flat), [list(flat.values())], 'csv')


def profile_uniformity(args, config: RunConfig) -> CommandResult:
    domain = resolve_domain(args.domain, args.param)
    report = uniformity_constant(domain, args.samples, config.rel_tol, args.sampler, config.seed, config.threads)
    return CommandResult(reportTable(report.toRecord(), config))


def profile_john(args, config: RunConfig) -> CommandResult:
    domain = resolve_domain(args.domain, args.param)
    report = john_constant(domain, args.samples, config.rel_tol, args.sampler, config.seed, config.threads)
    return CommandResult(reportTable(report.toRecord(), config))


# -- experiment -----------------------------------------------------------------

def experiment_comb_divergence(args, config: RunConfig) -> CommandResult:
    # two teeth past the last row so every gap witness sits between closed teeth
    params = CombParams(u=args.u, t=args.t, v=args.v, k_max=args.kmax + 2)
    report = comb_divergence(params, range(1, args.kmax + 1), config.rel_tol, config.max_level,
                             threads=config.threads)
    svg = comb_divergence_svg(params, report.rows) if config.plot else None
    if config.output_format == 'json':
        return CommandResult(render_json(report.toRecord()), len(report.rows), svg)
    table = render_table(CombDivergenceRow.COLUMNS, [row.asRow() for row in report.rows], 'csv')
    return CommandResult(table, len(report.rows), svg)


def experiment_comb_phi(args, config: RunConfig) -> CommandResult:
    params = CombParams(u=args.u, t=args.t, v=args.v, k_max=args.kmax)
    comb, _ = build_comb(params)
    samples, skipped = sampled_metrics(comb, args.samples, 'boundary-biased', config.rel_tol, config.seed,
                                       config.threads)
    check_comb_phi(samples, params.alpha)
    profile = profile_from_samples(samples, skipped=skipped)
    svg = samples_svg(comb, samples) if config.plot else None
    return CommandResult(render_table(['ratio_edge', 'sup_k'], profile.rows(), config.output_format),
                         len(profile.bins), svg)


def experiment_witness(args, config: RunConfig) -> CommandResult:
    params = CombParams(u=args.u, t=args.t, v=args.v, k_max=args.kmax)
    comb, _ = build_comb(params)
    pairs = sample_pairs(comb, args.samples, 'uniform', make_rng(config.seed))
    checks = witness_path_check(params, pairs, config.rel_tol, threads=config.threads)
    rows = [pairRows(check.x, check.y) + [check.k_est, check.witness_length, check.holds] for check in checks]
    columns = ['x1', 'y1', 'x2', 'y2', 'k_est', 'witness_length', 'holds']
    return CommandResult(render_table(columns, rows, config.output_format), len(rows))


def mapCoefficients(text: str) -> List[complex]:
    named = NAMED_MAPS.get(text)
    if named is not None:
        return list(named)
    try:
        coefficients = [complex(value.replace(' ', '')) for value in text.split(',')]
    except ValueError:
        coefficients = []
    if len(coefficients) != 4:
        raise InvalidParams(f'expected a named map or four complex coefficients "a,b,c,d", got {text!r}',
                            known=sorted(NAMED_MAPS))
    return coefficients


def experiment_mobius(args, config: RunConfig) -> CommandResult:
    coefficients = mapCoefficients(args.map)
    domain = resolve_domain(args.domain, args.param)
    report = mobius_bilipschitz_check(coefficients, domain, args.samples, config.rel_tol, config.seed,
                                      config.threads)
    return CommandResult(reportTable(report.toRecord(), config))


def experiment_qs(args, config: RunConfig) -> CommandResult:
    domain = resolve_domain(args.domain, args.param)
    envelope = qs_identity_sampler(domain, args.samples, config.rel_tol, config.seed, config.threads)
    svg = envelope_svg(envelope.bins, 'j ratio', 'sup k ratio', domain.name) if config.plot else None
    table = render_table(['j_ratio_edge', 'sup_k_ratio'], envelope.rows(), config.output_format)
    return CommandResult(table, len(envelope.bins), svg)


def experiment_slit(args, config: RunConfig) -> CommandResult:
    trend = slit_trend(SLIT_EPSILONS, config.rel_tol, config.max_level, config.threads)
    rows = [
        [eps, sample.j, sample.k_est, sample.k_err, sample.k_est / sample.j, slit_k_lower_bound(eps)]
        for eps, sample in zip(SLIT_EPSILONS, trend.rows)
    ]
    columns = ['epsilon', 'j', 'k_est', 'k_err', 'ratio_kj', 'k_lower_bound']
    return CommandResult(render_table(columns, rows, config.output_format), len(rows))


def experiment_chain(args, config: RunConfig) -> CommandResult:
    domain = resolve_domain(args.domain, args.param)
    samples, _ = sampled_metrics(domain, args.samples, args.sampler, config.rel_tol, config.seed, config.threads)
    uniformity = uniformity_from_samples(domain, samples)
    john = john_from_samples(domain, samples)
    chain = theorem12_constant_chain(profile_from_samples(samples), john.c_est) if john.c_est > 0 else None
    record = {
        'uniformity': uniformity.sup_ratio_kj,
        'john': john.c_est,
        'chain': chain,
        'consistent': chain is None or uniformity.sup_ratio_kj <= chain,
    }
    return CommandResult(reportTable(record, config))


# -- plot -----------------------------------------------------------------------

def plot_domain(args, config: RunConfig) -> CommandResult:
    domain = resolve_domain(args.domain, args.param)
    paths, markers = [], []
    if args.x is not None and args.y is not None:
        sample = k_metric(domain, args.x, args.y, config.rel_tol, config.max_level)
        paths.append(sample.geodesic)
        markers.extend([args.x, args.y])
    return CommandResult(render_domain_svg(domain, paths=paths, markers=markers))
