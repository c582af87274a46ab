"""SVG figures for the experiments."""

import io
from typing import Iterable, Optional, Sequence

import matplotlib

matplotlib.use('Agg')

import matplotlib.pyplot as plt  # noqa: E402

from geometry.domain import Domain  # noqa: E402
from geometry.svg import SVG_STYLE, render_domain_svg  # noqa: E402
from domains.comb import CombParams, build_comb_complement, comb_layout  # noqa: E402
from metrics.estimators import MetricSample  # noqa: E402
from analysis.experiments import CombDivergenceRow  # noqa: E402


def comb_divergence_svg(p: CombParams, rows: Sequence[CombDivergenceRow], margin: float = 1.0) -> str:
    layout = comb_layout(p)
    exterior = build_comb_complement(p, margin)
    markers = [layout.witness(k) for k in range(1, p.k_max + 1)]
    paths = [row.geodesic for row in rows if row.geodesic is not None]
    return render_domain_svg(exterior, paths=paths, markers=markers, title='comb exterior, gap geodesics')


def samples_svg(d: Domain, samples: Iterable[MetricSample], title: Optional[str] = None) -> str:
    samples = list(samples)
    markers = [p for sample in samples for p in (sample.x, sample.y)]
    return render_domain_svg(d, paths=[sample.geodesic for sample in samples], markers=markers, title=title)


def envelope_svg(bins, xlabel: str, ylabel: str, title: str) -> str:
    with plt.rc_context(SVG_STYLE):
        figure, axes = plt.subplots(figsize=(6, 4))
        edges = [edge for edge, _ in bins]
        values = [value for _, value in bins]
        axes.step(edges, values, where='post', color='tab:blue')
        axes.plot(edges, values, 'o', color='tab:blue', markersize=3)
        axes.set_xlabel(xlabel)
        axes.set_ylabel(ylabel)
        axes.set_title(title)
        buffer = io.StringIO()
        figure.savefig(buffer, format='svg', metadata={'Date': None})
        plt.close(figure)
    return buffer.getvalue()


def write_svg(path, text: str) -> None:
    with open(path, 'w', encoding='utf-8') as handle:
        handle.write(text)
