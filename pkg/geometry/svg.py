"""SVG figures of domain outlines, geodesics and markers."""

import io
import math
from typing import Iterable, Optional, Sequence

import matplotlib

matplotlib.use('Agg')

import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Arc as ArcPatch  # noqa: E402

from geometry.domain import Domain  # noqa: E402
from geometry.paths import PolyPath  # noqa: E402
from geometry.primitives import (  # noqa: E402
    ArcElement,
    LineElement,
    Point,
    PunctureElement,
    SegmentElement,
)


SVG_STYLE = {
    'svg.hashsalt': 'qhgeo',
    'svg.fonttype': 'none',
}


def drawBoundary(axes, domain: Domain, color: str = 'black'):
    for element in domain.boundary:
        if isinstance(element, SegmentElement):
            axes.plot([element.a.x, element.b.x], [element.a.y, element.b.y], color=color, linewidth=0.8)
        elif isinstance(element, ArcElement):
            startDegrees = math.degrees(element.start_angle)
            endDegrees = math.degrees(element.end_angle)
            if not element.ccw:
                startDegrees, endDegrees = endDegrees, startDegrees
            if element.sweep >= 2 * math.pi - 1e-12:
                startDegrees, endDegrees = 0.0, 360.0
            axes.add_patch(ArcPatch(
                element.center.asTuple(), 2 * element.radius, 2 * element.radius,
                theta1=startDegrees, theta2=endDegrees, color=color, linewidth=0.8,
            ))
        elif isinstance(element, LineElement):
            samples = element.samplePoints(domain.box.diagonal() / 4, domain.box)
            axes.plot(samples[:, 0], samples[:, 1], color=color, linewidth=0.8)
        elif isinstance(element, PunctureElement):
            axes.plot([element.point.x], [element.point.y], marker='x', color=color)


def render_domain_svg(domain: Domain,
                      paths: Iterable[PolyPath] = (),
                      markers: Sequence[Point] = (),
                      title: Optional[str] = None) -> str:
    with plt.rc_context(SVG_STYLE):
        figure, axes = plt.subplots(figsize=(6, 6))
        drawBoundary(axes, domain)
        for path in paths:
            vertices = path.asArray()
            axes.plot(vertices[:, 0], vertices[:, 1], color='tab:blue', linewidth=0.8)
        if markers:
            axes.plot([p.x for p in markers], [p.y for p in markers], 'o', color='tab:red', markersize=3)
        box = domain.box
        axes.set_xlim(box.xmin, box.xmax)
        axes.set_ylim(box.ymin, box.ymax)
        axes.set_aspect('equal')
        axes.set_title(title or domain.name)
        buffer = io.StringIO()
        figure.savefig(buffer, format='svg', metadata={'Date': None})
        plt.close(figure)
    return buffer.getvalue()


def write_domain_svg(path, domain: Domain, **kwargs) -> None:
    with open(path, 'w', encoding='utf-8') as handle:
        handle.write(render_domain_svg(domain, **kwargs))
