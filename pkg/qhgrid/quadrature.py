"""Composite Gauss-Legendre quadrature of the density 1/delta along segments.

Explicit path lengths use the quadrature directly. Grid edges use it too but
never drop below length / max endpoint delta, so a graph path weighs at least
as much as the polygon it describes.
"""

import math
from functools import lru_cache
from typing import Tuple

import numpy as np
from django.conf import settings

from geometry.domain import Domain
from geometry.primitives import as_points_array

MAX_SUBDIVISIONS = 512


@lru_cache(maxsize=16)
def gaussRule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return (nodes + 1.0) / 2.0, weights / 2.0


def subdivisionCounts(lengths: np.ndarray, clearances: np.ndarray, grading: float) -> np.ndarray:
    """Pieces per segment so that each piece is at most ``grading`` times the
    smallest endpoint or midpoint clearance."""
    safe = np.maximum(clearances, np.finfo(float).tiny)
    counts = np.ceil(lengths / (grading * safe))
    return np.clip(counts, 1, MAX_SUBDIVISIONS).astype(np.int64)


def segment_qh_lengths(domain: Domain, starts, ends, quad_pts: int = None) -> np.ndarray:
    """Quasihyperbolic length of every segment ``starts[i] -> ends[i]``.

    Callers are responsible for containment; the density is evaluated
    against the boundary chain only.
    """
    starts = as_points_array(starts)
    ends = as_points_array(ends)
    if len(starts) == 0:
        return np.zeros(0)
    order = int(quad_pts or settings.QHGEO['QUAD_POINTS'])
    fractions, weights = gaussRule(order)

    offsets = ends - starts
    lengths = np.hypot(offsets[:, 0], offsets[:, 1])
    checkpoints = np.vstack([starts, ends, 0.5 * (starts + ends)])
    clearances = domain.chainDistance(checkpoints).reshape(3, -1).min(axis=0)
    counts = subdivisionCounts(lengths, clearances, settings.QHGEO['GRADING'])

    owner = np.repeat(np.arange(len(starts)), counts)
    firstPiece = np.cumsum(counts) - counts
    piece = np.arange(counts.sum()) - np.repeat(firstPiece, counts)
    pieceCount = counts[owner]

    # parameter of every quadrature node along its segment, shape (pieces, order)
    along = (piece[:, None] + fractions[None, :]) / pieceCount[:, None]
    points = starts[owner][:, :, None] + along[:, None, :] * offsets[owner][:, :, None]
    points = points.transpose(0, 2, 1).reshape(-1, 2)
    density = 1.0 / np.maximum(domain.chainDistance(points), np.finfo(float).tiny)
    pieceSums = density.reshape(-1, order) @ weights
    pieceSums *= lengths[owner] / pieceCount
    return np.bincount(owner, weights=pieceSums, minlength=len(starts))


def polyline_qh_length(domain: Domain, vertices: np.ndarray, quad_pts: int = None) -> float:
    vertices = as_points_array(vertices)
    if len(vertices) < 2:
        return 0.0
    pieces = segment_qh_lengths(domain, vertices[:-1], vertices[1:], quad_pts)
    return math.fsum(pieces.tolist())


def edge_weights(domain: Domain, starts, ends, largest: np.ndarray = None, quad_pts: int = None) -> np.ndarray:
    """Grid edge weights: the quadrature length, raised where needed to
    length / max(delta(a), delta(b)). ``largest`` holds that max when the
    caller already knows the endpoint distances."""
    starts = as_points_array(starts)
    ends = as_points_array(ends)
    if len(starts) == 0:
        return np.zeros(0)
    lengths = np.hypot(ends[:, 0] - starts[:, 0], ends[:, 1] - starts[:, 1])
    if largest is None:
        largest = np.maximum(domain.chainDistance(starts), domain.chainDistance(ends))
    return np.maximum(segment_qh_lengths(domain, starts, ends, quad_pts), lengths / largest)
