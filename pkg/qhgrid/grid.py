"""Quadtree discretization of a domain into a weighted graph.

Leaves of a quadtree over the domain box are graded so that the cell size
stays a fixed fraction of the boundary distance. Leaf corners that lie
Inside become nodes; every leaf contributes its sides and diagonals as
edges, and the 16-stencil adds knight moves across pairs of equal leaves.
Edge weights are the quasihyperbolic lengths of the edge segments.
"""

from __future__ import annotations

import csv
import heapq
import logging
import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from django.conf import settings
from scipy import sparse
from scipy.spatial import cKDTree

from geometry.domain import Domain, PointClass
from geometry.exceptions import (
    Disconnected,
    EmptyGrid,
    InvalidParams,
    PointNotInjected,
    PointNotInterior,
)
from geometry.paths import PolyPath
from geometry.primitives import Point, PunctureElement
from qhgrid.quadrature import edge_weights, segment_qh_lengths

logger = logging.getLogger(__name__)

MAX_DEPTH = 20
MAX_BASE_CELLS = 1024
KEY_STRIDE = 1 << 31
INJECTION_ATTEMPTS = 6
HALF_DIAGONAL = math.sqrt(0.5)

# region(centers, radii, clearances) -> mask of cells worth refining
Region = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


def everywhere(centers: np.ndarray, radii: np.ndarray, clearances: np.ndarray) -> np.ndarray:
    return np.ones(len(centers), dtype=bool)


@dataclass(frozen=True)
class Grading:
    rho: float
    floor: float
    region: Region = everywhere

    def wantsSplit(self, centers, sizes, radii, clearances) -> np.ndarray:
        return (sizes > self.rho * np.maximum(clearances, self.floor)) & self.region(centers, radii, clearances)


@dataclass(frozen=True, eq=False)
class QhGrid:
    domain: Domain
    pitch: float
    stencil: int
    origin: Tuple[float, float]
    leafLevels: np.ndarray
    leafCols: np.ndarray
    leafRows: np.ndarray
    nodes: np.ndarray
    deltas: np.ndarray
    cellSizes: np.ndarray
    edges: np.ndarray
    weights: np.ndarray
    injected: Tuple[Point, ...] = ()
    level: int = 0
    floor: float = 0.0

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def nodePoint(self, index: int) -> Point:
        return Point(float(self.nodes[index, 0]), float(self.nodes[index, 1]))

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=len(self.nodes))

    @cached_property
    def nodeIndex(self) -> Dict[Tuple[float, float], int]:
        return {(float(x), float(y)): index for index, (x, y) in enumerate(self.nodes)}

    def nodeId(self, p: Point) -> int:
        index = self.nodeIndex.get(p.asTuple())
        if index is None:
            raise PointNotInjected(f'{p} is not a node of the grid', point=list(p.asTuple()))
        return index

    @cached_property
    def tree(self) -> cKDTree:
        return cKDTree(self.nodes)

    @cached_property
    def adjacency(self) -> Tuple[List[int], List[int], List[float]]:
        count = len(self.nodes)
        # parallel edges keep their lightest weight
        pairs = np.sort(self.edges, axis=1)
        order = np.lexsort((self.weights, pairs[:, 1], pairs[:, 0]))
        pairs, weights = pairs[order], self.weights[order]
        first = np.ones(len(pairs), dtype=bool)
        first[1:] = (pairs[1:] != pairs[:-1]).any(axis=1)
        pairs, weights = pairs[first], weights[first]
        rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
        cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
        data = np.concatenate([weights, weights])
        matrix = sparse.csr_matrix((data, (rows, cols)), shape=(count, count))
        matrix.sort_indices()
        return matrix.indptr.tolist(), matrix.indices.tolist(), matrix.data.tolist()

    def leafCount(self) -> int:
        return len(self.leafLevels)


# ---------------------------------------------------------------------------
# quadtree leaves
# ---------------------------------------------------------------------------

def leafGeometry(pitch, origin, levels, cols, rows):
    sizes = pitch / np.power(2.0, levels)
    centers = np.column_stack([
        origin[0] + (cols + 0.5) * sizes,
        origin[1] + (rows + 0.5) * sizes,
    ])
    return sizes, centers


def outsideTruncation(domain: Domain, centers: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    box = domain.box
    half = 0.5 * sizes
    disjoint = ((centers[:, 0] - half > box.xmax) | (centers[:, 0] + half < box.xmin)
                | (centers[:, 1] - half > box.ymax) | (centers[:, 1] + half < box.ymin))
    if domain.inner_radius > 0:
        for element in domain.boundary:
            if isinstance(element, PunctureElement):
                reach = element.distances(centers) + HALF_DIAGONAL * sizes
                disjoint |= reach < domain.inner_radius
    return disjoint


def splitLeaves(domain: Domain, pitch: float, origin, levels, cols, rows, grading: Grading):
    """Split leaves until ``grading`` is satisfied, dropping cells that lie
    entirely outside the domain or its truncation."""
    finalLevels, finalCols, finalRows = [], [], []
    while len(levels):
        sizes, centers = leafGeometry(pitch, origin, levels, cols, rows)
        radii = HALF_DIAGONAL * sizes
        clearances = domain.chainDistance(centers)
        outside = (~domain.memberMask(centers) & (clearances > radii)) | outsideTruncation(domain, centers, sizes)
        keep = ~outside
        levels, cols, rows = levels[keep], cols[keep], rows[keep]
        sizes, centers = sizes[keep], centers[keep]
        radii, clearances = radii[keep], clearances[keep]

        split = (levels < MAX_DEPTH - 1) & grading.wantsSplit(centers, sizes, radii, clearances)
        finalLevels.append(levels[~split])
        finalCols.append(cols[~split])
        finalRows.append(rows[~split])

        levels = np.repeat(levels[split] + 1, 4)
        cols = (2 * np.repeat(cols[split], 4)) + np.tile([0, 1, 0, 1], int(split.sum()))
        rows = (2 * np.repeat(rows[split], 4)) + np.tile([0, 0, 1, 1], int(split.sum()))
    if not finalLevels:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty
    return (np.concatenate(finalLevels).astype(np.int64),
            np.concatenate(finalCols).astype(np.int64),
            np.concatenate(finalRows).astype(np.int64))


# ---------------------------------------------------------------------------
# graph assembly
# ---------------------------------------------------------------------------

def cornerKey(columns, rows):
    return columns * KEY_STRIDE + rows


def leafEdgeCandidates(levels, cols, rows, stencil, knownKeys):
    """Corner-key pairs of every candidate edge."""
    span = np.left_shift(np.int64(1), MAX_DEPTH - levels)
    half = span // 2
    left = cols * span
    bottom = rows * span
    c00 = cornerKey(left, bottom)
    c10 = cornerKey(left + span, bottom)
    c01 = cornerKey(left, bottom + span)
    c11 = cornerKey(left + span, bottom + span)

    pairs = []
    sides = [
        (c00, c10, cornerKey(left + half, bottom)),
        (c01, c11, cornerKey(left + half, bottom + span)),
        (c00, c01, cornerKey(left, bottom + half)),
        (c10, c11, cornerKey(left + span, bottom + half)),
    ]
    for first, second, middle in sides:
        whole = ~np.isin(middle, knownKeys)
        pairs.append(np.column_stack([first[whole], second[whole]]))
    pairs.append(np.column_stack([c00, c11]))
    pairs.append(np.column_stack([c10, c01]))

    if stencil == 16:
        # a leaf is identified by its lower-left node and its level
        leafCodes = np.searchsorted(knownKeys, c00) * 32 + levels
        rightPair = np.isin(np.searchsorted(knownKeys, c10) * 32 + levels, leafCodes)
        topPair = np.isin(np.searchsorted(knownKeys, c01) * 32 + levels, leafCodes)
        r = rightPair
        pairs.append(np.column_stack([c00[r], cornerKey(left[r] + 2 * span[r], bottom[r] + span[r])]))
        pairs.append(np.column_stack([c01[r], cornerKey(left[r] + 2 * span[r], bottom[r])]))
        t = topPair
        pairs.append(np.column_stack([c00[t], cornerKey(left[t] + span[t], bottom[t] + 2 * span[t])]))
        pairs.append(np.column_stack([c10[t], cornerKey(left[t], bottom[t] + 2 * span[t])]))
    return np.vstack(pairs)


def assembleGrid(domain: Domain, pitch: float, stencil: int, origin, levels, cols, rows,
                 level: int = 0, floor: float = 0.0, injected: Sequence[Point] = ()) -> QhGrid:
    if len(levels) == 0:
        raise EmptyGrid(f'no cell of {domain.name} survives discretization', pitch=pitch)
    sizes = pitch / np.power(2.0, levels)
    span = np.left_shift(np.int64(1), MAX_DEPTH - levels)
    cornerKeys = np.concatenate([
        cornerKey(cols * span, rows * span),
        cornerKey((cols + 1) * span, rows * span),
        cornerKey(cols * span, (rows + 1) * span),
        cornerKey((cols + 1) * span, (rows + 1) * span),
    ])
    knownKeys, inverse = np.unique(cornerKeys, return_inverse=True)
    unit = pitch / float(1 << MAX_DEPTH)
    coordinates = np.column_stack([
        origin[0] + (knownKeys // KEY_STRIDE) * unit,
        origin[1] + (knownKeys % KEY_STRIDE) * unit,
    ])
    valid = domain.insideMask(coordinates) & domain.truncationMask(coordinates)
    if not valid.any():
        raise EmptyGrid(f'no interior node found in {domain.name}', pitch=pitch)

    touching = np.full(len(knownKeys), np.inf)
    np.minimum.at(touching, inverse, np.tile(sizes, 4))

    candidates = leafEdgeCandidates(levels, cols, rows, stencil, knownKeys)
    endpoints = np.searchsorted(knownKeys, candidates)
    endpoints = endpoints[valid[endpoints[:, 0]] & valid[endpoints[:, 1]]]
    endpoints = np.sort(endpoints, axis=1)
    endpoints = endpoints[endpoints[:, 0] != endpoints[:, 1]]
    endpoints = np.unique(endpoints, axis=0)

    renumber = np.cumsum(valid) - 1
    nodes = coordinates[valid]
    edges = renumber[endpoints]
    visible = domain.segmentInsideMask(nodes[edges[:, 0]], nodes[edges[:, 1]])
    edges = edges[visible]
    deltas = domain.chainDistance(nodes)
    largest = np.maximum(deltas[edges[:, 0]], deltas[edges[:, 1]])
    weights = edge_weights(domain, nodes[edges[:, 0]], nodes[edges[:, 1]], largest)

    grid = QhGrid(
        domain=domain,
        pitch=pitch,
        stencil=stencil,
        origin=(float(origin[0]), float(origin[1])),
        leafLevels=levels,
        leafCols=cols,
        leafRows=rows,
        nodes=nodes,
        deltas=deltas,
        cellSizes=touching[valid],
        edges=edges.astype(np.int64).reshape(-1, 2),
        weights=weights,
        level=level,
        floor=floor,
    )
    logger.debug('grid of %s at level %d: %d leaves, %d nodes, %d edges',
                 domain.name, level, len(levels), grid.node_count, grid.edge_count)
    if injected:
        grid = inject_points(grid, injected)
    return grid


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def build_grid(d: Domain, pitch: float, stencil: Optional[int] = None,
               floor: Optional[float] = None) -> QhGrid:
    """Graded quadtree grid with base spacing ``pitch``.

    Cells are split while larger than GRADING times the boundary distance of
    their center, never below GRADING * ``floor`` (default pitch/4).
    """
    stencil = int(stencil or settings.QHGEO['STENCIL'])
    if stencil not in (8, 16):
        raise InvalidParams('stencil must be 8 or 16', stencil=stencil)
    if not (pitch > 0 and math.isfinite(pitch)):
        raise InvalidParams('pitch must be positive', pitch=pitch)
    box = d.box
    columns = int(math.ceil((box.xmax - box.xmin) / pitch))
    rowCount = int(math.ceil((box.ymax - box.ymin) / pitch))
    if max(columns, rowCount) > MAX_BASE_CELLS:
        raise InvalidParams('pitch too small for the domain box', pitch=pitch,
                            cells=max(columns, rowCount))
    floor = pitch / 4.0 if floor is None else floor
    origin = (box.xmin, box.ymin)
    gridCols, gridRows = np.meshgrid(np.arange(columns, dtype=np.int64), np.arange(rowCount, dtype=np.int64))
    levels = np.zeros(gridCols.size, dtype=np.int64)
    grading = Grading(rho=settings.QHGEO['GRADING'], floor=floor)
    levels, cols, rows = splitLeaves(d, pitch, origin, levels, gridCols.ravel(), gridRows.ravel(), grading)
    return assembleGrid(d, pitch, stencil, origin, levels, cols, rows, level=0, floor=floor)


def refine_grid(g: QhGrid, region: Region, rho: float, floor: float, level: int) -> QhGrid:
    """Split the leaves of ``g`` inside ``region`` further; nodes of ``g``
    remain nodes of the result."""
    grading = Grading(rho=rho, floor=floor, region=region)
    levels, cols, rows = splitLeaves(g.domain, g.pitch, g.origin, g.leafLevels, g.leafCols, g.leafRows, grading)
    return assembleGrid(g.domain, g.pitch, g.stencil, g.origin, levels, cols, rows,
                        level=level, floor=floor, injected=g.injected)


def inject_points(g: QhGrid, pts: Iterable[Point]) -> QhGrid:
    """Add query points as nodes joined to every visible node within twice
    the local cell size, widening the search when nothing is visible."""
    domain = g.domain
    fresh: List[Point] = []
    for p in pts:
        if domain.classify(p) is not PointClass.INSIDE:
            raise PointNotInterior(f'{p} is not inside {domain.name}', point=list(p.asTuple()))
        if p.asTuple() in g.nodeIndex or p in fresh:
            continue
        fresh.append(p)
    if not fresh:
        return g

    base = len(g.nodes)
    newNodes = np.array([p.asTuple() for p in fresh], dtype=float)
    allNodes = np.vstack([g.nodes, newNodes])
    allSizes = np.concatenate([g.cellSizes, np.zeros(len(fresh))])
    starts: List[int] = []
    ends: List[int] = []
    for offset, p in enumerate(fresh):
        _, nearest = g.tree.query(p.asTuple())
        localSize = float(g.cellSizes[nearest])
        allSizes[base + offset] = localSize
        radius = 2.0 * localSize
        for _ in range(INJECTION_ATTEMPTS):
            candidates = g.tree.query_ball_point(p.asTuple(), radius)
            partners = [base + other for other in range(len(fresh))
                        if other != offset and fresh[other].distanceTo(p) <= radius]
            candidates = sorted(candidates) + partners
            if candidates:
                targets = allNodes[candidates]
                visible = domain.segmentInsideMask(np.repeat(newNodes[offset:offset + 1], len(targets), axis=0), targets)
                linked = [index for index, ok in zip(candidates, visible) if ok]
                if linked:
                    starts.extend([base + offset] * len(linked))
                    ends.extend(linked)
                    break
            radius *= 2.0
        else:
            raise PointNotInjected(f'no visible grid node near {p}', point=list(p.asTuple()))

    pairs = np.sort(np.column_stack([starts, ends]).astype(np.int64), axis=1)
    pairs = np.unique(pairs, axis=0)
    allDeltas = np.concatenate([g.deltas, domain.chainDistance(newNodes)])
    largest = np.maximum(allDeltas[pairs[:, 0]], allDeltas[pairs[:, 1]])
    weights = edge_weights(domain, allNodes[pairs[:, 0]], allNodes[pairs[:, 1]], largest)
    return replace(
        g,
        nodes=allNodes,
        deltas=allDeltas,
        cellSizes=allSizes,
        edges=np.vstack([g.edges, pairs]),
        weights=np.concatenate([g.weights, weights]),
        injected=tuple(g.injected) + tuple(fresh),
    )


def carry_path(g: QhGrid, path: PolyPath) -> QhGrid:
    """Add ``path`` to ``g`` as a chain of edges weighted by the quadrature
    length of each segment. The shortest path between its ends in the result
    is never longer than ``path``."""
    if path.is_degenerate:
        return g
    index = dict(g.nodeIndex)
    fresh: List[Tuple[float, float]] = []
    chain: List[int] = []
    for vertex in path.vertices:
        key = vertex.asTuple()
        if key not in index:
            index[key] = len(g.nodes) + len(fresh)
            fresh.append(key)
        chain.append(index[key])
    pairs = np.sort(np.column_stack([chain[:-1], chain[1:]]).astype(np.int64), axis=1)
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    newNodes = np.array(fresh, dtype=float).reshape(-1, 2)
    allNodes = np.vstack([g.nodes, newNodes])
    newSizes, newDeltas = np.zeros(0), np.zeros(0)
    if len(newNodes):
        _, nearest = g.tree.query(newNodes)
        newSizes = g.cellSizes[np.atleast_1d(nearest)]
        newDeltas = g.domain.chainDistance(newNodes)
    weights = segment_qh_lengths(g.domain, allNodes[pairs[:, 0]], allNodes[pairs[:, 1]])
    return replace(
        g,
        nodes=allNodes,
        deltas=np.concatenate([g.deltas, newDeltas]),
        cellSizes=np.concatenate([g.cellSizes, newSizes]),
        edges=np.vstack([g.edges, pairs]),
        weights=np.concatenate([g.weights, weights]),
    )


def shortest_path(g: QhGrid, x: Point, y: Point) -> Tuple[float, PolyPath]:
    """Dijkstra from ``x`` to ``y`` with ties broken on (weight, hops, node id)."""
    source = g.nodeId(x)
    target = g.nodeId(y)
    if source == target:
        return 0.0, PolyPath.degenerate(x)

    indptr, indices, data = g.adjacency
    count = len(g.nodes)
    distance = [math.inf] * count
    hops = [0] * count
    previous = [-1] * count
    previousWeight = [0.0] * count
    finished = [False] * count
    distance[source] = 0.0
    heap = [(0.0, 0, source)]
    while heap:
        weight, steps, node = heapq.heappop(heap)
        if finished[node]:
            continue
        finished[node] = True
        if node == target:
            break
        for position in range(indptr[node], indptr[node + 1]):
            neighbor = indices[position]
            if finished[neighbor]:
                continue
            candidate = weight + data[position]
            if candidate < distance[neighbor] or (candidate == distance[neighbor] and steps + 1 < hops[neighbor]):
                distance[neighbor] = candidate
                hops[neighbor] = steps + 1
                previous[neighbor] = node
                previousWeight[neighbor] = data[position]
                heapq.heappush(heap, (candidate, steps + 1, neighbor))

    if not finished[target]:
        raise Disconnected(f'{x} and {y} are not connected in the grid of {g.domain.name}',
                           x=list(x.asTuple()), y=list(y.asTuple()))
    chain = [target]
    pieces = []
    while chain[-1] != source:
        pieces.append(previousWeight[chain[-1]])
        chain.append(previous[chain[-1]])
    chain.reverse()
    return math.fsum(pieces), PolyPath(tuple(g.nodePoint(index) for index in chain))


def dump_grid_csv(g: QhGrid, node_path, edge_path) -> None:
    with open(node_path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle)
        writer.writerow(['node_id', 'x', 'y', 'delta'])
        for index, ((x, y), delta) in enumerate(zip(g.nodes.tolist(), g.deltas.tolist())):
            writer.writerow([index, repr(x), repr(y), repr(delta)])
    with open(edge_path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle)
        writer.writerow(['source', 'target', 'weight'])
        for (first, second), weight in zip(g.edges.tolist(), g.weights.tolist()):
            writer.writerow([first, second, repr(weight)])
