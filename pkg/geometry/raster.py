"""Brute-force boundary distance on a pixel raster, used to cross-check delta."""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from geometry.domain import Domain


@dataclass(frozen=True)
class RasterDistance:
    xs: np.ndarray
    ys: np.ndarray
    pitch: float
    values: np.ndarray

    def lookup(self, points: np.ndarray) -> np.ndarray:
        columns = np.clip(np.rint((points[:, 0] - self.xs[0]) / self.pitch).astype(int), 0, len(self.xs) - 1)
        rows = np.clip(np.rint((points[:, 1] - self.ys[0]) / self.pitch).astype(int), 0, len(self.ys) - 1)
        return self.values[rows, columns]

    def pixelCenters(self) -> np.ndarray:
        gridX, gridY = np.meshgrid(self.xs, self.ys)
        return np.column_stack([gridX.ravel(), gridY.ravel()])


def raster_boundary_distance(domain: Domain, divisions: int = 256) -> RasterDistance:
    """Mark every pixel touched by the boundary chain and run an exact
    Euclidean distance transform from those pixels."""
    box = domain.box
    pitch = box.diagonal() / divisions
    xs = np.arange(box.xmin, box.xmax + 0.5 * pitch, pitch)
    ys = np.arange(box.ymin, box.ymax + 0.5 * pitch, pitch)
    free = np.ones((len(ys), len(xs)), dtype=bool)

    for element in domain.boundary:
        samples = element.samplePoints(0.25 * pitch, box)
        columns = np.rint((samples[:, 0] - xs[0]) / pitch).astype(int)
        rows = np.rint((samples[:, 1] - ys[0]) / pitch).astype(int)
        visible = (columns >= 0) & (columns < len(xs)) & (rows >= 0) & (rows < len(ys))
        free[rows[visible], columns[visible]] = False

    values = ndimage.distance_transform_edt(free, sampling=(pitch, pitch))
    return RasterDistance(xs=xs, ys=ys, pitch=pitch, values=values)
