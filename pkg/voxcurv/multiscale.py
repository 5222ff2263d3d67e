import enum
import logging
import math
from typing import Tuple

import numpy as np
from scipy import ndimage

from voxcurv import utils
from voxcurv.curvature import CurvatureField, GaussQ
from voxcurv.surface import VertexType

logger = logging.getLogger(__name__)


class MapKind(enum.Enum):
    GAUSS_SUM = 'gauss_sum'
    MEAN_ABS_SUM = 'mean_abs_sum'


# projection axis -> (plane name, retained axes)
PROJECTIONS = {
    'x': ('yz', (1, 2)),
    'y': ('zx', (2, 0)),
    'z': ('xy', (0, 1)),
}
VOLUME = 'volume'


class RegionSpec:
    """
    Axis aligned box of vertex coordinates, lower bounds inclusive and upper bounds exclusive.
    May reach beyond the grid.
    """
    def __init__(self, x0, y0, z0, x1, y1, z1):
        self.lower = (x0, y0, z0)
        self.upper = (x1, y1, z1)
        if not all(lo < hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError(f'Region needs lower < upper bound on every axis, got {self}')

    @staticmethod
    def covering(lattice_shape):
        return RegionSpec(0, 0, 0, *lattice_shape)

    def __eq__(self, other):
        if not isinstance(other, RegionSpec):
            return NotImplemented
        return (self.lower, self.upper) == (other.lower, other.upper)

    def __hash__(self):
        return hash((self.lower, self.upper))

    def __repr__(self):
        return f'RegionSpec({self.lower} .. {self.upper})'


class CurvatureVector:
    """
    Digital curvature vector f_S = (m3, m4, m5, m6) of a region. m4 counts flat and bent
    corners, m6 both saddle kinds; m4_bent and m6b keep the split.
    """
    def __init__(self, m3, m4, m5, m6, m4_bent=0, m6b=0):
        self.m3 = m3
        self.m4 = m4
        self.m5 = m5
        self.m6 = m6
        self.m4_bent = m4_bent
        self.m6b = m6b

    def as_tuple(self):
        return self.m3, self.m4, self.m5, self.m6

    def six_component(self):
        """
        :returns (m3, m4 flat, m4 bent, m5, m6a, m6b)
        """
        return self.m3, self.m4 - self.m4_bent, self.m4_bent, self.m5, self.m6 - self.m6b, self.m6b

    def __eq__(self, other):
        if not isinstance(other, CurvatureVector):
            return NotImplemented
        return self.six_component() == other.six_component()

    def __hash__(self):
        return hash(self.six_component())

    def __repr__(self):
        return f'CurvatureVector{self.six_component()}'


def region_vector(field: CurvatureField, region: RegionSpec):
    """
    Counts the corner types inside a region. Non-manifold corners are not part of the field.
    """
    inside = np.all((field.positions >= region.lower) & (field.positions < region.upper), axis=1)
    counts = np.bincount(field.types[inside], minlength=len(VertexType))

    def n(vertex_type):
        return int(counts[vertex_type.value])

    return CurvatureVector(m3=n(VertexType.M3),
                           m4=n(VertexType.M4_FLAT) + n(VertexType.M4_BENT),
                           m5=n(VertexType.M5),
                           m6=n(VertexType.M6A) + n(VertexType.M6B),
                           m4_bent=n(VertexType.M4_BENT),
                           m6b=n(VertexType.M6B))


def region_total(vector: CurvatureVector):
    """
    g_S = m3 K3 + m5 K5 + m6 K6, flat corners add nothing.
    """
    return GaussQ(vector.m3 - vector.m5 - 2 * vector.m6)


class ScaleMap:
    """
    2D or 3D grid of curvature aggregates at dyadic level k (one cell covers 2^k vertex columns per axis).
    Gauss sums are kept as exact integers in pi/2 units, `values` converts them to radians.
    """
    def __init__(self, level, plane, kind: MapKind, cells):
        self.level = level
        self.plane = plane
        self.kind = kind
        self.cells = cells

    @property
    def shape(self):
        return self.cells.shape

    @property
    def values(self):
        if self.kind == MapKind.GAUSS_SUM:
            return self.cells * (math.pi / 2)
        return self.cells

    def total(self):
        return float(self.values.sum())

    def exact_total(self):
        """
        :returns GaussQ sum of a gauss_sum map
        """
        if self.kind != MapKind.GAUSS_SUM:
            raise ValueError(f'Exact totals only exist for {MapKind.GAUSS_SUM.value} maps')
        return GaussQ(int(self.cells.sum()))

    def argmax(self):
        """
        :returns index of the largest value, the first one in row major order on ties
        """
        return tuple(int(i) for i in np.unravel_index(np.argmax(self.values), self.shape))

    def __repr__(self):
        return f'ScaleMap({self.kind.value}, level={self.level}, plane={self.plane}, shape={self.shape})'


def _retained(axis):
    try:
        return PROJECTIONS[axis]
    except KeyError:
        raise ValueError(f'Projection axis must be x, y or z, got "{axis}"')


def _accumulate(positions, axes, shape, weights):
    if len(positions) == 0:
        return np.zeros(shape, dtype=np.float64)
    flat = np.ravel_multi_index(tuple(positions[:, a] for a in axes), shape)
    return np.bincount(flat, weights=weights, minlength=int(np.prod(shape))).reshape(shape)


def _gauss_cells(field, axes, shape, threads):
    # integer partial sums, any chunking gives the same map
    chunks = utils.chunk_bounds(len(field), threads) if len(field) else [(0, 0)]

    def partial(bounds):
        start, stop = bounds
        sums = _accumulate(field.positions[start:stop], axes, shape, field.gauss[start:stop])
        return np.rint(sums).astype(np.int64)

    return sum(utils.parallel_map(partial, chunks, threads))


def gauss_projection_map(field: CurvatureField, axis, threads=1):
    """
    Level 0 map of Gaussian curvature summed over every surface corner of each column along `axis`.
    All corners of the column count, not only the visible front, so totals are conserved.
    """
    plane, axes = _retained(axis)
    shape = tuple(field.lattice_shape[a] for a in axes)
    return ScaleMap(0, plane, MapKind.GAUSS_SUM, _gauss_cells(field, axes, shape, threads))


def gauss_volume_map(field: CurvatureField, threads=1):
    """
    Level 0 3D map with the Gaussian curvature of each corner at its position.
    """
    return ScaleMap(0, VOLUME, MapKind.GAUSS_SUM, _gauss_cells(field, (0, 1, 2), field.lattice_shape, threads))


def _block_sum(cells, factor=2):
    """
    Sums factor^d blocks anchored at index 0, ragged blocks at the upper ends sum what exists.
    """
    padded = np.pad(cells, [(0, (-n) % factor) for n in cells.shape])
    blocked_shape = []
    for n in padded.shape:
        blocked_shape += [n // factor, factor]
    return padded.reshape(blocked_shape).sum(axis=tuple(range(1, 2 * cells.ndim, 2)))


def max_level(shape):
    """
    :returns number of halvings until every axis is a single cell
    """
    return max(math.ceil(math.log2(n)) if n > 1 else 0 for n in shape)


def pyramid(base: ScaleMap, levels):
    """
    All levels base.level .. base.level + levels - 1, each level summing 2 x 2 (x 2) children of the
    previous one. Keeping every level costs O(n) space and about 2n additions.

    :param levels: number of maps to return, clamped to the level where the map is a single cell
    """
    if levels < 1:
        raise ValueError(f'Pyramid needs at least 1 level, got {levels}')
    available = max_level(base.shape) + 1
    if levels > available:
        logger.warning(f'{levels} levels requested, map of shape {base.shape} is a single cell after '
                       f'{available - 1} halvings, clamped to {available}')
        levels = available

    maps = [base]
    for _ in range(levels - 1):
        previous = maps[-1]
        maps.append(ScaleMap(previous.level + 1, previous.plane, previous.kind, _block_sum(previous.cells)))
    return maps


def mean_abs_map(field: CurvatureField, axis, block=2):
    """
    |H| summed over each column along `axis`, then over block x block columns.
    :param block: power of two, 2 and 4 give the usual 2x2 and 4x4 summations
    """
    if block < 1 or block & (block - 1):
        raise ValueError(f'Block size must be a power of two, got {block}')
    plane, axes = _retained(axis)
    shape = tuple(field.lattice_shape[a] for a in axes)
    base = ScaleMap(0, plane, MapKind.MEAN_ABS_SUM, _accumulate(field.positions, axes, shape, np.abs(field.mean)))
    level = int(math.log2(block))
    cells = base.cells
    for _ in range(level):
        cells = _block_sum(cells)
    return ScaleMap(level, plane, MapKind.MEAN_ABS_SUM, cells)


class InterestRegion:
    """
    Connected cells of a map whose |value| reaches a threshold. Bounds are inclusive-exclusive cell indices.
    """
    def __init__(self, lower: Tuple[int, ...], upper: Tuple[int, ...], total, cell_count, peak: Tuple[int, ...]):
        self.lower = lower
        self.upper = upper
        self.total = total
        self.cell_count = cell_count
        self.peak = peak

    def __repr__(self):
        return f'InterestRegion({self.lower} .. {self.upper}, total={self.total:.6f}, cells={self.cell_count})'


def interest_regions(scale_map: ScaleMap, threshold):
    """
    Face connected components (4-adjacency in 2D, 6 in 3D) of cells with |value| >= threshold,
    sorted by descending |total|, ties by lower bound.
    """
    if threshold < 0:
        raise ValueError(f'Threshold must be >= 0, got {threshold}')
    values = scale_map.values
    mask = np.abs(values) >= threshold
    structure = ndimage.generate_binary_structure(values.ndim, 1)
    labels, count = ndimage.label(mask, structure=structure)

    regions = []
    for label, slices in enumerate(ndimage.find_objects(labels), start=1):
        member = labels[slices] == label
        window = values[slices]
        local_peak = np.unravel_index(np.argmax(np.where(member, np.abs(window), -np.inf)), window.shape)
        regions.append(InterestRegion(
            lower=tuple(s.start for s in slices),
            upper=tuple(s.stop for s in slices),
            total=float(window[member].sum()),
            cell_count=int(member.sum()),
            peak=tuple(int(s.start + i) for s, i in zip(slices, local_peak)),
        ))
    regions.sort(key=lambda region: (-abs(region.total), region.lower))
    logger.debug(f'{len(regions)} interest regions at threshold {threshold} in {scale_map!r}')
    return regions
