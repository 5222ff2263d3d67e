import enum
import itertools
import logging

import numpy as np
from scipy import ndimage

logger = logging.getLogger(__name__)

# face (6-) adjacency
SIX_ADJACENCY = ndimage.generate_binary_structure(3, 1)


class VoxelFormat(enum.Enum):
    TEXT = 'text'
    RAW = 'raw'

    @staticmethod
    def from_arg(arg):
        try:
            return VoxelFormat(arg.lower())
        except ValueError:
            raise ValueError(f'Unknown voxel format "{arg}", expected "text" or "raw".')


class VoxelGrid:
    """
    Dense binary occupancy volume indexed [x, y, z]. Cells outside the bounds are background.
    The occupancy array is read-only, grids are immutable after construction.
    """
    def __init__(self, occupancy):
        occupancy = np.array(occupancy, dtype=bool, copy=True)
        if occupancy.ndim != 3:
            raise ValueError(f'Occupancy must be 3 dimensional, got {occupancy.ndim} dimensions.')
        if any(n < 1 for n in occupancy.shape):
            raise ValueError(f'Grid dimensions must be >= 1, got {occupancy.shape}.')
        occupancy.setflags(write=False)
        self._occupancy = occupancy

    @classmethod
    def empty(cls, nx, ny, nz):
        return cls(np.zeros((nx, ny, nz), dtype=bool))

    @classmethod
    def from_cells(cls, shape, cells):
        """
        :param shape: (nx, ny, nz)
        :param cells: iterable of occupied (x, y, z) coordinates
        """
        occupancy = np.zeros(shape, dtype=bool)
        for cell in cells:
            occupancy[tuple(cell)] = True
        return cls(occupancy)

    @property
    def occupancy(self):
        return self._occupancy

    @property
    def shape(self):
        return self._occupancy.shape

    @property
    def nx(self):
        return self._occupancy.shape[0]

    @property
    def ny(self):
        return self._occupancy.shape[1]

    @property
    def nz(self):
        return self._occupancy.shape[2]

    @property
    def size(self):
        return self._occupancy.size

    def occupied_count(self):
        return int(np.count_nonzero(self._occupancy))

    def is_occupied(self, x, y, z):
        if 0 <= x < self.nx and 0 <= y < self.ny and 0 <= z < self.nz:
            return bool(self._occupancy[x, y, z])
        return False

    def padded(self, width=1):
        """
        :returns occupancy with an explicit background border of the given width
        """
        return np.pad(self._occupancy, width, mode='constant', constant_values=False)

    def serial_bits(self):
        """
        :returns flat occupancy with x varying fastest, then y, then z
        """
        return self._occupancy.ravel(order='F')

    @classmethod
    def from_serial_bits(cls, bits, nx, ny, nz):
        return cls(np.asarray(bits, dtype=bool).reshape((nx, ny, nz), order='F'))

    def transformed(self, permutation=(0, 1, 2), flips=(False, False, False)):
        """
        Applies one of the 48 axis-aligned symmetries of the cube grid.
        :param permutation: new axis i is old axis permutation[i]
        :param flips: reverse new axis i
        """
        occupancy = np.transpose(self._occupancy, permutation)
        for axis, flip in enumerate(flips):
            if flip:
                occupancy = np.flip(occupancy, axis=axis)
        return VoxelGrid(occupancy)

    def __eq__(self, other):
        if not isinstance(other, VoxelGrid):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self._occupancy, other._occupancy)

    def __hash__(self):
        return hash((self.shape, self._occupancy.tobytes()))

    def __repr__(self):
        return f'VoxelGrid({self.nx}x{self.ny}x{self.nz}, occupied={self.occupied_count()})'


def grid_symmetries():
    """
    :returns the 48 (permutation, flips) pairs of the cube symmetry group
    """
    return [(perm, flips)
            for perm in itertools.permutations(range(3))
            for flips in itertools.product((False, True), repeat=3)]


class GridStats:
    def __init__(self, occupied_count, component_count_6adj):
        self.occupied_count = occupied_count
        self.component_count_6adj = component_count_6adj

    def as_tuple(self):
        return self.occupied_count, self.component_count_6adj

    def __eq__(self, other):
        if isinstance(other, tuple):
            return self.as_tuple() == other
        if not isinstance(other, GridStats):
            return NotImplemented
        return self.as_tuple() == other.as_tuple()

    def __repr__(self):
        return f'GridStats(occupied_count={self.occupied_count}, component_count_6adj={self.component_count_6adj})'


def count_components(mask):
    """
    Number of 6-connected components of a boolean volume.
    """
    _, count = ndimage.label(mask, structure=SIX_ADJACENCY)
    return int(count)


def background_components(grid: VoxelGrid):
    """
    Number of 6-connected background components, the unbounded outside included.
    A one voxel border around the grid joins everything touching the bounds into the outside.
    """
    return count_components(~grid.padded())


def grid_stats(grid: VoxelGrid):
    stats = GridStats(grid.occupied_count(), count_components(grid.occupancy))
    if stats.component_count_6adj > 1:
        logger.warning(f'Object has {stats.component_count_6adj} 6-connected components, '
                       f'single-surface statistics (genus, corner-count identity) do not apply to it as a whole')
    return stats
