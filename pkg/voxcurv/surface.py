import enum
import logging
from typing import NamedTuple, Tuple

import numpy as np

from voxcurv import utils
from voxcurv.voxgrid import VoxelGrid, background_components, count_components

logger = logging.getLogger(__name__)


class VertexType(enum.Enum):
    M3 = 0
    M4_FLAT = 1
    M4_BENT = 2
    M5 = 3
    M6A = 4
    M6B = 5
    NON_MANIFOLD = 6
    NOT_ON_SURFACE = 7

    def label(self):
        """
        :returns name used in reports
        """
        return _LABELS[self]

    def face_count(self):
        """
        :returns number of incident boundary faces of manifold types, None otherwise
        """
        return _FACE_COUNTS.get(self)

    def is_manifold(self):
        return self in _FACE_COUNTS

    @staticmethod
    def from_label(label):
        for vertex_type, name in _LABELS.items():
            if name == label:
                return vertex_type
        raise ValueError(f'Unknown vertex type "{label}".')


_LABELS = {
    VertexType.M3: 'M3',
    VertexType.M4_FLAT: 'M4Flat',
    VertexType.M4_BENT: 'M4Bent',
    VertexType.M5: 'M5',
    VertexType.M6A: 'M6a',
    VertexType.M6B: 'M6b',
    VertexType.NON_MANIFOLD: 'NonManifold',
    VertexType.NOT_ON_SURFACE: 'NotOnSurface',
}

_FACE_COUNTS = {
    VertexType.M3: 3,
    VertexType.M4_FLAT: 4,
    VertexType.M4_BENT: 4,
    VertexType.M5: 5,
    VertexType.M6A: 6,
    VertexType.M6B: 6,
}

# types that can appear in a mesh, in report order
SURFACE_TYPES = (VertexType.M3, VertexType.M4_FLAT, VertexType.M4_BENT, VertexType.M5,
                 VertexType.M6A, VertexType.M6B, VertexType.NON_MANIFOLD)

POSITIVE = 1
NEGATIVE = -1
AXIS_NAMES = ('x', 'y', 'z')


class BoundaryFace(NamedTuple):
    """
    Unit square between an occupied cell and its empty neighbour across (axis, side).
    The outward normal points from the occupied cell to the empty one.
    """
    cell: Tuple[int, int, int]
    axis: int
    side: int

    def normal(self):
        normal = [0, 0, 0]
        normal[self.axis] = self.side
        return tuple(normal)

    def corners(self):
        """
        :returns the 4 grid corners of the square
        """
        plane = [c + (1 if self.side == POSITIVE and i == self.axis else 0) for i, c in enumerate(self.cell)]
        b, c = [i for i in range(3) if i != self.axis]
        corners = []
        for db, dc in ((0, 0), (1, 0), (1, 1), (0, 1)):
            corner = list(plane)
            corner[b] += db
            corner[c] += dc
            corners.append(tuple(corner))
        return corners


"""
Corner patterns: the 8 cells touching grid corner (x, y, z) have their min-corner in
{x-1, x} x {y-1, y} x {z-1, z}. Cell (x-1+dx, y-1+dy, z-1+dz) is bit dx | dy << 1 | dz << 2.

The 12 unit squares meeting at the corner separate the 12 pairs of cells that differ in one
offset bit. A square perpendicular to axis a between offsets c and c + e_a contains the two
half-edges leaving the corner along the other axes b, in direction bit_b(c) (0 = negative).
"""


def _offset(bit):
    return bit & 1, (bit >> 1) & 1, (bit >> 2) & 1


def _candidate_squares():
    """
    :returns list of (axis, low offset bit index, half-edges) for the 12 squares at a corner
    """
    squares = []
    for axis in range(3):
        for low in range(8):
            if utils.get_bit(low, axis):
                continue
            offset = _offset(low)
            half_edges = tuple((b, offset[b]) for b in range(3) if b != axis)
            squares.append((axis, low, half_edges))
    return squares


_SQUARES = _candidate_squares()


def pattern_faces(pattern):
    """
    Boundary faces present at a corner.
    :param pattern: 8 bit occupancy pattern
    :returns list of (axis, low offset bit index, low cell occupied) per boundary face
    """
    faces = []
    for axis, low, _ in _SQUARES:
        high = low | (1 << axis)
        low_occupied = utils.get_bit(pattern, low)
        if low_occupied != utils.get_bit(pattern, high):
            faces.append((axis, low, low_occupied))
    return faces


def _is_single_umbrella(pattern):
    """
    True if the boundary faces at the corner form exactly one closed cycle around it.
    Faces are linked through the half-edges they share, every used half-edge has to be
    shared by exactly 2 faces.
    """
    faces = [square for square in _SQUARES
             if utils.get_bit(pattern, square[1]) != utils.get_bit(pattern, square[1] | (1 << square[0]))]
    if not faces:
        return False

    incidence = {}
    for i, (_, _, half_edges) in enumerate(faces):
        for half_edge in half_edges:
            incidence.setdefault(half_edge, []).append(i)
    if any(len(users) != 2 for users in incidence.values()):
        return False

    seen = {0}
    stack = [0]
    while stack:
        i = stack.pop()
        for half_edge in faces[i][2]:
            for j in incidence[half_edge]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
    return len(seen) == len(faces)


def _is_tripod(pattern):
    """
    For 4 of 8 cells occupied: True if one cell is face adjacent to the 3 others.
    The only other tree on 4 cells of the 2x2x2 block is the staircase path.
    """
    occupied = [bit for bit in range(8) if utils.get_bit(pattern, bit)]
    for bit in occupied:
        neighbours = sum(1 for other in occupied if bin(bit ^ other).count('1') == 1)
        if neighbours == 3:
            return True
    return False


def _classify_pattern(pattern):
    faces = pattern_faces(pattern)
    if not faces:
        return VertexType.NOT_ON_SURFACE
    if not _is_single_umbrella(pattern):
        return VertexType.NON_MANIFOLD

    count = len(faces)
    axes = sorted(axis for axis, _, _ in faces)
    if count == 3:
        return VertexType.M3
    elif count == 4:
        if len(set(axes)) == 1:
            return VertexType.M4_FLAT
        elif axes[0] == axes[1] and axes[2] == axes[3]:
            return VertexType.M4_BENT
    elif count == 5:
        return VertexType.M5
    elif count == 6:
        if bin(pattern).count('1') == 4:
            return VertexType.M6B if _is_tripod(pattern) else VertexType.M6A
    raise RuntimeError(f'Unexpected single umbrella pattern {pattern:08b} with face axes {axes}')


def _build_table():
    table = np.array([_classify_pattern(pattern).value for pattern in range(256)], dtype=np.uint8)
    table.setflags(write=False)
    logger.debug(f'Built corner table, {np.count_nonzero(table == VertexType.NON_MANIFOLD.value)} '
                 f'non-manifold patterns')
    return table


# pattern -> VertexType value
CORNER_TABLE = _build_table()
_TYPES_BY_VALUE = {vertex_type.value: vertex_type for vertex_type in VertexType}


def classify_vertex(occupancy8):
    """
    :param occupancy8: occupancy pattern of the 8 cells around a corner in [0, 255]
    :returns VertexType, NOT_ON_SURFACE for corners without boundary faces
    """
    if not 0 <= occupancy8 <= 255:
        raise ValueError(f'Corner pattern must be in [0, 255], got {occupancy8}')
    return _TYPES_BY_VALUE[int(CORNER_TABLE[occupancy8])]


def permute_pattern(pattern, permutation=(0, 1, 2), flips=(False, False, False)):
    """
    Applies a cube symmetry to a corner pattern, with the same convention as VoxelGrid.transformed:
    new axis i is old axis permutation[i], reversed if flips[i].
    """
    result = 0
    for bit in range(8):
        if not utils.get_bit(pattern, bit):
            continue
        old = _offset(bit)
        new = [old[permutation[i]] ^ int(flips[i]) for i in range(3)]
        result |= 1 << (new[0] | new[1] << 1 | new[2] << 2)
    return result


class SurfaceVertex:
    def __init__(self, position, pattern, vertex_type: VertexType):
        self.position = tuple(int(p) for p in position)
        self.pattern = int(pattern)
        self.vertex_type = vertex_type

    @property
    def incident_faces(self):
        """
        :returns the boundary faces among the 12 unit squares meeting at this corner
        """
        x, y, z = self.position
        faces = []
        for axis, low, low_occupied in pattern_faces(self.pattern):
            dx, dy, dz = _offset(low)
            cell = [x - 1 + dx, y - 1 + dy, z - 1 + dz]
            if low_occupied:
                faces.append(BoundaryFace(tuple(cell), axis, POSITIVE))
            else:
                cell[axis] += 1
                faces.append(BoundaryFace(tuple(cell), axis, NEGATIVE))
        return faces

    def __repr__(self):
        return f'SurfaceVertex({self.position}, {self.vertex_type.label()})'


class NonManifoldError(ValueError):
    """
    Operation needs a closed 2-manifold surface. `report` lists the defects.
    """
    def __init__(self, report):
        super().__init__(f'Surface is not a closed 2-manifold: {report}')
        self.report = report


class SurfaceMesh:
    """
    Boundary quad surface of a voxel object with classified corners.

    faces:      int array (F, 5) of x, y, z, axis, side
    positions:  int array (V, 3) of corner coordinates
    patterns:   uint8 array (V,) of corner occupancy patterns
    types:      uint8 array (V,) of VertexType values
    """
    def __init__(self, grid_shape, faces, positions, patterns, types, edge_count, edge_defects,
                 object_components, background_components):
        self.grid_shape = tuple(grid_shape)
        self.faces = faces
        self.positions = positions
        self.patterns = patterns
        self.types = types
        self.edge_count = edge_count
        self.edge_defects = edge_defects
        self.object_components = object_components
        self.background_components = background_components
        self._counts = np.bincount(types, minlength=len(VertexType))

    @property
    def lattice_shape(self):
        """
        :returns number of grid corners per axis
        """
        return tuple(n + 1 for n in self.grid_shape)

    def face_count(self):
        return len(self.faces)

    def vertex_count(self):
        return len(self.positions)

    def count(self, vertex_type: VertexType):
        return int(self._counts[vertex_type.value])

    def counts(self):
        """
        :returns dict label -> count for every surface vertex type, in report order
        """
        return {vertex_type.label(): self.count(vertex_type) for vertex_type in SURFACE_TYPES}

    def count_tuple(self):
        """
        :returns (|M3|, |M4Flat|, |M4Bent|, |M5|, |M6|, |NonManifold|)
        """
        return (self.count(VertexType.M3), self.count(VertexType.M4_FLAT), self.count(VertexType.M4_BENT),
                self.count(VertexType.M5), self.count(VertexType.M6A) + self.count(VertexType.M6B),
                self.count(VertexType.NON_MANIFOLD))

    def nonmanifold_count(self):
        return self.count(VertexType.NON_MANIFOLD)

    def is_empty(self):
        return len(self.positions) == 0

    def is_manifold(self):
        return not self.edge_defects and self.nonmanifold_count() == 0

    @property
    def surface_components(self):
        """
        Number of closed boundary surfaces. On a manifold each surface separates one object
        component from one background component and the adjacency of components is a tree.
        Meaningless on non-manifold meshes.
        """
        if self.is_empty():
            return 0
        return self.object_components + self.background_components - 1

    def defect_report(self):
        nonmanifold = [tuple(int(c) for c in p)
                       for p in self.positions[self.types == VertexType.NON_MANIFOLD.value]]
        shown = ', '.join(str(p) for p in nonmanifold[:8])
        more = ' ...' if len(nonmanifold) > 8 else ''
        edges = ', '.join(f'{e[:3]}+{AXIS_NAMES[e[3]]}' for e in self.edge_defects[:8])
        more_edges = ' ...' if len(self.edge_defects) > 8 else ''
        return (f'{len(self.edge_defects)} edge defects [{edges}{more_edges}], '
                f'{len(nonmanifold)} non-manifold vertices [{shown}{more}]')

    def vertices(self):
        for position, pattern, value in zip(self.positions, self.patterns, self.types):
            yield SurfaceVertex(position, pattern, _TYPES_BY_VALUE[int(value)])

    def vertex(self, position):
        """
        :returns SurfaceVertex at a grid corner, None if the corner is not on the surface
        """
        matches = np.nonzero((self.positions == np.asarray(position)).all(axis=1))[0]
        if len(matches) == 0:
            return None
        i = matches[0]
        return SurfaceVertex(self.positions[i], self.patterns[i], _TYPES_BY_VALUE[int(self.types[i])])

    def boundary_faces(self):
        for x, y, z, axis, side in self.faces:
            yield BoundaryFace((int(x), int(y), int(z)), int(axis), int(side))

    def __repr__(self):
        return f'SurfaceMesh(faces={self.face_count()}, vertices={self.vertex_count()}, counts={self.counts()})'


def corner_patterns(padded, x_range=None):
    """
    :param padded: occupancy with a one cell background border, shape (nx+2, ny+2, nz+2)
    :param x_range: (start, stop) slice of corner x coordinates, all corners if None
    :returns uint8 patterns of the corners, shape (stop-start, ny+1, nz+1)
    """
    nx1, ny1, nz1 = (n - 1 for n in padded.shape)
    start, stop = x_range if x_range is not None else (0, nx1)
    patterns = np.zeros((stop - start, ny1, nz1), dtype=np.uint8)
    for bit in range(8):
        dx, dy, dz = _offset(bit)
        cells = padded[start + dx:stop + dx, dy:dy + ny1, dz:dz + nz1]
        patterns |= cells.astype(np.uint8) << bit
    return patterns


def _boundary_faces(padded):
    faces = []
    for axis in range(3):
        low = [slice(None)] * 3
        high = [slice(None)] * 3
        low[axis] = slice(None, -1)
        high[axis] = slice(1, None)
        a = padded[tuple(low)]
        b = padded[tuple(high)]
        for mask, side, shift in ((a & ~b, POSITIVE, 0), (~a & b, NEGATIVE, 1)):
            cells = np.argwhere(mask) - 1
            cells[:, axis] += shift
            block = np.empty((len(cells), 5), dtype=np.int64)
            block[:, :3] = cells
            block[:, 3] = axis
            block[:, 4] = side
            faces.append(block)
    return np.concatenate(faces)


def _edge_incidence(padded):
    """
    Counts boundary faces around every grid edge.
    :returns (number of edges with exactly 2 faces, list of (x, y, z, axis) edges with 4 faces)
    """
    manifold_edges = 0
    defects = []
    for axis in range(3):
        others = [i for i in range(3) if i != axis]
        q = np.moveaxis(padded, axis, -1)
        c00 = q[:-1, :-1, 1:-1]
        c10 = q[1:, :-1, 1:-1]
        c11 = q[1:, 1:, 1:-1]
        c01 = q[:-1, 1:, 1:-1]
        changes = ((c00 != c10).astype(np.uint8) + (c10 != c11) + (c11 != c01) + (c01 != c00))
        manifold_edges += int(np.count_nonzero(changes == 2))
        for u, v, t in np.argwhere(changes == 4):
            start = [0, 0, 0]
            start[others[0]] = int(u)
            start[others[1]] = int(v)
            start[axis] = int(t)
            defects.append((start[0], start[1], start[2], axis))
    return manifold_edges, defects


def extract_surface(grid: VoxelGrid, threads=1):
    """
    Boundary faces and classified corners of a voxel object. Cells outside the grid are
    background, so objects touching the bounds still get a closed surface.

    :param threads: worker count for corner classification, the result does not depend on it
    """
    padded = grid.padded()
    chunks = utils.chunk_bounds(grid.nx + 1, threads)

    def classify(bounds):
        patterns = corner_patterns(padded, bounds)
        types = CORNER_TABLE[patterns]
        on_surface = types != VertexType.NOT_ON_SURFACE.value
        positions = np.argwhere(on_surface)
        positions[:, 0] += bounds[0]
        return positions, patterns[on_surface], types[on_surface]

    results = utils.parallel_map(classify, chunks, threads)
    positions = np.concatenate([r[0] for r in results]).astype(np.int64)
    patterns = np.concatenate([r[1] for r in results])
    types = np.concatenate([r[2] for r in results])

    faces = _boundary_faces(padded)
    edge_count, edge_defects = _edge_incidence(padded)

    occupied = grid.occupied_count()
    mesh = SurfaceMesh(grid.shape, faces, positions, patterns, types, edge_count, edge_defects,
                       object_components=count_components(grid.occupancy) if occupied else 0,
                       background_components=background_components(grid) if occupied else 0)

    logger.debug(f'Extracted {mesh!r}')
    if not mesh.is_manifold():
        logger.warning(f'Surface has {mesh.nonmanifold_count()} non-manifold vertices and '
                       f'{len(edge_defects)} edge defects, they carry no curvature')
    return mesh


def euler_characteristic(mesh: SurfaceMesh):
    """
    V - E + F over corners, grid edges with 2 incident faces and boundary faces.
    Independent of the corner classification, used to cross check the genus.
    """
    if not mesh.is_manifold():
        raise NonManifoldError(mesh.defect_report())
    return mesh.vertex_count() - mesh.edge_count + mesh.face_count()
