import logging
import math

import numpy as np

from voxcurv.surface import (NonManifoldError, SurfaceMesh, VertexType, SURFACE_TYPES, euler_characteristic)

logger = logging.getLogger(__name__)


class ConsistencyError(RuntimeError):
    """
    Internal invariant broken, e.g. corner counts that do not give an integer genus.
    Only a misclassification can cause this, never user input.
    """
    pass


class TopologyPreconditionError(ValueError):
    pass


class GaussQ:
    """
    Exact digital Gaussian curvature K = quarter_pi_units * pi/2.
    """
    def __init__(self, quarter_pi_units: int):
        self.quarter_pi_units = quarter_pi_units

    @property
    def radians(self):
        return self.quarter_pi_units * math.pi / 2

    def __add__(self, other):
        if not isinstance(other, GaussQ):
            return NotImplemented
        return GaussQ(self.quarter_pi_units + other.quarter_pi_units)

    def __eq__(self, other):
        if not isinstance(other, GaussQ):
            return NotImplemented
        return self.quarter_pi_units == other.quarter_pi_units

    def __hash__(self):
        return hash(self.quarter_pi_units)

    def __repr__(self):
        return f'GaussQ({self.quarter_pi_units})'

    def __str__(self):
        return f'{self.quarter_pi_units} pi/2'


def principal_curvatures(mean, gauss_radians):
    """
    k1, k2 = H +- sqrt(H^2 - K)
    """
    root = math.sqrt(mean * mean - gauss_radians)
    return mean + root, mean - root


class CurvatureConstants:
    def __init__(self, gauss: GaussQ, mean, k1, k2):
        self.gauss = gauss
        self.mean = mean
        self.k1 = k1
        self.k2 = k2

    def __repr__(self):
        return f'CurvatureConstants(gauss={self.gauss}, mean={self.mean:.6f}, k1={self.k1:.6f}, k2={self.k2:.6f})'


def _constants(quarter_pi_units, mean):
    gauss = GaussQ(quarter_pi_units)
    k1, k2 = principal_curvatures(mean, gauss.radians)
    return CurvatureConstants(gauss, mean, k1, k2)


# Gaussian curvature is the angular defect 2pi - faces * pi/2, mean curvature the closed forms
# of the digital mean curvature normal over the corner's voronoi area faces/4
CURVATURES = {
    VertexType.M3: _constants(1, 4 / math.sqrt(3)),
    VertexType.M4_FLAT: _constants(0, 0.0),
    VertexType.M4_BENT: _constants(0, math.sqrt(2)),
    VertexType.M5: _constants(-1, 4 / 5),
    VertexType.M6A: _constants(-2, 0.0),
    VertexType.M6B: _constants(-2, 0.0),
}


def curvature_constants(vertex_type: VertexType):
    """
    :returns CurvatureConstants of a manifold vertex type
    """
    try:
        return CURVATURES[vertex_type]
    except KeyError:
        raise ValueError(f'{vertex_type.label()} vertices carry no curvature')


def _lookup(attribute, dtype):
    table = np.zeros(len(VertexType), dtype=dtype)
    for vertex_type, constants in CURVATURES.items():
        value = getattr(constants, attribute)
        table[vertex_type.value] = value.quarter_pi_units if isinstance(value, GaussQ) else value
    return table


_GAUSS = _lookup('gauss', np.int64)
_MEAN = _lookup('mean', np.float64)
_K1 = _lookup('k1', np.float64)
_K2 = _lookup('k2', np.float64)


class CurvatureField:
    """
    Curvatures of the manifold corners of a mesh. Non-manifold corners are left out and counted in `excluded`.

    positions:  int array (V, 3)
    types:      uint8 VertexType values
    gauss:      int64 quarter pi units
    mean, k1, k2: float64
    """
    def __init__(self, lattice_shape, positions, types, excluded):
        self.lattice_shape = tuple(lattice_shape)
        self.positions = positions
        self.types = types
        self.gauss = _GAUSS[types]
        self.mean = _MEAN[types]
        self.k1 = _K1[types]
        self.k2 = _K2[types]
        self.excluded = excluded

    def __len__(self):
        return len(self.positions)

    def count(self, vertex_type: VertexType):
        return int(np.count_nonzero(self.types == vertex_type.value))

    def records(self):
        """
        Yields (position, vertex type, GaussQ, mean, k1, k2) per vertex.
        """
        for i, position in enumerate(self.positions):
            vertex_type = next(t for t in SURFACE_TYPES if t.value == self.types[i])
            yield (tuple(int(p) for p in position), vertex_type, GaussQ(int(self.gauss[i])),
                   float(self.mean[i]), float(self.k1[i]), float(self.k2[i]))


def assign_curvatures(mesh: SurfaceMesh):
    manifold = mesh.types != VertexType.NON_MANIFOLD.value
    field = CurvatureField(mesh.lattice_shape, mesh.positions[manifold], mesh.types[manifold],
                           excluded=mesh.nonmanifold_count())
    if field.excluded:
        logger.info(f'{field.excluded} non-manifold vertices excluded from curvature sums')
    return field


def total_gaussian(field: CurvatureField):
    """
    Sum of the Gaussian curvature over the field, |M3| - |M5| - 2|M6| in pi/2 units.
    """
    return GaussQ(int(field.gauss.sum()))


def genus(mesh: SurfaceMesh):
    """
    g = 1 + (|M5| + 2|M6| - |M3|) / 8, for a single closed manifold surface.
    The result is cross checked against the Euler characteristic (2 - chi) / 2.
    """
    if not mesh.is_manifold():
        raise NonManifoldError(mesh.defect_report())
    if mesh.surface_components != 1:
        raise TopologyPreconditionError(f'Genus needs exactly one closed surface, '
                                        f'object has {mesh.surface_components}')

    m3 = mesh.count(VertexType.M3)
    m5 = mesh.count(VertexType.M5)
    m6 = mesh.count(VertexType.M6A) + mesh.count(VertexType.M6B)
    numerator = m5 + 2 * m6 - m3
    if numerator % 8 != 0:
        raise ConsistencyError(f'|M5| + 2|M6| - |M3| = {numerator} is not divisible by 8 '
                               f'(M3={m3}, M5={m5}, M6={m6})')
    g = 1 + numerator // 8

    chi = euler_characteristic(mesh)
    if 2 - chi != 2 * g:
        raise ConsistencyError(f'Genus {g} from corner counts disagrees with Euler characteristic {chi}')
    return g


def region_boundary_geodesic(region_total):
    """
    Total geodesic curvature of the boundary curve of a surface region, 2pi - g_S.
    The region has to be simply connected on the surface, which is not checked.

    :param region_total: GaussQ total Gaussian curvature of the region
    :returns radians
    """
    if not isinstance(region_total, GaussQ):
        region_total = GaussQ(int(region_total))
    return 2 * math.pi - region_total.radians
