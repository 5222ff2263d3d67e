import math

import numpy as np
import pytest
from conftest import MANIFOLD_FIXTURES

from voxcurv.curvature import (ConsistencyError, GaussQ, TopologyPreconditionError, assign_curvatures,
                               curvature_constants, genus, principal_curvatures, region_boundary_geodesic,
                               total_gaussian)
from voxcurv.shapes import generate_shape
from voxcurv.surface import NonManifoldError, SurfaceMesh, VertexType, extract_surface
from voxcurv.voxgrid import VoxelGrid


@pytest.mark.parametrize('vertex_type, k1, k2', [
    (VertexType.M3, 4.24913, 0.369675),
    (VertexType.M4_FLAT, 0.0, 0.0),
    (VertexType.M4_BENT, 2.82843, 0.0),
    (VertexType.M5, 2.28687, -0.686875),
    (VertexType.M6A, 1.77245, -1.77245),
    (VertexType.M6B, 1.77245, -1.77245),
])
def test_principal_curvature_constants(vertex_type, k1, k2):
    constants = curvature_constants(vertex_type)
    assert constants.k1 == pytest.approx(k1, abs=5e-6)
    assert constants.k2 == pytest.approx(k2, abs=5e-6)


def test_gauss_constants_are_angle_defects():
    for vertex_type in (VertexType.M3, VertexType.M4_FLAT, VertexType.M4_BENT, VertexType.M5,
                        VertexType.M6A, VertexType.M6B):
        defect = 2 * math.pi - vertex_type.face_count() * math.pi / 2
        assert curvature_constants(vertex_type).gauss.radians == pytest.approx(defect, abs=1e-15)


def test_no_constants_for_non_manifold():
    with pytest.raises(ValueError):
        curvature_constants(VertexType.NON_MANIFOLD)


def test_principal_curvatures_formula():
    k1, k2 = principal_curvatures(math.sqrt(2), 0.0)
    assert (k1, k2) == pytest.approx((2 * math.sqrt(2), 0.0))


def test_per_vertex_relations():
    field = assign_curvatures(extract_surface(generate_shape('bump_plate:16,2,4')))
    gauss = field.gauss * math.pi / 2
    assert np.all(np.abs(field.k1 * field.k2 - gauss) <= 1e-12)
    assert np.all(np.abs((field.k1 + field.k2) / 2 - field.mean) <= 1e-12)


def test_gauss_q():
    assert GaussQ(3) + GaussQ(-1) == GaussQ(2)
    assert GaussQ(2).radians == pytest.approx(math.pi)
    assert str(GaussQ(-2)) == '-2 pi/2'
    assert len({GaussQ(1), GaussQ(1), GaussQ(-1)}) == 2
    assert GaussQ(1) != 1
    assert repr(GaussQ(4)) == 'GaussQ(4)'


def test_unit_cube_total():
    field = assign_curvatures(extract_surface(generate_shape('cube:1')))
    assert len(field) == 8
    assert total_gaussian(field) == GaussQ(8)
    assert total_gaussian(field).radians == pytest.approx(4 * math.pi)


def test_records():
    field = assign_curvatures(extract_surface(generate_shape('cube:1')))
    records = list(field.records())
    assert len(records) == 8
    position, vertex_type, gauss, mean, k1, k2 = records[0]
    assert position == (0, 0, 0)
    assert vertex_type == VertexType.M3
    assert gauss == GaussQ(1)
    assert mean == pytest.approx(4 / math.sqrt(3))


@pytest.mark.parametrize('spec, expected', MANIFOLD_FIXTURES)
def test_genus_and_gauss_bonnet(spec, expected):
    mesh = extract_surface(generate_shape(spec))
    assert genus(mesh) == expected
    assert total_gaussian(assign_curvatures(mesh)) == GaussQ(8 * (1 - expected))


def test_corner_count_identity_on_genus_zero_objects():
    specs = [f'blob:{seed},{2 + seed % 13},{12 + seed % 5}' for seed in range(110)]
    specs += [f'cube:{a}' for a in range(1, 6)] + ['box:1,1,7', 'box:2,3,5', 'box:4,1,9']
    specs += [f'sphere:{r}' for r in range(1, 9)]
    for spec in specs:
        mesh = extract_surface(generate_shape(spec))
        m3 = mesh.count(VertexType.M3)
        m5 = mesh.count(VertexType.M5)
        m6 = mesh.count(VertexType.M6A) + mesh.count(VertexType.M6B)
        assert m3 == 8 + m5 + 2 * m6, spec


def test_genus_needs_a_single_surface():
    shell = np.ones((5, 5, 5), dtype=bool)
    shell[1:4, 1:4, 1:4] = False
    with pytest.raises(TopologyPreconditionError):
        genus(extract_surface(VoxelGrid(shell)))


def test_genus_rejects_non_manifold():
    mesh = extract_surface(VoxelGrid.from_cells((2, 2, 1), [(0, 0, 0), (1, 1, 0)]))
    with pytest.raises(NonManifoldError):
        genus(mesh)


def test_non_manifold_vertices_are_excluded():
    mesh = extract_surface(VoxelGrid.from_cells((2, 2, 2), [(0, 0, 0), (1, 1, 1)]))
    field = assign_curvatures(mesh)
    assert field.excluded == 1
    assert len(field) == mesh.vertex_count() - 1
    assert total_gaussian(field) == GaussQ(14)


def _relabelled(mesh, types):
    return SurfaceMesh(mesh.grid_shape, mesh.faces, mesh.positions, mesh.patterns, types, mesh.edge_count,
                       mesh.edge_defects, mesh.object_components, mesh.background_components)


def test_indivisible_counts_are_a_consistency_failure():
    mesh = extract_surface(generate_shape('cube:1'))
    types = mesh.types.copy()
    types[0] = VertexType.M4_FLAT.value
    with pytest.raises(ConsistencyError, match='divisible'):
        genus(_relabelled(mesh, types))


def test_euler_mismatch_is_a_consistency_failure():
    mesh = extract_surface(generate_shape('cube:1'))
    types = np.full_like(mesh.types, VertexType.M4_FLAT.value)
    with pytest.raises(ConsistencyError, match='Euler'):
        genus(_relabelled(mesh, types))


def test_region_boundary_geodesic():
    assert region_boundary_geodesic(GaussQ(0)) == pytest.approx(2 * math.pi)
    # one cube corner: three quarter turns of pi/2 along its boundary
    assert region_boundary_geodesic(GaussQ(1)) == pytest.approx(3 * math.pi / 2)
    assert region_boundary_geodesic(4) == pytest.approx(0.0)
    # a whole closed sphere
    assert region_boundary_geodesic(GaussQ(8)) == pytest.approx(-2 * math.pi)
