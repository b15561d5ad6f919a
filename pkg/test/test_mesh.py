"""网格几何与连接测试"""
import numpy as np
import pytest

from core.mesh import (MeshTopology, box_topology, build_discretization, build_mapping, connect_faces,
                       metric_identity_residual, project_to_cylinder, sine_warp, slab_topology,
                       watertightness_residual)
from core.spectral import gauss_lobatto
from utils.errors import DegenerateElementError, TopologyError


def test_single_box_has_constant_jacobian(box_mesh):
    mesh = box_mesh(shape=(1, 1, 1), extent=((0.0, 2.0), (0.0, 2.0), (0.0, 6.0)))
    np.testing.assert_allclose(mesh.J, 3.0, rtol=1e-13)
    np.testing.assert_allclose(mesh.volumes, [24.0], rtol=1e-13)
    assert mesh.interior.count == 0
    assert sorted(mesh.boundary) == ['xmax', 'xmin', 'ymax', 'ymin', 'zmax', 'zmin']


def test_two_element_face_counts(box_mesh):
    mesh = box_mesh(shape=(2, 1, 1), extent=((0.0, 2.0), (0.0, 1.0), (0.0, 1.0)))
    assert mesh.interior.count == 1
    assert sum(f.count for f in mesh.boundary.values()) == 10
    np.testing.assert_allclose(mesh.interior.normal[0], 1.0, atol=1e-14)
    assert mesh.neighbours() == [{1}, {0}]


def test_periodic_direction_is_connected(box_mesh):
    mesh = box_mesh(shape=(2, 2, 1), periodic=(True, False, True))
    assert set(mesh.boundary) == {'ymin', 'ymax'}
    assert mesh.topology.tags() == ['ymax', 'ymin']
    # x 方向 2 个内部面 + 2 个周期面，每行；z 方向每个单元一个自连接面
    assert mesh.interior.count == 2 * 2 + 2 * 1 + 4


@pytest.mark.parametrize('order', [2, 4])
def test_warped_mesh_satisfies_metric_identities(box_mesh, order):
    extent = ((0.0, 1.0), (0.0, 1.0), (0.0, 1.0))
    mesh = box_mesh(shape=(2, 2, 2), order=order, extent=extent, warp=sine_warp(extent, 0.1, seed=3))
    assert metric_identity_residual(mesh) < 1e-12
    assert watertightness_residual(mesh) < 1e-12
    assert mesh.volumes.sum() == pytest.approx(1.0, rel=1e-10)


def test_inverted_element_is_rejected():
    corners = np.array([[(c & 1), (c >> 1) & 1, (c >> 2) & 1] for c in range(8)], dtype=float)
    corners[:, 0] *= -1.0
    with pytest.raises(DegenerateElementError):
        build_mapping(corners, gauss_lobatto(2))


def test_boundary_face_without_tag_is_rejected():
    topology = box_topology((1, 1, 1), ((0, 1), (0, 1), (0, 1)))
    topology.boundary_tags.pop((0, 0))
    with pytest.raises(TopologyError):
        connect_faces(topology)


def test_rotated_neighbour_orientation_matches(box_mesh):
    """右单元角点编号旋转后共享面仍然一致"""
    topology = box_topology((2, 1, 1), ((0, 2), (0, 1), (0, 1)))
    e = topology.elements[1].copy()
    # 绕 x 轴旋转 90 度的重新编号：(a, b, c) -> (a, c, 1 - b)
    relabel = [e[a + 2 * (1 - c) + 4 * b] for c in range(2) for b in range(2) for a in range(2)]
    topology.elements[1] = relabel
    tags = {}
    for (el, side), tag in topology.boundary_tags.items():
        if el == 1 and side >= 2:
            side = {2: 5, 3: 4, 4: 2, 5: 3}[side]
        tags[(el, side)] = tag
    topology.boundary_tags = tags
    mesh = build_discretization(topology, gauss_lobatto(3))
    assert mesh.interior.count == 1
    assert watertightness_residual(mesh) < 1e-12
    # 共享面两侧的节点坐标按 perm 对齐
    n = mesh.n
    fi = mesh.interior
    left_pts = fi.points.reshape(3, 1, -1)[:, 0]
    right = mesh.x[:, 1][(slice(None), 0)].reshape(3, -1)
    np.testing.assert_allclose(right[:, fi.perm[0]], left_pts, atol=1e-13)
    assert n == 4


def test_slab_is_periodic_in_thickness():
    topology = slab_topology(3, 2, (0, 3), (0, 2), (False, False), thickness=0.5)
    mesh = build_discretization(topology, gauss_lobatto(2))
    assert 'zmin' not in mesh.boundary and 'zmax' not in mesh.boundary
    np.testing.assert_allclose(mesh.volumes, 0.5, rtol=1e-13)


def test_project_to_cylinder():
    pts = np.array([[1.0, 0.0], [1.0, 2.0], [0.5, 3.0]])
    out = project_to_cylinder(pts, (0.0, 0.0, 0.0), (1.0, 0.0, 0.0), 2.0)
    np.testing.assert_allclose(np.hypot(out[1], out[2]), 2.0)
    np.testing.assert_allclose(out[0], pts[0])


def test_curved_faces_on_cylinder_keep_watertight():
    r = np.sqrt(0.5)
    topology = box_topology((1, 1, 1), ((0.0, 1.0), (-0.5, 0.5), (-0.5, 0.5)))
    topology.geometry_order = 4
    geo = gauss_lobatto(4).nodes
    A, B = np.meshgrid(geo, geo, indexing='ij')
    # zeta+ 面 (z = 0.5) 投影到过其四个角点的圆柱上
    flat = np.stack([0.5 + 0.5 * A, 0.5 * B, np.full_like(A, 0.5)])
    topology.curved_faces[(0, 5)] = project_to_cylinder(flat, (0, 0, 0), (1, 0, 0), r)
    mesh = build_discretization(topology, gauss_lobatto(4))
    assert metric_identity_residual(mesh) < 1e-12
    assert watertightness_residual(mesh) < 1e-12
    assert np.all(mesh.J > 0.0)
