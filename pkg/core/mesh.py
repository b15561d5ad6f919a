"""
六面体网格与几何模块

单元的超限插值映射、旋度形式的度量项、面连接关系、法向量与面雅可比。
节点场统一按 (..., K, N+1, N+1, N+1) 存放，末三维依次对应 (xi, eta, zeta)。
"""
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.spectral import NodalBasis, apply_along, face_slice, gauss_lobatto, interpolation_matrix
from utils.errors import DegenerateElementError, TopologyError
from utils.logger import get_logger

# 创建模块的logger
logger = get_logger(__name__)

# 角点编号 a + 2b + 4c，(a, b, c) 为 (xi, eta, zeta) 端点指示
SIDE_CORNERS = (
    np.array([[0, 4], [2, 6]]),  # xi = -1，面网格 (eta, zeta)
    np.array([[1, 5], [3, 7]]),  # xi = +1
    np.array([[0, 4], [1, 5]]),  # eta = -1，面网格 (xi, zeta)
    np.array([[2, 6], [3, 7]]),  # eta = +1
    np.array([[0, 2], [1, 3]]),  # zeta = -1，面网格 (xi, eta)
    np.array([[4, 6], [5, 7]]),  # zeta = +1
)

SIDE_NAMES = ('xi-', 'xi+', 'eta-', 'eta+', 'zeta-', 'zeta+')


def _orientation_transforms():
    """正方形的 8 种对称变换，作用于数组的前两个轴"""
    def swap(a):
        return np.swapaxes(a, 0, 1)
    return (
        lambda a: a,
        lambda a: a[::-1],
        lambda a: a[:, ::-1],
        lambda a: a[::-1, ::-1],
        lambda a: swap(a),
        lambda a: swap(a)[::-1],
        lambda a: swap(a)[:, ::-1],
        lambda a: swap(a)[::-1, ::-1],
    )


ORIENTATIONS = _orientation_transforms()


@dataclass
class ElementGeometry:
    """单个单元的几何量

    Attributes:
        mapping_nodes: (3, n, n, n) 物理坐标
        covariant: (3, 3, n, n, n)，covariant[i, m] = dX_m/dxi^i
        contravariant_scaled: (3, 3, n, n, n)，contravariant_scaled[i, m] = J a^i_m
        jacobian: (n, n, n)
    """

    mapping_nodes: np.ndarray
    covariant: Optional[np.ndarray] = None
    contravariant_scaled: Optional[np.ndarray] = None
    jacobian: Optional[np.ndarray] = None

    @property
    def metric_matrix(self) -> np.ndarray:
        """M = (Ja^xi, Ja^eta, Ja^zeta)，M[m, i] = Ja^i_m"""
        return np.swapaxes(self.contravariant_scaled, 0, 1)


@dataclass
class FaceGeometry:
    """一组面的几何与连接信息（按面向量化存放）

    right 为 -1 表示边界面，此时 tag 给出边界标签。perm 把右单元的面节点
    （展平）重排到左单元面网格的顺序，inv_perm 为其逆。
    """

    left: np.ndarray
    left_side: np.ndarray
    right: np.ndarray
    right_side: np.ndarray
    orientation: np.ndarray
    perm: np.ndarray
    inv_perm: np.ndarray
    normal: np.ndarray  # (3, nf, n, n)，左单元外法向
    surface_jacobian: np.ndarray  # (nf, n, n)
    area: np.ndarray  # (nf,)
    penalty: np.ndarray  # (nf,)
    points: np.ndarray  # (3, nf, n, n)
    tag: Optional[str] = None

    @property
    def count(self) -> int:
        return int(self.left.size)


@dataclass
class MeshTopology:
    """网格拓扑

    Attributes:
        nodes: (n_nodes, 3) 角点坐标
        elements: (K, 8) 角点编号，顺序 a + 2b + 4c
        geometry_order: 曲面数据的多项式阶数
        curved_faces: {(单元, 面): (3, Ng+1, Ng+1) 面网格点}
        boundary_tags: {(单元, 面): 标签}
        periodic_pairs: [(标签A, 标签B)]，B 面由 A 面平移得到
        bc_map: 标签 -> 边界条件名
    """

    nodes: np.ndarray
    elements: np.ndarray
    geometry_order: int = 1
    curved_faces: Dict[Tuple[int, int], np.ndarray] = field(default_factory=dict)
    boundary_tags: Dict[Tuple[int, int], str] = field(default_factory=dict)
    periodic_pairs: List[Tuple[str, str]] = field(default_factory=list)
    bc_map: Dict[str, str] = field(default_factory=dict)
    interior: List[Tuple[int, int, int, int, int]] = field(default_factory=list)
    boundary: List[Tuple[int, int, str]] = field(default_factory=list)

    @property
    def element_count(self) -> int:
        return int(self.elements.shape[0])

    def tags(self) -> List[str]:
        """非周期边界标签"""
        paired = {t for pair in self.periodic_pairs for t in pair}
        return sorted({tag for _, _, tag in self.boundary} - paired)


@dataclass
class DGMesh:
    """离散化后的网格：基函数、堆叠的几何数组与面"""

    basis: NodalBasis
    topology: MeshTopology
    x: np.ndarray  # (3, K, n, n, n)
    Ja: np.ndarray  # (3, 3, K, n, n, n)
    J: np.ndarray  # (K, n, n, n)
    volumes: np.ndarray
    interior: FaceGeometry
    boundary: Dict[str, FaceGeometry]

    @property
    def K(self) -> int:
        return int(self.J.shape[0])

    @property
    def n(self) -> int:
        return self.basis.size

    @property
    def dof_count(self) -> int:
        return int(self.J.size)

    @property
    def mass(self) -> np.ndarray:
        """对角质量矩阵 J w_ijk"""
        return self.J * self.basis.weights3d

    def element_geometry(self, e: int) -> ElementGeometry:
        return ElementGeometry(
            mapping_nodes=self.x[:, e],
            contravariant_scaled=self.Ja[:, :, e],
            jacobian=self.J[e],
        )

    def neighbours(self) -> List[set]:
        """每个单元的面邻居（含周期自连接）"""
        nb = [set() for _ in range(self.K)]
        for eL, eR in zip(self.interior.left, self.interior.right):
            nb[int(eL)].add(int(eR))
            nb[int(eR)].add(int(eL))
        return nb


# ---------------------------------------------------------------------------
# 单元映射
# ---------------------------------------------------------------------------

def _trilinear(corners: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """角点三线性插值到 GL 张量节点，返回 (3, n, n, n)"""
    phi = np.stack([(1.0 - xi) / 2.0, (1.0 + xi) / 2.0])  # (2, n)
    X = np.zeros((3,) + (xi.size,) * 3)
    for c in range(8):
        a, b, d = c & 1, (c >> 1) & 1, (c >> 2) & 1
        shape = phi[a][:, None, None] * phi[b][None, :, None] * phi[d][None, None, :]
        X += corners[c][:, None, None, None] * shape[None]
    return X


def _corner_jacobians(corners: np.ndarray) -> np.ndarray:
    """三线性映射在 8 个角点处的雅可比"""
    C = corners.reshape(2, 2, 2, 3, order='F')  # C[a, b, c]
    out = np.zeros(8)
    for c in range(8):
        a, b, d = c & 1, (c >> 1) & 1, (c >> 2) & 1
        a1 = (C[1, b, d] - C[0, b, d]) / 2.0
        a2 = (C[a, 1, d] - C[a, 0, d]) / 2.0
        a3 = (C[a, b, 1] - C[a, b, 0]) / 2.0
        out[c] = np.dot(a1, np.cross(a2, a3))
    return out


def _project(B: np.ndarray, xi: np.ndarray, direction: int) -> np.ndarray:
    """沿一个方向的线性混合投影，只使用该方向两端的面值"""
    phi0, phi1 = (1.0 - xi) / 2.0, (1.0 + xi) / 2.0
    lo = B[face_slice(2 * direction)]
    hi = B[face_slice(2 * direction + 1)]
    lo = np.expand_dims(lo, axis=B.ndim - 3 + direction)
    hi = np.expand_dims(hi, axis=B.ndim - 3 + direction)
    shape = [1] * B.ndim
    shape[B.ndim - 3 + direction] = xi.size
    return phi0.reshape(shape) * lo + phi1.reshape(shape) * hi


def build_mapping(corners, basis: NodalBasis, curved_faces: Optional[Dict[int, np.ndarray]] = None,
                  element_id: int = 0) -> ElementGeometry:
    """由角点和可选曲面数据构造超限插值映射

    Args:
        corners: (8, 3) 角点坐标
        basis: 节点基
        curved_faces: {面编号: (3, n, n) 面上 GL 节点的坐标}
        element_id: 用于诊断信息的单元编号

    Returns:
        ElementGeometry: 仅含 mapping_nodes
    """
    corners = np.asarray(corners, dtype=float)
    jac = _corner_jacobians(corners)
    if np.any(jac <= 0.0):
        bad = int(np.argmin(jac))
        raise DegenerateElementError(f"角点顺序反转，三线性雅可比 {jac[bad]:.3e}", element_id,
                                     (bad & 1, (bad >> 1) & 1, (bad >> 2) & 1))

    xi = basis.nodes
    X = _trilinear(corners, xi)
    if not curved_faces:
        return ElementGeometry(mapping_nodes=X)

    # 边界函数：先取三线性值，再用曲面数据覆盖
    B = X.copy()
    for side, grid in curved_faces.items():
        B[face_slice(side)] = grid

    # Gordon-Hall 布尔和
    P = [lambda u, d=d: _project(u, xi, d) for d in range(3)]
    X = (P[0](B) + P[1](B) + P[2](B)
         - P[0](P[1](B)) - P[0](P[2](B)) - P[1](P[2](B))
         + P[0](P[1](P[2](B))))
    return ElementGeometry(mapping_nodes=X)


def compute_metrics(geom: ElementGeometry, basis: NodalBasis, element_id: int = 0) -> ElementGeometry:
    """计算协变基、旋度形式的逆变度量和雅可比

    Ja^i_n = -x^i . curl_xi( I^N(X_l grad_xi X_m) )，(n, m, l) 循环。

    Args:
        geom: 已有 mapping_nodes 的单元几何
        basis: 节点基
        element_id: 诊断用单元编号

    Returns:
        ElementGeometry: 补全的单元几何
    """
    X = geom.mapping_nodes
    D = basis.diff_matrix
    cov = np.stack([apply_along(D, X, d) for d in range(3)])  # cov[i, m]
    J = np.einsum('m...,m...->...', cov[0], np.cross(cov[1], cov[2], axis=0))

    Ja = np.zeros_like(cov)
    for n in range(3):
        m, l = (n + 1) % 3, (n + 2) % 3
        V = X[l][None] * cov[:, m]  # V[d] = X_l dX_m/dxi^d
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            curl = apply_along(D, V[k], j) - apply_along(D, V[j], k)
            Ja[i, n] = -curl

    if np.any(J <= 0.0):
        node = np.unravel_index(int(np.argmin(J)), J.shape)
        raise DegenerateElementError(f"雅可比非正: {J[node]:.3e}", element_id, node)

    geom.covariant = cov
    geom.contravariant_scaled = Ja
    geom.jacobian = J
    return geom


# ---------------------------------------------------------------------------
# 面连接
# ---------------------------------------------------------------------------

def _side_corner_ids(topology: MeshTopology, e: int, side: int) -> np.ndarray:
    return topology.elements[e][SIDE_CORNERS[side]]


def _match_orientation(left: np.ndarray, right: np.ndarray, tol: float = 0.0) -> Optional[int]:
    """找到把右面角点网格变换到左面角点网格的对称变换编号"""
    for code, transform in enumerate(ORIENTATIONS):
        candidate = transform(right)
        if tol == 0.0:
            if np.array_equal(candidate, left):
                return code
        elif np.max(np.abs(candidate - left)) <= tol:
            return code
    return None


def connect_faces(topology: MeshTopology) -> MeshTopology:
    """配对内部面、周期面并校验边界标签

    Args:
        topology: 网格拓扑（原地补全 interior 与 boundary）

    Returns:
        MeshTopology: 补全后的拓扑
    """
    owners: Dict[Tuple[int, ...], List[Tuple[int, int]]] = {}
    for e in range(topology.element_count):
        for side in range(6):
            key = tuple(sorted(_side_corner_ids(topology, e, side).ravel().tolist()))
            owners.setdefault(key, []).append((e, side))

    interior = []
    boundary = []
    for key, sides in owners.items():
        if len(sides) > 2:
            raise TopologyError(f"面 {key} 被 {len(sides)} 个单元共享")
        if len(sides) == 2:
            (eL, sL), (eR, sR) = sides
            code = _match_orientation(_side_corner_ids(topology, eL, sL), _side_corner_ids(topology, eR, sR))
            if code is None:
                raise TopologyError(f"单元 {eL} 与 {eR} 的共享面不协调")
            interior.append((eL, sL, eR, sR, code))
            continue
        e, side = sides[0]
        tag = topology.boundary_tags.get((e, side))
        if tag is None:
            raise TopologyError(f"单元 {e} 的面 {SIDE_NAMES[side]} 是边界面但没有标签")
        boundary.append((e, side, tag))

    # 周期面按平移配对
    paired = set()
    for tag_a, tag_b in topology.periodic_pairs:
        faces_a = [(e, s) for e, s, t in boundary if t == tag_a]
        faces_b = [(e, s) for e, s, t in boundary if t == tag_b]
        if len(faces_a) != len(faces_b) or not faces_a:
            raise TopologyError(f"周期标签 {tag_a}/{tag_b} 的面数不一致: {len(faces_a)} vs {len(faces_b)}")
        corners_a = np.array([topology.nodes[_side_corner_ids(topology, e, s)] for e, s in faces_a])
        corners_b = np.array([topology.nodes[_side_corner_ids(topology, e, s)] for e, s in faces_b])
        cent_a = corners_a.mean(axis=(1, 2))
        cent_b = corners_b.mean(axis=(1, 2))
        shift = cent_b.mean(axis=0) - cent_a.mean(axis=0)
        scale = max(1.0, float(np.max(np.abs(topology.nodes))))
        tol = 1e-8 * scale
        dist = np.linalg.norm(cent_a[:, None, :] + shift - cent_b[None, :, :], axis=-1)
        for ia, (eA, sA) in enumerate(faces_a):
            ib = int(np.argmin(dist[ia]))
            if dist[ia, ib] > tol:
                raise TopologyError(f"周期面 {tag_a} 单元 {eA} 找不到 {tag_b} 上的对应面")
            eB, sB = faces_b[ib]
            code = _match_orientation(corners_a[ia], corners_b[ib] - shift, tol)
            if code is None:
                raise TopologyError(f"周期面 {tag_a}-{tag_b} 单元 {eA}/{eB} 方向无法匹配")
            interior.append((eA, sA, eB, sB, code))
            paired.add((eA, sA))
            paired.add((eB, sB))

    topology.interior = interior
    topology.boundary = [(e, s, t) for e, s, t in boundary if (e, s) not in paired]
    logger.debug(f"面连接完成：内部面 {len(interior)}，边界面 {len(topology.boundary)}")
    return topology


# ---------------------------------------------------------------------------
# 面几何
# ---------------------------------------------------------------------------

def _side_metric(Ja: np.ndarray, side: int) -> np.ndarray:
    """单元面上的外法向度量向量 (3, K, n, n)"""
    sign = -1.0 if side % 2 == 0 else 1.0
    return sign * Ja[side // 2][face_slice(side)]


def _face_set(mesh_parts: dict, records: Sequence[Tuple[int, int, int, int, int]], basis: NodalBasis,
              tag: Optional[str] = None) -> FaceGeometry:
    n = basis.size
    Ja, x, volumes = mesh_parts['Ja'], mesh_parts['x'], mesh_parts['volumes']
    nf = len(records)
    rec = np.array(records, dtype=int).reshape(nf, 5)
    left, left_side, right, right_side, orientation = rec.T

    idx = np.arange(n * n).reshape(n, n)
    perm = np.zeros((nf, n * n), dtype=int)
    inv_perm = np.zeros((nf, n * n), dtype=int)
    normal = np.zeros((3, nf, n, n))
    sj = np.zeros((nf, n, n))
    points = np.zeros((3, nf, n, n))
    for f in range(nf):
        if right[f] >= 0:
            perm[f] = np.ascontiguousarray(ORIENTATIONS[orientation[f]](idx)).ravel()
        else:
            perm[f] = idx.ravel()
        inv_perm[f] = np.argsort(perm[f])
        vec = _side_metric(Ja[:, :, left[f]][:, :, None], left_side[f])[:, 0]
        mag = np.linalg.norm(vec, axis=0)
        sj[f] = mag
        normal[:, f] = vec / mag
        points[:, f] = x[:, left[f]][face_slice(left_side[f])]

    area = np.einsum('fij,ij->f', sj, basis.weights2d)
    vol = volumes[left].copy()
    inner = right >= 0
    vol[inner] = np.minimum(vol[inner], volumes[right[inner]])
    h_bar = vol / area
    penalty = (basis.order + 1) * (basis.order + 2) / (2.0 * h_bar)
    return FaceGeometry(left=left, left_side=left_side, right=right, right_side=right_side,
                        orientation=orientation, perm=perm, inv_perm=inv_perm, normal=normal,
                        surface_jacobian=sj, area=area, penalty=penalty, points=points, tag=tag)


def build_faces(topology: MeshTopology, Ja: np.ndarray, x: np.ndarray, volumes: np.ndarray,
                basis: NodalBasis) -> Tuple[FaceGeometry, Dict[str, FaceGeometry]]:
    """计算内部面与各边界标签的面几何

    Args:
        topology: 已完成面连接的拓扑
        Ja: (3, 3, K, n, n, n) 逆变度量
        x: (3, K, n, n, n) 节点坐标
        volumes: (K,) 单元体积
        basis: 节点基

    Returns:
        Tuple[FaceGeometry, Dict[str, FaceGeometry]]: 内部面与边界面
    """
    parts = {'Ja': Ja, 'x': x, 'volumes': volumes}
    if not topology.interior and not topology.boundary:
        connect_faces(topology)
    interior = _face_set(parts, topology.interior, basis)

    # 校验共享面两侧法向相反
    if interior.count:
        right_vec = np.stack([
            _side_metric(Ja[:, :, e][:, :, None], s)[:, 0].reshape(3, -1)[:, interior.perm[f]]
            for f, (e, s) in enumerate(zip(interior.right, interior.right_side))
        ], axis=1)
        left_vec = interior.normal.reshape(3, interior.count, -1) * interior.surface_jacobian.reshape(1, interior.count, -1)
        mismatch = np.max(np.abs(left_vec + right_vec)) / max(1.0, np.max(np.abs(left_vec)))
        if mismatch > 1e-8:
            raise TopologyError(f"共享面两侧的面度量不一致，相对偏差 {mismatch:.3e}")

    boundary = {}
    for tag in sorted({t for _, _, t in topology.boundary}):
        records = [(e, s, -1, -1, 0) for e, s, t in topology.boundary if t == tag]
        boundary[tag] = _face_set(parts, records, basis, tag=tag)
    return interior, boundary


# ---------------------------------------------------------------------------
# 组装
# ---------------------------------------------------------------------------

def build_discretization(topology: MeshTopology, basis: NodalBasis,
                         warp: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> DGMesh:
    """由拓扑构造完整的离散网格

    Args:
        topology: 网格拓扑
        basis: 节点基
        warp: 可选的坐标变形函数，作用于 (3, ...) 坐标数组

    Returns:
        DGMesh: 几何与面数据
    """
    connect_faces(topology)
    n = basis.size
    K = topology.element_count
    x = np.zeros((3, K, n, n, n))
    Ja = np.zeros((3, 3, K, n, n, n))
    J = np.zeros((K, n, n, n))

    geo_basis = gauss_lobatto(topology.geometry_order) if topology.curved_faces else None
    to_solution = interpolation_matrix(geo_basis, basis.nodes) if geo_basis is not None else None

    for e in range(K):
        curved = {}
        for side in range(6):
            grid = topology.curved_faces.get((e, side))
            if grid is not None:
                curved[side] = np.einsum('ip,jq,dpq->dij', to_solution, to_solution, grid)
        geom = build_mapping(topology.nodes[topology.elements[e]], basis, curved, element_id=e)
        if warp is not None:
            geom.mapping_nodes = warp(geom.mapping_nodes)
        compute_metrics(geom, basis, element_id=e)
        x[:, e] = geom.mapping_nodes
        Ja[:, :, e] = geom.contravariant_scaled
        J[e] = geom.jacobian

    volumes = np.einsum('kijl,ijl->k', J, basis.weights3d)
    interior, boundary = build_faces(topology, Ja, x, volumes, basis)
    mesh = DGMesh(basis=basis, topology=topology, x=x, Ja=Ja, J=J, volumes=volumes,
                  interior=interior, boundary=boundary)
    logger.info(f"网格离散完成：{K} 个单元，N={basis.order}，内部面 {interior.count}，"
                f"边界面 {sum(f.count for f in boundary.values())}")
    return mesh


def metric_identity_residual(mesh: DGMesh) -> float:
    """离散度量恒等式的最大相对残差 max |sum_i d(Ja^i_n)/dxi^i|"""
    D = mesh.basis.diff_matrix
    div = sum(apply_along(D, mesh.Ja[i], i) for i in range(3))
    scale = max(1.0, float(np.max(np.abs(mesh.Ja))))
    return float(np.max(np.abs(div)) / scale)


def watertightness_residual(mesh: DGMesh) -> float:
    """每个单元六个面上 sum w S n 之和的最大范数"""
    w2 = mesh.basis.weights2d
    total = np.zeros((3, mesh.K))
    for side in range(6):
        vec = _side_metric(mesh.Ja, side)
        total += np.einsum('dkij,ij->dk', vec, w2)
    return float(np.max(np.abs(total)))


# ---------------------------------------------------------------------------
# 结构化网格与曲面辅助
# ---------------------------------------------------------------------------

def box_topology(shape: Sequence[int], extent: Sequence[Sequence[float]],
                 periodic: Sequence[bool] = (False, False, False)) -> MeshTopology:
    """结构化长方体网格

    边界标签为 xmin/xmax/ymin/ymax/zmin/zmax；周期方向的标签成对登记。

    Args:
        shape: 各方向单元数
        extent: ((x0, x1), (y0, y1), (z0, z1))
        periodic: 各方向是否周期

    Returns:
        MeshTopology: 网格拓扑
    """
    nx, ny, nz = (int(s) for s in shape)
    lines = [np.linspace(lo, hi, m + 1) for (lo, hi), m in zip(extent, (nx, ny, nz))]
    X, Y, Z = np.meshgrid(*lines, indexing='ij')
    nodes = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)

    def node_id(i, j, k):
        return (i * (ny + 1) + j) * (nz + 1) + k

    elements = []
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                elements.append([node_id(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1)) for c in range(8)])
    elements = np.array(elements, dtype=int)

    tags = {}
    names = (('xmin', 'xmax'), ('ymin', 'ymax'), ('zmin', 'zmax'))
    counts = (nx, ny, nz)
    e = 0
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                for d, index in enumerate((i, j, k)):
                    if index == 0:
                        tags[(e, 2 * d)] = names[d][0]
                    if index == counts[d] - 1:
                        tags[(e, 2 * d + 1)] = names[d][1]
                e += 1

    pairs = [names[d] for d in range(3) if periodic[d]]
    return MeshTopology(nodes=nodes, elements=elements, boundary_tags=tags, periodic_pairs=pairs)


def slab_topology(nx: int, ny: int, x_range: Sequence[float], y_range: Sequence[float],
                  periodic_xy: Sequence[bool] = (False, False), thickness: float = 1.0) -> MeshTopology:
    """二维计算用的单层周期厚板网格"""
    return box_topology((nx, ny, 1), (x_range, y_range, (0.0, thickness)),
                        (bool(periodic_xy[0]), bool(periodic_xy[1]), True))


def sine_warp(extent: Sequence[Sequence[float]], amplitude: float, seed: int = 0) -> Callable[[np.ndarray], np.ndarray]:
    """盒内光滑扰动，边界上位移为零

    Args:
        extent: 盒子范围
        amplitude: 位移幅值
        seed: 随机系数种子

    Returns:
        Callable: 作用于 (3, ...) 坐标的变形函数
    """
    rng = np.random.default_rng(seed)
    coeff = rng.uniform(-1.0, 1.0, size=(3, 3))
    lo = np.array([e[0] for e in extent], dtype=float)
    span = np.array([e[1] - e[0] for e in extent], dtype=float)

    def warp(X: np.ndarray) -> np.ndarray:
        s = (X - lo.reshape((3,) + (1,) * (X.ndim - 1))) / span.reshape((3,) + (1,) * (X.ndim - 1))
        bubble = np.sin(np.pi * s[0]) * np.sin(np.pi * s[1]) * np.sin(np.pi * s[2])
        out = X.copy()
        for d in range(3):
            mode = 1.0 + coeff[d, 0] * np.cos(np.pi * s[0]) + coeff[d, 1] * np.cos(np.pi * s[1]) \
                + coeff[d, 2] * np.cos(np.pi * s[2])
            out[d] = X[d] + amplitude * span[d] * bubble * mode / 3.0
        return out

    return warp


def project_to_cylinder(points: np.ndarray, axis_point: Sequence[float], axis_dir: Sequence[float],
                        radius: float) -> np.ndarray:
    """把点沿径向投影到圆柱面上，用于生成管道边界的曲面数据

    Args:
        points: (3, ...) 点坐标
        axis_point: 轴线上一点
        axis_dir: 轴线方向
        radius: 半径

    Returns:
        np.ndarray: 投影后的点
    """
    p0 = np.asarray(axis_point, dtype=float).reshape((3,) + (1,) * (points.ndim - 1))
    a = np.asarray(axis_dir, dtype=float)
    a = (a / np.linalg.norm(a)).reshape((3,) + (1,) * (points.ndim - 1))
    rel = points - p0
    along = np.sum(rel * a, axis=0, keepdims=True)
    radial = rel - along * a
    r = np.linalg.norm(radial, axis=0, keepdims=True)
    return p0 + along * a + radius * radial / r
