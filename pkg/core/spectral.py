"""
一维节点谱基模块

Gauss-Lobatto 节点、求积权重、Lagrange 插值与微分矩阵。三维算子全部由一维矩阵
沿参考方向逐维作用（和分解）构成，不组装稠密三维矩阵。
"""
from dataclasses import dataclass, field

import numpy as np

from utils.errors import DimensionError, InvalidOrderError
from utils.logger import get_logger

# 创建模块的logger
logger = get_logger(__name__)

# 参考方向对应的张量轴（从末尾数）
_AXES = (-3, -2, -1)
_SUBSCRIPTS = (
    'im,...mjk->...ijk',
    'jm,...imk->...ijk',
    'km,...ijm->...ijk',
)


@dataclass(frozen=True)
class NodalBasis:
    """N 阶 Gauss-Lobatto 节点基

    Attributes:
        order: 多项式阶数 N
        nodes: N+1 个节点，严格递增且关于 0 对称
        weights: N+1 个求积权重
        diff_matrix: D_ij = l_j'(xi_i)
        weak_diff_matrix: -W^{-1} D^T W，弱形式体积项使用
    """

    order: int
    nodes: np.ndarray
    weights: np.ndarray
    diff_matrix: np.ndarray = field(repr=False)
    weak_diff_matrix: np.ndarray = field(repr=False)
    bary_weights: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.order + 1

    @property
    def end_weight(self) -> float:
        """端点权重 w_0 = w_N"""
        return float(self.weights[0])

    @property
    def weights3d(self) -> np.ndarray:
        """张量积权重 w_i w_j w_k"""
        w = self.weights
        return w[:, None, None] * w[None, :, None] * w[None, None, :]

    @property
    def weights2d(self) -> np.ndarray:
        w = self.weights
        return w[:, None] * w[None, :]


def _legendre_table(x: np.ndarray, n: int) -> np.ndarray:
    """三项递推计算 P_0..P_n 在 x 处的值"""
    P = np.zeros((x.size, n + 1))
    P[:, 0] = 1.0
    P[:, 1] = x
    for k in range(2, n + 1):
        P[:, k] = ((2 * k - 1) * x * P[:, k - 1] - (k - 1) * P[:, k - 2]) / k
    return P


def _barycentric_weights(x: np.ndarray) -> np.ndarray:
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


def gauss_lobatto(N: int) -> NodalBasis:
    """构造 N 阶 Legendre-Gauss-Lobatto 节点基

    Args:
        N: 多项式阶数，N >= 1

    Returns:
        NodalBasis: 节点、权重和微分矩阵
    """
    if int(N) != N or N < 1:
        raise InvalidOrderError(f"多项式阶数必须为正整数: {N}")
    N = int(N)

    # 以 Chebyshev-Gauss-Lobatto 点为初值的 Newton 迭代
    x = -np.cos(np.pi * np.arange(N + 1) / N)
    tol = 4.0 * np.finfo(float).eps
    for _ in range(100):
        P = _legendre_table(x, N)
        x_old = x
        x = x_old - (x * P[:, N] - P[:, N - 1]) / ((N + 1) * P[:, N])
        if np.max(np.abs(x - x_old)) <= tol:
            break

    # 对称化，消除舍入造成的不对称
    x = 0.5 * (x - x[::-1])
    x[0], x[-1] = -1.0, 1.0
    if N % 2 == 0:
        x[N // 2] = 0.0
    P = _legendre_table(x, N)
    w = 2.0 / (N * (N + 1) * P[:, N] ** 2)
    w = 0.5 * (w + w[::-1])

    lam = _barycentric_weights(x)
    D = _diff_from_barycentric(x, lam)
    weak = -(D.T * w[None, :]) / w[:, None]
    basis = NodalBasis(order=N, nodes=x, weights=w, diff_matrix=D, weak_diff_matrix=weak, bary_weights=lam)
    logger.debug(f"构造 {N} 阶 Gauss-Lobatto 基，权重和 {w.sum():.16f}")
    return basis


def _diff_from_barycentric(x: np.ndarray, lam: np.ndarray) -> np.ndarray:
    n = x.size
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                D[i, j] = (lam[j] / lam[i]) / (x[i] - x[j])
        # 负和技巧，保证行和为零
        D[i, i] = -np.sum(D[i, :])
    return D


def differentiation_matrix(basis: NodalBasis) -> np.ndarray:
    """返回微分矩阵 D_ij = l_j'(xi_i)"""
    return _diff_from_barycentric(basis.nodes, basis.bary_weights)


def interpolation_matrix(basis: NodalBasis, points) -> np.ndarray:
    """从节点值到任意点的 Lagrange 插值矩阵

    Args:
        basis: 节点基
        points: 目标点（参考坐标）

    Returns:
        np.ndarray: 形状 (len(points), N+1)
    """
    points = np.atleast_1d(np.asarray(points, dtype=float))
    x, lam = basis.nodes, basis.bary_weights
    diff = points[:, None] - x[None, :]
    exact = np.isclose(diff, 0.0, rtol=0.0, atol=1e-15)
    diff[exact] = 1.0
    T = lam[None, :] / diff
    T = T / T.sum(axis=1, keepdims=True)
    rows = np.any(exact, axis=1)
    T[rows] = exact[rows].astype(float)
    return T


def quadrature_inner_product(f, g, weights) -> float:
    """离散内积 sum w f g

    一维时权重与节点值等长；三维时 f、g 形状为 (N+1, N+1, N+1)，权重可给一维
    权重（自动取张量积）或完整三维权重。
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    w = np.asarray(weights, dtype=float)
    if f.shape != g.shape:
        raise DimensionError(f"内积两侧形状不一致: {f.shape} vs {g.shape}")
    if f.ndim == 3 and w.ndim == 1:
        w = w[:, None, None] * w[None, :, None] * w[None, None, :]
    if w.shape != f.shape:
        raise DimensionError(f"权重形状 {w.shape} 与节点值形状 {f.shape} 不一致")
    return float(np.sum(w * f * g))


def apply_along(matrix: np.ndarray, u: np.ndarray, direction: int) -> np.ndarray:
    """沿参考方向 direction 作用一维矩阵

    Args:
        matrix: (N+1)x(N+1) 一维算子
        u: 末三维为 (xi, eta, zeta) 节点的数组
        direction: 0, 1, 2 分别对应 xi, eta, zeta

    Returns:
        np.ndarray: 与 u 同形状
    """
    return np.einsum(_SUBSCRIPTS[direction], matrix, u, optimize=True)


def reference_gradient(u: np.ndarray, basis: NodalBasis) -> np.ndarray:
    """参考空间梯度，结果在最前面增加长度为 3 的方向轴"""
    D = basis.diff_matrix
    return np.stack([apply_along(D, u, d) for d in range(3)])


def face_slice(side: int):
    """单元第 side 个面的节点切片（作用于末三维）

    side: 0/1 -> xi=-1/+1, 2/3 -> eta=-1/+1, 4/5 -> zeta=-1/+1
    """
    index = 0 if side % 2 == 0 else -1
    direction = side // 2
    sl = [slice(None)] * 3
    sl[direction] = index
    return (Ellipsis,) + tuple(sl)
