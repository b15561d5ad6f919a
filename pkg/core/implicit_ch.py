"""
隐式 Cahn-Hilliard 修正模块

组装并一次性分解 IMEX 修正步的常系数线性算子
    A = I/dt - M0 S0 L + (3/4) eps M0 L L
其中 L 为齐次 Neumann 边界的 SIP Laplace 矩阵。两种浓度共用同一分解。
"""
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as spla

from config.settings import IMPLICIT_CONFIG
from core import phase_model as pm
from core.dg_operators import SpatialOperator
from utils.errors import ConfigError, SolverSetupError
from utils.logger import get_logger

# 创建模块的logger
logger = get_logger(__name__)


@dataclass
class ImplicitOperator:
    """修正步线性系统

    Attributes:
        matrix: A (csc)
        laplacian: L (csr)
        lu: 稀疏 LU 分解
        dt, S0, M0, eps: 组装时冻结的参数
    """

    matrix: sparse.csc_matrix
    laplacian: sparse.csr_matrix
    lu: Optional[object]
    dt: float
    S0: float
    M0: float
    eps: float
    metadata: dict = field(default_factory=dict)

    @property
    def ndof(self) -> int:
        return int(self.matrix.shape[0])

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """单次回代并做残差检查"""
        x = self.lu.solve(rhs)
        scale = max(float(np.max(np.abs(rhs))), np.finfo(float).tiny)
        res = float(np.max(np.abs(self.matrix @ x - rhs)))
        if res > IMPLICIT_CONFIG['residual_check'] * scale:
            raise SolverSetupError(f"隐式修正残差过大: {res:.3e} (右端 {scale:.3e})")
        return x


def distance2_coloring(neighbours: List[set]) -> List[List[int]]:
    """单元的距离 2 贪心着色，同色单元的闭邻域互不相交"""
    K = len(neighbours)
    closed = [set(nb) | {e} for e, nb in enumerate(neighbours)]
    colour = -np.ones(K, dtype=int)
    for e in range(K):
        forbidden = set()
        for f in closed[e]:
            for g in closed[f]:
                if colour[g] >= 0:
                    forbidden.add(int(colour[g]))
        c = 0
        while c in forbidden:
            c += 1
        colour[e] = c
    return [list(np.flatnonzero(colour == c)) for c in range(int(colour.max()) + 1)]


def laplacian_matrix(operator: SpatialOperator, batch: Optional[int] = None) -> sparse.csr_matrix:
    """以着色单位向量探测组装齐次 Neumann SIP Laplace 矩阵

    Args:
        operator: 空间算子
        batch: 每次同时作用的探测向量数

    Returns:
        sparse.csr_matrix: ndof x ndof
    """
    mesh = operator.mesh
    batch = batch or IMPLICIT_CONFIG['probe_batch']
    K, n3 = mesh.K, mesh.n ** 3
    ndof = K * n3
    neighbours = mesh.neighbours()
    closed = [sorted(nb | {e}) for e, nb in enumerate(neighbours)]
    colours = distance2_coloring(neighbours)
    local = np.arange(n3)

    probes = [(c, j) for c in range(len(colours)) for j in range(n3)]
    rows, cols, vals = [], [], []
    for start in range(0, len(probes), batch):
        chunk = probes[start:start + batch]
        U = np.zeros((len(chunk), K, n3))
        for b, (c, j) in enumerate(chunk):
            U[b, colours[c], j] = 1.0
        out, _, _ = operator.laplacian(U.reshape((len(chunk),) + mesh.J.shape))
        out = out.reshape(len(chunk), K, n3)
        for b, (c, j) in enumerate(chunk):
            for e in colours[c]:
                f = np.asarray(closed[e])
                block = out[b, f]
                rows.append((f[:, None] * n3 + local[None, :]).ravel())
                cols.append(np.full(f.size * n3, e * n3 + j))
                vals.append(block.ravel())
    L = sparse.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                          shape=(ndof, ndof)).tocsr()
    L.eliminate_zeros()
    logger.debug(f"Laplace 矩阵组装完成：{len(colours)} 种颜色，{len(probes)} 个探测向量，非零元 {L.nnz}")
    return L


def assemble(operator: SpatialOperator, dt: float, S0: float) -> ImplicitOperator:
    """组装并分解修正步算子

    Args:
        operator: 空间算子（提供网格与物性）
        dt: 时间步长
        S0: 稳定化常数

    Returns:
        ImplicitOperator: 已分解的算子
    """
    if not dt > 0.0:
        raise ConfigError(f"时间步长必须为正: {dt}")
    if S0 < 0.0:
        raise ConfigError(f"稳定化常数不能为负: {S0}")
    params = operator.params
    t0 = time.perf_counter()
    L = laplacian_matrix(operator)
    ndof = L.shape[0]
    identity = sparse.identity(ndof, format='csr')
    A = identity / dt
    if params.M0 != 0.0:
        A = A - params.M0 * S0 * L + 0.75 * params.eps * params.M0 * (L @ L)
    A = sparse.csc_matrix(A)
    try:
        lu = spla.splu(A, permc_spec=IMPLICIT_CONFIG['permc_spec'])
    except RuntimeError as e:
        raise SolverSetupError(f"隐式算子分解失败: {e}")
    elapsed = time.perf_counter() - t0
    logger.info(f"隐式算子组装与分解完成：自由度 {ndof}，非零元 {A.nnz}，耗时 {elapsed:.2f}s")
    return ImplicitOperator(matrix=A, laplacian=L, lu=lu, dt=float(dt), S0=float(S0), M0=params.M0,
                            eps=params.eps, metadata={'nnz': int(A.nnz), 'seconds': elapsed})


def correction_solve(op: ImplicitOperator, c_hat: np.ndarray, c_n: np.ndarray, f_n: np.ndarray,
                     wall_lift: Optional[np.ndarray] = None) -> np.ndarray:
    """求解两种浓度的修正步

    A c^{n+1} = c_hat/dt + M0 L((12/eps) f^n) - M0 S0 L c^n - (3/4) eps M0 L b^n

    Args:
        op: 已分解的算子
        c_hat: 显式阶段的浓度 (2, K, n, n, n)
        c_n: 上一步浓度
        f_n: 上一步的体相化学势 f_i
        wall_lift: 接触角边界项 b^n，None 表示齐次 Neumann

    Returns:
        np.ndarray: c^{n+1}
    """
    if op.M0 == 0.0:
        return np.array(c_hat, copy=True)
    shape = c_hat.shape
    L = op.laplacian
    out = np.empty(shape)
    for i in range(shape[0]):
        rhs = c_hat[i].ravel() / op.dt
        rhs += op.M0 * (L @ (12.0 / op.eps * f_n[i].ravel()))
        rhs -= op.M0 * op.S0 * (L @ c_n[i].ravel())
        if wall_lift is not None:
            rhs -= 0.75 * op.eps * op.M0 * (L @ wall_lift[i].ravel())
        out[i] = op.solve(rhs).reshape(shape[1:])
    return out


def bulk_potentials(c: np.ndarray, params: pm.PhaseParams) -> np.ndarray:
    """修正步右端使用的 (f1, f2)"""
    f1, f2, _ = pm.bulk_potential(c[0], c[1], 1.0 - c[0] - c[1], params)
    return np.stack([f1, f2])
