"""
结果输出模块

把节点解写成点云 CSV（供表格和绘图工具读取）或 legacy VTK 非结构网格
（每个单元按节点剖分为 N^3 个子六面体）。
"""
from typing import Optional

import numpy as np
import pandas as pd

from config.settings import OUTPUT_CONFIG
from core import phase_model as pm
from core.mesh import DGMesh
from utils.errors import DimensionError
from utils.logger import get_logger

# 创建模块的logger
logger = get_logger(__name__)

# VTK 六面体的角点次序
VTK_HEX_OFFSETS = ((0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0), (0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1))
VTK_HEXAHEDRON = 12


def point_fields(mesh: DGMesh, Q: np.ndarray, params: pm.PhaseParams) -> pd.DataFrame:
    """节点上的原始变量表

    Returns:
        pd.DataFrame: 列 x, y, z, c1, c2, c3, u, v, w, p, rho，按 (单元, i, j, k) 排列
    """
    if Q.shape != (pm.NVAR,) + mesh.J.shape:
        raise DimensionError(f"状态形状 {Q.shape} 与网格 {mesh.J.shape} 不一致")
    rho, u = pm.recover_velocity(Q, params)
    c1, c2 = Q[pm.C1], Q[pm.C2]
    columns = {
        'x': mesh.x[0], 'y': mesh.x[1], 'z': mesh.x[2],
        'c1': c1, 'c2': c2, 'c3': 1.0 - c1 - c2,
        'u': u[0], 'v': u[1], 'w': u[2],
        'p': Q[pm.P], 'rho': rho,
    }
    return pd.DataFrame({name: np.ravel(values) for name, values in columns.items()})


def write_point_cloud(path: str, mesh: DGMesh, Q: np.ndarray, params: pm.PhaseParams) -> str:
    frame = point_fields(mesh, Q, params)
    frame.to_csv(path, index=False, float_format=OUTPUT_CONFIG['float_format'])
    logger.info(f"点云已写入 {path}: {len(frame)} 个节点")
    return path


def _sub_cells(K: int, n: int) -> np.ndarray:
    """全部子六面体的节点编号 (K N^3, 8)"""
    N = n - 1
    index = np.arange(K * n ** 3).reshape(K, n, n, n)
    cells = []
    for a, b, c in VTK_HEX_OFFSETS:
        cells.append(index[:, a:a + N, b:b + N, c:c + N].reshape(-1))
    return np.stack(cells, axis=1)


def write_vtk(path: str, mesh: DGMesh, Q: np.ndarray, params: pm.PhaseParams,
              title: Optional[str] = None) -> str:
    """写出 legacy ASCII VTK 非结构网格

    Args:
        path: 输出路径
        mesh: 离散网格
        Q: 状态场
        params: 物性参数
        title: 文件标题行

    Returns:
        str: 输出路径
    """
    frame = point_fields(mesh, Q, params)
    if mesh.n < 2:
        raise DimensionError("VTK 输出需要 N >= 1")
    cells = _sub_cells(mesh.K, mesh.n)
    fmt = OUTPUT_CONFIG['float_format']
    with open(path, 'w', encoding='utf-8') as f:
        f.write("# vtk DataFile Version 3.0\n")
        f.write(f"{title or 'three-phase flow solution'}\n")
        f.write("ASCII\nDATASET UNSTRUCTURED_GRID\n")
        f.write(f"POINTS {len(frame)} double\n")
        np.savetxt(f, frame[['x', 'y', 'z']].to_numpy(), fmt=fmt)
        f.write(f"CELLS {len(cells)} {9 * len(cells)}\n")
        np.savetxt(f, np.hstack([np.full((len(cells), 1), 8), cells]), fmt='%d')
        f.write(f"CELL_TYPES {len(cells)}\n")
        np.savetxt(f, np.full(len(cells), VTK_HEXAHEDRON), fmt='%d')
        f.write(f"POINT_DATA {len(frame)}\n")
        for name in ('c1', 'c2', 'c3', 'p', 'rho'):
            f.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            np.savetxt(f, frame[name].to_numpy(), fmt=fmt)
        f.write("VECTORS velocity double\n")
        np.savetxt(f, frame[['u', 'v', 'w']].to_numpy(), fmt=fmt)
    logger.info(f"VTK 已写入 {path}: {len(frame)} 个点，{len(cells)} 个子单元")
    return path
