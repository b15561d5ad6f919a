"""
IMEX 时间推进模块

第一步用三阶低存储 Runge-Kutta 显式推进 Navier-Stokes 项和浓度的对流输运
（不含 Cahn-Hilliard 扩散），第二步对两种浓度做隐式修正。
"""
import os
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
import pandas as pd

from config.settings import DEFAULT_CHECKPOINT_EVERY, DEFAULT_S0, OUTPUT_CONFIG, SMOKE_CONFIG
from core import phase_model as pm
from core.case_io import Checkpoint, write_checkpoint
from core.dg_operators import SpatialOperator
from core.implicit_ch import ImplicitOperator, assemble, bulk_potentials, correction_solve
from core.mesh import DGMesh
from utils.errors import ConfigError, NonphysicalDensityError, SolverError
from utils.file_utils import create_directory_if_not_exists
from utils.logger import get_logger

# 创建模块的logger
logger = get_logger(__name__)

# Williamson 三阶低存储系数
RK3_A = (0.0, -5.0 / 9.0, -153.0 / 128.0)
RK3_B = (1.0 / 3.0, 15.0 / 16.0, 8.0 / 15.0)
RK3_C = (0.0, 1.0 / 3.0, 3.0 / 4.0)


@dataclass
class ImexConfig:
    """时间推进参数

    Attributes:
        dt: 时间步长 (s)
        t_final: 终止时间 (s)
        S0: 稳定化常数
        checkpoint_every: 检查点间隔步数
        output_dir: 输出目录，None 表示不写文件
        config_hash: 写入检查点的配置指纹
    """

    dt: float
    t_final: float
    S0: float = DEFAULT_S0
    checkpoint_every: int = DEFAULT_CHECKPOINT_EVERY
    output_dir: Optional[str] = None
    config_hash: str = ''
    coefficients: tuple = field(default=(RK3_A, RK3_B, RK3_C), repr=False)

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ConfigError(f"时间步长必须为正: {self.dt}")
        if self.S0 < 0.0:
            raise ConfigError(f"稳定化常数不能为负: {self.S0}")
        if self.t_final < 0.0:
            raise ConfigError(f"终止时间不能为负: {self.t_final}")
        if int(self.checkpoint_every) < 1:
            raise ConfigError(f"检查点间隔必须为正整数: {self.checkpoint_every}")

    @property
    def steps(self) -> int:
        return int(round(self.t_final / self.dt))

    def time_of(self, step: int) -> float:
        return step * self.dt


@dataclass
class RunResult:
    """推进结果"""

    state: np.ndarray
    time: float
    step: int
    monitor: pd.DataFrame
    checkpoints: List[str] = field(default_factory=list)


def low_storage_rk3(rhs: Callable[[np.ndarray, float], np.ndarray], y: np.ndarray, t: float, dt: float,
                    coefficients=(RK3_A, RK3_B, RK3_C)) -> np.ndarray:
    """三阶低存储 Runge-Kutta 单步

    G = a_s G + dt R(y, t + c_s dt)；y += b_s G
    """
    a, b, c = coefficients
    y = np.array(y, dtype=float, copy=True)
    G = np.zeros_like(y)
    for s in range(3):
        G = a[s] * G + dt * rhs(y, t + c[s] * dt)
        y = y + b[s] * G
    return y


def explicit_stage(Q: np.ndarray, operator: SpatialOperator, t: float, dt: float) -> np.ndarray:
    """显式 RK3 阶段：浓度行只含对流，动量中保留毛细力和重力"""
    return low_storage_rk3(lambda q, s: operator.residual(q, s, ch_diffusion=False), Q, t, dt)


def imex_step(Q: np.ndarray, operator: SpatialOperator, implicit: Optional[ImplicitOperator], t: float,
              dt: float) -> np.ndarray:
    """完整 IMEX 步：显式阶段加浓度隐式修正

    Args:
        Q: t 时刻状态
        operator: 空间算子
        implicit: 修正步算子，None 或迁移率为零时跳过修正
        t: 当前时间
        dt: 步长

    Returns:
        np.ndarray: t + dt 时刻状态
    """
    Q_hat = explicit_stage(Q, operator, t, dt)
    if implicit is None or implicit.M0 == 0.0:
        return Q_hat
    c_n = Q[pm.CONCENTRATIONS]
    f_n = bulk_potentials(c_n, operator.params)
    lift = operator.wall_lift(c_n) if operator.has_contact_angle else None
    Q_hat[pm.CONCENTRATIONS] = correction_solve(implicit, Q_hat[pm.CONCENTRATIONS], c_n, f_n, lift)
    return Q_hat


def residual_monitor(c1_new: np.ndarray, c1_old: np.ndarray, dt: float) -> float:
    """浓度残差 max|c1_t|"""
    return float(np.max(np.abs(c1_new - c1_old)) / dt)


def cfl_number(Q: np.ndarray, operator: SpatialOperator, dt: float) -> float:
    """对流与人工声波的 CFL 诊断 dt * max(lambda) * N^2 / h"""
    params = operator.params
    mesh = operator.mesh
    rho, u = pm.recover_velocity(Q, params)
    speed = np.sqrt(np.sum(u * u, axis=0))
    lam = 0.5 * (speed + np.sqrt(speed ** 2 + 4.0 * params.sound_factor / rho))
    h = np.cbrt(mesh.volumes)
    per_element = lam.reshape(mesh.K, -1).max(axis=1) * max(mesh.basis.order, 1) ** 2 / h
    return float(dt * per_element.max())


def phase_fraction(Q: np.ndarray, phase: int) -> np.ndarray:
    """第 phase 相 (1, 2, 3) 的浓度，c3 = 1 - c1 - c2"""
    if phase == 3:
        return 1.0 - Q[pm.C1] - Q[pm.C2]
    if phase not in (1, 2):
        raise ConfigError(f"相编号必须为 1、2 或 3: {phase}")
    return Q[pm.C1 if phase == 1 else pm.C2]


def phase_centroid(Q: np.ndarray, mesh: DGMesh, phase: int, axis: int = 1) -> float:
    """某一相沿 axis 方向的质心坐标"""
    c = phase_fraction(Q, phase) * mesh.mass
    return float(np.sum(c * mesh.x[axis]) / np.sum(c))


def smoke_check(monitor: pd.DataFrame, growth_limit: float = SMOKE_CONFIG['growth_limit'],
                warmup_steps: int = SMOKE_CONFIG['warmup_steps']) -> bool:
    """冒烟检查：残差监控全部有限，且不超过预热期峰值的 growth_limit 倍

    Args:
        monitor: run 返回的监控表
        growth_limit: 允许的增长倍数
        warmup_steps: 用来确定初始峰值的前若干步

    Returns:
        bool: 是否通过
    """
    values = monitor['monitor'].to_numpy(dtype=float)
    if len(values) == 0:
        logger.warning("监控记录为空，冒烟检查无法判断")
        return False
    if not np.all(np.isfinite(values)):
        logger.error("冒烟检查失败：残差监控出现非有限值")
        return False
    peak = float(values[:warmup_steps].max())
    worst = float(values.max())
    if worst > growth_limit * peak:
        logger.error(f"冒烟检查失败：max|c1_t|={worst:.6e}，"
                     f"超过初始峰值 {peak:.6e} 的 {growth_limit:g} 倍")
        return False
    logger.info(f"冒烟检查通过：初始峰值 {peak:.6e}，最大值 {worst:.6e}")
    return True


def _monitor_history(directory: str, start_step: int) -> list:
    """重启时读回已有监控文件中不晚于 start_step 的记录"""
    path = os.path.join(directory, OUTPUT_CONFIG['monitor_name'])
    if start_step <= 0 or not os.path.exists(path):
        return []
    df = pd.read_csv(path)
    df = df[df['step'] <= start_step]
    logger.debug(f"读回 {len(df)} 条残差监控记录: {path}")
    return [{'step': int(r.step), 'time': float(r.time), 'monitor': float(r.monitor)} for r in df.itertuples()]


def _write_monitor(rows: list, directory: str):
    path = os.path.join(directory, OUTPUT_CONFIG['monitor_name'])
    pd.DataFrame(rows, columns=['step', 'time', 'monitor']).to_csv(
        path, index=False, float_format=OUTPUT_CONFIG['float_format'])


def run(Q0: np.ndarray, operator: SpatialOperator, config: ImexConfig, implicit: Optional[ImplicitOperator] = None,
        start_step: int = 0) -> RunResult:
    """推进到 t_final，按间隔写检查点和残差监控

    Args:
        Q0: 初始（或重启）状态
        operator: 空间算子
        config: 时间推进参数
        implicit: 预先分解的修正算子，None 时按需组装
        start_step: 重启时的起始步号

    Returns:
        RunResult: 最终状态与监控记录
    """
    dt = config.dt
    steps = config.steps
    params = operator.params
    if implicit is None and params.M0 != 0.0 and steps > start_step:
        implicit = assemble(operator, dt, config.S0)

    directory = config.output_dir
    if directory:
        create_directory_if_not_exists(directory)
    written = []

    def save(ckpt: Checkpoint, name: Optional[str] = None) -> str:
        path = os.path.join(directory, name or OUTPUT_CONFIG['checkpoint_name'].format(step=ckpt.step))
        write_checkpoint(path, ckpt)
        written.append(path)
        return path

    Q = np.array(Q0, dtype=float, copy=True)
    t = config.time_of(start_step)
    rows = []
    history = _monitor_history(directory, start_step) if directory else []
    last_good = Checkpoint(time=t, step=start_step, state=Q.copy(), monitor=float('nan'),
                           config_hash=config.config_hash)
    if directory and start_step == 0:
        save(last_good)
    logger.info(f"开始时间推进：dt={dt}, 步数 {steps - start_step}, S0={config.S0}, "
                f"初始 CFL {cfl_number(Q, operator, dt):.3f}")

    for k in range(start_step, steps):
        try:
            Q_new = imex_step(Q, operator, implicit, t, dt)
            if not np.all(np.isfinite(Q_new)):
                raise NonphysicalDensityError(f"第 {k + 1} 步出现非有限值")
        except SolverError as e:
            logger.error(f"时间推进在第 {k + 1} 步中止 (t={t:.6e}): {e}")
            if directory:
                path = save(last_good, f"abort_{OUTPUT_CONFIG['checkpoint_name'].format(step=last_good.step)}")
                logger.error(f"最后一个有效状态已写入 {path}")
            raise

        monitor = residual_monitor(Q_new[pm.C1], Q[pm.C1], dt)
        Q = Q_new
        t = config.time_of(k + 1)
        rows.append({'step': k + 1, 'time': t, 'monitor': monitor})

        if (k + 1) % config.checkpoint_every == 0 or k + 1 == steps:
            cfl = cfl_number(Q, operator, dt)
            logger.info(f"步 {k + 1}/{steps}: t={t:.6e}, max|c1_t|={monitor:.6e}, CFL={cfl:.3f}")
            last_good = Checkpoint(time=t, step=k + 1, state=Q.copy(), monitor=monitor,
                                   config_hash=config.config_hash)
            if directory:
                save(last_good)
                _write_monitor(history + rows, directory)

    return RunResult(state=Q, time=t, step=max(steps, start_step),
                     monitor=pd.DataFrame(rows, columns=['step', 'time', 'monitor']), checkpoints=written)
