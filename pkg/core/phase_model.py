"""
三相物性模块

参数推导、混合规则、自由能及其导数、化学势代数、通量与源项。
所有函数按分量作用于任意形状的节点数组；状态向量的第一维为变量
(c1, c2, rho*u, rho*v, rho*w, p)。
"""
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from config.settings import PARAMETER_TABLES
from utils.errors import ConfigError, DimensionError, NonphysicalDensityError, SingularSpreadingFactorError
from utils.logger import get_logger

# 创建模块的logger
logger = get_logger(__name__)

# 状态向量分量编号
C1, C2, MX, MY, MZ, P = range(6)
NVAR = 6
MOMENTUM = slice(MX, MZ + 1)
CONCENTRATIONS = slice(C1, C2 + 1)


@dataclass(frozen=True)
class PhaseParams:
    """三相物性参数

    Attributes:
        rho: 三相密度 (kg/m^3)
        eta: 三相黏度 (Pa·s)
        sigma12, sigma13, sigma23: 界面张力 (N/m)
        eps: 界面厚度 (m)
        M0: 迁移率 (m/s)
        c0: 人工声速 (m/s)
        rho0: 参考密度，取三相密度最大值
        Sigma: 铺展系数
        SigmaT: 3/SigmaT = sum 1/Sigma_i
        gravity: 重力加速度向量 (m/s^2)
        density_floor: 速度恢复时的密度下限，None 表示不截断
    """

    rho: np.ndarray
    eta: np.ndarray
    sigma12: float
    sigma13: float
    sigma23: float
    eps: float
    M0: float
    c0: float
    rho0: float
    Sigma: np.ndarray
    SigmaT: float
    gravity: np.ndarray
    density_floor: Optional[float] = None

    @property
    def c0_squared(self) -> float:
        return self.c0 * self.c0

    @property
    def sound_factor(self) -> float:
        """rho0 * c0^2"""
        return self.rho0 * self.c0 * self.c0

    @property
    def potential_matrix(self) -> np.ndarray:
        """f = K @ dF0 的系数矩阵"""
        S = self.Sigma
        K = -self.SigmaT / (3.0 * S[:, None] * S[None, :])
        for i in range(3):
            K[i, i] = self.SigmaT / (3.0 * S[i]) * sum(1.0 / S[j] for j in range(3) if j != i)
        return K

    def as_dict(self) -> dict:
        """配置回显用的扁平字典"""
        return {
            'rho': tuple(float(v) for v in self.rho),
            'eta': tuple(float(v) for v in self.eta),
            'sigma12': self.sigma12,
            'sigma13': self.sigma13,
            'sigma23': self.sigma23,
            'eps': self.eps,
            'mobility': self.M0,
            'c0_squared': self.c0_squared,
            'gravity': tuple(float(v) for v in self.gravity),
            'rho0': self.rho0,
            'Sigma': tuple(float(v) for v in self.Sigma),
            'SigmaT': self.SigmaT,
            'density_floor': self.density_floor,
        }


def _triple(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size != 3:
        raise DimensionError(f"{name} 需要 3 个分量，实际 {arr.size} 个")
    return arr


def derive_params(rho: Sequence[float], eta: Sequence[float], sigma12: float, sigma13: float, sigma23: float,
                  eps: float, M0: float, c0: Optional[float] = None, gravity: Sequence[float] = (0.0, 0.0, 0.0),
                  c0_squared: Optional[float] = None, density_floor: Optional[float] = None) -> PhaseParams:
    """由输入物性推导铺展系数、Sigma_T 和参考密度

    c0 与 c0_squared 二选一。

    Returns:
        PhaseParams: 完整参数
    """
    rho = _triple(rho, 'rho')
    eta = _triple(eta, 'eta')
    gravity = _triple(gravity, 'gravity')
    if (c0 is None) == (c0_squared is None):
        raise ConfigError("c0 与 c0_squared 必须且只能给出一个")
    if c0 is None:
        if c0_squared <= 0.0:
            raise ConfigError(f"c0_squared 必须为正: {c0_squared}")
        c0 = float(np.sqrt(c0_squared))

    for name, value in (('rho', rho.min()), ('eta', eta.min()), ('sigma12', sigma12), ('sigma13', sigma13),
                        ('sigma23', sigma23), ('eps', eps), ('mobility', M0), ('c0', c0)):
        if not value > 0.0:
            raise ConfigError(f"{name} 必须为正: {value}")
    Sigma = np.array([
        sigma12 + sigma13 - sigma23,
        sigma12 + sigma23 - sigma13,
        sigma13 + sigma23 - sigma12,
    ])
    if np.any(Sigma == 0.0):
        raise SingularSpreadingFactorError(f"铺展系数为零: Sigma = {tuple(Sigma)}")
    inv_sum = float(np.sum(1.0 / Sigma))
    if inv_sum == 0.0:
        raise SingularSpreadingFactorError(f"1/Sigma 之和为零，Sigma_T 无定义: Sigma = {tuple(Sigma)}")

    params = PhaseParams(rho=rho, eta=eta, sigma12=float(sigma12), sigma13=float(sigma13), sigma23=float(sigma23),
                         eps=float(eps), M0=float(M0), c0=float(c0), rho0=float(rho.max()), Sigma=Sigma,
                         SigmaT=3.0 / inv_sum, gravity=gravity, density_floor=density_floor)
    logger.debug(f"物性参数: Sigma={tuple(Sigma)}, SigmaT={params.SigmaT:.6e}, rho0={params.rho0}")
    return params


def with_mobility(params: PhaseParams, M0: float) -> PhaseParams:
    """返回仅迁移率不同的参数副本"""
    return replace(params, M0=float(M0))


# ---------------------------------------------------------------------------
# 混合规则与自由能
# ---------------------------------------------------------------------------

def mixture(c1, c2, params: PhaseParams) -> Tuple[np.ndarray, np.ndarray]:
    """线性混合密度与黏度，c3 = 1 - c1 - c2"""
    c3 = 1.0 - c1 - c2
    rho = params.rho[0] * c1 + params.rho[1] * c2 + params.rho[2] * c3
    eta = params.eta[0] * c1 + params.eta[1] * c2 + params.eta[2] * c3
    return rho, eta


def density_gradient(grad_c, params: PhaseParams) -> np.ndarray:
    """grad rho = (rho1-rho3) grad c1 + (rho2-rho3) grad c2

    grad_c 形状 (2, 3, ...)
    """
    r = params.rho
    return (r[0] - r[2]) * grad_c[0] + (r[1] - r[2]) * grad_c[1]


def free_energy(c1, c2, c3, params: PhaseParams):
    """化学自由能 F0"""
    S = params.Sigma
    return (params.sigma12 * c1 ** 2 * c2 ** 2 + params.sigma13 * c1 ** 2 * c3 ** 2
            + params.sigma23 * c2 ** 2 * c3 ** 2 + c1 * c2 * c3 * (S[0] * c1 + S[1] * c2 + S[2] * c3))


def free_energy_derivatives(c1, c2, c3, params: PhaseParams) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """F0 对 c1、c2、c3 的偏导数，三者视为独立变量"""
    S = params.Sigma
    s12, s13, s23 = params.sigma12, params.sigma13, params.sigma23
    mix = S[0] * c1 + S[1] * c2 + S[2] * c3
    triple = c1 * c2 * c3
    d1 = 2.0 * s12 * c1 * c2 ** 2 + 2.0 * s13 * c1 * c3 ** 2 + c2 * c3 * mix + triple * S[0]
    d2 = 2.0 * s12 * c1 ** 2 * c2 + 2.0 * s23 * c2 * c3 ** 2 + c1 * c3 * mix + triple * S[1]
    d3 = 2.0 * s13 * c1 ** 2 * c3 + 2.0 * s23 * c2 ** 2 * c3 + c1 * c2 * mix + triple * S[2]
    return d1, d2, d3


def bulk_potential(c1, c2, c3, params: PhaseParams) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """体相化学势 f_i = (Sigma_T/(3 Sigma_i)) sum_{j!=i} (dF0/dc_i - dF0/dc_j)/Sigma_j"""
    d = free_energy_derivatives(c1, c2, c3, params)
    S, ST = params.Sigma, params.SigmaT
    out = []
    for i in range(3):
        acc = sum((d[i] - d[j]) / S[j] for j in range(3) if j != i)
        out.append(ST / (3.0 * S[i]) * acc)
    return tuple(out)


def scaled_potentials(c1, c2, lap_c1, lap_c2, params: PhaseParams) -> np.ndarray:
    """梯度变量 w_i = mu_i / Sigma_i = (12/eps) f_i - (3/4) eps lap(c_i)，i = 1, 2"""
    f1, f2, _ = bulk_potential(c1, c2, 1.0 - c1 - c2, params)
    k = 12.0 / params.eps
    q = 0.75 * params.eps
    return np.stack([k * f1 - q * lap_c1, k * f2 - q * lap_c2])


def potentials_from_scaled(w, params: PhaseParams) -> np.ndarray:
    """由 (w1, w2) 得到 (mu1, mu2, mu3)，mu3 由约束 sum mu_i/Sigma_i = 0 给出"""
    S = params.Sigma
    return np.stack([S[0] * w[0], S[1] * w[1], -S[2] * (w[0] + w[1])])


def chemical_potential_pointwise(c, lap_c, params: PhaseParams) -> np.ndarray:
    """直接按定义计算三个化学势 mu_i = (12/eps) Sigma_i f_i - (3/4) eps Sigma_i lap(c_i)

    c、lap_c 形状 (3, ...)，用于独立检查约束关系
    """
    f = bulk_potential(c[0], c[1], c[2], params)
    S = params.Sigma
    return np.stack([S[i] * (12.0 / params.eps * f[i] - 0.75 * params.eps * lap_c[i]) for i in range(3)])


def two_phase_potential(c, lap_c, sigma: float, eps: float):
    """两相化学势 mu = (12 sigma/eps) d/dc(c^2 (1-c)^2) - (3/2) sigma eps lap(c)"""
    return 12.0 * sigma / eps * 2.0 * c * (1.0 - c) * (1.0 - 2.0 * c) - 1.5 * sigma * eps * lap_c


def reduced_mobility(params: PhaseParams) -> float:
    """第二相缺失时等效两相模型的迁移率 M0 Sigma_1 / (2 sigma13)"""
    return params.M0 * params.Sigma[0] / (2.0 * params.sigma13)


# ---------------------------------------------------------------------------
# 通量与源项
# ---------------------------------------------------------------------------

def recover_velocity(q, params: PhaseParams) -> Tuple[np.ndarray, np.ndarray]:
    """由守恒变量恢复混合密度与速度

    Args:
        q: 状态数组，形状 (6, ...)
        params: 物性参数

    Returns:
        Tuple[np.ndarray, np.ndarray]: rho (...) 与 u (3, ...)
    """
    rho, _ = mixture(q[C1], q[C2], params)
    floor = params.density_floor
    if floor is not None:
        rho = np.maximum(rho, floor)
    elif np.any(rho <= 0.0) or not np.all(np.isfinite(rho)):
        bad = np.where(np.isfinite(rho), rho, -np.inf)
        flat = int(np.argmin(bad))
        index = np.unravel_index(flat, np.shape(rho))
        value = float(np.ravel(rho)[flat])
        if len(index) >= 4:
            raise NonphysicalDensityError("混合密度非正", int(index[-4]), index[-3:], value)
        raise NonphysicalDensityError(f"混合密度非正 (位置 {tuple(int(i) for i in index)}, rho={value:.6e})")
    return rho, q[MOMENTUM] / rho


def inviscid_flux(q, params: PhaseParams) -> np.ndarray:
    """无黏通量 f_e，形状 (6, 3, ...)，第二维为物理方向"""
    rho, u = recover_velocity(q, params)
    shape = (NVAR, 3) + np.shape(rho)
    F = np.zeros(shape)
    F[C1] = q[C1] * u
    F[C2] = q[C2] * u
    for k in range(3):
        F[MX + k] = q[MX + k] * u
        F[MX + k, k] += q[P]
    F[P] = params.sound_factor * u
    return F


def velocity_gradient(q, grad_mom, grad_c, params: PhaseParams) -> np.ndarray:
    """grad u[k, d] = (d(rho u_k)/dx_d - u_k d rho/dx_d) / rho"""
    rho, u = recover_velocity(q, params)
    grad_rho = density_gradient(grad_c, params) if grad_c is not None else np.zeros_like(grad_mom[0])
    return (grad_mom - u[:, None] * grad_rho[None]) / rho


def viscous_flux(q, grad_w, params: PhaseParams, grad_c=None) -> np.ndarray:
    """黏性通量 f_v，形状 (6, 3, ...)

    Args:
        q: 状态数组 (6, ...)
        grad_w: 梯度变量 (w1, w2, rho u, p) 的梯度，形状 (6, 3, ...)
        params: 物性参数
        grad_c: 浓度梯度 (2, 3, ...)，用于速度梯度中的密度梯度项

    Returns:
        np.ndarray: 通量
    """
    grad_w = np.asarray(grad_w)
    F = np.zeros(grad_w.shape)
    F[C1] = params.M0 * grad_w[C1]
    F[C2] = params.M0 * grad_w[C2]
    _, eta = mixture(q[C1], q[C2], params)
    gu = velocity_gradient(q, grad_w[MOMENTUM], grad_c, params)
    F[MOMENTUM] = eta * (gu + np.swapaxes(gu, 0, 1))
    return F


def source_term(q, grad_c, mu, params: PhaseParams) -> np.ndarray:
    """源项：动量方程中的重力与毛细力 rho g + sum mu_m grad c_m

    Args:
        q: 状态数组 (6, ...)
        grad_c: (grad c1, grad c2)，形状 (2, 3, ...)
        mu: (mu1, mu2, mu3)
        params: 物性参数

    Returns:
        np.ndarray: (6, ...)
    """
    rho, _ = mixture(q[C1], q[C2], params)
    s = np.zeros(np.shape(q))
    capillary = (mu[0] - mu[2]) * grad_c[0] + (mu[1] - mu[2]) * grad_c[1]
    for k in range(3):
        s[MX + k] = rho * params.gravity[k] + capillary[k]
    return s


def table_params(name: str, **overrides) -> PhaseParams:
    """由 PARAMETER_TABLES 中的参数集构造物性参数，关键字可覆盖表中数值"""
    if name not in PARAMETER_TABLES:
        raise ConfigError(f"未知的参数表: {name}")
    values = dict(PARAMETER_TABLES[name])
    values.update(overrides)
    M0 = values.pop('mobility')
    return derive_params(M0=M0, **values)
