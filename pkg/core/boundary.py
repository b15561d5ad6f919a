"""
边界条件模块

弱施加的入口、出口和无滑移壁面条件：虚拟（外部）状态、边界上的梯度
变量 W*、黏性数值通量，以及壁面接触角对应的浓度梯度通量。入口的分层
剖面由表观速度和滑移速度通过 Newton 迭代求出。
"""
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from config.settings import NEWTON_CONFIG
from core import phase_model as pm
from utils.errors import ConfigError, ConvergenceError, InconsistentInflowError
from utils.logger import get_logger

# 创建模块的logger
logger = get_logger(__name__)

WALL_ANGLE_TOLERANCE = 1e-10


# ---------------------------------------------------------------------------
# 边界参数
# ---------------------------------------------------------------------------

@dataclass
class InflowSpec:
    """入口参数

    Attributes:
        superficial: 三相表观速度 (m/s)；None 表示直接给定剖面
        slip12, slip23: 滑移速度 V1max - V2max、V2max - V3max (m/s)
        geometry: 'circular'（圆截面）或 'planar'（平面通道）
        radius: 圆截面半径或通道半高 (m)
        center: 截面中心
        up: 分层的竖直方向
        axis: 入流方向（指向计算域内部）
        bands: 自上而下三个条带中的相编号
        pinned: 固定的界面高度 {'upper': y, 'lower': y}
        v_max: 三相峰值速度（求解结果或直接给定）
        interfaces: (上界面, 下界面) 高度
    """

    superficial: Optional[Tuple[float, float, float]] = None
    slip12: float = 0.0
    slip23: float = 0.0
    geometry: str = 'circular'
    radius: float = 1.0
    center: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    up: Tuple[float, float, float] = (0.0, 0.0, 1.0)
    axis: Tuple[float, float, float] = (1.0, 0.0, 0.0)
    bands: Tuple[int, int, int] = (1, 2, 3)
    pinned: Dict[str, float] = field(default_factory=dict)
    v_max: Optional[Tuple[float, float, float]] = None
    interfaces: Optional[Tuple[float, float]] = None

    @property
    def solved(self) -> bool:
        return self.v_max is not None and self.interfaces is not None


@dataclass(frozen=True)
class WallSpec:
    """壁面接触角（弧度）"""

    theta12: float = np.pi / 2
    theta13: float = np.pi / 2
    theta23: float = np.pi / 2

    @classmethod
    def from_degrees(cls, theta12: float = 90.0, theta13: float = 90.0, theta23: float = 90.0) -> 'WallSpec':
        return cls(np.deg2rad(theta12), np.deg2rad(theta13), np.deg2rad(theta23))

    def check_equilibrium(self, params: pm.PhaseParams):
        """检查 sigma12 cos12 + sigma23 cos23 = sigma13 cos13"""
        gap = (params.sigma12 * np.cos(self.theta12) + params.sigma23 * np.cos(self.theta23)
               - params.sigma13 * np.cos(self.theta13))
        if abs(gap) > WALL_ANGLE_TOLERANCE:
            raise ConfigError(f"壁面接触角不满足平衡约束，偏差 {gap:.3e}")


@dataclass(frozen=True)
class OutflowSpec:
    """出口环境压力 (Pa)"""

    pressure: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.pressure):
            raise ConfigError(f"出口压力必须为有限值: {self.pressure}")


# ---------------------------------------------------------------------------
# 分层剖面
# ---------------------------------------------------------------------------

def layered_concentrations(s, upper: float, lower: float, bands: Sequence[int], eps: float) -> np.ndarray:
    """tanh 分层浓度，按相编号返回 (3, ...)

    上条带 (1 + tanh((s - upper)/eps))/2，下条带 (1 - tanh((s - lower)/eps))/2，
    中间条带为二者之补。
    """
    s = np.asarray(s, dtype=float)
    tu = np.tanh((s - upper) / eps)
    tl = np.tanh((s - lower) / eps)
    c = np.empty((3,) + s.shape)
    c[bands[0] - 1] = 0.5 * (1.0 + tu)
    c[bands[1] - 1] = 0.5 * (tl - tu)
    c[bands[2] - 1] = 0.5 * (1.0 - tl)
    return c


def _layer_sensitivities(s, upper: float, lower: float, bands: Sequence[int], eps: float) -> np.ndarray:
    """浓度对 (upper, lower) 的导数，形状 (3, 2, ...)"""
    s = np.asarray(s, dtype=float)
    su = 0.5 * (1.0 - np.tanh((s - upper) / eps) ** 2) / eps
    sl = 0.5 * (1.0 - np.tanh((s - lower) / eps) ** 2) / eps
    d = np.zeros((3, 2) + s.shape)
    d[bands[0] - 1, 0] = -su
    d[bands[1] - 1, 0] = su
    d[bands[1] - 1, 1] = -sl
    d[bands[2] - 1, 1] = sl
    return d


@dataclass(frozen=True)
class SectionQuadrature:
    """截面上带 Poiseuille 形状因子的一维积分规则

    sum(weights * g(heights)) = int_A g(s) (1 - (r/R)^2) dA
    """

    heights: np.ndarray
    weights: np.ndarray
    area: float
    extent: float


def section_quadrature(geometry: str, radius: float, panels: Optional[int] = None,
                       order: Optional[int] = None) -> SectionQuadrature:
    """复合 Gauss 积分

    圆截面按弦宽积分后只依赖高度 s = R sin(theta)，权函数 (4/3) R^2 cos^4(theta)；
    平面通道（单位宽度）的权函数为 1 - (s/h)^2。
    """
    panels = panels or NEWTON_CONFIG['section_panels']
    order = order or NEWTON_CONFIG['panel_order']
    g, w = np.polynomial.legendre.leggauss(order)
    if geometry == 'circular':
        edges = np.linspace(-np.pi / 2, np.pi / 2, panels + 1)
    elif geometry == 'planar':
        edges = np.linspace(-radius, radius, panels + 1)
    else:
        raise ConfigError(f"未知的入口截面类型: {geometry}")
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    t = (mid[:, None] + half[:, None] * g[None, :]).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    if geometry == 'circular':
        return SectionQuadrature(heights=radius * np.sin(t), weights=4.0 / 3.0 * radius ** 2 * np.cos(t) ** 4 * wt,
                                 area=np.pi * radius ** 2, extent=radius)
    return SectionQuadrature(heights=t, weights=(1.0 - (t / radius) ** 2) * wt, area=2.0 * radius, extent=radius)


def _profile_integrals(quad: SectionQuadrature, upper: float, lower: float, bands, eps: float) -> np.ndarray:
    return layered_concentrations(quad.heights, upper, lower, bands, eps) @ quad.weights


def superficial_velocities(spec: InflowSpec, params: pm.PhaseParams,
                           quad: Optional[SectionQuadrature] = None) -> np.ndarray:
    """由已求解（或给定）的剖面重新积分得到三相表观速度"""
    if not spec.solved:
        raise ConfigError("入口剖面尚未求解")
    quad = quad or section_quadrature(spec.geometry, spec.radius)
    I = _profile_integrals(quad, spec.interfaces[0], spec.interfaces[1], spec.bands, params.eps)
    return np.asarray(spec.v_max, dtype=float) * I / quad.area


def _slip_offsets(spec: InflowSpec) -> np.ndarray:
    """V_i = V_1 - offset_i"""
    return np.array([0.0, spec.slip12, spec.slip12 + spec.slip23])


def _initial_guess(spec: InflowSpec, v: np.ndarray, pins: Dict[str, float], quad: SectionQuadrature,
                   eps: float) -> Tuple[np.ndarray, float, float]:
    """两个界面都自由时用一维求根得到精确初值，否则按流量比例估计"""
    top, _, bot = (b - 1 for b in spec.bands)
    off = _slip_offsets(spec)
    total = float(np.sum(quad.weights))
    A = quad.area
    span = quad.extent + 20.0 * eps

    def top_integral(y, low):
        return _profile_integrals(quad, y, low, spec.bands, eps)[top]

    def bottom_integral(y, up):
        return _profile_integrals(quad, up, y, spec.bands, eps)[bot]

    def root(func, target):
        lo, hi = func(-span) - target, func(span) - target
        if lo * hi > 0.0:
            raise InconsistentInflowError(f"入口界面无法放在截面内 (目标积分 {target:.6e}, 截面积分 {total:.6e})")
        return brentq(lambda y: func(y) - target, -span, span, xtol=1e-14)

    flowing = v > 0.0
    if 'upper' not in pins and 'lower' not in pins:
        floor = float(np.max(off[flowing]))

        def balance(V1):
            return float(np.sum(v[flowing] * A / (V1 - off[flowing]))) - total

        hi = floor + 1.0
        while balance(hi) > 0.0:
            hi = floor + 2.0 * (hi - floor)
        V1 = brentq(balance, floor + 1e-12 * (1.0 + abs(floor)), hi, xtol=1e-14)
        V = V1 - off
        upper = root(lambda y: top_integral(y, -span), v[top] * A / V[top])
        lower = root(lambda y: bottom_integral(y, span), v[bot] * A / V[bot])
        return V, upper, lower

    fraction = v / np.sum(v)
    upper = pins.get('upper')
    lower = pins.get('lower')
    if upper is None:
        upper = root(lambda y: top_integral(y, -span), fraction[top] * total)
    if lower is None:
        lower = root(lambda y: bottom_integral(y, span), fraction[bot] * total)
    I = _profile_integrals(quad, upper, lower, spec.bands, eps)
    V1 = (A * np.sum(v) + np.sum(off * I)) / np.sum(I)
    return V1 - off, upper, lower


def solve_inflow_profile(spec: InflowSpec, params: pm.PhaseParams, jacobian: str = 'analytic') -> InflowSpec:
    """求解分层入口的峰值速度和界面高度

    未知量为 (V1max, V2max, V3max) 与未固定的界面高度，方程为两个滑移速度定义
    和三个表观速度积分。采用 Gauss-Newton 步（最小二乘）加回溯线搜索。

    Args:
        spec: 入口参数
        params: 物性参数（使用 eps）
        jacobian: 'analytic' 或 'fd'（前向差分）

    Returns:
        InflowSpec: 填好 v_max 与 interfaces 的新参数
    """
    if spec.superficial is None:
        if spec.solved:
            return spec
        raise ConfigError("入口需要给出表观速度，或同时给出 v_max 与 interfaces")
    if sorted(spec.bands) != [1, 2, 3]:
        raise ConfigError(f"条带相编号必须是 1、2、3 的排列: {spec.bands}")
    v = np.asarray(spec.superficial, dtype=float)
    if v.size != 3 or np.any(v < 0.0) or not np.any(v > 0.0):
        raise InconsistentInflowError(f"表观速度必须非负且至少一个为正: {tuple(v)}")

    eps = params.eps
    quad = section_quadrature(spec.geometry, spec.radius)
    top, mid, bot = (b - 1 for b in spec.bands)
    pins = dict(spec.pinned)
    span = quad.extent + 20.0 * eps
    if v[top] == 0.0 and 'upper' not in pins:
        pins['upper'] = span
    if v[bot] == 0.0 and 'lower' not in pins:
        pins['lower'] = -span
    if v[mid] == 0.0 and ('upper' not in pins or 'lower' not in pins):
        raise InconsistentInflowError("中间条带的相表观速度为零时必须固定两个界面")
    free = [name for name in ('upper', 'lower') if name not in pins]

    V, upper, lower = _initial_guess(spec, v, pins, quad, eps)
    start = {'upper': upper, 'lower': lower}
    x = np.concatenate([V, [start[name] for name in free]])
    A = quad.area

    def unpack(x):
        ys = dict(pins)
        ys.update(zip(free, x[3:]))
        return x[:3], ys['upper'], ys['lower']

    def residual(x):
        V, up, low = unpack(x)
        I = _profile_integrals(quad, up, low, spec.bands, eps)
        return np.concatenate([[V[0] - V[1] - spec.slip12, V[1] - V[2] - spec.slip23], V * I / A - v])

    def analytic_jacobian(x):
        V, up, low = unpack(x)
        I = _profile_integrals(quad, up, low, spec.bands, eps)
        dI = _layer_sensitivities(quad.heights, up, low, spec.bands, eps) @ quad.weights  # (3, 2)
        Jm = np.zeros((5, x.size))
        Jm[0, 0], Jm[0, 1] = 1.0, -1.0
        Jm[1, 1], Jm[1, 2] = 1.0, -1.0
        for i in range(3):
            Jm[2 + i, i] = I[i] / A
            for k, name in enumerate(free):
                Jm[2 + i, 3 + k] = V[i] * dI[i, 0 if name == 'upper' else 1] / A
        return Jm

    def fd_jacobian(x):
        r0 = residual(x)
        Jm = np.zeros((5, x.size))
        h = NEWTON_CONFIG['fd_step']
        for k in range(x.size):
            xp = x.copy()
            xp[k] += h * max(1.0, abs(x[k]))
            Jm[:, k] = (residual(xp) - r0) / (xp[k] - x[k])
        return Jm

    jac = analytic_jacobian if jacobian == 'analytic' else fd_jacobian
    tol = NEWTON_CONFIG['tolerance']
    r = residual(x)
    norm = float(np.max(np.abs(r)))
    for it in range(NEWTON_CONFIG['max_iterations']):
        if norm <= tol:
            break
        step = np.linalg.lstsq(jac(x), -r, rcond=None)[0]
        lam = 1.0
        while True:
            trial = x + lam * step
            r_trial = residual(trial)
            n_trial = float(np.max(np.abs(r_trial)))
            if n_trial < norm or lam < 1e-4:
                break
            lam *= 0.5
        x, r, norm = trial, r_trial, n_trial
        logger.debug(f"入口 Newton 第 {it + 1} 步: 残差 {norm:.3e}, 步长因子 {lam}")
    if norm > tol:
        raise ConvergenceError("入口剖面 Newton 迭代未收敛", norm, x)

    V, up, low = unpack(x)
    for name in free:
        y = up if name == 'upper' else low
        if abs(y) > quad.extent:
            raise InconsistentInflowError(f"{name} 界面高度 {y:.6f} 超出截面范围 ±{quad.extent}")
    if np.any(V[v > 0.0] <= 0.0):
        raise InconsistentInflowError(f"有流动相的峰值速度非正: {tuple(V)}")
    logger.info(f"入口剖面求解完成: Vmax={tuple(np.round(V, 10))}, 界面=({up:.6f}, {low:.6f})")
    return replace(spec, v_max=tuple(float(a) for a in V), interfaces=(float(up), float(low)), pinned=pins)


# ---------------------------------------------------------------------------
# 虚拟状态与边界通量
# ---------------------------------------------------------------------------

def _broadcast(vec, ndim: int) -> np.ndarray:
    return np.asarray(vec, dtype=float).reshape((3,) + (1,) * ndim)


def inflow_state(spec: InflowSpec, x: np.ndarray, params: pm.PhaseParams) -> Tuple[np.ndarray, np.ndarray]:
    """入口浓度 (2, ...) 与速度 (3, ...)"""
    if not spec.solved:
        raise ConfigError("入口剖面尚未求解")
    nd = x.ndim - 1
    rel = x - _broadcast(spec.center, nd)
    up = _broadcast(spec.up, nd)
    axis = _broadcast(spec.axis, nd)
    s = np.sum(rel * up, axis=0)
    if spec.geometry == 'circular':
        along = np.sum(rel * axis, axis=0)
        shape = 1.0 - (np.sum(rel * rel, axis=0) - along ** 2) / spec.radius ** 2
    else:
        shape = 1.0 - (s / spec.radius) ** 2
    shape = np.maximum(shape, 0.0)
    c = layered_concentrations(s, spec.interfaces[0], spec.interfaces[1], spec.bands, params.eps)
    speed = np.tensordot(np.asarray(spec.v_max, dtype=float), c, axes=1) * shape
    return c[:2], speed[None] * axis


def inflow_ghost(q_interior: np.ndarray, x: np.ndarray, t: float, spec: InflowSpec,
                 params: pm.PhaseParams) -> np.ndarray:
    """入口虚拟状态 (c_in, rho(c_in) u_in, p_interior)，入口参数不随时间变化"""
    c, u = inflow_state(spec, x, params)
    rho, _ = pm.mixture(c[0], c[1], params)
    ghost = np.empty(np.shape(q_interior))
    ghost[pm.CONCENTRATIONS] = c
    ghost[pm.MOMENTUM] = rho * u
    ghost[pm.P] = q_interior[pm.P]
    return ghost


def outflow_ghost(q_interior: np.ndarray, spec: OutflowSpec) -> np.ndarray:
    ghost = np.array(q_interior, dtype=float, copy=True)
    ghost[pm.P] = spec.pressure
    return ghost


def wall_ghost(q_interior: np.ndarray, normal: np.ndarray) -> np.ndarray:
    """无滑移壁面：法向速度反号，其余变量照抄"""
    ghost = np.array(q_interior, dtype=float, copy=True)
    m = q_interior[pm.MOMENTUM]
    mn = np.sum(m * normal, axis=0)
    ghost[pm.MOMENTUM] = m - 2.0 * mn * normal
    return ghost


def contact_angle_flux(C1, C2, wall: WallSpec, eps: float) -> np.ndarray:
    """接触角系数 (F_w1, F_w2)"""
    C3 = 1.0 - C1 - C2
    k = -4.0 / eps
    c12, c13, c23 = np.cos(wall.theta12), np.cos(wall.theta13), np.cos(wall.theta23)
    a12 = C1 * C2 * (C1 + C2)
    F1 = k * (c12 * a12 + c13 * C1 * C3 * (C1 + C3))
    F2 = k * (-c12 * a12 + c23 * C2 * C3 * (C1 + C3))
    return np.stack([F1, F2])


def wall_concentration_flux(C1, C2, wall: WallSpec, params: pm.PhaseParams) -> Tuple[np.ndarray, np.ndarray]:
    """壁面浓度界面值 C* = C 与法向梯度通量 G*_c . n = F_w"""
    return np.stack([C1, C2]), contact_angle_flux(C1, C2, wall, params.eps)


# ---------------------------------------------------------------------------
# 边界条件对象
# ---------------------------------------------------------------------------

class BoundaryCondition:
    """边界条件接口

    空间算子在每个带标签的边界面上调用：
      ghost_state      -> 无黏 Riemann 问题的外部状态
      gradient_star    -> 梯度提升用的界面值 W*
      viscous_flux     -> 黏性数值通量 F_v* . n（输入为内部黏性通量的法向分量）
      concentration_flux -> 浓度梯度通量 G*_c . n，None 表示齐次 Neumann
    """

    kind = 'base'

    def ghost_state(self, q_interior, x, normal, t, params):
        raise NotImplementedError

    def gradient_star(self, W_interior, ghost, normal, params):
        """势函数取内部值，动量和压力取内外平均"""
        W = np.array(W_interior, copy=True)
        W[pm.MX:] = 0.5 * (W_interior[pm.MX:] + ghost[pm.MX:])
        return W

    def viscous_flux(self, Fn_interior):
        """只保留动量行的内部黏性应力"""
        out = np.zeros(np.shape(Fn_interior))
        out[pm.MOMENTUM] = Fn_interior[pm.MOMENTUM]
        return out

    def concentration_flux(self, C, params) -> Optional[np.ndarray]:
        return None


class InflowBoundary(BoundaryCondition):
    kind = 'inflow'

    def __init__(self, spec: InflowSpec):
        self.spec = spec

    def ghost_state(self, q_interior, x, normal, t, params):
        return inflow_ghost(q_interior, x, t, self.spec, params)


class OutflowBoundary(BoundaryCondition):
    kind = 'outflow'

    def __init__(self, spec: OutflowSpec):
        self.spec = spec

    def ghost_state(self, q_interior, x, normal, t, params):
        return outflow_ghost(q_interior, self.spec)

    def gradient_star(self, W_interior, ghost, normal, params):
        return np.array(W_interior, copy=True)

    def viscous_flux(self, Fn_interior):
        return np.zeros(np.shape(Fn_interior))


class WallBoundary(BoundaryCondition):
    kind = 'wall'

    def __init__(self, spec: Optional[WallSpec] = None):
        self.spec = spec or WallSpec()

    def ghost_state(self, q_interior, x, normal, t, params):
        return wall_ghost(q_interior, normal)

    def concentration_flux(self, C, params):
        _, flux = wall_concentration_flux(C[0], C[1], self.spec, params)
        return flux


def build_boundary_conditions(specs: Dict[str, object], params: pm.PhaseParams) -> Dict[str, BoundaryCondition]:
    """由标签 -> 参数对象构造边界条件，检查壁面角度约束并求解入口剖面

    Args:
        specs: 标签 -> InflowSpec / OutflowSpec / WallSpec
        params: 物性参数

    Returns:
        Dict[str, BoundaryCondition]: 标签 -> 边界条件
    """
    out = {}
    for tag, spec in specs.items():
        if isinstance(spec, WallSpec):
            spec.check_equilibrium(params)
            out[tag] = WallBoundary(spec)
        elif isinstance(spec, OutflowSpec):
            out[tag] = OutflowBoundary(spec)
        elif isinstance(spec, InflowSpec):
            out[tag] = InflowBoundary(solve_inflow_profile(spec, params))
        else:
            raise ConfigError(f"边界 {tag} 的参数类型未知: {type(spec).__name__}")
        logger.info(f"边界 {tag}: {out[tag].kind}")
    return out
