"""
制造解校验模块

解析场、源项合成（附有限差分校验）、L2 误差与收敛表。
二维算例在 (x, y) 平面内给出，计算时使用 z 方向周期的单层厚板网格。
"""
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from numpy.polynomial import polynomial as P

from config.settings import OUTPUT_CONFIG, SYNTHESIS_CONFIG
from core import phase_model as pm
from core.dg_operators import SpatialOperator
from core.mesh import DGMesh, build_discretization, slab_topology
from core.spectral import gauss_lobatto, interpolation_matrix
from core.time_integration import ImexConfig, run
from utils.errors import SolverError, SynthesisError
from utils.logger import get_logger

# 创建模块的logger
logger = get_logger(__name__)

HALF_PI = 0.5 * np.pi
CONST = (0.0, HALF_PI)

# 误差变量：名称 -> 状态分量
ERROR_VARIABLES = {'c1': pm.C1, 'c2': pm.C2, 'mx': pm.MX, 'my': pm.MY, 'p': pm.P}


# ---------------------------------------------------------------------------
# 可分离解析场
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeparableField:
    """sum coef * sin(kx x + px) sin(ky y + py) sin(kt t + pt)

    每一项为 (coef, ((kx, px), (ky, py), (kt, pt)))，常数因子取 k = 0, p = pi/2。
    """

    terms: Tuple = ()

    def __call__(self, x, y, t, d: Sequence[int] = (0, 0, 0)):
        shape = np.broadcast(np.asarray(x), np.asarray(y), np.asarray(t)).shape
        out = np.zeros(shape)
        for coef, factors in self.terms:
            value = coef
            for arg, (k, phase), n in zip((x, y, t), factors, d):
                value = value * k ** n * np.sin(k * np.asarray(arg) + phase + n * HALF_PI)
            out = out + value
        return out

    def __add__(self, other: 'SeparableField') -> 'SeparableField':
        return SeparableField(self.terms + other.terms)


def wave(coef: float, x=CONST, y=CONST, t=CONST) -> SeparableField:
    return SeparableField(((coef, (x, y, t)),))


def constant(value: float) -> SeparableField:
    return wave(value)


SIN_PX = (np.pi, 0.0)
COS_PX = (np.pi, HALF_PI)


@dataclass
class ManufacturedCase:
    """制造解算例

    Attributes:
        name: 算例名称
        fields: c1, c2, u, v, p 的解析表达式（w 恒为零）
        params: 物性参数
        table: 参数表名
    """

    name: str
    fields: Dict[str, SeparableField]
    params: pm.PhaseParams
    table: str = ''
    _source: Optional[Callable] = field(default=None, repr=False)

    def primitive(self, x, y, t, d=(0, 0, 0)) -> Dict[str, np.ndarray]:
        return {k: f(x, y, t, d) for k, f in self.fields.items()}

    def state(self, x: np.ndarray, t: float) -> np.ndarray:
        """节点坐标 (3, ...) 上的守恒状态"""
        f = self.primitive(x[0], x[1], t)
        rho, _ = pm.mixture(f['c1'], f['c2'], self.params)
        Q = np.zeros((pm.NVAR,) + np.shape(x[0]))
        Q[pm.C1] = f['c1']
        Q[pm.C2] = f['c2']
        Q[pm.MX] = rho * f['u']
        Q[pm.MY] = rho * f['v']
        Q[pm.P] = f['p']
        return Q

    @property
    def source(self) -> Callable[[np.ndarray, float], np.ndarray]:
        """经差分校验的源项 source(x, t)"""
        if self._source is None:
            self._source = synthesize_sources(self, self.params)
        return self._source


def two_phase_case(params: Optional[pm.PhaseParams] = None) -> ManufacturedCase:
    """两相制造解：c2 = 0"""
    fields = {
        'c1': constant(0.5) + wave(0.5, COS_PX, COS_PX, (1.0, 0.0)),
        'c2': SeparableField(),
        'u': wave(2.0, SIN_PX, COS_PX, (1.0, 0.0)),
        'v': wave(-2.0, COS_PX, SIN_PX, (1.0, 0.0)),
        'p': wave(2.0, SIN_PX, SIN_PX, (1.0, HALF_PI)),
    }
    return ManufacturedCase('two_phase', fields, params or pm.table_params('mms_two_phase'), 'mms_two_phase')


def three_phase_case(params: Optional[pm.PhaseParams] = None) -> ManufacturedCase:
    fields = {
        'c1': constant(1.0 / 3.0) + wave(1.0 / 3.0, COS_PX, SIN_PX, (1.0, 0.0)),
        'c2': constant(1.0 / 3.0) + wave(1.0 / 3.0, COS_PX, SIN_PX, (1.2, 0.0)),
        'u': wave(2.0, SIN_PX, COS_PX, (1.0, 0.0)),
        'v': wave(-2.0, COS_PX, SIN_PX, (1.0, 0.0)),
        'p': wave(2.0, SIN_PX, SIN_PX, (1.0, HALF_PI)),
    }
    return ManufacturedCase('three_phase', fields, params or pm.table_params('mms_three_phase'), 'mms_three_phase')


# ---------------------------------------------------------------------------
# 自由能多项式
# ---------------------------------------------------------------------------

def free_energy_coefficients(params: pm.PhaseParams) -> np.ndarray:
    """F0 的三元多项式系数 C[i, j, k]，对应 c1^i c2^j c3^k"""
    C = np.zeros((5, 5, 5))
    S = params.Sigma
    C[2, 2, 0] = params.sigma12
    C[2, 0, 2] = params.sigma13
    C[0, 2, 2] = params.sigma23
    C[2, 1, 1] = S[0]
    C[1, 2, 1] = S[1]
    C[1, 1, 2] = S[2]
    return C


def _der(C: np.ndarray, axis: int) -> np.ndarray:
    """保持形状的多项式偏导"""
    D = P.polyder(C, axis=axis)
    pad = [(0, 0)] * 3
    pad[axis] = (0, C.shape[axis] - D.shape[axis])
    return np.pad(D, pad)


def _reduced(C: np.ndarray, a: int) -> np.ndarray:
    """沿 e_a - e_3 方向的导数（c3 = 1 - c1 - c2）"""
    return _der(C, a) - _der(C, 2)


def bulk_potential_polynomials(params: pm.PhaseParams):
    """f_i 及其对 (c1, c2) 的一、二阶导数的多项式系数

    Returns:
        Tuple: (f[2], df[2][2], d2f[2][2][2])
    """
    C = free_energy_coefficients(params)
    dF = [_der(C, j) for j in range(3)]
    K = params.potential_matrix
    f = [sum(K[i, j] * dF[j] for j in range(3)) for i in range(2)]
    df = [[_reduced(f[i], a) for a in range(2)] for i in range(2)]
    d2f = [[[_reduced(df[i][a], b) for b in range(2)] for a in range(2)] for i in range(2)]
    return f, df, d2f


def _polyval(coeffs, c1, c2):
    return P.polyval3d(c1, c2, 1.0 - c1 - c2, coeffs)


# ---------------------------------------------------------------------------
# 源项
# ---------------------------------------------------------------------------

def analytic_sources(case: ManufacturedCase, params: pm.PhaseParams, x, y, t) -> np.ndarray:
    """连续方程左端减右端，形状 (6, ...)"""
    F = case.fields
    c = [F['c1'], F['c2']]
    vel = [F['u'], F['v']]

    def d(f, dx=0, dy=0, dt=0):
        return f(x, y, t, (dx, dy, dt))

    cv = [d(ci) for ci in c]
    gc = [[d(ci, 1, 0), d(ci, 0, 1)] for ci in c]
    lap = [d(ci, 2, 0) + d(ci, 0, 2) for ci in c]
    bilap = [d(ci, 4, 0) + 2.0 * d(ci, 2, 2) + d(ci, 0, 4) for ci in c]

    fpoly, dfpoly, d2fpoly = bulk_potential_polynomials(params)
    eps = params.eps
    w, lap_w = [], []
    for i in range(2):
        fi = _polyval(fpoly[i], cv[0], cv[1])
        lap_f = sum(_polyval(dfpoly[i][a], cv[0], cv[1]) * lap[a] for a in range(2))
        for a in range(2):
            for b in range(2):
                dot = gc[a][0] * gc[b][0] + gc[a][1] * gc[b][1]
                lap_f = lap_f + _polyval(d2fpoly[i][a][b], cv[0], cv[1]) * dot
        w.append(12.0 / eps * fi - 0.75 * eps * lap[i])
        lap_w.append(12.0 / eps * lap_f - 0.75 * eps * bilap[i])
    mu = pm.potentials_from_scaled(w, params)

    U = [d(vi) for vi in vel]
    gU = [[d(vi, 1, 0), d(vi, 0, 1)] for vi in vel]
    div = gU[0][0] + gU[1][1]
    out = np.zeros((pm.NVAR,) + np.shape(cv[0]))
    for i in range(2):
        adv = U[0] * gc[i][0] + U[1] * gc[i][1] + cv[i] * div
        out[pm.C1 + i] = d(c[i], dt=1) + adv - params.M0 * lap_w[i]

    r, e = params.rho, params.eta
    rho, eta = pm.mixture(cv[0], cv[1], params)
    grad_rho = [(r[0] - r[2]) * gc[0][k] + (r[1] - r[2]) * gc[1][k] for k in range(2)]
    grad_eta = [(e[0] - e[2]) * gc[0][k] + (e[1] - e[2]) * gc[1][k] for k in range(2)]
    rho_t = (r[0] - r[2]) * d(c[0], dt=1) + (r[1] - r[2]) * d(c[1], dt=1)
    second = [[[d(vi, 2, 0), d(vi, 1, 1)], [d(vi, 1, 1), d(vi, 0, 2)]] for vi in vel]  # second[k][a][b]
    grad_p = [d(F['p'], 1, 0), d(F['p'], 0, 1)]
    rho_dot_u = grad_rho[0] * U[0] + grad_rho[1] * U[1]
    for k in range(2):
        unsteady = rho_t * U[k] + rho * d(vel[k], dt=1)
        convective = rho_dot_u * U[k] + rho * (U[0] * gU[k][0] + U[1] * gU[k][1]) + rho * U[k] * div
        viscous = sum(grad_eta[a] * (gU[k][a] + gU[a][k]) for a in range(2))
        viscous = viscous + eta * sum(second[k][a][a] + second[a][k][a] for a in range(2))
        capillary = (mu[0] - mu[2]) * gc[0][k] + (mu[1] - mu[2]) * gc[1][k]
        out[pm.MX + k] = unsteady + convective + grad_p[k] - viscous - capillary - rho * params.gravity[k]
    out[pm.MZ] = -rho * params.gravity[2]
    out[pm.P] = d(F['p'], dt=1) + params.sound_factor * div
    return out


# 有限差分模板
FD_FIRST = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0.0, 4 / 5, -1 / 5, 4 / 105, -1 / 280])
FD_SECOND = np.array([-1 / 560, 8 / 315, -1 / 5, 8 / 5, -205 / 72, 8 / 5, -1 / 5, 8 / 315, -1 / 560])
FD_TIME = np.array([-1 / 60, 3 / 20, -3 / 4, 0.0, 3 / 4, -3 / 20, 1 / 60])


def _fd(func, axis: int, order: int = 1, h: Optional[float] = None):
    """返回 func 沿 axis (0=x, 1=y, 2=t) 的差分导数函数"""
    if axis == 2:
        weights = FD_TIME
        h = h or SYNTHESIS_CONFIG['time_step']
    else:
        weights = FD_FIRST if order == 1 else FD_SECOND
        h = h or SYNTHESIS_CONFIG['space_step']
    offsets = np.arange(weights.size) - weights.size // 2

    def derivative(x, y, t):
        acc = 0.0
        for w, o in zip(weights, offsets):
            if w == 0.0:
                continue
            shift = [x, y, t]
            shift[axis] = shift[axis] + o * h
            acc = acc + w * func(*shift)
        return acc / h ** order

    return derivative


def oracle_sources(case: ManufacturedCase, params: pm.PhaseParams, x, y, t) -> np.ndarray:
    """只用场值和高阶中心差分计算的源项"""
    F = case.fields
    c = [lambda a, b, s, f=F['c1']: f(a, b, s), lambda a, b, s, f=F['c2']: f(a, b, s)]
    vel = [lambda a, b, s, f=F['u']: f(a, b, s), lambda a, b, s, f=F['v']: f(a, b, s)]
    p = F['p']
    eps = params.eps

    def lap(func):
        fxx, fyy = _fd(func, 0, 2), _fd(func, 1, 2)
        return lambda a, b, s: fxx(a, b, s) + fyy(a, b, s)

    def w(i):
        lap_c = lap(c[i])

        def value(a, b, s):
            f = pm.bulk_potential(c[0](a, b, s), c[1](a, b, s), 1.0 - c[0](a, b, s) - c[1](a, b, s), params)
            return 12.0 / eps * f[i] - 0.75 * eps * lap_c(a, b, s)
        return value

    def rho_of(a, b, s):
        return pm.mixture(c[0](a, b, s), c[1](a, b, s), params)[0]

    def eta_of(a, b, s):
        return pm.mixture(c[0](a, b, s), c[1](a, b, s), params)[1]

    out = np.zeros((pm.NVAR,) + np.shape(x))
    for i in range(2):
        flux = [lambda a, b, s, i=i, k=k: c[i](a, b, s) * vel[k](a, b, s) for k in range(2)]
        adv = _fd(flux[0], 0)(x, y, t) + _fd(flux[1], 1)(x, y, t)
        out[pm.C1 + i] = _fd(c[i], 2)(x, y, t) + adv - params.M0 * lap(w(i))(x, y, t)

    ws = [w(0), w(1)]
    mu = pm.potentials_from_scaled([ws[0](x, y, t), ws[1](x, y, t)], params)
    rho = rho_of(x, y, t)
    for k in range(2):
        momentum = lambda a, b, s, k=k: rho_of(a, b, s) * vel[k](a, b, s)
        total = _fd(momentum, 2)(x, y, t) + _fd(p, k)(x, y, t)
        for dd in range(2):
            flux = lambda a, b, s, k=k, dd=dd: rho_of(a, b, s) * vel[k](a, b, s) * vel[dd](a, b, s)

            def stress(a, b, s, k=k, dd=dd):
                return eta_of(a, b, s) * (_fd(vel[k], dd)(a, b, s) + _fd(vel[dd], k)(a, b, s))

            total = total + _fd(flux, dd)(x, y, t) - _fd(stress, dd)(x, y, t)
        capillary = (mu[0] - mu[2]) * _fd(c[0], k)(x, y, t) + (mu[1] - mu[2]) * _fd(c[1], k)(x, y, t)
        out[pm.MX + k] = total - capillary - rho * params.gravity[k]
    out[pm.MZ] = -rho * params.gravity[2]
    div = _fd(vel[0], 0)(x, y, t) + _fd(vel[1], 1)(x, y, t)
    out[pm.P] = _fd(p, 2)(x, y, t) + params.sound_factor * div
    return out


def synthesize_sources(case: ManufacturedCase, params: pm.PhaseParams,
                       points: Optional[int] = None, seed: Optional[int] = None) -> Callable[[np.ndarray, float], np.ndarray]:
    """合成源项并用差分校验

    Args:
        case: 制造解算例
        params: 物性参数
        points: 随机校验点数
        seed: 随机种子

    Returns:
        Callable: source(x, t)，x 为 (3, ...) 坐标

    Raises:
        SynthesisError: 解析源项与差分结果不一致
    """
    n = points or SYNTHESIS_CONFIG['oracle_points']
    rng = np.random.default_rng(SYNTHESIS_CONFIG['seed'] if seed is None else seed)
    x = rng.uniform(-1.0, 1.0, n)
    y = rng.uniform(-1.0, 1.0, n)
    t = rng.uniform(0.0, 1.0, n)
    exact = analytic_sources(case, params, x, y, t)
    oracle = oracle_sources(case, params, x, y, t)
    tol = SYNTHESIS_CONFIG['tolerance']
    for row in range(pm.NVAR):
        scale = float(np.max(np.abs(exact[row])))
        scale = scale if scale > 1e-10 else 1.0
        gap = float(np.max(np.abs(exact[row] - oracle[row])))
        if gap > tol * scale:
            raise SynthesisError(f"{case.name} 第 {row} 个方程的源项与差分校验相差 {gap:.3e} (尺度 {scale:.3e})")
    logger.info(f"{case.name} 源项通过 {n} 个随机点的差分校验")

    def source(xs: np.ndarray, ts: float) -> np.ndarray:
        return analytic_sources(case, params, xs[0], xs[1], ts)

    return source


# ---------------------------------------------------------------------------
# 误差与收敛
# ---------------------------------------------------------------------------

def l2_error(Q: np.ndarray, exact, mesh: DGMesh, t: float = 0.0, overintegrate: int = 0) -> Dict[str, float]:
    """各变量的离散 L2 误差 sqrt(sum w J (Q - q)^2)

    Args:
        Q: 数值解
        exact: 精确解数组（与 Q 同形状）或 exact(x, t) 函数
        mesh: 网格
        t: 时间
        overintegrate: 大于 0 时插值到 N + overintegrate 阶 GL 点上积分

    Returns:
        Dict[str, float]: 变量名 -> 误差
    """
    weights = mesh.basis.weights3d
    x, J, values = mesh.x, mesh.J, Q
    if overintegrate > 0:
        fine = gauss_lobatto(mesh.basis.order + overintegrate)
        T = interpolation_matrix(mesh.basis, fine.nodes)

        def up(u):
            return np.einsum('ia,jb,kc,...abc->...ijk', T, T, T, u, optimize=True)

        x, J, values, weights = up(x), up(J), up(Q), fine.weights3d
    ref = exact(x, t) if callable(exact) else exact
    if overintegrate > 0 and not callable(exact):
        ref = up(ref)
    diff = values - ref
    return {name: float(np.sqrt(np.sum(weights * J * diff[row] ** 2))) for name, row in ERROR_VARIABLES.items()}


@dataclass
class ConvergenceReport:
    """收敛表

    rows 中每行包含 N、网格、h、各变量误差、状态；阶数由相邻行计算。
    """

    rows: List[dict] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add(self, order: int, mesh: int, h: float, errors: Optional[Dict[str, float]], status: str = 'ok'):
        row = {'N': order, 'mesh': mesh, 'h': h, 'status': status}
        for name in ERROR_VARIABLES:
            row[name] = errors[name] if errors else float('nan')
        self.rows.append(row)

    def table(self) -> pd.DataFrame:
        df = pd.DataFrame(self.rows, columns=['N', 'mesh', 'h', 'status'] + list(ERROR_VARIABLES))
        for name in ERROR_VARIABLES:
            df[f'{name}_order'] = np.nan
        for _, group in df.groupby('N', sort=False):
            idx = group.index.tolist()
            for prev, cur in zip(idx[:-1], idx[1:]):
                if df.at[prev, 'h'] == df.at[cur, 'h']:
                    continue
                ratio = np.log(df.at[prev, 'h'] / df.at[cur, 'h'])
                for name in ERROR_VARIABLES:
                    a, b = df.at[prev, name], df.at[cur, name]
                    if a > 0.0 and b > 0.0:
                        df.at[cur, f'{name}_order'] = np.log(a / b) / ratio
        return df

    def to_csv(self, path: str):
        self.table().to_csv(path, index=False, float_format=OUTPUT_CONFIG['float_format'])

    def format_table(self, variables: Sequence[str] = ('c1', 'mx', 'my', 'p')) -> str:
        """按 N、网格、误差、阶数排列的对齐文本表"""
        df = self.table()
        header = f"{'N':>3} {'mesh':>6}" + ''.join(f" {v + ' err':>12} {'order':>6}" for v in variables)
        lines = [header, '-' * len(header)]
        for _, row in df.iterrows():
            text = f"{int(row['N']):>3} {str(int(row['mesh'])) + '^2':>6}"
            for v in variables:
                err = row[v]
                order = row[f'{v}_order']
                text += f" {err:>12.2E}" if np.isfinite(err) else f" {'failed':>12}"
                text += f" {order:>6.2f}" if np.isfinite(order) else f" {'-':>6}"
            lines.append(text)
        return '\n'.join(lines)


def mms_mesh(nx: int, order: int) -> DGMesh:
    """[-1, 1]^2 上的全周期单层厚板网格，厚度为 1，三维 L2 误差即二维 L2 误差"""
    topology = slab_topology(nx, nx, (-1.0, 1.0), (-1.0, 1.0), periodic_xy=(True, True), thickness=1.0)
    return build_discretization(topology, gauss_lobatto(order))


def run_case(case: ManufacturedCase, nx: int, order: int, dt: float, t_final: float,
             S0: float = 8.0, overintegrate: int = 0) -> Dict[str, float]:
    """单个 (网格, N) 的制造解计算，返回终止时刻的误差"""
    mesh = mms_mesh(nx, order)
    operator = SpatialOperator(mesh, case.params, source=case.source)
    Q0 = case.state(mesh.x, 0.0)
    result = run(Q0, operator, ImexConfig(dt=dt, t_final=t_final, S0=S0))
    return l2_error(result.state, case.state, mesh, result.time, overintegrate)


def convergence_study(case: ManufacturedCase, meshes: Sequence[int], orders: Sequence[int], dt: float,
                      t_final: float, S0: float = 8.0) -> ConvergenceReport:
    """网格收敛研究

    Args:
        case: 制造解算例
        meshes: 每个方向的单元数列表
        orders: 多项式阶数列表
        dt: 时间步长
        t_final: 终止时间
        S0: 稳定化常数

    Returns:
        ConvergenceReport: 收敛表（失败的计算以 failed 标记）
    """
    report = ConvergenceReport(metadata={'case': case.name, 'dt': dt, 't_final': t_final, 'S0': S0,
                                         'params': case.params.as_dict()})
    for N in orders:
        for nx in meshes:
            try:
                errors = run_case(case, nx, N, dt, t_final, S0)
                report.add(N, nx, 2.0 / nx, errors)
                logger.info(f"N={N}, 网格 {nx}^2: " + ', '.join(f"{k}={v:.3e}" for k, v in errors.items()))
            except SolverError as e:
                logger.error(f"N={N}, 网格 {nx}^2 计算失败: {e}")
                report.add(N, nx, 2.0 / nx, None, status=f'failed: {e.category}')
    return report


def order_study(case: ManufacturedCase, mesh: int, orders: Sequence[int], dt: float, t_final: float,
                S0: float = 8.0) -> ConvergenceReport:
    """固定网格的多项式阶数收敛"""
    report = ConvergenceReport(metadata={'case': case.name, 'dt': dt, 't_final': t_final, 'S0': S0,
                                         'mesh': mesh})
    for N in orders:
        try:
            report.add(N, mesh, 2.0 / mesh, run_case(case, mesh, N, dt, t_final, S0))
        except SolverError as e:
            logger.error(f"N={N} 计算失败: {e}")
            report.add(N, mesh, 2.0 / mesh, None, status=f'failed: {e.category}')
    return report
