"""
算例输入输出模块

分节文本配置的解析与回显、网格文件读写、检查点读写以及解输出格式分派。
"""
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from config.settings import (CHANNEL_INFLOW, DEFAULT_CHECKPOINT_EVERY, DEFAULT_ORDER, DEFAULT_S0, MMS_DEFAULTS,
                             PARAMETER_TABLES)
from core import phase_model as pm
from core.boundary import InflowSpec, OutflowSpec, WallSpec, inflow_state
from core.mesh import DGMesh, MeshTopology, box_topology, build_discretization, connect_faces, sine_warp
from core.spectral import gauss_lobatto
from utils.errors import ConfigError, MeshFormatError, SolverError
from utils.file_utils import ensure_file_exists, text_digest
from utils.logger import get_logger

# 创建模块的logger
logger = get_logger(__name__)

# 各节允许的键
SECTION_KEYS = {
    'physics': {'table', 'rho', 'eta', 'sigma12', 'sigma13', 'sigma23', 'eps', 'mobility', 'c0', 'c0_squared',
                'gravity', 'density_floor'},
    'discretization': {'mesh', 'box', 'extent', 'periodic', 'warp', 'order'},
    'time': {'dt', 't_final', 'S0', 'checkpoint_every'},
    'initial': {'kind', 'c1', 'c2', 'velocity', 'pressure', 'case', 'path', 'bands', 'interfaces',
                'half_height', 'v_max', 'axis', 'up', 'center'},
    'run': {'mode', 'output', 'meshes', 'orders', 'case', 'csv', 'vtk'},
}
BOUNDARY_KEYS = {
    'wall': {'kind', 'theta12', 'theta13', 'theta23'},
    'outflow': {'kind', 'pressure'},
    'inflow': {'kind', 'superficial', 'slip12', 'slip23', 'geometry', 'radius', 'center', 'up', 'axis', 'bands',
               'upper', 'lower', 'v_max', 'interfaces'},
}
RUN_MODES = ('simulate', 'mms-convergence', 'smoke')
# 旧模式名
MODE_ALIASES = {'mms': 'mms-convergence'}
MMS_CASES = ('two_phase', 'three_phase')
INITIAL_KINDS = ('uniform', 'layered_channel', 'manufactured', 'checkpoint')


@dataclass
class Entry:
    value: str
    line: int


@dataclass
class CaseConfig:
    """算例配置

    Attributes:
        params: 物性参数
        mesh_path: 网格文件路径（与 box 二选一）
        box: 结构化网格参数 {'shape', 'extent', 'periodic', 'warp'}
        order: 多项式阶数
        dt, t_final, S0, checkpoint_every: 时间推进参数
        boundary: 标签 -> 边界参数
        initial: 初始条件参数
        mode: 运行模式
        output: 输出目录
        digest: 配置文本的 SHA-256
    """

    params: pm.PhaseParams
    order: int = DEFAULT_ORDER
    mesh_path: Optional[str] = None
    box: Optional[dict] = None
    dt: float = 1e-4
    t_final: float = 0.0
    S0: float = DEFAULT_S0
    checkpoint_every: int = DEFAULT_CHECKPOINT_EVERY
    boundary: Dict[str, object] = field(default_factory=dict)
    boundary_lines: Dict[str, int] = field(default_factory=dict)
    initial: dict = field(default_factory=dict)
    mode: str = 'simulate'
    output: str = 'output'
    run: dict = field(default_factory=dict)
    digest: str = ''
    source: str = ''

    def echo(self) -> List[str]:
        """完整的有效配置（含默认值）"""
        lines = [f"[physics] {k} = {v}" for k, v in self.params.as_dict().items()]
        lines.append(f"[discretization] order = {self.order}")
        lines.append(f"[discretization] mesh = {self.mesh_path}" if self.mesh_path
                     else f"[discretization] box = {self.box}")
        for key in ('dt', 't_final', 'S0', 'checkpoint_every'):
            lines.append(f"[time] {key} = {getattr(self, key)}")
        for tag, spec in sorted(self.boundary.items()):
            lines.append(f"[boundary.{tag}] {spec}")
        lines.append(f"[initial] {self.initial}")
        lines.append(f"[run] mode = {self.mode}, output = {self.output}, {self.run}")
        return lines


# ---------------------------------------------------------------------------
# 词法
# ---------------------------------------------------------------------------

def _strip(line: str) -> str:
    return line.split('#', 1)[0].strip()


def _sections(text: str) -> Tuple[Dict[str, Dict[str, Entry]], Dict[str, int]]:
    sections: Dict[str, Dict[str, Entry]] = {}
    headers: Dict[str, int] = {}
    current = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        if line.startswith('[') and line.endswith(']'):
            current = line[1:-1].strip()
            if current in sections:
                raise ConfigError(f"重复的节 [{current}]", number)
            if current not in SECTION_KEYS and not current.startswith('boundary.'):
                raise ConfigError(f"未知的节 [{current}]", number)
            sections[current] = {}
            headers[current] = number
            continue
        if current is None:
            raise ConfigError("键值对出现在任何节之前", number)
        if '=' not in line:
            raise ConfigError(f"无法解析的行: {raw.strip()}", number)
        key, value = (part.strip() for part in line.split('=', 1))
        if key in sections[current]:
            raise ConfigError(f"重复的键 {key}", number)
        sections[current][key] = Entry(value, number)
    return sections, headers


def _floats(entry: Entry, count: Optional[int] = None) -> Tuple[float, ...]:
    try:
        values = tuple(float(v) for v in entry.value.replace(',', ' ').split())
    except ValueError:
        raise ConfigError(f"需要数值: {entry.value}", entry.line)
    if count is not None and len(values) != count:
        raise ConfigError(f"需要 {count} 个数值，实际 {len(values)} 个", entry.line)
    return values


def _float(entry: Entry) -> float:
    return _floats(entry, 1)[0]


def _int(entry: Entry) -> int:
    value = _float(entry)
    if value != int(value):
        raise ConfigError(f"需要整数: {entry.value}", entry.line)
    return int(value)


def _ints(entry: Entry) -> Tuple[int, ...]:
    values = _floats(entry)
    if any(v != int(v) for v in values):
        raise ConfigError(f"需要整数: {entry.value}", entry.line)
    return tuple(int(v) for v in values)


def _bools(entry: Entry) -> Tuple[bool, ...]:
    table = {'true': True, 'yes': True, '1': True, 'false': False, 'no': False, '0': False}
    out = []
    for word in entry.value.replace(',', ' ').split():
        if word.lower() not in table:
            raise ConfigError(f"需要布尔值: {word}", entry.line)
        out.append(table[word.lower()])
    return tuple(out)


def _check_keys(section: str, entries: Dict[str, Entry], allowed: set):
    for key, entry in entries.items():
        if key not in allowed:
            raise ConfigError(f"[{section}] 中的未知键 {key}", entry.line)


# ---------------------------------------------------------------------------
# 解析
# ---------------------------------------------------------------------------

def _physics(entries: Dict[str, Entry], header: int) -> pm.PhaseParams:
    values = {}
    if 'table' in entries:
        name = entries['table'].value
        if name not in PARAMETER_TABLES:
            raise ConfigError(f"未知的参数表 {name}", entries['table'].line)
        values.update(PARAMETER_TABLES[name])
    for key in ('rho', 'eta', 'gravity'):
        if key in entries:
            values[key] = _floats(entries[key], 3)
    for key in ('sigma12', 'sigma13', 'sigma23', 'eps', 'mobility', 'c0', 'c0_squared', 'density_floor'):
        if key in entries:
            values[key] = _float(entries[key])
    if 'c0' in entries and 'c0_squared' not in entries:
        values.pop('c0_squared', None)
    if 'c0_squared' in entries and 'c0' not in entries:
        values.pop('c0', None)
    for key in ('rho', 'eta', 'sigma12', 'sigma13', 'sigma23', 'eps', 'mobility', 'gravity'):
        if key not in values:
            raise ConfigError(f"[physics] 缺少必需的键 {key}", header)
    M0 = values.pop('mobility')
    try:
        return pm.derive_params(M0=M0, **values)
    except ConfigError as e:
        raise ConfigError(e.message, header)


def _boundary(tag: str, entries: Dict[str, Entry], header: int):
    if 'kind' not in entries:
        raise ConfigError(f"[boundary.{tag}] 缺少 kind", header)
    kind = entries['kind'].value
    if kind not in BOUNDARY_KEYS:
        raise ConfigError(f"未知的边界类型 {kind}", entries['kind'].line)
    _check_keys(f'boundary.{tag}', entries, BOUNDARY_KEYS[kind])
    if kind == 'wall':
        angles = {k: _float(entries[k]) if k in entries else 90.0 for k in ('theta12', 'theta13', 'theta23')}
        return WallSpec.from_degrees(**angles)
    if kind == 'outflow':
        return OutflowSpec(_float(entries['pressure']) if 'pressure' in entries else 0.0)

    spec = {}
    if 'superficial' in entries:
        spec['superficial'] = _floats(entries['superficial'], 3)
    for key in ('slip12', 'slip23', 'radius'):
        if key in entries:
            spec[key] = _float(entries[key])
    if 'geometry' in entries:
        spec['geometry'] = entries['geometry'].value
    for key in ('center', 'up', 'axis', 'v_max'):
        if key in entries:
            spec[key] = _floats(entries[key], 3)
    if 'bands' in entries:
        spec['bands'] = _ints(entries['bands'])
    if 'interfaces' in entries:
        spec['interfaces'] = _floats(entries['interfaces'], 2)
    spec['pinned'] = {k: _float(entries[k]) for k in ('upper', 'lower') if k in entries}
    if 'superficial' not in spec and ('v_max' not in spec or 'interfaces' not in spec):
        raise ConfigError(f"入口 {tag} 需要 superficial，或同时给出 v_max 与 interfaces", header)
    return InflowSpec(**spec)


def parse_config_text(text: str, base_dir: str = '.', source: str = '<text>') -> CaseConfig:
    """解析配置文本

    Args:
        text: 配置内容
        base_dir: 相对路径的基准目录
        source: 用于日志的来源名

    Returns:
        CaseConfig: 验证后的配置
    """
    sections, headers = _sections(text)
    for name, entries in sections.items():
        if name in SECTION_KEYS:
            _check_keys(name, entries, SECTION_KEYS[name])
    if 'physics' not in sections:
        raise ConfigError("缺少 [physics] 节")
    params = _physics(sections['physics'], headers['physics'])
    rn = sections.get('run', {})
    mode = rn['mode'].value if 'mode' in rn else 'simulate'
    mode = MODE_ALIASES.get(mode, mode)
    if mode not in RUN_MODES:
        raise ConfigError(f"未知的运行模式 {mode}", rn['mode'].line)

    disc = sections.get('discretization', {})
    order = _int(disc['order']) if 'order' in disc else DEFAULT_ORDER
    mesh_path, box = None, None
    if 'mesh' in disc:
        mesh_path = os.path.normpath(os.path.join(base_dir, disc['mesh'].value))
    elif 'box' in disc:
        shape = _ints(disc['box'])
        if len(shape) != 3:
            raise ConfigError("box 需要 3 个单元数", disc['box'].line)
        extent = _floats(disc['extent'], 6) if 'extent' in disc else (0.0, 1.0, 0.0, 1.0, 0.0, 1.0)
        periodic = _bools(disc['periodic']) if 'periodic' in disc else (False, False, False)
        if len(periodic) != 3:
            raise ConfigError("periodic 需要 3 个布尔值", disc['periodic'].line)
        box = {'shape': shape, 'extent': tuple(zip(extent[0::2], extent[1::2])), 'periodic': periodic,
               'warp': _float(disc['warp']) if 'warp' in disc else 0.0}
    elif mode != 'mms-convergence':
        raise ConfigError("[discretization] 需要 mesh 或 box", headers.get('discretization'))

    tm = sections.get('time', {})
    config = CaseConfig(params=params, order=order, mesh_path=mesh_path, box=box, source=source)
    if 'dt' in tm:
        config.dt = _float(tm['dt'])
    if 't_final' in tm:
        config.t_final = _float(tm['t_final'])
    if 'S0' in tm:
        config.S0 = _float(tm['S0'])
    if 'checkpoint_every' in tm:
        config.checkpoint_every = _int(tm['checkpoint_every'])
    if config.dt <= 0.0:
        raise ConfigError(f"dt 必须为正: {config.dt}", tm['dt'].line if 'dt' in tm else None)

    for name, entries in sections.items():
        if name.startswith('boundary.'):
            tag = name.split('.', 1)[1]
            spec = _boundary(tag, entries, headers[name])
            if isinstance(spec, WallSpec):
                try:
                    spec.check_equilibrium(params)
                except ConfigError as e:
                    raise ConfigError(e.message, headers[name])
            config.boundary[tag] = spec
            config.boundary_lines[tag] = headers[name]

    init = sections.get('initial', {})
    kind = init['kind'].value if 'kind' in init else 'uniform'
    if kind not in INITIAL_KINDS:
        raise ConfigError(f"未知的初始条件类型 {kind}", init['kind'].line)
    config.initial = {'kind': kind}
    for key, entry in init.items():
        if key in ('kind', 'case', 'path'):
            value = entry.value
            if key == 'path':
                value = os.path.normpath(os.path.join(base_dir, value))
            config.initial[key] = value
        elif key == 'bands':
            config.initial[key] = _ints(entry)
        else:
            config.initial[key] = _floats(entry)

    config.mode = mode
    config.output = os.path.normpath(os.path.join(base_dir, rn['output'].value)) if 'output' in rn \
        else os.path.join(base_dir, 'output')
    config.run = {
        'meshes': _ints(rn['meshes']) if 'meshes' in rn else MMS_DEFAULTS['meshes'],
        'orders': _ints(rn['orders']) if 'orders' in rn else MMS_DEFAULTS['orders'],
        'case': rn['case'].value if 'case' in rn else MMS_DEFAULTS['case'],
        'csv': _bools(rn['csv'])[0] if 'csv' in rn else False,
        'vtk': _bools(rn['vtk'])[0] if 'vtk' in rn else False,
    }
    if config.run['case'] not in MMS_CASES:
        raise ConfigError(f"未知的制造解算例 {config.run['case']}", rn['case'].line)
    config.digest = text_digest(text)

    logger.info(f"配置 {source} 解析完成，有效参数如下：")
    for line in config.echo():
        logger.info(f"  {line}")
    return config


def parse_config(path: str) -> CaseConfig:
    """读取并解析配置文件"""
    if not ensure_file_exists(path):
        raise ConfigError(f"配置文件不存在: {path}")
    with open(path, 'r', encoding='utf-8') as f:
        text = f.read()
    return parse_config_text(text, os.path.dirname(os.path.abspath(path)), path)


def check_boundary_tags(config: CaseConfig, tags: List[str]):
    """边界标签必须与网格一致"""
    for tag in sorted(config.boundary):
        if tag not in tags:
            raise ConfigError(f"边界标签 {tag} 在网格中不存在", config.boundary_lines.get(tag))
    missing = sorted(set(tags) - set(config.boundary))
    if missing:
        raise ConfigError(f"网格边界标签缺少边界条件: {', '.join(missing)}")


# ---------------------------------------------------------------------------
# 网格文件
# ---------------------------------------------------------------------------

def _tokens(path: str):
    with open(path, 'r', encoding='utf-8') as f:
        for number, raw in enumerate(f, start=1):
            line = _strip(raw)
            if line:
                yield number, line.split()


def read_mesh(path: str) -> MeshTopology:
    """读取网格文件

    格式::

        MESH <单元数> <节点数> <几何阶数>
        NODES
        x y z                       (逐行)
        ELEMENTS
        n0 n1 ... n7                (角点顺序 a + 2b + 4c)
        CURVED <个数>               (可选)
        <单元> <面>
        x y z                       ((Ng+1)^2 行，面网格第二个指标变化最快)
        BOUNDARY <个数>
        <单元> <面> <标签>
        PERIODIC <个数>             (可选)
        <标签A> <标签B>
        END

    Returns:
        MeshTopology: 已完成面连接的拓扑
    """
    if not ensure_file_exists(path):
        raise MeshFormatError(f"网格文件不存在: {path}")
    lines = list(_tokens(path))
    pos = 0

    def take(expected: Optional[str] = None, count: Optional[int] = None):
        nonlocal pos
        if pos >= len(lines):
            raise MeshFormatError("文件意外结束", lines[-1][0] if lines else None)
        number, words = lines[pos]
        pos += 1
        if expected is not None and words[0] != expected:
            raise MeshFormatError(f"期望 {expected}，读到 {words[0]}", number)
        if count is not None and len(words) != count:
            raise MeshFormatError(f"期望 {count} 个字段，读到 {len(words)} 个", number)
        return number, words

    def numbers(words, number, kind=float):
        try:
            return [kind(w) for w in words]
        except ValueError:
            raise MeshFormatError(f"无法解析的数值: {' '.join(words)}", number)

    number, words = take('MESH', 4)
    K, n_nodes, order = numbers(words[1:], number, int)
    take('NODES', 1)
    nodes = np.array([numbers(take(count=3)[1], lines[pos - 1][0]) for _ in range(n_nodes)])
    take('ELEMENTS', 1)
    rows = []
    for _ in range(K):
        n_line, ws = take(count=8)
        row = numbers(ws, n_line, int)
        if min(row) < 0 or max(row) >= n_nodes:
            raise MeshFormatError(f"单元引用了不存在的节点: {' '.join(ws)}", n_line)
        rows.append(row)
    elements = np.array(rows, dtype=int).reshape(K, 8)

    curved, tags, pairs = {}, {}, []
    while True:
        number, words = take()
        head = words[0]
        if head == 'END':
            break
        if head not in ('CURVED', 'BOUNDARY', 'PERIODIC') or len(words) != 2:
            raise MeshFormatError(f"未知的段 {' '.join(words)}", number)
        count = numbers(words[1:], number, int)[0]
        for _ in range(count):
            if head == 'CURVED':
                n_line, ws = take(count=2)
                e, side = numbers(ws, n_line, int)
                grid = np.array([numbers(take(count=3)[1], lines[pos - 1][0]) for _ in range((order + 1) ** 2)])
                curved[(e, side)] = grid.T.reshape(3, order + 1, order + 1)
            elif head == 'BOUNDARY':
                n_line, ws = take(count=3)
                e, side = numbers(ws[:2], n_line, int)
                if not (0 <= e < K and 0 <= side < 6):
                    raise MeshFormatError(f"边界面编号越界: {e} {side}", n_line)
                tags[(e, side)] = ws[2]
            else:
                pairs.append(tuple(take(count=2)[1]))

    topology = MeshTopology(nodes=nodes, elements=elements, geometry_order=int(order), curved_faces=curved,
                            boundary_tags=tags, periodic_pairs=pairs)
    connect_faces(topology)
    logger.info(f"读取网格 {path}: {K} 个单元，{n_nodes} 个节点，内部面 {len(topology.interior)}，"
                f"边界面 {len(topology.boundary)}")
    return topology


def write_mesh(path: str, topology: MeshTopology):
    """按 read_mesh 的格式写出网格"""
    order = topology.geometry_order
    with open(path, 'w', encoding='utf-8') as f:
        f.write(f"MESH {topology.element_count} {len(topology.nodes)} {order}\n")
        f.write("NODES\n")
        for p in topology.nodes:
            f.write(f"{float(p[0])!r} {float(p[1])!r} {float(p[2])!r}\n")
        f.write("ELEMENTS\n")
        for e in topology.elements:
            f.write(' '.join(str(int(i)) for i in e) + '\n')
        if topology.curved_faces:
            f.write(f"CURVED {len(topology.curved_faces)}\n")
            for (e, side), grid in sorted(topology.curved_faces.items()):
                f.write(f"{e} {side}\n")
                for p in grid.reshape(3, -1).T:
                    f.write(f"{float(p[0])!r} {float(p[1])!r} {float(p[2])!r}\n")
        f.write(f"BOUNDARY {len(topology.boundary_tags)}\n")
        for (e, side), tag in sorted(topology.boundary_tags.items()):
            f.write(f"{e} {side} {tag}\n")
        if topology.periodic_pairs:
            f.write(f"PERIODIC {len(topology.periodic_pairs)}\n")
            for a, b in topology.periodic_pairs:
                f.write(f"{a} {b}\n")
        f.write("END\n")
    logger.info(f"网格已写入 {path}")


# ---------------------------------------------------------------------------
# 检查点
# ---------------------------------------------------------------------------

@dataclass
class Checkpoint:
    """检查点：时间、步号、状态场、残差监控值和配置指纹"""

    time: float
    step: int
    state: np.ndarray
    monitor: float = float('nan')
    config_hash: str = ''


def write_checkpoint(path: str, checkpoint: Checkpoint):
    try:
        with open(path, 'wb') as f:
            np.savez(f, time=np.float64(checkpoint.time), step=np.int64(checkpoint.step), state=checkpoint.state,
                     monitor=np.float64(checkpoint.monitor), config_hash=np.str_(checkpoint.config_hash))
    except OSError as e:
        raise SolverError(f"写检查点失败 {path}: {e}")


def read_checkpoint(path: str) -> Checkpoint:
    if not ensure_file_exists(path):
        raise ConfigError(f"检查点不存在: {path}")
    with np.load(path, allow_pickle=False) as data:
        return Checkpoint(time=float(data['time']), step=int(data['step']), state=np.array(data['state']),
                          monitor=float(data['monitor']), config_hash=str(data['config_hash']))


def write_solution(checkpoint: Checkpoint, path: str, fmt: str = 'checkpoint', mesh=None, params=None) -> str:
    """按格式写出解

    Args:
        checkpoint: 检查点
        path: 输出路径
        fmt: 'checkpoint'、'csv' 或 'vtk'
        mesh: csv/vtk 需要的网格
        params: csv/vtk 需要的物性参数

    Returns:
        str: 写出的路径
    """
    from core import visualizer
    if fmt == 'checkpoint':
        write_checkpoint(path, checkpoint)
    elif fmt == 'csv':
        visualizer.write_point_cloud(path, mesh, checkpoint.state, params)
    elif fmt == 'vtk':
        visualizer.write_vtk(path, mesh, checkpoint.state, params)
    else:
        raise ConfigError(f"未知的输出格式 {fmt}")
    return path


# ---------------------------------------------------------------------------
# 初始条件
# ---------------------------------------------------------------------------

def initial_state(config: CaseConfig, mesh, params: pm.PhaseParams) -> Tuple[np.ndarray, int]:
    """由配置构造初始状态，返回 (Q0, 起始步号)"""
    init = config.initial
    kind = init.get('kind', 'uniform')
    shape = (pm.NVAR,) + mesh.J.shape
    if kind == 'uniform':
        Q = np.zeros(shape)
        Q[pm.C1] = init.get('c1', (1.0,))[0]
        Q[pm.C2] = init.get('c2', (0.0,))[0]
        rho, _ = pm.mixture(Q[pm.C1], Q[pm.C2], params)
        velocity = init.get('velocity', (0.0, 0.0, 0.0))
        for k in range(3):
            Q[pm.MX + k] = rho * velocity[k]
        Q[pm.P] = init.get('pressure', (0.0,))[0]
        return Q, 0
    if kind == 'layered_channel':
        spec = InflowSpec(geometry='planar', radius=init.get('half_height', (CHANNEL_INFLOW['half_height'],))[0],
                          center=init.get('center', (0.0, 0.0, 0.0)), up=init.get('up', (0.0, 1.0, 0.0)),
                          axis=init.get('axis', (1.0, 0.0, 0.0)), bands=init.get('bands', CHANNEL_INFLOW['bands']),
                          v_max=init.get('v_max', CHANNEL_INFLOW['v_max']),
                          interfaces=init.get('interfaces', CHANNEL_INFLOW['interfaces']))
        c, u = inflow_state(spec, mesh.x, params)
        rho, _ = pm.mixture(c[0], c[1], params)
        Q = np.zeros(shape)
        Q[pm.CONCENTRATIONS] = c
        Q[pm.MOMENTUM] = rho * u
        Q[pm.P] = init.get('pressure', (0.0,))[0]
        return Q, 0
    if kind == 'manufactured':
        from core.verification import three_phase_case, two_phase_case
        case = three_phase_case(params) if init.get('case') == 'three_phase' else two_phase_case(params)
        return case.state(mesh.x, 0.0), 0
    ckpt = read_checkpoint(init['path'])
    if ckpt.state.shape != shape:
        raise ConfigError(f"检查点形状 {ckpt.state.shape} 与当前离散 {shape} 不一致")
    if ckpt.config_hash and ckpt.config_hash != config.digest:
        logger.warning("检查点的配置指纹与当前配置不同")
    logger.info(f"从检查点 {init['path']} 重启：步 {ckpt.step}, t={ckpt.time}")
    return ckpt.state, ckpt.step


def build_mesh(config: CaseConfig) -> DGMesh:
    """按配置读入或生成网格并离散"""
    if config.mesh_path:
        topology = read_mesh(config.mesh_path)
        warp = None
    elif config.box:
        box = config.box
        topology = box_topology(box['shape'], box['extent'], box['periodic'])
        warp = sine_warp(box['extent'], box['warp']) if box['warp'] else None
    else:
        raise ConfigError("配置中没有网格")
    mesh = build_discretization(topology, gauss_lobatto(config.order), warp)
    check_boundary_tags(config, topology.tags())
    return mesh
