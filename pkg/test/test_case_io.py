"""算例配置、网格文件与检查点测试"""
import numpy as np
import pandas as pd
import pytest

from core import case_io
from core import phase_model as pm
from core.boundary import InflowSpec, OutflowSpec, WallSpec
from core.mesh import box_topology
from utils.errors import ConfigError, MeshFormatError

# 最小的可解析头部：参数表加一个单元的盒子网格
HEAD = "[physics]\ntable = channel\n[discretization]\nbox = 1 1 1\n"


def test_channel_config_with_defaults(tmp_path, channel_case):
    config = case_io.parse_config_text(channel_case, str(tmp_path))
    assert config.S0 == 8.0 and config.checkpoint_every == 100
    assert config.order == 2 and config.dt == 1e-4
    assert config.box['shape'] == (4, 2, 1)
    assert config.box['periodic'] == (False, False, True)
    assert isinstance(config.boundary['xmin'], InflowSpec)
    assert isinstance(config.boundary['xmax'], OutflowSpec)
    assert isinstance(config.boundary['ymax'], WallSpec)
    assert tuple(config.params.gravity) == (0.0, -1.0, 0.0)
    assert config.output == str(tmp_path / 'out')
    assert config.run['csv'] is True and config.mode == 'simulate'
    assert len(config.digest) == 64
    assert any(line.startswith('[time] S0 = 8.0') for line in config.echo())


def test_physics_values_override_table(tmp_path, channel_case):
    text = channel_case.replace('table = channel', 'table = channel\neps = 0.05\nc0 = 20')
    config = case_io.parse_config_text(text, str(tmp_path))
    assert config.params.eps == 0.05
    assert config.params.c0_squared == pytest.approx(400.0)


@pytest.mark.parametrize('text, line', [
    ("[physics]\ntable = channel\nfoo = 1\n", 3),
    (HEAD + "[time]\ndt = abc\n", 6),
    ("[physics]\ntable = channel\n[weird]\n", 3),
    ("table = channel\n", 1),
    (HEAD + "[boundary.a]\nkind = valve\n", 6),
    (HEAD + "[time]\ndt = 1\ndt = 2\n", 7),
    (HEAD + "[initial]\nkind = vortex\n", 6),
])
def test_errors_report_line_numbers(text, line):
    with pytest.raises(ConfigError) as info:
        case_io.parse_config_text(text)
    assert info.value.line == line


def test_gravity_is_mandatory_without_table():
    text = ("[physics]\nrho = 1 1 1\neta = 1 1 1\nsigma12 = 1\nsigma13 = 1\nsigma23 = 1\neps = 0.1\n"
            "mobility = 1\nc0 = 10\n[discretization]\nbox = 1 1 1\n")
    with pytest.raises(ConfigError, match='gravity'):
        case_io.parse_config_text(text)
    config = case_io.parse_config_text(text.replace('c0 = 10', 'c0 = 10\ngravity = 0 0 -9.81'))
    assert config.params.gravity[2] == -9.81


def test_unbalanced_wall_angles_are_rejected(channel_case):
    text = channel_case.replace('theta12 = 90', 'theta12 = 60')
    with pytest.raises(ConfigError) as info:
        case_io.parse_config_text(text)
    assert info.value.line == channel_case.splitlines().index('[boundary.ymax]') + 1


def test_boundary_tags_must_match_mesh(tmp_path, channel_case):
    config = case_io.parse_config_text(channel_case.replace('[boundary.ymin]', '[boundary.bottom]'), str(tmp_path))
    with pytest.raises(ConfigError, match='bottom'):
        case_io.build_mesh(config)
    config = case_io.parse_config_text(channel_case.replace('[boundary.ymin]\nkind = wall\n', ''), str(tmp_path))
    with pytest.raises(ConfigError, match='ymin'):
        case_io.build_mesh(config)


def test_initial_states(tmp_path, channel_case):
    config = case_io.parse_config_text(channel_case, str(tmp_path))
    mesh = case_io.build_mesh(config)
    Q, start = case_io.initial_state(config, mesh, config.params)
    assert start == 0 and Q.shape == (6,) + mesh.J.shape
    y = mesh.x[1]
    middle = np.abs(y) < 0.1
    assert np.all(Q[pm.C1][middle] > 0.99)
    np.testing.assert_allclose(Q[pm.MY], 0.0)
    rho, u = pm.recover_velocity(Q, config.params)
    np.testing.assert_allclose(u[0], np.maximum(1.0 - 4.0 * y ** 2, 0.0), atol=1e-12)

    config.initial = {'kind': 'uniform', 'c1': (0.2,), 'c2': (0.5,), 'velocity': (1.0, 0.0, 0.0)}
    Q, _ = case_io.initial_state(config, mesh, config.params)
    rho, _ = pm.mixture(0.2, 0.5, config.params)
    np.testing.assert_allclose(Q[pm.MX], rho)


def test_restart_from_checkpoint(tmp_path, channel_case):
    config = case_io.parse_config_text(channel_case, str(tmp_path))
    mesh = case_io.build_mesh(config)
    state = np.random.default_rng(0).normal(size=(6,) + mesh.J.shape)
    path = str(tmp_path / 'c.npz')
    case_io.write_checkpoint(path, case_io.Checkpoint(time=0.3, step=3000, state=state, monitor=1.5,
                                                      config_hash=config.digest))
    config.initial = {'kind': 'checkpoint', 'path': path}
    Q, start = case_io.initial_state(config, mesh, config.params)
    assert start == 3000
    assert np.array_equal(Q, state)

    config.order = 3
    other = case_io.build_mesh(config)
    with pytest.raises(ConfigError):
        case_io.initial_state(config, other, config.params)


def test_checkpoint_is_bit_exact(tmp_path):
    state = np.random.default_rng(1).normal(size=(6, 2, 3, 3, 3)) * 1e-7 + np.pi
    ckpt = case_io.Checkpoint(time=0.1 + 0.2, step=7, state=state, monitor=float('nan'), config_hash='abc')
    path = str(tmp_path / 'ckpt.npz')
    case_io.write_checkpoint(path, ckpt)
    back = case_io.read_checkpoint(path)
    assert back.time == 0.1 + 0.2 and back.step == 7 and back.config_hash == 'abc'
    assert np.array_equal(back.state, state)
    assert np.isnan(back.monitor)


def test_mesh_file_round_trip(tmp_path):
    topology = box_topology((2, 1, 2), ((0.0, 1.0), (0.0, 0.5), (0.0, 2.0)), (False, False, True))
    path = str(tmp_path / 'box.mesh')
    case_io.write_mesh(path, topology)
    back = case_io.read_mesh(path)
    np.testing.assert_array_equal(back.nodes, topology.nodes)
    np.testing.assert_array_equal(back.elements, topology.elements)
    assert back.boundary_tags == topology.boundary_tags
    assert back.periodic_pairs == [('zmin', 'zmax')]
    assert back.tags() == ['xmax', 'xmin', 'ymax', 'ymin']


@pytest.mark.parametrize('content, line', [
    ("MESH 1 8\n", 1),
    ("MESH 1 8 1\nNODES\n0 0 0\n0 0 x\n", 4),
    ("# 注释\nMESH 1 1 1\nNODES\n0 0 0\nELEMENTS\n0 0 0 0 0 0 0 9\n", 6),
])
def test_malformed_mesh_files(tmp_path, content, line):
    path = tmp_path / 'bad.mesh'
    path.write_text(content, encoding='utf-8')
    with pytest.raises(MeshFormatError) as info:
        case_io.read_mesh(str(path))
    assert info.value.line == line


def test_solution_writers(tmp_path, channel_case):
    config = case_io.parse_config_text(channel_case, str(tmp_path))
    mesh = case_io.build_mesh(config)
    Q, _ = case_io.initial_state(config, mesh, config.params)
    ckpt = case_io.Checkpoint(time=0.0, step=0, state=Q)
    csv = case_io.write_solution(ckpt, str(tmp_path / 's.csv'), 'csv', mesh, config.params)
    frame = pd.read_csv(csv)
    assert list(frame.columns) == ['x', 'y', 'z', 'c1', 'c2', 'c3', 'u', 'v', 'w', 'p', 'rho']
    assert len(frame) == mesh.dof_count
    np.testing.assert_allclose(frame['c1'] + frame['c2'] + frame['c3'], 1.0)

    vtk = case_io.write_solution(ckpt, str(tmp_path / 's.vtk'), 'vtk', mesh, config.params)
    text = open(vtk, encoding='utf-8').read()
    assert text.startswith('# vtk DataFile Version 3.0')
    assert f"CELLS {mesh.K * 8} {mesh.K * 8 * 9}" in text
    assert 'VECTORS velocity double' in text
    with pytest.raises(ConfigError):
        case_io.write_solution(ckpt, str(tmp_path / 's.xyz'), 'xyz', mesh, config.params)
