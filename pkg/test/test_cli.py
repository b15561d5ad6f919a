"""命令行入口测试"""
import os

import pandas as pd

import main
from config.settings import APP_NAME, VERSION
from core import case_io
from core.mesh import box_topology


def test_version(capsys):
    assert main.main(['version']) == 0
    assert f"{APP_NAME} {VERSION}" in capsys.readouterr().out


def test_run_channel_case(tmp_path, channel_case):
    config = tmp_path / 'channel.case'
    config.write_text(channel_case, encoding='utf-8')
    assert main.main(['run', str(config)]) == 0
    out = tmp_path / 'out'
    assert (out / 'checkpoint_0000000.npz').exists()
    assert (out / 'checkpoint_0000002.npz').exists()
    monitor = pd.read_csv(out / 'residual_monitor.csv')
    assert list(monitor['step']) == [1, 2]
    frame = pd.read_csv(out / 'solution_0000002.csv')
    assert len(frame) == 8 * 27
    ckpt = case_io.read_checkpoint(str(out / 'checkpoint_0000002.npz'))
    assert ckpt.step == 2 and ckpt.time == 2e-4


def test_config_errors_exit_with_two(tmp_path):
    config = tmp_path / 'bad.case'
    config.write_text("[physics]\ntable = nowhere\n", encoding='utf-8')
    assert main.main(['run', str(config)]) == 2
    assert main.main(['run', str(tmp_path / 'missing.case')]) == 2


def test_check_mesh(tmp_path, capsys):
    path = str(tmp_path / 'box.mesh')
    case_io.write_mesh(path, box_topology((2, 2, 1), ((0.0, 1.0), (0.0, 1.0), (0.0, 0.5))))
    assert main.main(['check-mesh', path, '--order', '3']) == 0
    out = capsys.readouterr().out
    assert '单元数 4' in out and '度量恒等式残差' in out


def test_malformed_mesh_exits_with_three(tmp_path):
    path = tmp_path / 'bad.mesh'
    path.write_text("MESH 1 8 1\nNODES\n", encoding='utf-8')
    assert main.main(['check-mesh', str(path)]) == 3
    assert main.main(['check-mesh', str(tmp_path / 'box.txt')]) == 2


def test_mms_mode_from_config(tmp_path):
    config = tmp_path / 'mms.case'
    config.write_text("[physics]\ntable = mms_two_phase\n[time]\ndt = 1e-4\nt_final = 2e-4\n"
                      "[run]\nmode = mms-convergence\nmeshes = 2 4\norders = 2\noutput = report\n",
                      encoding='utf-8')
    code = main.main(['run', str(config)])
    assert code in (0, 4)
    report = pd.read_csv(os.path.join(tmp_path, 'report', 'convergence.csv'))
    assert list(report['N']) == [2, 2]


def test_mms_alias_is_normalized(tmp_path):
    config = tmp_path / 'mms.case'
    config.write_text("[physics]\ntable = mms_two_phase\n[run]\nmode = mms\n", encoding='utf-8')
    assert case_io.parse_config(str(config)).mode == 'mms-convergence'


def test_mms_command_with_config_and_overrides(tmp_path):
    config = tmp_path / 'mms.case'
    config.write_text("[physics]\ntable = mms_two_phase\n[time]\ndt = 1e-4\nt_final = 2e-4\n"
                      "[run]\nmode = mms-convergence\nmeshes = 2 4 6\norders = 3\noutput = report\n",
                      encoding='utf-8')
    code = main.main(['mms', str(config), '--meshes', '2', '--orders', '2'])
    assert code in (0, 4)
    report = pd.read_csv(os.path.join(tmp_path, 'report', 'convergence.csv'))
    assert list(report['N']) == [2]
    assert list(report['mesh']) == [2]


def test_smoke_mode_passes_on_channel(tmp_path, channel_case):
    config = tmp_path / 'smoke.case'
    config.write_text(channel_case.replace('[run]\n', '[run]\nmode = smoke\n'), encoding='utf-8')
    assert main.main(['run', str(config)]) == 0
    monitor = pd.read_csv(tmp_path / 'out' / 'residual_monitor.csv')
    assert list(monitor['step']) == [1, 2]


def test_smoke_mode_reports_failure_through_exit_code(tmp_path, channel_case, monkeypatch):
    config = tmp_path / 'smoke.case'
    config.write_text(channel_case.replace('[run]\n', '[run]\nmode = smoke\n'), encoding='utf-8')
    monkeypatch.setattr(main, 'smoke_check', lambda monitor: False)
    assert main.main(['run', str(config)]) == 4


def test_unknown_run_mode_exits_with_two(tmp_path, channel_case):
    config = tmp_path / 'bad.case'
    config.write_text(channel_case.replace('[run]\n', '[run]\nmode = sweep\n'), encoding='utf-8')
    assert main.main(['run', str(config)]) == 2
