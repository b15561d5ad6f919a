"""三相分层通道算例测试"""
import os

import numpy as np
import pandas as pd
import pytest

from core import case_io
from core import time_integration as ti
from core.boundary import build_boundary_conditions
from core.dg_operators import SpatialOperator
from core.implicit_ch import assemble

CHANNEL_FILE = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'cases', 'channel.case')


def _channel(tmp_path, **replace):
    with open(CHANNEL_FILE, 'r', encoding='utf-8') as f:
        text = f.read()
    for old, new in replace.items():
        text = text.replace(old, new)
    config = case_io.parse_config_text(text, base_dir=str(tmp_path), source=CHANNEL_FILE)
    mesh = case_io.build_mesh(config)
    operator = SpatialOperator(mesh, config.params, build_boundary_conditions(config.boundary, config.params))
    Q0, start = case_io.initial_state(config, mesh, config.params)
    assert start == 0
    return config, operator, Q0


def test_channel_case_file_settings(tmp_path):
    config = case_io.parse_config(CHANNEL_FILE)
    assert config.box['shape'] == (30, 15, 1)
    assert config.order == 3
    assert config.dt == 3e-5
    assert int(round(config.t_final / config.dt)) == 5000
    assert config.checkpoint_every == 500
    assert config.mode == 'simulate'


def test_channel_short_run_stays_finite(tmp_path):
    config, operator, Q0 = _channel(tmp_path, **{'box = 30, 15, 1': 'box = 8, 4, 1'})
    result = ti.run(Q0, operator, ti.ImexConfig(dt=config.dt, t_final=20 * config.dt, S0=config.S0))
    assert result.step == 20
    assert np.all(np.isfinite(result.state))
    assert np.all(np.isfinite(result.monitor['monitor']))
    assert ti.smoke_check(result.monitor)


@pytest.mark.slow
def test_channel_heavy_layer_sinks(tmp_path):
    """完整通道算例：监控量有界，重相（第 2 相）质心持续下移"""
    config, operator, Q = _channel(tmp_path)
    segment = config.checkpoint_every
    steps = int(round(config.t_final / config.dt))
    implicit = assemble(operator, config.dt, config.S0)

    centroids = [ti.phase_centroid(Q, operator.mesh, 2)]
    monitors = []
    for start in range(0, steps, segment):
        imex = ti.ImexConfig(dt=config.dt, t_final=(start + segment) * config.dt, S0=config.S0,
                             checkpoint_every=segment)
        result = ti.run(Q, operator, imex, implicit=implicit, start_step=start)
        Q = result.state
        monitors.append(result.monitor)
        centroids.append(ti.phase_centroid(Q, operator.mesh, 2))

    monitor = pd.concat(monitors, ignore_index=True)
    assert list(monitor['step']) == list(range(1, steps + 1))
    assert ti.smoke_check(monitor, growth_limit=10.0)
    centroids = np.array(centroids)
    assert np.all(np.diff(centroids[1:]) <= 0.0)
    assert centroids[-1] < centroids[0]
