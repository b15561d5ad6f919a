"""
pytest 公共配置

日志目录重定向到临时目录；标记为 slow 的测试需要 --runslow 才运行。
"""
import os
import sys
import tempfile

os.environ.setdefault('DGSEM_LOG_DIR', tempfile.mkdtemp(prefix='dgsem_logs_'))
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import pytest  # noqa: E402

from core import phase_model as pm  # noqa: E402
from core.mesh import box_topology, build_discretization  # noqa: E402
from core.spectral import gauss_lobatto  # noqa: E402

# 小型二维通道算例：入口、出口、两侧壁面，两步推进
CHANNEL_CASE = """
[physics]
table = channel

[discretization]
box = 4, 2, 1
extent = 0 2 -0.5 0.5 0 0.25
periodic = false, false, true
order = 2

[time]
dt = 1e-4
t_final = 2e-4

[boundary.xmin]
kind = inflow
geometry = planar
radius = 0.5
up = 0 1 0
bands = 2 1 3
v_max = 1 1 1
interfaces = 0.3 -0.3

[boundary.xmax]
kind = outflow
pressure = 0

[boundary.ymin]
kind = wall

[boundary.ymax]
kind = wall
theta12 = 90

[initial]
kind = layered_channel

[run]
output = out
csv = true
"""


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False, help='运行耗时的收敛测试')


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: 耗时的收敛测试')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip = pytest.mark.skip(reason='需要 --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def three_phase_params():
    return pm.table_params('mms_three_phase')


@pytest.fixture
def two_phase_params():
    return pm.table_params('mms_two_phase')


@pytest.fixture
def channel_params():
    return pm.table_params('channel')


@pytest.fixture
def box_mesh():
    """构造长方体离散网格的工厂"""

    def make(shape=(2, 2, 2), order=3, extent=((0.0, 1.0), (0.0, 1.0), (0.0, 1.0)),
             periodic=(False, False, False), warp=None):
        return build_discretization(box_topology(shape, extent, periodic), gauss_lobatto(order), warp)

    return make


@pytest.fixture
def channel_case():
    return CHANNEL_CASE
