"""
应用程序配置文件
"""
import math

# 应用程序信息
APP_NAME = "三相流DGSEM求解器"
VERSION = "1.0.0"

# 默认参数
DEFAULT_S0 = 8.0
DEFAULT_CHECKPOINT_EVERY = 100
DEFAULT_ORDER = 4

# 收敛和容差参数
NEWTON_CONFIG = {
    'tolerance': 1e-12,  # 残差无穷范数
    'max_iterations': 50,
    'fd_step': 1e-7,  # 解析雅可比不可用时的前向差分步长
    'section_panels': 64,  # 截面复合高斯积分的分段数
    'panel_order': 8,
}

# 隐式系统组装参数
IMPLICIT_CONFIG = {
    'permc_spec': 'COLAMD',
    'probe_batch': 64,  # 着色探测时每批的单位向量数
    'residual_check': 1e-10,
}

# 制造解校验参数
SYNTHESIS_CONFIG = {
    'oracle_points': 200,
    'tolerance': 1e-7,
    'space_step': 2e-2,
    'time_step': 1e-2,
    'seed': 20200417,
}

# 文件类型
FILE_TYPES = {
    'config': ['.cfg', '.ini', '.case'],
    'mesh': ['.mesh'],
    'checkpoint': ['.npz'],
    'csv': ['.csv'],
    'vtk': ['.vtk'],
}

# 日志配置
LOG_CONFIG = {
    'directory': 'logs',
    'prefix': 'dgsem',
    'level': 'INFO',
    'format': '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    'datefmt': '%Y-%m-%d %H:%M:%S',
}

# 输出配置
OUTPUT_CONFIG = {
    'checkpoint_name': 'checkpoint_{step:07d}.npz',
    'monitor_name': 'residual_monitor.csv',
    'csv_name': 'solution_{step:07d}.csv',
    'vtk_name': 'solution_{step:07d}.vtk',
    'report_name': 'convergence.csv',
    'float_format': '%.16e',
}

# 制造解收敛研究的默认参数
MMS_DEFAULTS = {
    'case': 'two_phase',
    'meshes': (4, 6, 8, 12, 16),
    'orders': (2, 3, 4, 5),
    'dt': 1.0e-4,
    't_final': 0.1,
}

# 冒烟检查：监控量须有限，且不超过预热期峰值的 growth_limit 倍
SMOKE_CONFIG = {
    'growth_limit': 10.0,
    'warmup_steps': 10,
}

# 物理参数表（单位：kg/m^3, Pa·s, N/m, m, m/s, (m/s)^2）
PARAMETER_TABLES = {
    # 两相制造解，第二相不存在
    'mms_two_phase': {
        'rho': (1.0, 1.0, 2.0),
        'eta': (1.0e-3, 1.0e-3, 1.0e-3),
        'sigma12': 6.236e-3,
        'sigma13': 6.236e-3,
        'sigma23': 6.236e-3,
        'eps': 1.0 / math.sqrt(2.0),
        'mobility': 1.134e-2,
        'c0_squared': 1.0e3,
        'gravity': (0.0, 0.0, 0.0),
    },
    'mms_three_phase': {
        'rho': (1.0, 3.0, 2.0),
        'eta': (1.0e-3, 1.0e-3, 1.0e-3),
        'sigma12': 6.236e-3,
        'sigma13': 7.265e-3,
        'sigma23': 8.165e-3,
        'eps': 1.0 / math.sqrt(2.0),
        'mobility': 1.134e-2,
        'c0_squared': 1.0e3,
        'gravity': (0.0, 0.0, 0.0),
    },
    # 二维通道，重力沿竖直方向
    'channel': {
        'rho': (1.0, 5.0, 0.8),
        'eta': (5.0e-3, 1.0e-2, 1.0e-2),
        'sigma12': 2.5e-4,
        'sigma13': 2.5e-4,
        'sigma23': 2.5e-4,
        'eps': 0.0424,
        'mobility': 1.0e-4,
        'c0_squared': 1.0e3,
        'gravity': (0.0, -1.0, 0.0),
    },
    'annular': {
        'rho': (0.5, 1.0, 5.0),
        'eta': (1.0e-3, 5.0e-3, 1.0e-2),
        'sigma12': 2.5e-4,
        'sigma13': 2.5e-4,
        'sigma23': 2.5e-4,
        'eps': 0.0424,
        'mobility': 9.428e-5,
        'c0_squared': 1.0e3,
        'gravity': (0.0, 0.0, -1.0),
    },
    # 两相管流，第二相不存在
    'pipe': {
        'rho': (1.0, 1.0, 5.0),
        'eta': (5.0e-3, 5.0e-3, 1.0e-2),
        'sigma12': 2.5e-4,
        'sigma13': 2.5e-4,
        'sigma23': 2.5e-4,
        'eps': 0.0424,
        'mobility': 0.1886,
        'c0_squared': 1.0e3,
        'gravity': (0.0, 0.0, -1.0),
    },
}

# 环形流入口参数
ANNULAR_INFLOW = {
    'superficial': (1.0, 3.9, 0.06),
    'slip12': 0.0,
    'slip23': 10.0,
}

# 二维通道入口分层
CHANNEL_INFLOW = {
    'bands': (2, 1, 3),  # 自上而下的相编号
    'interfaces': (0.3, -0.3),
    'half_height': 0.5,
    'v_max': (1.0, 1.0, 1.0),
}
