"""
三相流 DGSEM 求解器主程序

子命令：
    run <配置>         按配置运行：simulate 推进算例，mms-convergence 收敛研究，smoke 冒烟检查
    mms [配置]        执行制造解收敛研究，命令行参数覆盖配置中的值
    check-mesh <网格>  读取网格并报告度量恒等式和封闭性残差
    version           打印版本
"""
import argparse
import os
import sys
from typing import Optional, Sequence

from config.settings import APP_NAME, DEFAULT_S0, FILE_TYPES, MMS_DEFAULTS, OUTPUT_CONFIG, VERSION
from core import case_io
from core.boundary import build_boundary_conditions
from core.case_io import MMS_CASES
from core.dg_operators import SpatialOperator
from core.mesh import build_discretization, metric_identity_residual, watertightness_residual
from core.phase_model import table_params
from core.spectral import gauss_lobatto
from core.time_integration import ImexConfig, RunResult, run, smoke_check
from core.verification import convergence_study, order_study, three_phase_case, two_phase_case
from utils.errors import ConfigError, SolverError, exit_code_for
from utils.file_utils import create_directory_if_not_exists, get_file_type
from utils.logger import get_logger, set_console_level

# 创建模块的logger
logger = get_logger(__name__)


def _mms_report(case_name: str, params, meshes, orders, dt: float, t_final: float, S0: float, output: str,
                fixed_mesh: Optional[int] = None) -> int:
    case = three_phase_case(params) if case_name == 'three_phase' else two_phase_case(params)
    if fixed_mesh:
        report = order_study(case, fixed_mesh, orders, dt, t_final, S0)
    else:
        report = convergence_study(case, meshes, orders, dt, t_final, S0)
    create_directory_if_not_exists(output)
    path = os.path.join(output, OUTPUT_CONFIG['report_name'])
    report.to_csv(path)
    print(report.format_table())
    logger.info(f"收敛表已写入 {path}")
    failed = [row for row in report.rows if row['status'] != 'ok']
    return 4 if failed else 0


def _simulate(config: case_io.CaseConfig) -> RunResult:
    mesh = case_io.build_mesh(config)
    boundary = build_boundary_conditions(config.boundary, config.params)
    operator = SpatialOperator(mesh, config.params, boundary)
    Q0, start = case_io.initial_state(config, mesh, config.params)
    imex = ImexConfig(dt=config.dt, t_final=config.t_final, S0=config.S0, checkpoint_every=config.checkpoint_every,
                      output_dir=config.output, config_hash=config.digest)
    result = run(Q0, operator, imex, start_step=start)

    monitor = float(result.monitor['monitor'].iloc[-1]) if len(result.monitor) else float('nan')
    final = case_io.Checkpoint(time=result.time, step=result.step, state=result.state, monitor=monitor,
                               config_hash=config.digest)
    if config.run['csv']:
        case_io.write_solution(final, os.path.join(config.output, OUTPUT_CONFIG['csv_name'].format(step=result.step)),
                               'csv', mesh, config.params)
    if config.run['vtk']:
        case_io.write_solution(final, os.path.join(config.output, OUTPUT_CONFIG['vtk_name'].format(step=result.step)),
                               'vtk', mesh, config.params)
    logger.info(f"计算完成：t={result.time:.6e}，共 {result.step} 步")
    return result


def command_run(args) -> int:
    config = case_io.parse_config(args.config)
    if args.output:
        config.output = args.output
    if config.mode == 'mms-convergence':
        return _mms_report(config.run['case'], config.params, config.run['meshes'], config.run['orders'],
                           config.dt, config.t_final, config.S0, config.output)

    result = _simulate(config)
    if config.mode == 'smoke':
        return 0 if smoke_check(result.monitor) else 4
    return 0


def command_mms(args) -> int:
    """制造解收敛研究；给出配置文件时以其为准，命令行参数逐项覆盖"""
    if args.config:
        config = case_io.parse_config(args.config)
        settings = {'case': config.run['case'], 'meshes': config.run['meshes'], 'orders': config.run['orders'],
                    'dt': config.dt, 't_final': config.t_final, 'S0': config.S0, 'output': config.output}
        params = config.params
    else:
        settings = dict(MMS_DEFAULTS, S0=DEFAULT_S0, output='output')
        params = None
    for key in settings:
        value = getattr(args, key)
        if value is not None:
            settings[key] = value
    if params is None:
        params = table_params('mms_three_phase' if settings['case'] == 'three_phase' else 'mms_two_phase')
    return _mms_report(settings['case'], params, settings['meshes'], settings['orders'], settings['dt'],
                       settings['t_final'], settings['S0'], settings['output'], args.fixed_mesh)


def command_check_mesh(args) -> int:
    if get_file_type(args.mesh) != 'mesh':
        raise ConfigError(f"不是网格文件: {args.mesh}")
    topology = case_io.read_mesh(args.mesh)
    mesh = build_discretization(topology, gauss_lobatto(args.order))
    metric = metric_identity_residual(mesh)
    closure = watertightness_residual(mesh)
    print(f"单元数 {mesh.K}，N={args.order}，边界标签 {', '.join(topology.tags()) or '-'}")
    print(f"度量恒等式残差 {metric:.3e}，封闭性残差 {closure:.3e}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='dgsem3p', description=APP_NAME)
    parser.add_argument('-v', '--verbose', action='store_true', help='控制台输出调试信息')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('run', help='按配置文件运行算例')
    p.add_argument('config', help=f"配置文件 ({', '.join(FILE_TYPES['config'])})")
    p.add_argument('-o', '--output', help='覆盖配置中的输出目录')
    p.set_defaults(func=command_run)

    p = sub.add_parser('mms', help='制造解收敛研究')
    p.add_argument('config', nargs='?', help='可选的配置文件，命令行参数覆盖其中的值')
    p.add_argument('--case', choices=MMS_CASES)
    p.add_argument('--meshes', type=int, nargs='+')
    p.add_argument('--orders', type=int, nargs='+')
    p.add_argument('--dt', type=float)
    p.add_argument('--t-final', dest='t_final', type=float)
    p.add_argument('--S0', type=float)
    p.add_argument('--fixed-mesh', dest='fixed_mesh', type=int, help='在固定网格上做阶数收敛')
    p.add_argument('-o', '--output')
    p.set_defaults(func=command_mms)

    p = sub.add_parser('check-mesh', help='检查网格文件')
    p.add_argument('mesh')
    p.add_argument('--order', type=int, default=4)
    p.set_defaults(func=command_check_mesh)

    p = sub.add_parser('version', help='打印版本')
    p.set_defaults(func=lambda args: print(f"{APP_NAME} {VERSION}") or 0)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """主程序入口，返回退出码"""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        set_console_level('DEBUG')
    try:
        return int(args.func(args) or 0)
    except SolverError as e:
        logger.critical(f"计算失败 [{e.category}]: {e}")
        return exit_code_for(e)
    except Exception as e:
        logger.critical(f"程序发生严重错误: {str(e)}")
        logger.exception("详细错误信息:")
        return exit_code_for(e)


if __name__ == "__main__":
    sys.exit(main())
