"""
gfcalc 命令行入口
解析参数、分派到 gfcalc.api.commands 中的处理函数，并把异常映射为退出码
"""

import argparse
import sys
from typing import List, Optional

from gfcalc import __version__
from gfcalc.api.commands import COMMANDS, CommandResult, write_outputs
from gfcalc.config import config
from gfcalc.handlers.reports import to_json_text
from gfcalc.utils.exceptions import GFCalcException, ParameterValidationError
from gfcalc.utils.logger import Logger, app_logger


class _ArgumentParser(argparse.ArgumentParser):
    """用法错误抛出异常（退出码 1），而不是 argparse 默认的退出码 2"""

    def error(self, message: str):
        raise ParameterValidationError("argv", message)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--grid", help="ε 网格 k_min:k_max，ε_k = 2^(-k)")
    parser.add_argument("--q", type=int, help="磨光子最高阶段 q_max（≤ 12）")
    parser.add_argument("--thresholds", help="磨光子阶段阈值，逗号分隔，严格递减")
    parser.add_argument("--m-max", dest="m_max", type=int, help="可忽略性检查的最高阶")
    parser.add_argument("--n-cap", dest="n_cap", type=int, help="适度性阶的上限")
    parser.add_argument("--tol", type=float, help="积分容差")
    parser.add_argument("--seed", type=int, help="随机种子")
    parser.add_argument("--out", help="输出 JSON 路径；附属 CSV 写到同目录")
    parser.add_argument("--expect", choices=["yes", "no"], help="判定不符时退出码为 2")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="gfcalc", description="Colombeau 广义函数数值计算")
    parser.add_argument("--version", action="version", version=f"gfcalc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    p = sub.add_parser("mollifier", help="构造消失矩磨光子网并验证其性质")
    _add_common(p)
    p.add_argument("--eta", type=float, default=None, help="检查 ∫|ψ_ε| ≤ 1+η")

    p = sub.add_parser("embed", help="ι(u) 的 sup 表与适度性报告")
    _add_common(p)
    p.add_argument("--dist", required=True, help="分布表达式，例如 delta、heaviside(0)、regular(sin)")
    p.add_argument("--K", default="-1,1", help="紧集 a,b")
    p.add_argument("--alpha-max", dest="alpha_max", type=int, default=2)
    p.add_argument("--check-negligible-vs-sigma", dest="check_negligible_vs_sigma", action="store_true")

    p = sub.add_parser("demo", help="运行演示计算")
    _add_common(p)
    p.add_argument("name", help=f"演示名: {', '.join(config.demos)}")

    p = sub.add_parser("gnum", help="广义数查询")
    _add_common(p)
    p.add_argument("op", help="leq, lt, eq, approx, inf, sup, invertible, infinitesimal, moderate, ball")
    p.add_argument("exprs", nargs="+", help="ε 的网表达式")

    p = sub.add_parser("plotcheck", help="参数族的支撑有界性分类")
    _add_common(p)
    p.add_argument("--kernel", required=True, help="u、x 的核表达式")
    p.add_argument("--U", required=True, help="参数开区间 a,b")
    p.add_argument("--omega", default="-inf,inf", help="开区间 Ω")
    p.add_argument("--K", default=None, help="检查所有切片支撑 ⊆ K")
    p.add_argument("--samples", type=int, default=None, help="u 采样数")

    p = sub.add_parser("full", help="完全代数的面板判定")
    _add_common(p)
    p.add_argument("--embed", required=True, help="分布表达式")
    p.add_argument("--minus-sigma", dest="minus_sigma", default=None, help="减去 σᵉ(f) 的光滑函数 f")
    p.add_argument("--moderate", action="store_true")
    p.add_argument("--negligible", action="store_true")
    p.add_argument("--N", type=int, default=1, help="适度性的起始 N")
    p.add_argument("--m", type=int, default=2, help="可忽略性的目标阶")
    p.add_argument("--K", default="-0.5,0.5", help="紧集 a,b")
    p.add_argument("--alpha-max", dest="alpha_max", type=int, default=0)
    p.add_argument("--panel-size", dest="panel_size", type=int, default=None)
    return parser


_INTERVAL_FLAGS = ("--K", "--U", "--omega")


def _join_interval_args(argv: List[str]) -> List[str]:
    """允许 "--K -1,1" 这种以负号开头的区间值"""
    out: List[str] = []
    i = 0
    while i < len(argv):
        if argv[i] in _INTERVAL_FLAGS and i + 1 < len(argv):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def _emit(result: CommandResult, out: Optional[str]) -> None:
    for line in result.report.summary:
        print(line)
    if result.files:
        write_outputs(result)
    if not out:
        print(to_json_text(result.report), end="")


def main(argv: Optional[List[str]] = None) -> int:
    """运行一条命令并返回退出码：0 成功，1 用法或解析错误，2 判定不符，3 数值失败"""
    try:
        argv = list(sys.argv[1:] if argv is None else argv)
        args = build_parser().parse_args(_join_interval_args(argv))
        app_logger.info(f"执行命令: {args.command}")
        result = COMMANDS[args.command](args)
        _emit(result, getattr(args, "out", None))
        return result.exit_code
    except GFCalcException as e:
        app_logger.error(f"命令失败 [{e.error_code}]: {e.message}")
        print(f"错误: {e.message}", file=sys.stderr)
        return e.exit_code
    finally:
        for handler in app_logger.handlers:
            handler.flush()


if __name__ == "__main__":
    exit_code = main()
    Logger.shutdown()
    sys.exit(exit_code)
