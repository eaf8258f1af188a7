"""
命令行命令模块
每个子命令对应一个 cmd_* 处理函数：解析参数、调用数值服务、生成带运行配置的报告
"""

import argparse
import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterator, List, Optional, Tuple

from .. import __version__
from ..config import config, overridden
from ..handlers.expr_parser import (
    parse_distribution,
    parse_grid,
    parse_interval,
    parse_kernel,
    parse_net,
    parse_smooth,
)
from ..handlers.reports import (
    companion_path,
    samples_csv,
    sup_csv,
    sup_rows,
    to_json_text,
    write_text,
)
from ..models import CommandReport, RunConfig, Verdict, verdict_and
from ..services import full_alg, gnum, plots, special_alg
from ..services.asymptotics import MIN_GRID_POINTS, EpsGrid, Net, default_grid, estimate_order
from ..services.distributions import HEAVISIDE, ZERO_DIST, Distribution, Regular, delta
from ..services.mollifier import MollifierNet, make_schedule, save_net, verify_properties
from ..services.smoothfn import ID, REAL_LINE, CompactSet, OpenInterval
from ..utils.exceptions import InsufficientSamplesError, ParameterValidationError
from ..utils.logger import app_logger

EXIT_OK = 0
EXIT_MISMATCH = 2


@dataclass
class CommandResult:
    """命令执行结果：报告、附加文件内容与退出码"""

    report: CommandReport
    exit_code: int = EXIT_OK
    files: Dict[str, str] = field(default_factory=dict)


# ============================================================
# 公共参数
# ============================================================


def _section_overrides(args: argparse.Namespace, full_grid: bool = False) -> Dict[str, Dict[str, Any]]:
    grid: Dict[str, Any] = {}
    if getattr(args, "grid", None):
        k_min, k_max = parse_grid(args.grid)
        grid = {
            "k_min": k_min,
            "k_max": k_max,
            "assoc_k_max": min(max(config.grid.assoc_k_max, k_min + MIN_GRID_POINTS - 1), k_max),
            "full_k_max": k_max if full_grid else min(config.grid.full_k_max, k_max),
        }
    tolerance: Dict[str, Any] = {}
    if getattr(args, "m_max", None) is not None:
        tolerance["m_max"] = args.m_max
    if getattr(args, "n_cap", None) is not None:
        tolerance["n_cap"] = args.n_cap
    if getattr(args, "tol", None) is not None:
        tolerance["quad_tol"] = args.tol
    mollifier: Dict[str, Any] = {}
    if getattr(args, "q", None) is not None:
        mollifier["q_max"] = args.q
    runtime: Dict[str, Any] = {}
    if getattr(args, "seed", None) is not None:
        runtime["seed"] = args.seed
    return {"grid": grid, "tolerance": tolerance, "mollifier": mollifier, "runtime": runtime}


@contextmanager
def run_scope(args: argparse.Namespace, full_grid: bool = False) -> Iterator[None]:
    """命令执行期间生效的配置覆盖"""
    with overridden(**_section_overrides(args, full_grid)):
        yield


def _thresholds(args: argparse.Namespace) -> Optional[List[float]]:
    text = getattr(args, "thresholds", None)
    if not text:
        return None
    try:
        return [float(t) for t in text.split(",")]
    except ValueError as e:
        raise ParameterValidationError("thresholds", f"无法解析: {e}")


def _schedule(args: argparse.Namespace) -> MollifierNet:
    return make_schedule(config.mollifier.q_max, _thresholds(args))


def run_config(args: argparse.Namespace, grid: EpsGrid, psi: Optional[MollifierNet] = None) -> RunConfig:
    k_min = round(-math.log2(grid.values[0]))
    k_max = round(-math.log2(grid.values[-1]))
    return RunConfig(
        k_min=k_min,
        k_max=k_max,
        q_max=psi.q_max if psi is not None else config.mollifier.q_max,
        thresholds=list(psi.thresholds) if psi is not None else [],
        quad_tol=config.tolerance.quad_tol,
        m_max=config.tolerance.m_max,
        n_cap=config.tolerance.n_cap,
        r2_min=config.tolerance.r2_min,
        zero_floor=config.tolerance.zero_floor,
        seed=config.runtime.seed,
        out=getattr(args, "out", None),
    )


def _compact(text: str) -> CompactSet:
    lo, hi = parse_interval(text)
    return CompactSet(lo, hi)


def _open(text: str) -> OpenInterval:
    lo, hi = parse_interval(text)
    return OpenInterval(lo, hi)


def _expect_exit(verdict: Optional[Verdict], expect: Optional[str]) -> int:
    """--expect yes|no 与判定不符时退出码为 2"""
    if expect is None:
        return EXIT_OK
    wanted = Verdict.YES if expect.lower() == "yes" else Verdict.NO
    if verdict != wanted:
        app_logger.warning(f"判定 {verdict} 与期望 {wanted} 不符")
        return EXIT_MISMATCH
    return EXIT_OK


def _report(
    command: str,
    args: argparse.Namespace,
    grid: EpsGrid,
    verdict: Optional[Verdict],
    summary: List[str],
    results: Dict[str, Any],
    psi: Optional[MollifierNet] = None,
) -> CommandReport:
    return CommandReport(
        version=__version__,
        command=command,
        config=run_config(args, grid, psi),
        verdict=verdict,
        summary=summary,
        results=results,
    )


def _slope_of(samples) -> Optional[float]:
    try:
        return estimate_order(samples).slope
    except InsufficientSamplesError:
        return None


# ============================================================
# mollifier
# ============================================================


def cmd_mollifier(args: argparse.Namespace) -> CommandResult:
    """构造磨光子网，写出 JSON 与性质验证报告；性质不满足时退出码 2"""
    with run_scope(args):
        psi = _schedule(args)
        grid = default_grid()
        check = verify_properties(psi, grid, args.eta)
        summary = [
            f"q_max={psi.q_max}，阶段数 {len(psi.stages)}",
            f"(i)(ii)(iv) 全部通过: {check.passed}",
        ]
        if check.l1_ok is not None:
            summary.append(f"(v) ∫|ψ_ε| ≤ 1+η: {check.l1_ok}")
        verdict = Verdict.YES if check.passed else Verdict.NO
        report = _report(
            "mollifier", args, grid, verdict, summary, {"properties": check.model_dump(mode="json")}, psi
        )
        files = {}
        if args.out:
            files[args.out] = save_net(psi)
            files[companion_path(args.out, "report", ".json")] = to_json_text(report)
        exit_code = EXIT_OK if check.passed else EXIT_MISMATCH
        return CommandResult(report, exit_code, files)


# ============================================================
# embed
# ============================================================


def _regular_part(u: Distribution):
    if len(u.terms) != 1 or not isinstance(u.terms[0][1], Regular):
        raise ParameterValidationError("dist", "--check-negligible-vs-sigma 只适用于 regular(f)")
    coef, atom = u.terms[0]
    return coef, atom.f


def cmd_embed(args: argparse.Namespace) -> CommandResult:
    """ι(u) 在 K 上的 sup 表与适度性报告，可选检查 ι(f) - σ(f) 的可忽略性"""
    with run_scope(args):
        u = parse_distribution(args.dist)
        K = _compact(args.K)
        psi = _schedule(args)
        grid = default_grid()
        g = special_alg.iota(u, psi, grid=grid)

        moderate = special_alg.moderate_report(g, K, args.alpha_max, config.tolerance.n_cap)
        rows: List[List[Any]] = []
        for alpha in range(args.alpha_max + 1):
            rows += sup_rows(special_alg.sup_net(g, K, alpha).samples(grid), alpha)
        summary = [f"moderate_on(ι({u.describe()}), {K.to_list()}): {moderate.verdict}"]
        summary += [f"  α={p.alpha}: 斜率 {p.slope:.4f} (r²={p.r2:.4f})" for p in moderate.per_alpha]
        results: Dict[str, Any] = {
            "distribution": u.describe(),
            "moderate": moderate.model_dump(mode="json"),
        }
        verdict = moderate.verdict

        if args.check_negligible_vs_sigma:
            coef, f = _regular_part(u)
            sigma = special_alg.scalar_mul(coef, special_alg.sigma(f, grid=grid))
            negligible = special_alg.negligible_report(g - sigma, K, args.alpha_max, config.tolerance.m_max)
            summary.append(f"eq_in_Gs(ι(f), σ(f)): {negligible.verdict}")
            results["negligible_vs_sigma"] = negligible.model_dump(mode="json")
            verdict = negligible.verdict

        report = _report("embed", args, grid, verdict, summary, results, psi)
        files = {}
        if args.out:
            files[args.out] = to_json_text(report)
            files[companion_path(args.out, "sup", ".csv")] = sup_csv(rows)
        return CommandResult(report, _expect_exit(verdict, args.expect), files)


# ============================================================
# demo
# ============================================================

DemoOutcome = Tuple[Verdict, List[str], Dict[str, Any]]


def _point_zero(grid: EpsGrid) -> gnum.GenPoint:
    return gnum.make_point(Net.constant(0.0), CompactSet(-0.5, 0.5), REAL_LINE, grid)


def _demo_hsquared(psi: MollifierNet, grid: EpsGrid) -> DemoOutcome:
    h = special_alg.iota(HEAVISIDE, psi, grid=grid)
    K = CompactSet(-1.0, 1.0)
    eq = special_alg.eq_in_Gs(h * h, h, K, alpha_max=0)
    association = special_alg.association_report(h * h, HEAVISIDE)
    summary = [f"eq_in_Gs: {eq}; associates_to H: {association.verdict}"]
    verdict = verdict_and(
        Verdict.YES if eq == Verdict.NO else Verdict.NO if eq == Verdict.YES else Verdict.INCONCLUSIVE,
        association.verdict,
    )
    return verdict, summary, {"eq_in_Gs": eq.value, "associates_to": association.model_dump(mode="json")}


def _demo_xdelta(psi: MollifierNet, grid: EpsGrid) -> DemoOutcome:
    product = special_alg.sigma(ID, grid=grid) * special_alg.iota(delta(), psi, grid=grid)
    association = special_alg.association_report(product, ZERO_DIST)
    summary = [f"associates_to(x·ι(δ), 0): {association.verdict}"]
    return association.verdict, summary, {"associates_to": association.model_dump(mode="json")}


def _demo_deltasquared(psi: MollifierNet, grid: EpsGrid) -> DemoOutcome:
    d = special_alg.iota(delta(), psi, grid=grid)
    square = d * d
    results: Dict[str, Any] = {}
    summary = []
    verdicts = []
    for name, w in (("0", ZERO_DIST), ("delta", delta()), ("heaviside", HEAVISIDE)):
        report = special_alg.association_report(square, w)
        results[name] = report.model_dump(mode="json")
        summary.append(f"associates_to(ι(δ)², {name}): {report.verdict}")
        verdicts.append(report.verdict)
    # 期望对目录中每个 w 都不关联
    verdict = verdict_and(
        *(Verdict.YES if v == Verdict.NO else Verdict.NO if v == Verdict.YES else Verdict.INCONCLUSIVE for v in verdicts)
    )
    return verdict, summary, results


def _demo_delta_at_0(psi: MollifierNet, grid: EpsGrid) -> DemoOutcome:
    value = special_alg.eval_at(special_alg.iota(delta(), psi, grid=grid), _point_zero(grid))
    samples = value.samples()
    order = estimate_order(samples)
    verdict = gnum.is_moderate_number(value)
    summary = [f"δ(0) = [ψ_ε(0)/ε]：阶 {order.slope:.4f} (r²={order.r2:.4f})，适度: {verdict}"]
    return verdict, summary, {"order": order.model_dump(mode="json")}


def _demo_heaviside_at_0(psi: MollifierNet, grid: EpsGrid) -> DemoOutcome:
    value = special_alg.eval_at(special_alg.iota(HEAVISIDE, psi, grid=grid), _point_zero(grid))
    half = gnum.GenNumber.from_real(0.5, grid)
    verdict = gnum.eq_tilde(value, half)
    per_eps = [[eps, value(eps)] for eps in grid.values]
    summary = [f"H(0) ∼ 1/2: {verdict}"]
    return verdict, summary, {"values": per_eps}


DEMOS: Dict[str, Callable[[MollifierNet, EpsGrid], DemoOutcome]] = {
    "hsquared": _demo_hsquared,
    "xdelta": _demo_xdelta,
    "deltasquared": _demo_deltasquared,
    "heaviside-at-0": _demo_heaviside_at_0,
    "delta-at-0": _demo_delta_at_0,
}


def cmd_demo(args: argparse.Namespace) -> CommandResult:
    """运行命名的演示计算"""
    if args.name not in DEMOS or args.name not in config.demos:
        raise ParameterValidationError(
            "name", f"未知演示 '{args.name}'，可选: {', '.join(config.demos)}"
        )
    with run_scope(args):
        psi = _schedule(args)
        grid = default_grid()
        verdict, summary, results = DEMOS[args.name](psi, grid)
        report = _report("demo", args, grid, verdict, [f"demo {args.name}"] + summary, results, psi)
        files = {args.out: to_json_text(report)} if args.out else {}
        return CommandResult(report, _expect_exit(verdict, args.expect), files)


# ============================================================
# gnum
# ============================================================

_GNUM_ARITY = {
    "leq": 2,
    "lt": 2,
    "eq": 2,
    "approx": 2,
    "inf": 2,
    "sup": 2,
    "invertible": 1,
    "infinitesimal": 1,
    "moderate": 1,
    "ball": 3,
}


def _gnum_query(op: str, xs: List[gnum.GenNumber]) -> Tuple[Verdict, Optional[gnum.GenNumber]]:
    if op == "leq":
        return gnum.leq(xs[0], xs[1]), None
    if op == "lt":
        return gnum.strict_lt(xs[0], xs[1]), None
    if op == "eq":
        return gnum.eq_tilde(xs[0], xs[1]), None
    if op == "approx":
        return gnum.approx(xs[0], xs[1]), None
    if op in ("inf", "sup"):
        value = gnum.inf(xs[0], xs[1]) if op == "inf" else gnum.sup(xs[0], xs[1])
        return gnum.is_moderate_number(value), value
    if op == "invertible":
        return gnum.is_invertible(xs[0]), None
    if op == "infinitesimal":
        return gnum.is_infinitesimal(xs[0]), None
    if op == "moderate":
        return gnum.is_moderate_number(xs[0]), None
    return gnum.sharp_ball_contains(xs[0], xs[1], xs[2]), None


def cmd_gnum(args: argparse.Namespace) -> CommandResult:
    """广义数查询：gnum leq "eps^2" "eps" """
    arity = _GNUM_ARITY.get(args.op)
    if arity is None:
        raise ParameterValidationError("op", f"未知操作 '{args.op}'，可选: {', '.join(_GNUM_ARITY)}")
    if len(args.exprs) != arity:
        raise ParameterValidationError("exprs", f"{args.op} 需要 {arity} 个网表达式")
    with run_scope(args):
        grid = default_grid()
        xs = [gnum.GenNumber(parse_net(text), grid) for text in args.exprs]
        verdict, value = _gnum_query(args.op, xs)
        summary = [f"{args.op}({', '.join(args.exprs)}): {verdict}"]
        results: Dict[str, Any] = {"op": args.op, "operands": list(args.exprs)}
        files = {}
        if value is not None:
            samples = value.samples()
            slope = _slope_of(samples)
            results["order"] = slope
            summary.append(f"结果网的阶: {slope}")
            if args.out:
                files[companion_path(args.out, "samples", ".csv")] = samples_csv(samples)
        report = _report("gnum", args, grid, verdict, summary, results)
        if args.out:
            files[args.out] = to_json_text(report)
        return CommandResult(report, _expect_exit(verdict, args.expect), files)


# ============================================================
# plotcheck
# ============================================================

_CLASS_VERDICT = {
    plots.PlotClass.PLOT_OF_D: Verdict.YES,
    plots.PlotClass.POINTWISE_ONLY: Verdict.NO,
    plots.PlotClass.NOT_POINTWISE: Verdict.NO,
    plots.PlotClass.INCONCLUSIVE: Verdict.INCONCLUSIVE,
}


def cmd_plotcheck(args: argparse.Namespace) -> CommandResult:
    """参数族分类；给出 --K 时检查所有切片支撑都在 K 内"""
    with run_scope(args):
        grid = default_grid()
        family = plots.PlotFamily(
            parse_kernel(args.kernel), _open(args.U), _open(args.omega), args.kernel
        )
        results: Dict[str, Any] = {"kernel": args.kernel, "U": family.U.to_list(), "omega": family.omega.to_list()}
        if args.K:
            K = _compact(args.K)
            verdict = plots.plot_verdict_K(family, K, args.samples)
            summary = [f"plot_verdict_K({args.kernel}, {K.to_list()}): {verdict}"]
            results["K"] = K.to_list()
        else:
            classification = plots.plot_report(family, args.samples)
            verdict = _CLASS_VERDICT[classification.classification]
            summary = [f"plot_verdict({args.kernel}): {classification.classification}"]
            results["classification"] = classification.classification.value
            results["pointwise"] = classification.pointwise.value
            results["local"] = [[u0, v.value] for u0, v in sorted(classification.local.items())]
        report = _report("plotcheck", args, grid, verdict, summary, results)
        files = {args.out: to_json_text(report)} if args.out else {}
        return CommandResult(report, _expect_exit(verdict, args.expect), files)


# ============================================================
# full
# ============================================================


def cmd_full(args: argparse.Namespace) -> CommandResult:
    """完全代数的面板判定：full --embed delta --moderate --N 1"""
    if args.moderate == args.negligible:
        raise ParameterValidationError("mode", "必须且只能指定 --moderate 或 --negligible 之一")
    with run_scope(args, full_grid=True):
        u = parse_distribution(args.embed)
        rep = full_alg.iota_full(u)
        if args.minus_sigma:
            rep = rep - full_alg.sigma_full(parse_smooth(args.minus_sigma))
        K = _compact(args.K)
        grid = full_alg.full_grid()
        panel_size = args.panel_size if args.panel_size is not None else config.runtime.panel_size
        if args.moderate:
            report = full_alg.full_moderate_report(
                rep, K, args.alpha_max, args.N, panel_size, config.runtime.seed, grid
            )
        else:
            report = full_alg.full_negligible_report(
                rep, K, args.alpha_max, args.m, None, panel_size, config.runtime.seed, grid
            )
        summary = [f"{report.operation}({rep.label}, {K.to_list()}): {report.verdict}"]
        results = {"check": report.model_dump(mode="json")}
        command_report = _report("full", args, grid, report.verdict, summary, results)
        files = {args.out: to_json_text(command_report)} if args.out else {}
        return CommandResult(command_report, _expect_exit(report.verdict, args.expect), files)


COMMANDS: Dict[str, Callable[[argparse.Namespace], CommandResult]] = {
    "mollifier": cmd_mollifier,
    "embed": cmd_embed,
    "demo": cmd_demo,
    "gnum": cmd_gnum,
    "plotcheck": cmd_plotcheck,
    "full": cmd_full,
}


def write_outputs(result: CommandResult) -> None:
    """原子写出命令产生的全部文件"""
    for path, text in sorted(result.files.items()):
        write_text(path, text)
