"""
数据模型模块
定义判定结果、阶估计报告以及命令行报告使用的所有数据模型
"""

from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field


class Verdict(str, Enum):
    """三值判定：有限网格上的渐近命题只能给出 是/否/不确定"""

    YES = "Yes"
    NO = "No"
    INCONCLUSIVE = "Inconclusive"

    def __str__(self) -> str:
        return self.value


def verdict_and(*verdicts: Verdict) -> Verdict:
    """合取：No 优先，全部 Yes 才是 Yes，其余为 Inconclusive"""
    if any(v == Verdict.NO for v in verdicts):
        return Verdict.NO
    if all(v == Verdict.YES for v in verdicts):
        return Verdict.YES
    return Verdict.INCONCLUSIVE


class OrderReport(BaseModel):
    """尾部窗口上 log|value| 对 log ε 的最小二乘拟合结果"""

    model_config = ConfigDict(frozen=True, ser_json_inf_nan="constants")

    slope: float = Field(..., description="估计的阶 m（value ~ ε^m）")
    intercept: float = Field(..., description="截距")
    r2: float = Field(..., ge=0.0, le=1.0, description="拟合优度")
    window: int = Field(..., description="使用的尾部点数")
    zeros_dropped: int = Field(default=0, description="被剔除的精确零样本数")


class AlphaSlope(BaseModel):
    """单个导数阶的斜率记录"""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    alpha: int = Field(..., description="导数阶")
    slope: float = Field(..., description="估计斜率")
    r2: float = Field(..., description="拟合优度")
    verdict: Verdict = Field(..., description="该阶的判定")


class VerdictReport(BaseModel):
    """moderate_on / negligible_on 等判定的报告"""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    operation: str = Field(..., description="操作名称")
    K: Optional[List[float]] = Field(None, description="紧集 [a,b]")
    alpha_max: Optional[int] = Field(None, description="最高导数阶")
    m_max: Optional[int] = Field(None, description="可忽略性阶")
    per_alpha: List[AlphaSlope] = Field(default_factory=list, description="逐阶斜率")
    verdict: Verdict = Field(..., description="合取后的判定")
    details: Dict[str, object] = Field(default_factory=dict, description="附加信息")


class MollifierSpec(BaseModel):
    """单个矩消失磨光子 ψ = bump·p 的可重现描述"""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    q: int = Field(..., ge=0, description="消失矩阶")
    coefficients: List[float] = Field(..., description="p 的升幂系数")
    l1_mass: float = Field(..., description="∫|ψ|")


class MollifierNetSpec(BaseModel):
    """分段磨光子网的可重现描述"""

    q_max: int = Field(..., description="最高阶段")
    thresholds: List[float] = Field(..., description="递减阈值 ε_1 > … > ε_J")
    stages: List[MollifierSpec] = Field(..., description="阶段列表，第 j 段 q = j")


class PanelSpec(BaseModel):
    """𝒜_q 测试函数面板的可重现描述"""

    q: int = Field(..., description="认证的矩阶")
    seed: int = Field(..., description="随机种子")
    coefficients: List[List[float]] = Field(..., description="每个成员 p 的升幂系数")


class RunConfig(BaseModel):
    """嵌入每份报告的运行配置"""

    k_min: int = Field(..., description="网格起始指数")
    k_max: int = Field(..., description="网格终止指数")
    q_max: int = Field(..., description="磨光子最高阶段")
    thresholds: List[float] = Field(..., description="磨光子阶段阈值")
    quad_tol: float = Field(..., description="积分容差")
    m_max: int = Field(..., description="可忽略性阶")
    n_cap: int = Field(..., description="适度性阶上限")
    r2_min: float = Field(..., description="拟合优度下限")
    zero_floor: float = Field(..., description="零阈值")
    seed: int = Field(..., description="随机种子")
    out: Optional[str] = Field(None, description="输出路径")


class CommandReport(BaseModel):
    """命令行报告"""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    schema_version: int = Field(default=1, description="报告格式版本")
    version: str = Field(..., description="库版本")
    command: str = Field(..., description="命令名")
    config: RunConfig = Field(..., description="运行配置")
    verdict: Optional[Verdict] = Field(None, description="总判定")
    summary: List[str] = Field(default_factory=list, description="人类可读摘要")
    results: Dict[str, object] = Field(default_factory=dict, description="机器可读结果")


class StageCheck(BaseModel):
    """单个磨光子阶段的性质 (i)(ii)(iv) 检查"""

    stage: int = Field(..., description="阶段序号")
    q: int = Field(..., description="消失矩阶")
    mass: float = Field(..., description="∫ψ")
    max_moment_error: float = Field(..., description="max_{1≤k≤q} |∫x^k ψ|")
    l1_mass: float = Field(..., description="∫|ψ|")
    support_ok: bool = Field(..., description="(i) 支撑在 [-1,1] 内")
    mass_ok: bool = Field(..., description="(ii) ∫ψ = 1")
    moments_ok: bool = Field(..., description="(iv) 矩消失")


class MollifierReport(BaseModel):
    """磨光子网性质验证报告"""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    stages: List[StageCheck] = Field(..., description="逐阶段检查")
    alpha_orders: List[AlphaSlope] = Field(
        default_factory=list, description="(iii) sup|∂^α ψ_ε| 的阶"
    )
    l1_trajectory: List[List[float]] = Field(
        default_factory=list, description="(v) 网格上的 [ε, ∫|ψ_ε|]"
    )
    eta: Optional[float] = Field(None, description="(v) 使用的 η")
    l1_ok: Optional[bool] = Field(None, description="(v) 在采样网格上是否满足 ≤ 1+η")
    passed: bool = Field(..., description="(i)(ii)(iv) 全部通过")
